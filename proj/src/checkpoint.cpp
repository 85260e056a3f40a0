#include "dhan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "dhan/error.hpp"
#include "json.hpp"

namespace dhan {

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

void save_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> tensors) {
  nlohmann::json header;
  header["format"] = "dhan-checkpoint";
  header["version"] = 1;
  header["tensors"] = nlohmann::json::array();
  for (const auto& t : tensors)
    header["tensors"].push_back({{"name", t.name}, {"shape", {t.tensor.rows(), t.tensor.cols()}}});
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write checkpoint " + path.string());
  const std::string text = header.dump();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.put('\n');
  for (const auto& t : tensors)
    out.write(reinterpret_cast<const char*>(t.tensor.data().data()),
              static_cast<std::streamsize>(t.tensor.size() * sizeof(double)));
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing checkpoint " + path.string());
}

std::vector<std::pair<std::string, Matrix>> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open checkpoint " + path.string());
  std::string line;
  std::getline(in, line);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "checkpoint header: " + std::string(e.what()));
  }
  if (header.value("format", "") != "dhan-checkpoint")
    throw Error(ErrorCode::ParseError, "not a dhan checkpoint: " + path.string());
  std::vector<std::pair<std::string, Matrix>> out;
  for (const auto& entry : header.at("tensors")) {
    const std::size_t r = entry.at("shape").at(0), c = entry.at("shape").at(1);
    Matrix m(r, c);
    in.read(reinterpret_cast<char*>(m.values.data()),
            static_cast<std::streamsize>(m.values.size() * sizeof(double)));
    if (!in) throw Error(ErrorCode::ParseError, "checkpoint truncated: " + path.string());
    out.emplace_back(entry.at("name").get<std::string>(), std::move(m));
  }
  return out;
}

void load_checkpoint(const std::filesystem::path& path, std::span<NamedTensor> tensors) {
  auto stored = read_checkpoint(path);
  if (stored.size() != tensors.size())
    throw Error(ErrorCode::ConfigShapeMismatch,
                "checkpoint holds " + std::to_string(stored.size()) + " tensors, model expects " +
                    std::to_string(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto& [name, m] = stored[i];
    auto& t = tensors[i];
    if (name != t.name || m.rows != t.tensor.rows() || m.cols != t.tensor.cols())
      throw Error(ErrorCode::ConfigShapeMismatch,
                  "checkpoint tensor '" + name + "' does not match model tensor '" + t.name + "'");
    std::memcpy(t.tensor.mutable_data().data(), m.values.data(), m.values.size() * sizeof(double));
  }
}

}  // namespace dhan
