#include "dhan/export.hpp"

#include <charconv>
#include <fstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "dhan/error.hpp"

namespace dhan {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const fs::path& path) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
}

nlohmann::ordered_json matrix_json(const Matrix& m) {
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.rows; ++i)
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  return rows;
}

}  // namespace

void write_attention(const ForwardResult& fwd, const fs::path& dir) {
  const auto tsv = dir / "attention.tsv";
  auto out = open_out(tsv);
  out << "# layer\tstage\ttarget\trelation\treverse\tnode\tneighbor\talpha\n";
  for (const auto& rec : fwd.attention) {
    const CsrAdjacency& adj = *rec.adjacency;
    for (std::size_t i = 0; i < adj.num_rows(); ++i)
      for (std::uint32_t e = adj.row_offsets[i]; e < adj.row_offsets[i + 1]; ++e)
        out << rec.layer << '\t' << rec.stage << '\t' << node_type_name(rec.target) << '\t'
            << rec.relation << '\t' << (rec.reverse ? 1 : 0) << '\t' << i << '\t'
            << adj.col_indices[e] << '\t' << fmt(rec.alpha[e]) << '\n';
  }
  finish(out, tsv);

  auto records = nlohmann::ordered_json::array();
  for (const auto& f : fwd.fusion) {
    nlohmann::ordered_json j;
    j["layer"] = f.layer;
    j["stage"] = f.stage;
    j["target"] = node_type_name(f.target);
    j["relations"] = f.relations;
    if (!f.global_weights.empty()) j["global_weights"] = f.global_weights;
    if (f.smooth >= 0.0) j["smooth"] = f.smooth;
    if (f.local_weights.rows > 0) j["local_weights"] = matrix_json(f.local_weights);
    j["coefficients"] = matrix_json(f.coefficients);
    records.push_back(std::move(j));
  }
  const auto json_path = dir / "fusion.json";
  auto jout = open_out(json_path);
  jout << records.dump() << '\n';
  finish(jout, json_path);
}

Matrix pca2(const Matrix& x) {
  if (x.rows < 2 || x.cols < 2)
    throw Error(ErrorCode::DegenerateData, "PCA needs at least two rows and two columns");
  Eigen::MatrixXd m(x.rows, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) m(i, j) = x(i, j);
  m.rowwise() -= m.colwise().mean();
  const Eigen::MatrixXd cov = (m.transpose() * m) / static_cast<double>(x.rows - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::DegenerateData, "PCA eigen decomposition failed");
  // Eigenvalues come in ascending order.
  const auto n = cov.cols();
  Eigen::MatrixXd basis(n, 2);
  for (int k = 0; k < 2; ++k) {
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1 - k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    basis.col(k) = v;
  }
  const Eigen::MatrixXd proj = m * basis;
  Matrix out(x.rows, 2);
  for (std::size_t i = 0; i < x.rows; ++i) {
    out(i, 0) = proj(i, 0);
    out(i, 1) = proj(i, 1);
  }
  return out;
}

void write_embeddings(const TypeEmbeddings& emb, const fs::path& dir) {
  const std::size_t h = emb[0].cols();
  Matrix all(emb[0].rows() + emb[1].rows(), h);
  const auto tsv = dir / "embeddings.tsv";
  auto out = open_out(tsv);
  out << "# node_id\ttype\tembedding\n";
  std::size_t r = 0;
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti)
    for (std::size_t i = 0; i < emb[ti].rows(); ++i, ++r) {
      out << i << '\t' << node_type_name(NodeType(ti));
      for (std::size_t j = 0; j < h; ++j) {
        all(r, j) = emb[ti](i, j);
        out << '\t' << fmt(all(r, j));
      }
      out << '\n';
    }
  finish(out, tsv);

  const Matrix proj = pca2(all);
  const auto pca_path = dir / "pca.tsv";
  auto pout = open_out(pca_path);
  pout << "# node_id\ttype\tpc1\tpc2\n";
  r = 0;
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti)
    for (std::size_t i = 0; i < emb[ti].rows(); ++i, ++r)
      pout << i << '\t' << node_type_name(NodeType(ti)) << '\t' << fmt(proj(r, 0)) << '\t'
           << fmt(proj(r, 1)) << '\n';
  finish(pout, pca_path);
}

}  // namespace dhan
