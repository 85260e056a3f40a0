#include "dhan/dataset.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "dhan/error.hpp"

namespace dhan {

namespace fs = std::filesystem;

const TaskSpec& Dataset::task(std::string_view name) const {
  for (const auto& t : tasks)
    if (t.name == name) return t;
  throw Error(ErrorCode::InvalidArgument, "dataset has no task '" + std::string(name) + "'");
}

namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
}

// Reads a TSV file, skipping blank and '#' lines.
class TsvReader {
 public:
  explicit TsvReader(const fs::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  }

  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      if (line_.empty() || line_[0] == '#') continue;
      fields.clear();
      std::string_view rest(line_);
      for (;;) {
        const auto tab = rest.find('\t');
        fields.push_back(rest.substr(0, tab));
        if (tab == std::string_view::npos) break;
        rest.remove_prefix(tab + 1);
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError,
                path_.filename().string() + ":" + std::to_string(line_no_) + ": " + msg);
  }

  void expect_columns(const std::vector<std::string_view>& f, std::size_t n) const {
    if (f.size() != n)
      fail("expected " + std::to_string(n) + " columns, found " + std::to_string(f.size()));
  }

  template <typename T>
  T number(std::string_view text) const {
    T v{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      fail("malformed number '" + std::string(text) + "'");
    return v;
  }

  template <typename F>
  auto guard(F&& f) const {
    try {
      return f();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) fail(e.what());
      throw;
    }
  }

 private:
  fs::path path_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 0;
};

std::string join_labels(const std::vector<std::uint32_t>& labels) {
  std::string s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(labels[i]);
  }
  return s;
}

}  // namespace

void export_dataset(const Dataset& ds, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
  const BMHGraph& g = ds.graph;

  {
    const auto path = dir / "relations.tsv";
    auto out = open_out(path);
    out << "# name\tklass\tsrc_type\tdst_type\tsymmetric\n";
    for (const auto& r : g.relations())
      out << r.name << '\t' << relation_class_name(r.klass) << '\t' << node_type_name(r.src_type)
          << '\t' << node_type_name(r.dst_type) << '\t' << (r.symmetric ? 1 : 0) << '\n';
    close_out(out, path);
  }
  {
    const auto path = dir / "nodes.tsv";
    auto out = open_out(path);
    out << "# node_id\ttype\tfeatures\n";
    for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
      const NodeType t = NodeType(ti);
      const Matrix& x = g.features(t);
      for (std::size_t i = 0; i < x.rows; ++i) {
        out << i << '\t' << node_type_name(t);
        for (double v : x.row(i)) out << '\t' << format_double(v);
        out << '\n';
      }
    }
    close_out(out, path);
  }
  {
    const auto path = dir / "edges.tsv";
    auto out = open_out(path);
    out << "# relation\tsrc\tdst\n";
    for (const auto& e : g.edges())
      out << g.relation(e.relation).name << '\t' << e.src.id << '\t' << e.dst.id << '\n';
    close_out(out, path);
  }
  {
    const auto tp = dir / "tasks.tsv", lp = dir / "labels.tsv", sp = dir / "splits.tsv",
               gp = dir / "groups.tsv";
    auto tasks = open_out(tp), labels = open_out(lp), splits = open_out(sp), groups = open_out(gp);
    tasks << "# name\tkind\ttarget_type\tnum_classes\n";
    labels << "# node\ttask\tlabels\n";
    splits << "# node\ttask\tsplit\n";
    groups << "# node\ttask\tgroup\n";
    for (const auto& t : ds.tasks) {
      tasks << t.name << '\t' << task_kind_name(t.kind) << '\t' << node_type_name(t.target) << '\t'
            << t.num_classes << '\n';
      for (std::size_t i = 0; i < t.labels.size(); ++i) {
        if (!t.labels[i].empty()) labels << i << '\t' << t.name << '\t' << join_labels(t.labels[i]) << '\n';
        if (t.split[i] != Split::None)
          splits << i << '\t' << t.name << '\t' << split_name(t.split[i]) << '\n';
        if (t.kind == TaskKind::LinkRanking && t.group[i] >= 0)
          groups << i << '\t' << t.name << '\t' << t.group[i] << '\n';
      }
    }
    close_out(tasks, tp);
    close_out(labels, lp);
    close_out(splits, sp);
    close_out(groups, gp);
  }
}

Dataset import_dataset(const fs::path& dir) {
  std::vector<std::string_view> f;

  std::vector<RelationSpec> rels;
  std::map<std::string, std::uint32_t, std::less<>> rel_ids;
  {
    TsvReader r(dir / "relations.tsv");
    while (r.next(f)) {
      r.expect_columns(f, 5);
      RelationSpec spec;
      spec.id = static_cast<std::uint32_t>(rels.size());
      spec.name = std::string(f[0]);
      spec.klass = r.guard([&] { return parse_relation_class(f[1]); });
      spec.src_type = r.guard([&] { return parse_node_type(f[2]); });
      spec.dst_type = r.guard([&] { return parse_node_type(f[3]); });
      const int sym = r.number<int>(f[4]);
      if (sym != 0 && sym != 1) r.fail("symmetric flag must be 0 or 1");
      spec.symmetric = sym == 1;
      if (!rel_ids.emplace(spec.name, spec.id).second) r.fail("duplicate relation " + spec.name);
      rels.push_back(std::move(spec));
    }
  }

  std::array<std::vector<std::vector<double>>, kNumNodeTypes> rows;
  std::size_t width = 0;
  bool width_set = false;
  {
    TsvReader r(dir / "nodes.tsv");
    while (r.next(f)) {
      if (f.size() < 2) r.fail("expected node_id and type columns");
      const auto id = r.number<std::size_t>(f[0]);
      const NodeType t = r.guard([&] { return parse_node_type(f[1]); });
      auto& list = rows[type_index(t)];
      if (id != list.size()) r.fail("node ids must be dense and ascending per type");
      if (!width_set) {
        width = f.size() - 2;
        width_set = true;
      } else if (f.size() - 2 != width) {
        r.fail("feature width differs from earlier rows");
      }
      std::vector<double> x;
      for (std::size_t j = 2; j < f.size(); ++j) x.push_back(r.number<double>(f[j]));
      list.push_back(std::move(x));
    }
  }
  std::array<std::size_t, kNumNodeTypes> counts{};
  std::array<Matrix, kNumNodeTypes> features;
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
    counts[ti] = rows[ti].size();
    features[ti] = Matrix(counts[ti], width);
    for (std::size_t i = 0; i < counts[ti]; ++i)
      std::copy(rows[ti][i].begin(), rows[ti][i].end(), features[ti].row(i).begin());
  }

  std::vector<Edge> edges;
  {
    TsvReader r(dir / "edges.tsv");
    while (r.next(f)) {
      r.expect_columns(f, 3);
      const auto it = rel_ids.find(f[0]);
      if (it == rel_ids.end()) r.fail("unknown relation '" + std::string(f[0]) + "'");
      const auto& spec = rels[it->second];
      edges.push_back({spec.id, {spec.src_type, r.number<std::uint32_t>(f[1])},
                       {spec.dst_type, r.number<std::uint32_t>(f[2])}});
    }
  }

  Dataset ds;
  ds.graph = build_graph(counts, std::move(features), std::move(rels), edges);

  std::map<std::string, std::size_t, std::less<>> task_ids;
  {
    TsvReader r(dir / "tasks.tsv");
    while (r.next(f)) {
      r.expect_columns(f, 4);
      TaskSpec t;
      t.name = std::string(f[0]);
      t.kind = r.guard([&] { return parse_task_kind(f[1]); });
      t.target = r.guard([&] { return parse_node_type(f[2]); });
      t.num_classes = r.number<std::size_t>(f[3]);
      const std::size_t n = ds.graph.num_nodes(t.target);
      t.labels.resize(n);
      t.split.assign(n, Split::None);
      if (t.kind == TaskKind::LinkRanking) t.group.assign(n, -1);
      if (!task_ids.emplace(t.name, ds.tasks.size()).second) r.fail("duplicate task " + t.name);
      ds.tasks.push_back(std::move(t));
    }
  }
  auto lookup = [&](TsvReader& r, std::string_view name, std::size_t node) -> TaskSpec& {
    const auto it = task_ids.find(name);
    if (it == task_ids.end()) r.fail("unknown task '" + std::string(name) + "'");
    TaskSpec& t = ds.tasks[it->second];
    if (node >= t.labels.size()) r.fail("node " + std::to_string(node) + " out of range");
    return t;
  };
  {
    TsvReader r(dir / "labels.tsv");
    while (r.next(f)) {
      r.expect_columns(f, 3);
      const auto node = r.number<std::size_t>(f[0]);
      TaskSpec& t = lookup(r, f[1], node);
      std::string_view rest = f[2];
      std::vector<std::uint32_t> labels;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        labels.push_back(r.number<std::uint32_t>(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      t.labels[node] = std::move(labels);
    }
  }
  {
    TsvReader r(dir / "splits.tsv");
    while (r.next(f)) {
      r.expect_columns(f, 3);
      const auto node = r.number<std::size_t>(f[0]);
      TaskSpec& t = lookup(r, f[1], node);
      t.split[node] = r.guard([&] { return parse_split(f[2]); });
    }
  }
  if (fs::exists(dir / "groups.tsv")) {
    TsvReader r(dir / "groups.tsv");
    while (r.next(f)) {
      r.expect_columns(f, 3);
      const auto node = r.number<std::size_t>(f[0]);
      TaskSpec& t = lookup(r, f[1], node);
      if (t.kind != TaskKind::LinkRanking) r.fail("groups only apply to link tasks");
      t.group[node] = r.number<std::int64_t>(f[2]);
    }
  }
  for (const auto& t : ds.tasks) t.validate(ds.graph);
  return ds;
}

}  // namespace dhan
