#include "dhan/synth.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "dhan/error.hpp"
#include "dhan/rng.hpp"

namespace dhan {

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InfeasibleConfig, msg); };
  if (n_papers == 0 || n_authors == 0 || feature_dim == 0) fail("counts must be positive");
  if (n_venues < 2) fail("at least two venues are required");
  if (n_venues > n_papers) fail("more venues than papers");
  if (n_venues > n_authors) fail("more venues than authors");
  if (n_fields_l1 < 2 || n_fields_l2 < n_fields_l1) fail("need 2 <= n_fields_l1 <= n_fields_l2");
  if (min_authors_per_paper == 0 || min_authors_per_paper > max_authors_per_paper ||
      max_authors_per_paper > n_authors)
    fail("invalid authors-per-paper range");
  if (train_years == 0 || val_years == 0 || train_years + val_years >= n_years)
    fail("year thresholds must leave nonempty train, val and test periods");
  if (name_group_size < 2) fail("name groups need at least two authors");
  for (double p : {cite_in, cite_out, same_venue_in, same_venue_out, same_field_in,
                   same_field_out, colleague_in, colleague_out, noise_relation_p,
                   author_affinity, primary_field_affinity, secondary_field_p,
                   ad_author_fraction, ad_holdout})
    if (!(p >= 0.0 && p <= 1.0)) fail("probabilities must lie in [0, 1]");
  if (!(noise >= 0.0) || !(venue_signal >= 0.0) || !(field_signal >= 0.0))
    fail("signal and noise scales must be non-negative");
}

namespace {

using Pair = std::pair<std::uint32_t, std::uint32_t>;

// Balanced assignment i mod k, shuffled.
std::vector<std::uint32_t> balanced_labels(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::uint32_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<std::uint32_t>(i % k);
  for (std::size_t i = n; i > 1; --i) std::swap(out[i - 1], out[uniform_index(rng, i)]);
  return out;
}

bool coin(Rng& rng, double p) { return p >= 1.0 || (p > 0.0 && uniform_unit(rng) < p); }

// Unordered pairs i < j with probability p_in inside a group and p_out across.
std::vector<Pair> planted_pairs(std::span<const std::uint32_t> group, double p_in, double p_out,
                                Rng& rng) {
  std::vector<Pair> out;
  const auto n = static_cast<std::uint32_t>(group.size());
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (coin(rng, group[i] == group[j] ? p_in : p_out)) out.emplace_back(i, j);
  return out;
}

Matrix prototypes(std::size_t k, std::size_t d, Rng& rng) {
  Matrix m(k, d);
  for (auto& v : m.values) v = standard_normal(rng);
  return m;
}

Split split_of(std::size_t year, const SynthConfig& c) {
  if (year < c.train_years) return Split::Train;
  if (year < c.train_years + c.val_years) return Split::Val;
  return Split::Test;
}

}  // namespace

Dataset generate(const SynthConfig& c) {
  c.validate();
  Rng rng(derive_seed(c.seed, seed_stream::kSynth));
  const std::size_t np = c.n_papers, na = c.n_authors, d = c.feature_dim;

  // Papers: venue, fields, year.
  const auto venue = balanced_labels(np, c.n_venues, rng);
  std::vector<std::vector<std::uint32_t>> fields_l2(np);
  std::vector<std::uint32_t> primary_field(np);
  std::vector<std::uint32_t> preferred;
  for (std::size_t p = 0; p < np; ++p) {
    preferred.clear();
    for (std::uint32_t f = 0; f < c.n_fields_l2; ++f)
      if (f % c.n_venues == venue[p]) preferred.push_back(f);
    std::uint32_t f0;
    if (!preferred.empty() && coin(rng, c.primary_field_affinity))
      f0 = preferred[uniform_index(rng, preferred.size())];
    else
      f0 = static_cast<std::uint32_t>(uniform_index(rng, c.n_fields_l2));
    primary_field[p] = f0;
    fields_l2[p].push_back(f0);
    if (coin(rng, c.secondary_field_p)) {
      const auto f1 = static_cast<std::uint32_t>(uniform_index(rng, c.n_fields_l2));
      if (f1 != f0) fields_l2[p].push_back(f1);
    }
    std::sort(fields_l2[p].begin(), fields_l2[p].end());
  }
  auto l1_of = [&](std::uint32_t f) {
    return static_cast<std::uint32_t>(f * c.n_fields_l1 / c.n_fields_l2);
  };
  std::vector<std::size_t> year(np);
  for (auto& y : year) y = uniform_index(rng, c.n_years);

  const Matrix venue_proto = prototypes(c.n_venues, d, rng);
  const Matrix field_proto = prototypes(c.n_fields_l2, d, rng);
  Matrix paper_x(np, d);
  for (std::size_t p = 0; p < np; ++p)
    for (std::size_t j = 0; j < d; ++j)
      paper_x(p, j) = c.venue_signal * venue_proto(venue[p], j) +
                      c.field_signal * field_proto(primary_field[p], j) +
                      c.noise * standard_normal(rng);

  // Authors: communities aligned with venues; authorship.
  const auto community = balanced_labels(na, c.n_venues, rng);
  std::vector<std::vector<std::uint32_t>> members(c.n_venues);
  for (std::uint32_t a = 0; a < na; ++a) members[community[a]].push_back(a);
  std::vector<std::vector<std::uint32_t>> paper_authors(np);  // first is the important author
  for (std::size_t p = 0; p < np; ++p) {
    const std::size_t m = c.min_authors_per_paper +
                          uniform_index(rng, c.max_authors_per_paper - c.min_authors_per_paper + 1);
    auto& list = paper_authors[p];
    while (list.size() < m) {
      const auto& pool = members[venue[p]];
      std::uint32_t a;
      if (!pool.empty() && coin(rng, c.author_affinity))
        a = pool[uniform_index(rng, pool.size())];
      else
        a = static_cast<std::uint32_t>(uniform_index(rng, na));
      if (std::find(list.begin(), list.end(), a) == list.end()) list.push_back(a);
    }
  }

  // Author disambiguation: name groups mixing communities, withheld links.
  std::vector<std::vector<std::uint32_t>> author_papers(na);
  for (std::uint32_t p = 0; p < np; ++p)
    for (auto a : paper_authors[p]) author_papers[a].push_back(p);
  std::vector<std::vector<std::uint32_t>> eligible(c.n_venues);
  for (std::uint32_t a = 0; a < na; ++a)
    if (author_papers[a].size() >= 2) eligible[community[a]].push_back(a);
  std::vector<std::uint32_t> interleaved;
  for (auto& bucket : eligible) {
    for (std::size_t i = bucket.size(); i > 1; --i)
      std::swap(bucket[i - 1], bucket[uniform_index(rng, i)]);
    bucket.resize(static_cast<std::size_t>(static_cast<double>(bucket.size()) *
                                           c.ad_author_fraction));
  }
  for (std::size_t r = 0;; ++r) {
    bool any = false;
    for (const auto& bucket : eligible)
      if (r < bucket.size()) {
        interleaved.push_back(bucket[r]);
        any = true;
      }
    if (!any) break;
  }
  const std::size_t n_groups = interleaved.size() / c.name_group_size;
  std::vector<std::int64_t> group(na, -1);
  std::vector<std::vector<std::uint32_t>> withheld(na);
  std::set<Pair> removed;  // (author, paper)
  for (std::size_t g = 0; g < n_groups; ++g)
    for (std::size_t s = 0; s < c.name_group_size; ++s) {
      const auto a = interleaved[g * c.name_group_size + s];
      group[a] = static_cast<std::int64_t>(g);
      const auto& papers = author_papers[a];
      for (auto p : papers)
        if (coin(rng, c.ad_holdout)) withheld[a].push_back(p);
      if (withheld[a].empty()) withheld[a].push_back(papers[uniform_index(rng, papers.size())]);
      if (withheld[a].size() == papers.size()) withheld[a].erase(withheld[a].begin());
      for (auto p : withheld[a]) removed.emplace(a, p);
    }

  // Relations.
  std::vector<RelationSpec> rels;
  auto add_rel = [&](RelationClass k, NodeType s, NodeType t, std::string name, bool sym) {
    rels.push_back({static_cast<std::uint32_t>(rels.size()), k, s, t, std::move(name), sym});
    return rels.back().id;
  };
  const NodeType A = NodeType::A, B = NodeType::B;
  const auto r_colleague = add_rel(RelationClass::IntraA, A, A, "colleague", true);
  const auto r_apa1 = add_rel(RelationClass::IntraA, A, A, "apa1", true);
  const auto r_apa2 = add_rel(RelationClass::IntraA, A, A, "apa2", true);
  const auto r_cite = add_rel(RelationClass::IntraB, B, B, "cite", false);
  const auto r_rev_cite = add_rel(RelationClass::IntraB, B, B, "rev_cite", false);
  const auto r_venue = add_rel(RelationClass::IntraB, B, B, "same_venue", true);
  const auto r_field = add_rel(RelationClass::IntraB, B, B, "same_field", true);
  std::uint32_t r_pap1 = 0, r_pap2 = 0;
  if (c.paper_meta_paths) {
    r_pap1 = add_rel(RelationClass::IntraB, B, B, "pap1", true);
    r_pap2 = add_rel(RelationClass::IntraB, B, B, "pap2", true);
  }
  std::vector<std::uint32_t> r_noise;
  for (std::size_t k = 0; k < c.noise_relations; ++k)
    r_noise.push_back(add_rel(RelationClass::IntraB, B, B, "random" + std::to_string(k), true));
  const auto r_important = add_rel(RelationClass::Inter, A, B, "important", false);
  const auto r_ordinary = add_rel(RelationClass::Inter, A, B, "ordinary", false);

  std::vector<Edge> edges;
  auto add_edge = [&](std::uint32_t r, NodeType st, std::uint32_t s, NodeType dt, std::uint32_t t) {
    edges.push_back({r, {st, s}, {dt, t}});
  };

  for (auto [i, j] : planted_pairs(community, c.colleague_in, c.colleague_out, rng))
    add_edge(r_colleague, A, i, A, j);
  // Citations point from the later paper to the earlier one.
  std::vector<Pair> cites;
  for (auto [i, j] : planted_pairs(venue, c.cite_in, c.cite_out, rng)) {
    const bool i_later = year[i] > year[j] || (year[i] == year[j] && i > j);
    cites.push_back(i_later ? Pair{i, j} : Pair{j, i});
  }
  for (auto [s, t] : cites) {
    add_edge(r_cite, B, s, B, t);
    add_edge(r_rev_cite, B, t, B, s);
  }
  for (auto [i, j] : planted_pairs(venue, c.same_venue_in, c.same_venue_out, rng))
    add_edge(r_venue, B, i, B, j);
  for (auto [i, j] : planted_pairs(primary_field, c.same_field_in, c.same_field_out, rng))
    add_edge(r_field, B, i, B, j);
  const std::vector<std::uint32_t> one_group(np, 0);
  for (auto r : r_noise)
    for (auto [i, j] : planted_pairs(one_group, c.noise_relation_p, 0.0, rng))
      add_edge(r, B, i, B, j);

  // Visible authorship and the meta-path relations derived from it.
  std::vector<std::vector<std::uint32_t>> visible_authors(np);
  for (std::uint32_t p = 0; p < np; ++p)
    for (std::size_t k = 0; k < paper_authors[p].size(); ++k) {
      const auto a = paper_authors[p][k];
      if (removed.count({a, p})) continue;
      add_edge(k == 0 ? r_important : r_ordinary, A, a, B, p);
      visible_authors[p].push_back(a);
    }
  std::set<Pair> apa1, apa2, pap1, pap2;
  auto ordered = [](std::uint32_t x, std::uint32_t y) { return x < y ? Pair{x, y} : Pair{y, x}; };
  for (std::uint32_t p = 0; p < np; ++p)
    for (auto x : visible_authors[p])
      for (auto y : visible_authors[p])
        if (x < y) apa1.insert({x, y});
  for (auto [s, t] : cites)
    for (auto x : visible_authors[s])
      for (auto y : visible_authors[t])
        if (x != y) apa2.insert(ordered(x, y));
  for (auto [x, y] : apa1) add_edge(r_apa1, A, x, A, y);
  for (auto [x, y] : apa2) add_edge(r_apa2, A, x, A, y);
  if (c.paper_meta_paths) {
    std::vector<std::vector<std::uint32_t>> visible_papers(na);
    for (std::uint32_t p = 0; p < np; ++p)
      for (auto a : visible_authors[p]) visible_papers[a].push_back(p);
    for (const auto& ps : visible_papers)
      for (auto x : ps)
        for (auto y : ps)
          if (x < y) pap1.insert({x, y});
    std::vector<std::set<std::uint32_t>> colleagues(na);
    for (const auto& e : edges)
      if (e.relation == r_colleague) {
        colleagues[e.src.id].insert(e.dst.id);
        colleagues[e.dst.id].insert(e.src.id);
      }
    for (std::uint32_t a = 0; a < na; ++a)
      for (auto b : colleagues[a])
        if (a < b)
          for (auto x : visible_papers[a])
            for (auto y : visible_papers[b])
              if (x != y) pap2.insert(ordered(x, y));
    for (auto [x, y] : pap1) add_edge(r_pap1, B, x, B, y);
    for (auto [x, y] : pap2) add_edge(r_pap2, B, x, B, y);
  }

  // Author features start at zero and are filled from their visible papers.
  Dataset ds;
  ds.graph = build_graph({na, np}, {Matrix(na, d), paper_x}, rels, edges);
  const std::array<std::uint32_t, 2> inter{r_important, r_ordinary};
  ds.graph = ds.graph.with_features(A, init_author_features(ds.graph, inter).features);

  std::vector<Split> paper_split(np);
  for (std::size_t p = 0; p < np; ++p) paper_split[p] = split_of(year[p], c);

  TaskSpec pv{"pv", TaskKind::SingleLabel, B, c.n_venues, {}, paper_split, {}};
  TaskSpec pf1{"pf_l1", TaskKind::MultiLabel, B, c.n_fields_l1, {}, paper_split, {}};
  TaskSpec pf2{"pf_l2", TaskKind::MultiLabel, B, c.n_fields_l2, {}, paper_split, {}};
  for (std::size_t p = 0; p < np; ++p) {
    pv.labels.push_back({venue[p]});
    pf2.labels.push_back(fields_l2[p]);
    std::set<std::uint32_t> l1;
    for (auto f : fields_l2[p]) l1.insert(l1_of(f));
    pf1.labels.emplace_back(l1.begin(), l1.end());
  }

  TaskSpec ad{"ad", TaskKind::LinkRanking, A, 0, {}, std::vector<Split>(na, Split::None), group};
  ad.labels.resize(na);
  for (std::uint32_t a = 0; a < na; ++a) {
    if (group[a] < 0) continue;
    auto ps = withheld[a];
    std::sort(ps.begin(), ps.end());
    std::size_t last = 0;
    for (auto p : ps) last = std::max(last, year[p]);
    ad.labels[a] = std::move(ps);
    ad.split[a] = split_of(last, c);
  }

  ds.tasks = {std::move(pv), std::move(pf1), std::move(pf2), std::move(ad)};
  for (const auto& t : ds.tasks) t.validate(ds.graph);
  return ds;
}

}  // namespace dhan
