#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace oracle {

using namespace relscope;

namespace {

std::vector<int> sorted_labels(const AnnotatorRecord& r) {
  std::vector<int> v;
  for (const auto& l : r.labels) v.push_back(l.relation.index);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::optional<Agreement> agreement(std::span<const AnnotatorRecord> records) {
  std::vector<std::vector<int>> sets;
  for (const auto& r : records)
    if (!r.labels.empty()) sets.push_back(sorted_labels(r));
  if (sets.empty()) return std::nullopt;
  const std::size_t n = sets.size();
  Agreement best;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) members.push_back(i);
    bool same = true;
    for (auto i : members) same = same && sets[i] == sets[members.front()];
    if (!same) continue;
    const int size = static_cast<int>(members.size());
    const auto& s = sets[members.front()];
    if (size > best.agr || (size == best.agr && s < best.majority)) {
      best.agr = size;
      best.majority = s;
    }
  }
  return best;
}

std::vector<AnnotatorRecord> random_table(Rng& rng, const std::string& pair_id, int max_annotators,
                                          int n_relations, double skip_rate) {
  std::vector<AnnotatorRecord> out;
  const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_annotators)));
  for (int a = 0; a < n; ++a) {
    AnnotatorRecord r{"a" + std::to_string(a), pair_id, {}};
    if (!rng.bernoulli(skip_rate)) {
      std::vector<int> pool(static_cast<std::size_t>(n_relations));
      for (int i = 0; i < n_relations; ++i) pool[static_cast<std::size_t>(i)] = i;
      rng.shuffle(std::span<int>(pool));
      const int k = 1 + static_cast<int>(rng.below(std::min(3, n_relations)));
      for (int i = 0; i < k; ++i)
        r.labels.push_back({RelationId{static_cast<std::uint8_t>(pool[static_cast<std::size_t>(i)])},
                            rng.bernoulli(0.1)});
    }
    out.push_back(std::move(r));
  }
  return out;
}

Marginals recount(std::span<const AnnotatorRecord> records) {
  std::map<std::string, std::vector<AnnotatorRecord>> by_pair;
  for (const auto& r : records) by_pair[r.pair_id].push_back(r);
  Marginals m;
  double labelled = 0, marks = 0, maybes = 0;
  for (const auto& r : records) {
    if (r.labels.empty()) continue;
    ++labelled;
    m.labels_per_record[static_cast<int>(r.labels.size())] += 1;
    for (const auto& l : r.labels) {
      ++marks;
      if (l.maybe) ++maybes;
    }
  }
  for (auto& [k, v] : m.labels_per_record) v /= labelled;
  m.maybe_of_marks = marks ? maybes / marks : 0.0;

  double with_labels = 0;
  const double all_pairs = static_cast<double>(by_pair.size());
  std::map<int, double> agr_count;
  for (const auto& [id, recs] : by_pair) {
    std::set<int> distinct;
    for (const auto& r : recs)
      for (const auto& l : r.labels) distinct.insert(l.relation.index);
    if (!distinct.empty()) {
      ++with_labels;
      m.relations_per_pair[static_cast<int>(distinct.size())] += 1;
    }
    auto a = agreement(recs);
    if (a) agr_count[a->agr] += 1;
  }
  for (auto& [k, v] : m.relations_per_pair) v /= with_labels;
  for (const auto& [k, v] : agr_count) m.agr[k] = v / all_pairs;
  for (int t = 1; t <= 5; ++t) {
    double kept = 0;
    for (const auto& [k, v] : agr_count)
      if (k >= t) kept += v;
    m.retained[t] = kept / all_pairs;
  }
  return m;
}

namespace {

std::set<std::string> as_set(std::span<const std::string> v) { return {v.begin(), v.end()}; }

bool disjoint(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a)
    if (b.count(x)) return false;
  return true;
}

}  // namespace

std::vector<std::string> check_ac(const SplitManifest& m, std::span<const GroundTruth> truth,
                                  const std::map<std::string, std::string>& albums,
                                  std::span<const std::string> preserved_test, std::size_t n_val_albums) {
  std::vector<std::string> bad;
  const auto tr = as_set(m.train), va = as_set(m.val), te = as_set(m.test);
  if (tr.size() != m.train.size() || va.size() != m.val.size() || te.size() != m.test.size())
    bad.push_back(m.name + ": duplicate id within a list");
  if (!disjoint(tr, va) || !disjoint(va, te) || !disjoint(tr, te)) bad.push_back(m.name + ": lists overlap");
  if (!std::equal(m.test.begin(), m.test.end(), preserved_test.begin(), preserved_test.end()))
    bad.push_back(m.name + ": test differs from the preserved list");
  std::set<std::string> all;
  for (const auto& g : truth) all.insert(g.pair_id);
  std::set<std::string> covered = tr;
  covered.insert(va.begin(), va.end());
  covered.insert(te.begin(), te.end());
  if (covered != all) bad.push_back(m.name + ": train+val+test is not the ground truth");
  std::set<std::string> train_albums, val_albums;
  for (const auto& id : tr) train_albums.insert(albums.at(id));
  for (const auto& id : va) val_albums.insert(albums.at(id));
  if (val_albums.size() != n_val_albums)
    bad.push_back(m.name + ": " + std::to_string(val_albums.size()) + " validation albums");
  for (const auto& a : val_albums)
    if (train_albums.count(a)) bad.push_back(m.name + ": album " + a + " in train and val");
  return bad;
}

std::vector<std::string> check_sr(std::span<const SrSplit> splits, std::span<const GroundTruth> truth,
                                  const PairTable& pairs, const Taxonomy& taxonomy) {
  std::vector<std::string> bad;
  std::set<int> sole;
  for (std::size_t d = 0; d < taxonomy.domain_count(); ++d) {
    auto rs = taxonomy.relations_of(DomainId{static_cast<std::uint8_t>(d)});
    if (rs.size() == 1) sole.insert(rs.front().index);
  }
  if (splits.size() != taxonomy.relation_count() - sole.size())
    bad.push_back("expected " + std::to_string(taxonomy.relation_count() - sole.size()) + " manifests, got " +
                  std::to_string(splits.size()));
  std::set<int> held;
  for (const auto& s : splits) {
    const auto& m = s.manifest;
    if (!m.held_out) {
      bad.push_back(m.name + ": no held-out relation");
      continue;
    }
    const int r = m.held_out->index;
    if (sole.count(r)) bad.push_back(m.name + ": holds out a relation alone in its domain");
    if (!held.insert(r).second) bad.push_back(m.name + ": relation held out twice");
    const auto tr = as_set(m.train), va = as_set(m.val), te = as_set(m.test), di = as_set(m.discarded);
    if (!disjoint(tr, va) || !disjoint(va, te) || !disjoint(tr, te) || !disjoint(di, tr) ||
        !disjoint(di, va) || !disjoint(di, te))
      bad.push_back(m.name + ": lists overlap");
    for (const auto& g : truth) {
      std::vector<int> labels;
      for (std::size_t i = 0; i < taxonomy.relation_count(); ++i)
        if (g.labels.contains(RelationId{static_cast<std::uint8_t>(i)})) labels.push_back(static_cast<int>(i));
      const bool has_r = std::count(labels.begin(), labels.end(), r) > 0;
      bool has_sole = false;
      for (int l : labels) has_sole = has_sole || sole.count(l) > 0;
      if (has_r && !te.count(g.pair_id)) bad.push_back(m.name + ": " + g.pair_id + " carries the held-out relation outside test");
      if (!has_r && te.count(g.pair_id)) bad.push_back(m.name + ": " + g.pair_id + " in test without the held-out relation");
      if (!has_r && has_sole && !tr.count(g.pair_id))
        bad.push_back(m.name + ": " + g.pair_id + " (sole relation) not in train");
      if (!has_r && !tr.count(g.pair_id) && !va.count(g.pair_id) && !di.count(g.pair_id))
        bad.push_back(m.name + ": " + g.pair_id + " unaccounted for");
    }
    std::set<std::string> train_ids, val_ids;
    for (const auto& id : m.train) {
      const auto& p = pairs.at(id);
      train_ids.insert(p.a.identity_id);
      train_ids.insert(p.b.identity_id);
    }
    for (const auto& id : m.val) {
      const auto& p = pairs.at(id);
      val_ids.insert(p.a.identity_id);
      val_ids.insert(p.b.identity_id);
    }
    for (const auto& i : val_ids)
      if (train_ids.count(i)) bad.push_back(m.name + ": identity " + i + " in train and val");
    if (!s.fold_identity_counts.empty()) {
      auto [lo, hi] = std::minmax_element(s.fold_identity_counts.begin(), s.fold_identity_counts.end());
      if (*hi - *lo > 1) bad.push_back(m.name + ": fold identity counts differ by " + std::to_string(*hi - *lo));
    }
  }
  return bad;
}

double grid_minimum_2d(const FeatureMatrix& x, std::span<const int> signs, double lambda) {
  constexpr double step = 0.01;
  const std::size_t n = x.rows();
  std::vector<double> f(n);
  double best = INFINITY;
  for (int a = -500; a <= 500; ++a) {
    for (int c = -500; c <= 500; ++c) {
      const double w0 = a * step, w1 = c * step;
      const double reg = 0.5 * lambda * (w0 * w0 + w1 * w1);
      if (reg >= best) continue;
      for (std::size_t i = 0; i < n; ++i) f[i] = w0 * x.row(i)[0] + w1 * x.row(i)[1];
      auto J = [&](double b) {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) loss += std::max(0.0, 1.0 - signs[i] * (f[i] + b));
        return reg + loss / static_cast<double>(n);
      };
      // A minimizer in b sits at a hinge kink b = s_i - f_i.
      double b_star = 0.0, j_star = INFINITY;
      for (std::size_t i = 0; i < n; ++i) {
        const double b = signs[i] - f[i];
        const double v = J(b);
        if (v < j_star) j_star = v, b_star = b;
      }
      const double lo = std::clamp(std::floor(b_star / step) * step, -5.0, 5.0);
      const double hi = std::clamp(lo + step, -5.0, 5.0);
      best = std::min({best, J(lo), J(hi)});
    }
  }
  return best;
}

std::vector<double> channel_max(const ProximityTensor& t) {
  std::vector<double> out;
  for (std::uint32_t i = 0; i < t.height; ++i)
    for (std::uint32_t j = 0; j < t.width; ++j) {
      double m = -INFINITY;
      for (std::uint32_t c = 0; c < t.channels; ++c) m = std::max(m, static_cast<double>(t.at(c, i, j)));
      out.push_back(m);
    }
  return out;
}

}  // namespace oracle
