#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "loopsim/recommenders.hpp"

namespace loopsim {

// Fixed-order pairwise summation, so results do not depend on how work was
// split across threads.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean(std::span<const double> xs) {
  return xs.empty() ? 0.0 : pairwise_sum(xs) / static_cast<double>(xs.size());
}

// Gini index over non-negative values:
//   G = sum_i (2i - n - 1) x_(i) / (n sum x), x sorted ascending, i = 1..n.
inline double gini(std::span<const double> counts) {
  if (counts.empty()) throw Undefined("gini: empty input");
  std::vector<double> x(counts.begin(), counts.end());
  for (double v : x)
    if (v < 0.0) throw InvalidInput("gini: negative value");
  std::sort(x.begin(), x.end());
  const double total = pairwise_sum(x);
  if (!(total > 0.0)) throw Undefined("gini: all values are zero");
  const auto n = static_cast<double>(x.size());
  std::vector<double> terms(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    terms[i] = (2.0 * static_cast<double>(i + 1) - n - 1.0) * x[i];
  return pairwise_sum(terms) / (n * total);
}

// Recommendation frequency of every item that appears in at least one list,
// ordered by ItemId.
inline std::vector<double> recommendation_counts(std::span<const RecommendationList> lists) {
  std::unordered_map<ItemId, std::uint64_t> freq;
  for (const auto& l : lists)
    for (const auto& s : l.items) ++freq[s.item];
  std::vector<std::pair<ItemId, std::uint64_t>> sorted(freq.begin(), freq.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(sorted.size());
  for (const auto& [i, c] : sorted) out.push_back(static_cast<double>(c));
  return out;
}

// Number of distinct items over all lists.
inline std::size_t coverage(std::span<const RecommendationList> lists) {
  std::unordered_set<ItemId> seen;
  for (const auto& l : lists)
    for (const auto& s : l.items) seen.insert(s.item);
  return seen.size();
}

// Mean playcount over every recommended slot.
inline double popularity_abs(std::span<const RecommendationList> lists, const ItemCatalog& catalog) {
  std::vector<double> pc;
  for (const auto& l : lists)
    for (const auto& s : l.items) pc.push_back(static_cast<double>(catalog.playcount.at(s.item.index())));
  return mean(pc);
}

// popularity_abs minus the mean playcount of the seed tracks.
inline double popularity_rel(std::span<const RecommendationList> lists,
                             std::span<const ItemId> seeds, const ItemCatalog& catalog) {
  std::vector<double> pc;
  pc.reserve(seeds.size());
  for (ItemId s : seeds) pc.push_back(static_cast<double>(catalog.playcount.at(s.index())));
  return popularity_abs(lists, catalog) - mean(pc);
}

struct Prf {
  double precision{0.0};
  double recall{0.0};
  double f1{0.0};
};

inline double harmonic_mean(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

// Precision, recall and F1 of the first k items against `relevant`.
// Precision always divides by k, also for shorter lists.
inline Prf prf_at_k(const RecommendationList& list, const std::unordered_set<ItemId>& relevant,
                    std::size_t k = 10) {
  Prf r;
  if (k == 0 || relevant.empty()) return r;
  std::size_t hits = 0;
  const std::size_t top = std::min(k, list.items.size());
  for (std::size_t i = 0; i < top; ++i)
    if (relevant.contains(list.items[i].item)) ++hits;
  r.precision = static_cast<double>(hits) / static_cast<double>(k);
  r.recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
  r.f1 = harmonic_mean(r.precision, r.recall);
  return r;
}

struct RoundReport {
  int iteration{0};  // 1-based measurement index
  int round{0};      // simulation round the measurement was taken in
  double gini{0.0};
  std::size_t coverage{0};
  double popularity_abs{0.0};
  double popularity_rel{0.0};
  double precision{0.0};
  double recall{0.0};
  double f1{0.0};

  friend bool operator==(const RoundReport&, const RoundReport&) = default;
};

// Recommendation frequency of every item in the measured universe: items
// with a positive playcount plus anything recommended. Items never
// recommended contribute zeros.
inline std::vector<double> exposure_counts(std::span<const RecommendationList> lists,
                                           const ItemCatalog& catalog) {
  std::vector<double> freq(catalog.playcount.size(), 0.0);
  std::vector<bool> in_universe(catalog.playcount.size(), false);
  for (std::size_t i = 0; i < catalog.playcount.size(); ++i) in_universe[i] = catalog.playcount[i] > 0;
  for (const auto& l : lists)
    for (const auto& s : l.items) {
      freq.at(s.item.index()) += 1.0;
      in_universe[s.item.index()] = true;
    }
  std::vector<double> out;
  for (std::size_t i = 0; i < freq.size(); ++i)
    if (in_universe[i]) out.push_back(freq[i]);
  return out;
}

// Measures one set of lists. `relevant[j]` is the ground truth for lists[j];
// lists with an empty relevant set are left out of the accuracy averages.
// The reported F1 is the harmonic mean of the averaged precision and recall.
inline RoundReport measure(std::span<const RecommendationList> lists, std::span<const ItemId> seeds,
                           std::span<const std::unordered_set<ItemId>> relevant,
                           const ItemCatalog& catalog, std::size_t k) {
  RoundReport rep;
  rep.coverage = coverage(lists);
  rep.gini = rep.coverage == 0 ? 0.0 : gini(exposure_counts(lists, catalog));
  rep.popularity_abs = popularity_abs(lists, catalog);
  rep.popularity_rel = popularity_rel(lists, seeds, catalog);

  std::vector<double> ps, rs;
  for (std::size_t j = 0; j < lists.size(); ++j) {
    if (relevant[j].empty()) continue;
    const Prf prf = prf_at_k(lists[j], relevant[j], k);
    ps.push_back(prf.precision);
    rs.push_back(prf.recall);
  }
  rep.precision = mean(ps);
  rep.recall = mean(rs);
  rep.f1 = harmonic_mean(rep.precision, rep.recall);
  return rep;
}

}  // namespace loopsim
