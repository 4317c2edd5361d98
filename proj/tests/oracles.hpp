#pragma once

// Independent reference implementations used only by tests. They work from
// the raw event list and never touch the indexes the library builds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "loopsim/loopsim.hpp"

namespace loopsim::oracle {

// Gini via mean absolute difference: sum_ij |x_i - x_j| / (2 n^2 mean).
inline double gini_mad(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double total = 0.0, diff = 0.0;
  for (double a : x) {
    total += a;
    for (double b : x) diff += std::abs(a - b);
  }
  return diff / (2.0 * n * n * (total / n));
}

struct SessionView {
  std::uint32_t id;
  std::int64_t recency;
  std::set<std::uint32_t> items;
};

inline std::vector<SessionView> scan_sessions(const SessionStore& store) {
  std::map<std::uint32_t, SessionView> by_id;
  for (const Event& e : store.events()) {
    auto& v = by_id[e.session.value];
    v.id = e.session.value;
    v.recency = std::max(v.recency, e.timestamp);
    v.items.insert(e.item.value);
  }
  std::vector<SessionView> out;
  for (auto& [id, v] : by_id) out.push_back(v);
  return out;
}

// Scores every session in the store against the seed (no sampling), keeps the
// k most similar, sums similarities per item and ranks.
inline std::vector<ScoredItem> sknn(const SessionStore& store, const std::vector<ItemId>& seed,
                                    std::size_t k, std::size_t n) {
  std::set<std::uint32_t> s;
  for (ItemId i : seed) s.insert(i.value);
  struct Cand {
    double sim;
    std::int64_t recency;
    std::uint32_t id;
    const std::set<std::uint32_t>* items;
  };
  const auto sessions = scan_sessions(store);
  std::vector<Cand> cands;
  for (const auto& v : sessions) {
    std::size_t overlap = 0;
    for (std::uint32_t i : s) overlap += v.items.count(i);
    if (overlap == 0) continue;
    const double sim = static_cast<double>(overlap) /
                       std::sqrt(static_cast<double>(s.size()) * static_cast<double>(v.items.size()));
    cands.push_back({sim, v.recency, v.id, &v.items});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    if (a.recency != b.recency) return a.recency > b.recency;
    return a.id > b.id;
  });
  if (cands.size() > k) cands.resize(k);
  std::map<std::uint32_t, double> score;
  for (const auto& c : cands)
    for (std::uint32_t i : *c.items) score[i] += c.sim;
  std::vector<ScoredItem> out;
  for (auto& [i, sc] : score) out.push_back({ItemId(i), sc});
  std::sort(out.begin(), out.end(), [](const ScoredItem& a, const ScoredItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item < b.item;
  });
  if (out.size() > n) out.resize(n);
  return out;
}

// Number of sessions containing both a and b (a != b).
inline std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> cooccurrence(
    const SessionStore& store) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> co;
  for (const auto& v : scan_sessions(store))
    for (std::uint32_t a : v.items)
      for (std::uint32_t b : v.items)
        if (a != b) ++co[{a, b}];
  return co;
}

// Random small store: n_sessions sessions of 1..max_len draws over n_items.
template <typename Rng>
SessionStore random_store(Rng& rng, std::size_t n_sessions, std::size_t n_items, std::size_t max_len,
                          std::size_t n_artists = 3) {
  std::vector<ArtistId> artists(n_items);
  for (auto& a : artists) a = ArtistId(static_cast<std::uint32_t>(rng.below(n_artists)));
  SessionStore store(artists, n_sessions);
  for (std::size_t s = 0; s < n_sessions; ++s) {
    const std::size_t len = 1 + rng.below(max_len);
    // Coarse timestamps so that recency ties happen.
    const auto base = static_cast<std::int64_t>(rng.below(8)) * 100;
    for (std::size_t k = 0; k < len; ++k)
      store.add_organic_event(SessionId(s), UserId(s), ItemId(static_cast<std::uint32_t>(rng.below(n_items))),
                              base + static_cast<std::int64_t>(k));
  }
  return store;
}

}  // namespace loopsim::oracle
