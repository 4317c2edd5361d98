#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "loopsim/dataset.hpp"

namespace loopsim {

struct ScoredItem {
  ItemId item;
  double score{0.0};

  friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

// Ranked list for one seed. Scores are non-increasing; equal scores are
// ordered by ascending ItemId.
struct RecommendationList {
  SessionId seed_session;
  std::vector<ScoredItem> items;

  std::size_t size() const { return items.size(); }
  friend bool operator==(const RecommendationList&, const RecommendationList&) = default;
};

// Total order used by every algorithm: higher score first, then smaller id.
inline bool ranks_before(const ScoredItem& a, const ScoredItem& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.item < b.item;
}

namespace detail {

// Keeps the n best entries of `scored` under ranks_before, in rank order.
inline std::vector<ScoredItem> take_top(std::vector<ScoredItem> scored, std::size_t n) {
  if (scored.size() > n) {
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n),
                      scored.end(), ranks_before);
    scored.resize(n);
  } else {
    std::sort(scored.begin(), scored.end(), ranks_before);
  }
  return scored;
}

template <typename Map>
std::vector<ScoredItem> to_scored(const Map& scores) {
  std::vector<ScoredItem> out;
  out.reserve(scores.size());
  for (const auto& [item, score] : scores) out.push_back({ItemId(item), score});
  return out;
}

// Sorted, de-duplicated seed items that fall inside the model's item space.
inline std::vector<ItemId> known_seed_set(std::span<const ItemId> seed, std::size_t n_items) {
  std::vector<ItemId> s;
  for (ItemId i : seed)
    if (i.index() < n_items) s.push_back(i);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

// Unique items of every session, sorted ascending.
inline std::vector<std::vector<ItemId>> unique_session_items(const SessionStore& store) {
  std::vector<std::vector<ItemId>> sets(store.session_count());
  for (const Event& e : store.events()) sets[e.session.index()].push_back(e.item);
  for (auto& s : sets) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  return sets;
}

inline std::size_t intersection_size(std::span<const ItemId> a, std::span<const ItemId> b) {
  std::size_t n = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++n;
      ++ia;
      ++ib;
    }
  }
  return n;
}

}  // namespace detail

// Binary cosine between two sets given their sizes and overlap.
inline double binary_cosine(std::size_t overlap, std::size_t size_a, std::size_t size_b) {
  if (overlap == 0) return 0.0;
  return static_cast<double>(overlap) /
         std::sqrt(static_cast<double>(size_a) * static_cast<double>(size_b));
}

// Fitted model. recommend() is const and safe to call concurrently.
class Model {
 public:
  virtual ~Model() = default;
  virtual std::string_view name() const = 0;
  virtual RecommendationList recommend(std::span<const ItemId> seed, std::size_t n) const = 0;
};

// ---------------------------------------------------------------------------
// Session-based kNN
// ---------------------------------------------------------------------------

struct SknnParams {
  static constexpr std::size_t kNoSampling = std::numeric_limits<std::size_t>::max();

  std::size_t k_neighbors{100};
  std::size_t sample_size{1000};  // most recent candidate sessions considered

  void validate() const {
    if (k_neighbors < 1) throw InvalidInput("k_neighbors must be >= 1");
    if (k_neighbors > sample_size) throw InvalidInput("k_neighbors must not exceed sample_size");
  }
};

class SknnModel final : public Model {
 public:
  SknnModel(const SessionStore& store, SknnParams params) : params_(params) {
    params_.validate();
    if (store.event_count() == 0) throw EmptyDataset("sknn: store has no events");

    sessions_ = detail::unique_session_items(store);
    const std::size_t n_sessions = store.session_count();

    // Recency: latest timestamp first, ties by larger SessionId.
    std::vector<std::uint32_t> by_recency(n_sessions);
    for (std::uint32_t s = 0; s < n_sessions; ++s) by_recency[s] = s;
    std::sort(by_recency.begin(), by_recency.end(), [&](std::uint32_t a, std::uint32_t b) {
      const auto ra = store.session_recency(SessionId(a));
      const auto rb = store.session_recency(SessionId(b));
      if (ra != rb) return ra > rb;
      return a > b;
    });
    recency_rank_.resize(n_sessions);
    for (std::uint32_t r = 0; r < n_sessions; ++r) recency_rank_[by_recency[r]] = r;

    postings_.assign(store.item_count(), {});
    for (std::uint32_t s : by_recency)
      for (ItemId i : sessions_[s]) postings_[i.index()].push_back(s);
  }

  std::string_view name() const override { return "sknn"; }
  const SknnParams& params() const { return params_; }

  // Sessions containing `item`, most recent first.
  std::span<const std::uint32_t> postings(ItemId item) const { return postings_.at(item.index()); }
  std::span<const ItemId> session_set(SessionId s) const { return sessions_.at(s.index()); }

  RecommendationList recommend(std::span<const ItemId> seed, std::size_t n) const override {
    RecommendationList out;
    const auto seed_set = detail::known_seed_set(seed, postings_.size());
    if (seed_set.empty() || n == 0) return out;

    // Candidate neighbors: union of posting lists, most recent first.
    std::vector<std::uint32_t> candidates;
    if (seed_set.size() == 1) {
      const auto& p = postings_[seed_set.front().index()];
      candidates.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(
                                                   std::min(p.size(), params_.sample_size)));
    } else {
      for (ItemId i : seed_set) {
        const auto& p = postings_[i.index()];
        candidates.insert(candidates.end(), p.begin(), p.end());
      }
      auto by_rank = [&](std::uint32_t a, std::uint32_t b) {
        return recency_rank_[a] < recency_rank_[b];
      };
      std::sort(candidates.begin(), candidates.end(), by_rank);
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
      if (candidates.size() > params_.sample_size) candidates.resize(params_.sample_size);
    }

    struct Neighbor {
      std::uint32_t session;
      double similarity;
    };
    std::vector<Neighbor> neighbors;
    neighbors.reserve(candidates.size());
    for (std::uint32_t s : candidates) {
      const auto& items = sessions_[s];
      const std::size_t overlap = detail::intersection_size(seed_set, items);
      neighbors.push_back({s, binary_cosine(overlap, seed_set.size(), items.size())});
    }
    auto closer = [&](const Neighbor& a, const Neighbor& b) {
      if (a.similarity != b.similarity) return a.similarity > b.similarity;
      return recency_rank_[a.session] < recency_rank_[b.session];
    };
    const std::size_t k = std::min(params_.k_neighbors, neighbors.size());
    std::partial_sort(neighbors.begin(), neighbors.begin() + static_cast<std::ptrdiff_t>(k),
                      neighbors.end(), closer);
    neighbors.resize(k);

    std::unordered_map<std::uint32_t, double> scores;
    for (const Neighbor& nb : neighbors)
      for (ItemId i : sessions_[nb.session]) scores[i.value] += nb.similarity;

    out.items = detail::take_top(detail::to_scored(scores), n);
    return out;
  }

 private:
  SknnParams params_;
  std::vector<std::vector<ItemId>> sessions_;
  std::vector<std::uint32_t> recency_rank_;
  std::vector<std::vector<std::uint32_t>> postings_;
};

inline SknnModel sknn_fit(const SessionStore& store, const ItemCatalog& /*catalog*/,
                          const SknnParams& params = {}) {
  return SknnModel(store, params);
}

// ---------------------------------------------------------------------------
// Collocated-artist greatest hits
// ---------------------------------------------------------------------------

struct CaghParams {
  std::size_t k_artists{10};
  std::size_t hits_per_artist{20};

  void validate() const {
    if (k_artists < 1) throw InvalidInput("k_artists must be >= 1");
    if (hits_per_artist < 1) throw InvalidInput("hits_per_artist must be >= 1");
  }
};

class CaghModel final : public Model {
 public:
  struct Similar {
    ArtistId artist;
    double similarity;
  };

  CaghModel(const SessionStore& store, const ItemCatalog& catalog, CaghParams params)
      : params_(params) {
    params_.validate();
    if (catalog.artist_of.size() != store.item_count() ||
        catalog.playcount.size() != store.item_count())
      throw InvalidInput("cagh: catalog does not cover the store's items");
    artist_of_ = catalog.artist_of;
    playcount_ = catalog.playcount;
    const std::size_t n_artists = catalog.artist_count();

    // Sessions per artist and pairwise co-occurrence, over unique artist sets.
    std::vector<std::vector<ArtistId>> session_artists(store.session_count());
    for (const Event& e : store.events())
      session_artists[e.session.index()].push_back(artist_of_[e.item.index()]);
    std::vector<std::uint64_t> sessions_with(n_artists, 0);
    std::vector<std::unordered_map<std::uint32_t, std::uint64_t>> co(n_artists);
    for (auto& arts : session_artists) {
      std::sort(arts.begin(), arts.end());
      arts.erase(std::unique(arts.begin(), arts.end()), arts.end());
      for (std::size_t x = 0; x < arts.size(); ++x) {
        ++sessions_with[arts[x].index()];
        for (std::size_t y = 0; y < arts.size(); ++y)
          if (x != y) ++co[arts[x].index()][arts[y].value];
      }
    }

    similar_.resize(n_artists);
    for (std::size_t a = 0; a < n_artists; ++a) {
      auto& list = similar_[a];
      for (const auto& [b, count] : co[a])
        list.push_back({ArtistId(b), binary_cosine(count, sessions_with[a], sessions_with[b])});
      std::sort(list.begin(), list.end(), [](const Similar& x, const Similar& y) {
        if (x.similarity != y.similarity) return x.similarity > y.similarity;
        return x.artist < y.artist;
      });
    }

    hits_.resize(n_artists);
    for (std::size_t i = 0; i < artist_of_.size(); ++i)
      if (playcount_[i] > 0) hits_[artist_of_[i].index()].push_back(ItemId(i));
    for (auto& h : hits_) {
      std::sort(h.begin(), h.end(), [&](ItemId x, ItemId y) {
        if (playcount_[x.index()] != playcount_[y.index()])
          return playcount_[x.index()] > playcount_[y.index()];
        return x < y;
      });
      if (h.size() > params_.hits_per_artist) h.resize(params_.hits_per_artist);
    }
  }

  std::string_view name() const override { return "cagh"; }

  // Artist similarity; 1 on the diagonal for artists seen in any session.
  double artist_similarity(ArtistId a, ArtistId b) const {
    if (a == b) return 1.0;
    for (const Similar& s : similar_.at(a.index()))
      if (s.artist == b) return s.similarity;
    return 0.0;
  }

  // Top hits of an artist, most played first.
  std::span<const ItemId> greatest_hits(ArtistId a) const { return hits_.at(a.index()); }

  RecommendationList recommend(std::span<const ItemId> seed, std::size_t n) const override {
    RecommendationList out;
    const auto seed_set = detail::known_seed_set(seed, artist_of_.size());
    if (seed_set.empty() || n == 0) return out;

    std::vector<ArtistId> seed_artists;
    for (ItemId i : seed_set) seed_artists.push_back(artist_of_[i.index()]);
    std::sort(seed_artists.begin(), seed_artists.end());
    seed_artists.erase(std::unique(seed_artists.begin(), seed_artists.end()), seed_artists.end());
    auto is_seed_artist = [&](ArtistId a) {
      return std::binary_search(seed_artists.begin(), seed_artists.end(), a);
    };

    // Similarity to the seed artists: maximum over seed artists.
    std::unordered_map<std::uint32_t, double> best;
    for (ArtistId a : seed_artists)
      for (const Similar& s : similar_[a.index()]) {
        if (is_seed_artist(s.artist)) continue;
        auto [it, inserted] = best.try_emplace(s.artist.value, s.similarity);
        if (!inserted) it->second = std::max(it->second, s.similarity);
      }
    std::vector<Similar> similar;
    for (const auto& [a, sim] : best)
      if (sim > 0.0) similar.push_back({ArtistId(a), sim});
    const std::size_t k = std::min(params_.k_artists, similar.size());
    std::partial_sort(similar.begin(), similar.begin() + static_cast<std::ptrdiff_t>(k),
                      similar.end(), [](const Similar& x, const Similar& y) {
                        if (x.similarity != y.similarity) return x.similarity > y.similarity;
                        return x.artist < y.artist;
                      });
    similar.resize(k);
    for (ArtistId a : seed_artists) similar.push_back({a, 1.0});

    std::vector<ScoredItem> scored;
    for (const Similar& s : similar)
      for (ItemId i : hits_[s.artist.index()])
        scored.push_back({i, s.similarity * static_cast<double>(playcount_[i.index()])});
    out.items = detail::take_top(std::move(scored), n);
    return out;
  }

 private:
  CaghParams params_;
  std::vector<ArtistId> artist_of_;
  std::vector<std::uint64_t> playcount_;
  std::vector<std::vector<Similar>> similar_;
  std::vector<std::vector<ItemId>> hits_;
};

inline CaghModel cagh_fit(const SessionStore& store, const ItemCatalog& catalog,
                          const CaghParams& params = {}) {
  return CaghModel(store, catalog, params);
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

// Scores an item by the number of sessions in which it co-occurs with each
// seed item, summed over the distinct seed items.
class MarkovModel final : public Model {
 public:
  explicit MarkovModel(const SessionStore& store) {
    const auto sessions = detail::unique_session_items(store);
    std::vector<std::unordered_map<std::uint32_t, std::uint32_t>> co(store.item_count());
    for (const auto& set : sessions)
      for (ItemId a : set)
        for (ItemId b : set)
          if (a != b) ++co[a.index()][b.value];
    cooc_.resize(store.item_count());
    for (std::size_t i = 0; i < co.size(); ++i) {
      cooc_[i].assign(co[i].begin(), co[i].end());
      std::sort(cooc_[i].begin(), cooc_[i].end());
    }
  }

  std::string_view name() const override { return "markov"; }

  std::uint32_t cooccurrence(ItemId a, ItemId b) const {
    const auto& row = cooc_.at(a.index());
    auto it = std::lower_bound(row.begin(), row.end(), std::pair<std::uint32_t, std::uint32_t>{b.value, 0});
    return it != row.end() && it->first == b.value ? it->second : 0;
  }

  RecommendationList recommend(std::span<const ItemId> seed, std::size_t n) const override {
    RecommendationList out;
    const auto seed_set = detail::known_seed_set(seed, cooc_.size());
    if (n == 0) return out;
    std::unordered_map<std::uint32_t, double> scores;
    for (ItemId s : seed_set)
      for (const auto& [item, count] : cooc_[s.index()]) scores[item] += count;
    out.items = detail::take_top(detail::to_scored(scores), n);
    return out;
  }

 private:
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> cooc_;
};

inline MarkovModel markov_fit(const SessionStore& store, const ItemCatalog& /*catalog*/) {
  return MarkovModel(store);
}

// Globally most played items, independent of the seed.
class PopModel final : public Model {
 public:
  explicit PopModel(const ItemCatalog& catalog) {
    for (std::size_t i = 0; i < catalog.playcount.size(); ++i)
      if (catalog.playcount[i] > 0)
        ranked_.push_back({ItemId(i), static_cast<double>(catalog.playcount[i])});
    std::sort(ranked_.begin(), ranked_.end(), ranks_before);
  }

  std::string_view name() const override { return "pop"; }

  RecommendationList recommend(std::span<const ItemId> /*seed*/, std::size_t n) const override {
    RecommendationList out;
    out.items.assign(ranked_.begin(),
                     ranked_.begin() + static_cast<std::ptrdiff_t>(std::min(n, ranked_.size())));
    return out;
  }

 private:
  std::vector<ScoredItem> ranked_;
};

inline PopModel pop_fit(const SessionStore& /*store*/, const ItemCatalog& catalog) {
  return PopModel(catalog);
}

// ---------------------------------------------------------------------------
// Algorithm selection
// ---------------------------------------------------------------------------

enum class Algorithm { kSknn, kCagh, kMarkov, kPop };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kSknn: return "sknn";
    case Algorithm::kCagh: return "cagh";
    case Algorithm::kMarkov: return "markov";
    case Algorithm::kPop: return "pop";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "sknn") return Algorithm::kSknn;
  if (s == "cagh") return Algorithm::kCagh;
  if (s == "markov") return Algorithm::kMarkov;
  if (s == "pop") return Algorithm::kPop;
  throw InvalidInput("unknown algorithm '" + std::string(s) + "'");
}

struct AlgorithmParams {
  SknnParams sknn;
  CaghParams cagh;
};

inline std::unique_ptr<Model> fit_model(Algorithm algorithm, const AlgorithmParams& params,
                                        const SessionStore& store, const ItemCatalog& catalog) {
  switch (algorithm) {
    case Algorithm::kSknn: return std::make_unique<SknnModel>(store, params.sknn);
    case Algorithm::kCagh: return std::make_unique<CaghModel>(store, catalog, params.cagh);
    case Algorithm::kMarkov: return std::make_unique<MarkovModel>(store);
    case Algorithm::kPop: return std::make_unique<PopModel>(catalog);
  }
  throw InvalidInput("unknown algorithm");
}

}  // namespace loopsim
