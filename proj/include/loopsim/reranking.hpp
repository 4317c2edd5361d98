#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "loopsim/recommenders.hpp"

namespace loopsim {

enum class RerankStrategy { kNone, kStrategy1, kStrategy2 };

inline std::string_view to_string(RerankStrategy s) {
  switch (s) {
    case RerankStrategy::kNone: return "none";
    case RerankStrategy::kStrategy1: return "strategy1";
    case RerankStrategy::kStrategy2: return "strategy2";
  }
  return "?";
}

inline RerankStrategy parse_rerank(std::string_view s) {
  if (s == "none") return RerankStrategy::kNone;
  if (s == "strategy1") return RerankStrategy::kStrategy1;
  if (s == "strategy2") return RerankStrategy::kStrategy2;
  throw InvalidInput("unknown rerank strategy '" + std::string(s) + "'");
}

// Positions to move an item back given how often it was recommended in the
// previous round: floor(10 ln count), and 0 for counts of 0 or 1.
inline std::uint64_t penalty_strategy1(std::uint64_t count) {
  if (count <= 1) return 0;
  return static_cast<std::uint64_t>(std::floor(10.0 * std::log(static_cast<double>(count))));
}

// Positions to move an item back given how often this user already consumed it.
inline std::uint64_t penalty_strategy2(std::uint64_t consumptions) { return 10 * consumptions; }

// Moves each item back by its penalty: the target key is original index plus
// penalty, and items are stably sorted by key so equal keys keep their
// original relative order. Scores travel with their items.
template <typename PenaltyFn>
  requires std::invocable<PenaltyFn&, ItemId>
RecommendationList apply_penalties(const RecommendationList& list, PenaltyFn&& penalty_of) {
  const std::size_t n = list.items.size();
  std::vector<std::uint64_t> key(n);
  for (std::size_t i = 0; i < n; ++i)
    key[i] = i + static_cast<std::uint64_t>(penalty_of(list.items[i].item));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

  RecommendationList out;
  out.seed_session = list.seed_session;
  out.items.reserve(n);
  for (std::size_t i : order) out.items.push_back(list.items[i]);
  return out;
}

inline RecommendationList apply_penalties(
    const RecommendationList& list, const std::unordered_map<ItemId, std::uint64_t>& penalties) {
  return apply_penalties(list, [&](ItemId i) -> std::uint64_t {
    auto it = penalties.find(i);
    return it == penalties.end() ? 0 : it->second;
  });
}

struct Acceptance {
  UserId user;
  std::vector<ItemId> items;
};

// Exposure and consumption counts that drive the two strategies.
class RerankState {
 public:
  // Times the item appeared in any list of the previous round.
  std::uint64_t previous_recs(ItemId i) const {
    auto it = previous_recs_.find(i);
    return it == previous_recs_.end() ? 0 : it->second;
  }

  // Times the user accepted the item over all simulated rounds so far.
  std::uint64_t previous_consumptions(ItemId i, UserId u) const {
    auto it = consumptions_.find(key(i, u));
    return it == consumptions_.end() ? 0 : it->second;
  }

  std::uint64_t total_previous_recs() const {
    std::uint64_t t = 0;
    for (const auto& [i, c] : previous_recs_) t += c;
    return t;
  }

  bool empty() const { return previous_recs_.empty() && consumptions_.empty(); }

  // previous_recs is replaced by this round's counts; consumptions accumulate.
  void update_after_round(std::span<const RecommendationList> lists,
                          std::span<const Acceptance> accepted) {
    previous_recs_.clear();
    for (const auto& l : lists)
      for (const auto& s : l.items) ++previous_recs_[s.item];
    for (const auto& a : accepted)
      for (ItemId i : a.items) ++consumptions_[key(i, a.user)];
  }

 private:
  static std::uint64_t key(ItemId i, UserId u) {
    return (static_cast<std::uint64_t>(u.value) << 32) | i.value;
  }

  std::unordered_map<ItemId, std::uint64_t> previous_recs_;
  std::unordered_map<std::uint64_t, std::uint64_t> consumptions_;
};

inline RerankState update_state_after_round(RerankState state,
                                            std::span<const RecommendationList> lists,
                                            std::span<const Acceptance> accepted) {
  state.update_after_round(lists, accepted);
  return state;
}

// Re-ranks one list for `user` under the configured strategy.
inline RecommendationList rerank(const RecommendationList& list, RerankStrategy strategy,
                                 const RerankState& state, UserId user) {
  switch (strategy) {
    case RerankStrategy::kNone:
      return list;
    case RerankStrategy::kStrategy1:
      return apply_penalties(list, [&](ItemId i) { return penalty_strategy1(state.previous_recs(i)); });
    case RerankStrategy::kStrategy2:
      return apply_penalties(
          list, [&](ItemId i) { return penalty_strategy2(state.previous_consumptions(i, user)); });
  }
  return list;
}

}  // namespace loopsim
