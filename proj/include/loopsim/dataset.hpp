#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "loopsim/types.hpp"

namespace loopsim {

enum class Origin : std::uint8_t { kOrganic, kSimulated };

inline std::string_view to_string(Origin o) {
  return o == Origin::kOrganic ? "organic" : "simulated";
}

struct Event {
  SessionId session;
  UserId user;
  ItemId item;
  std::int64_t timestamp{0};
  Origin origin{Origin::kOrganic};
  std::int32_t round{0};  // 0 for organic, else the simulation round

  friend bool operator==(const Event&, const Event&) = default;
};

struct ItemCatalog {
  std::vector<ArtistId> artist_of;        // indexed by ItemId
  std::vector<std::uint64_t> playcount;   // indexed by ItemId

  std::size_t size() const { return artist_of.size(); }
  std::size_t artist_count() const {
    std::uint32_t n = 0;
    for (ArtistId a : artist_of) n = std::max(n, a.value + 1);
    return n;
  }
};

// Append-only log of listening events grouped into sessions.
//
// The item and user id spaces are fixed when the store is built. Sessions
// may be added through append_session(); events already in the store are
// never moved or modified.
class SessionStore {
 public:
  SessionStore() = default;

  // Empty store over item ids [0, artist_of.size()) and users [0, n_users).
  SessionStore(std::vector<ArtistId> artist_of, std::size_t n_users)
      : artist_of_(std::move(artist_of)), n_users_(n_users) {}

  std::size_t item_count() const { return artist_of_.size(); }
  std::size_t user_count() const { return n_users_; }
  std::size_t session_count() const { return session_index_.size(); }
  std::size_t event_count() const { return events_.size(); }

  std::span<const Event> events() const { return events_; }
  std::span<const ArtistId> artist_of() const { return artist_of_; }
  ArtistId artist_of(ItemId i) const { return artist_of_.at(i.index()); }

  // Event positions of a session, in insertion order.
  std::span<const std::size_t> session_events(SessionId s) const {
    check_session(s);
    return session_index_[s.index()];
  }

  UserId user_of(SessionId s) const {
    check_session(s);
    return user_of_session_[s.index()];
  }

  bool is_organic(SessionId s) const {
    check_session(s);
    return session_origin_[s.index()] == Origin::kOrganic;
  }

  std::int64_t max_timestamp() const { return max_timestamp_; }

  // Latest event timestamp within the session.
  std::int64_t session_recency(SessionId s) const {
    check_session(s);
    return session_recency_[s.index()];
  }

  // Ingestion path: records one organic event. The session must be either
  // new (next dense id) or already present with the same user.
  void add_organic_event(SessionId session, UserId user, ItemId item,
                         std::int64_t timestamp) {
    if (timestamp < 0) throw InvalidInput("negative timestamp");
    check_item(item);
    check_user(user);
    if (session.index() == session_index_.size()) {
      open_session(user, Origin::kOrganic);
    } else if (session.index() > session_index_.size()) {
      throw InvalidInput("session ids must be allocated densely");
    } else if (user_of_session_[session.index()] != user) {
      throw InvalidInput("session " + std::to_string(session.value) +
                         " is attributed to more than one user");
    } else if (session_origin_[session.index()] != Origin::kOrganic) {
      throw InvalidInput("cannot add organic events to a simulated session");
    }
    push(Event{session, user, item, timestamp, Origin::kOrganic, 0});
  }

  // Appends a new simulated session holding `items` in order, with strictly
  // increasing timestamps starting at timestamp_base.
  SessionId append_session(UserId user, std::span<const ItemId> items,
                           std::int64_t timestamp_base, std::int32_t round) {
    if (items.empty()) throw InvalidInput("append_session: empty item list");
    if (round < 1) throw InvalidInput("append_session: simulated round must be >= 1");
    if (timestamp_base < 0) throw InvalidInput("append_session: negative timestamp");
    check_user(user);
    for (ItemId i : items) check_item(i);

    const SessionId sid = open_session(user, Origin::kSimulated);
    std::int64_t ts = timestamp_base;
    for (ItemId i : items) push(Event{sid, user, i, ts++, Origin::kSimulated, round});
    return sid;
  }

 private:
  void check_session(SessionId s) const {
    if (s.index() >= session_index_.size())
      throw NotFound("unknown session " + std::to_string(s.value));
  }
  void check_item(ItemId i) const {
    if (i.index() >= artist_of_.size())
      throw InvalidInput("unknown item " + std::to_string(i.value));
  }
  void check_user(UserId u) const {
    if (u.index() >= n_users_) throw InvalidInput("unknown user " + std::to_string(u.value));
  }

  SessionId open_session(UserId user, Origin origin) {
    const SessionId sid(session_index_.size());
    session_index_.emplace_back();
    user_of_session_.push_back(user);
    session_origin_.push_back(origin);
    session_recency_.push_back(0);
    return sid;
  }

  void push(const Event& e) {
    session_index_[e.session.index()].push_back(events_.size());
    auto& recency = session_recency_[e.session.index()];
    recency = std::max(recency, e.timestamp);
    max_timestamp_ = std::max(max_timestamp_, e.timestamp);
    events_.push_back(e);
  }

  std::vector<Event> events_;
  std::vector<std::vector<std::size_t>> session_index_;
  std::vector<UserId> user_of_session_;
  std::vector<Origin> session_origin_;
  std::vector<std::int64_t> session_recency_;
  std::vector<ArtistId> artist_of_;
  std::size_t n_users_{0};
  std::int64_t max_timestamp_{-1};
};

// Items of a session in timestamp order; duplicates preserved. Events with
// equal timestamps keep their insertion order.
inline std::vector<ItemId> session_items(const SessionStore& store, SessionId s) {
  auto positions = store.session_events(s);
  std::vector<std::size_t> order(positions.begin(), positions.end());
  const auto events = store.events();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return events[a].timestamp < events[b].timestamp;
  });
  std::vector<ItemId> out;
  out.reserve(order.size());
  for (std::size_t p : order) out.push_back(events[p].item);
  return out;
}

// Exact playcounts over every event currently in the store.
inline ItemCatalog recompute_catalog(const SessionStore& store) {
  ItemCatalog cat;
  cat.artist_of.assign(store.artist_of().begin(), store.artist_of().end());
  cat.playcount.assign(store.item_count(), 0);
  for (const Event& e : store.events()) ++cat.playcount[e.item.index()];
  return cat;
}

}  // namespace loopsim
