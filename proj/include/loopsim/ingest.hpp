#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "loopsim/dataset.hpp"
#include "loopsim/rng.hpp"

namespace loopsim {

// Canonical event file: tab separated, '\n' line ends, one header line.
inline constexpr std::string_view kTsvHeader =
    "session_id\tuser_id\titem_id\tartist_id\ttimestamp\torigin\tround";

struct Dataset {
  SessionStore store;
  ItemCatalog catalog;
};

namespace detail {

// Maps source string ids onto a dense [0, n) range in first-seen order.
class Interner {
 public:
  std::uint32_t intern(std::string_view key) {
    auto [it, inserted] = ids_.try_emplace(std::string(key), static_cast<std::uint32_t>(ids_.size()));
    return it->second;
  }
  std::size_t size() const { return ids_.size(); }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
};

template <typename Int>
Int parse_int(std::string_view field, std::size_t line, const char* name) {
  Int v{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw ParseError(line, std::string("bad ") + name + " '" + std::string(field) + "'");
  return v;
}

struct RawEvent {
  std::uint32_t session, user, item;
  std::int64_t timestamp;
  Origin origin;
  std::int32_t round;
  std::size_t line;
};

}  // namespace detail

// Parses the canonical TSV format. Source ids are interned per id space in
// order of first appearance. Each item must keep one artist throughout the
// file. Simulated rows are accepted so that a written simulation output can be
// re-read; each simulated session becomes a simulated session of the store.
inline Dataset parse_events_tsv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTsvHeader) throw ParseError(1, "unexpected header");

  detail::Interner sessions, users, items, artists;
  std::vector<detail::RawEvent> raw;
  std::vector<ArtistId> artist_of;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::string_view fields[7];
    std::size_t nf = 0;
    std::string_view rest(line);
    while (true) {
      auto tab = rest.find('\t');
      if (nf == 7) throw ParseError(lineno, "too many columns");
      fields[nf++] = rest.substr(0, tab);
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (nf != 7) throw ParseError(lineno, "expected 7 columns, got " + std::to_string(nf));
    for (std::size_t f = 0; f < 4; ++f)
      if (fields[f].empty()) throw ParseError(lineno, "empty id column");

    detail::RawEvent ev{};
    ev.line = lineno;
    ev.session = sessions.intern(fields[0]);
    ev.user = users.intern(fields[1]);
    ev.item = items.intern(fields[2]);
    const auto artist = ArtistId(artists.intern(fields[3]));
    if (ev.item == artist_of.size()) {
      artist_of.push_back(artist);
    } else if (artist_of[ev.item] != artist) {
      throw ParseError(lineno, "item '" + std::string(fields[2]) + "' has conflicting artists");
    }
    ev.timestamp = detail::parse_int<std::int64_t>(fields[4], lineno, "timestamp");
    if (ev.timestamp < 0) throw ParseError(lineno, "negative timestamp");
    if (fields[5] == "organic") {
      ev.origin = Origin::kOrganic;
    } else if (fields[5] == "simulated") {
      ev.origin = Origin::kSimulated;
    } else {
      throw ParseError(lineno, "origin must be 'organic' or 'simulated'");
    }
    ev.round = detail::parse_int<std::int32_t>(fields[6], lineno, "round");
    if ((ev.round == 0) != (ev.origin == Origin::kOrganic))
      throw ParseError(lineno, "round must be 0 exactly for organic events");
    raw.push_back(ev);
  }

  Dataset ds;
  ds.store = SessionStore(std::move(artist_of), users.size());

  // Organic events go in first (file order), then simulated sessions in order
  // of first appearance, so that ingested session ids precede simulated ones.
  std::vector<std::uint32_t> remap(sessions.size(), UINT32_MAX);
  std::uint32_t next_sid = 0;
  for (const auto& ev : raw) {
    if (ev.origin != Origin::kOrganic) continue;
    if (remap[ev.session] == UINT32_MAX) remap[ev.session] = next_sid++;
    ds.store.add_organic_event(SessionId(remap[ev.session]), UserId(ev.user), ItemId(ev.item),
                               ev.timestamp);
  }
  std::vector<std::vector<std::size_t>> simulated(sessions.size());
  std::vector<std::uint32_t> sim_order;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const auto& ev = raw[k];
    if (ev.origin != Origin::kSimulated) continue;
    if (remap[ev.session] != UINT32_MAX)
      throw ParseError(ev.line, "session mixes organic and simulated events");
    if (simulated[ev.session].empty()) sim_order.push_back(ev.session);
    simulated[ev.session].push_back(k);
  }
  for (std::uint32_t s : sim_order) {
    const auto& rows = simulated[s];
    const auto& first = raw[rows.front()];
    std::vector<ItemId> items_of;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto& ev = raw[rows[j]];
      if (ev.user != first.user || ev.round != first.round ||
          ev.timestamp != first.timestamp + static_cast<std::int64_t>(j))
        throw ParseError(ev.line, "simulated session rows must share user and round and "
                                      "have consecutive timestamps");
      items_of.push_back(ItemId(ev.item));
    }
    ds.store.append_session(UserId(first.user), items_of, first.timestamp, first.round);
  }
  ds.catalog = recompute_catalog(ds.store);
  return ds;
}

inline Dataset parse_events_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_events_tsv(static_cast<std::istream&>(in));
}

// Writes every event in store order using the dense ids as source ids.
inline void write_events_tsv(const SessionStore& store, std::ostream& out) {
  out << kTsvHeader << '\n';
  for (const Event& e : store.events()) {
    out << e.session.value << '\t' << e.user.value << '\t' << e.item.value << '\t'
        << store.artist_of(e.item).value << '\t' << e.timestamp << '\t' << to_string(e.origin)
        << '\t' << e.round << '\n';
  }
}

inline void write_events_tsv(const SessionStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_events_tsv(store, out);
  out.flush();
  if (!out) throw Error("write failed for '" + path + "'");
}

inline std::string to_tsv(const SessionStore& store) {
  std::ostringstream os;
  write_events_tsv(store, os);
  return os.str();
}

// 64-bit FNV-1a over the canonical TSV serialization.
inline std::uint64_t fingerprint(const SessionStore& store) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : to_tsv(store)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct SynthConfig {
  std::size_t n_sessions{1000};
  std::size_t n_items{2000};
  std::size_t n_artists{20};
  double zipf_exponent{1.0};
  std::size_t session_len_min{2};
  std::size_t session_len_max{15};
  std::uint64_t rng_seed{42};

  void validate() const {
    if (n_sessions == 0) throw InvalidInput("n_sessions must be >= 1");
    if (n_items == 0) throw InvalidInput("n_items must be >= 1");
    if (n_artists == 0 || n_artists > n_items)
      throw InvalidInput("n_artists must be in [1, n_items]");
    if (!(zipf_exponent > 0.0) || !std::isfinite(zipf_exponent))
      throw InvalidInput("zipf_exponent must be a finite value > 0");
    if (session_len_min < 1 || session_len_min > session_len_max)
      throw InvalidInput("need 1 <= session_len_min <= session_len_max");
  }
};

// Inverse-CDF sampler over ranks 1..n with P(rank k) proportional to k^-s.
class ZipfTable {
 public:
  ZipfTable(std::size_t n, double exponent) : cdf_(n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += std::pow(static_cast<double>(k + 1), -exponent);
      cdf_[k] = acc;
    }
    for (double& c : cdf_) c /= acc;
    cdf_.back() = 1.0;
  }

  // 0-based rank for a uniform draw u in [0, 1).
  std::size_t rank(double u) const {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

// Item id k has popularity rank k + 1. One user per session; session s starts
// at timestamp s * 3600 with one event per minute.
inline Dataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();

  std::vector<ArtistId> artist_of(cfg.n_items);
  {
    RngStream rng(cfg.rng_seed, {static_cast<std::uint64_t>(StreamPurpose::kSynthetic), 0});
    for (auto& a : artist_of) a = ArtistId(static_cast<std::uint32_t>(rng.below(cfg.n_artists)));
  }

  Dataset ds;
  ds.store = SessionStore(std::move(artist_of), cfg.n_sessions);
  const ZipfTable zipf(cfg.n_items, cfg.zipf_exponent);
  const std::size_t span = cfg.session_len_max - cfg.session_len_min + 1;
  for (std::size_t s = 0; s < cfg.n_sessions; ++s) {
    RngStream rng(cfg.rng_seed, {static_cast<std::uint64_t>(StreamPurpose::kSynthetic), s + 1});
    const std::size_t len = cfg.session_len_min + rng.below(span);
    const auto base = static_cast<std::int64_t>(s) * 3600;
    for (std::size_t k = 0; k < len; ++k) {
      ds.store.add_organic_event(SessionId(s), UserId(s), ItemId(zipf.rank(rng.unit())),
                                 base + static_cast<std::int64_t>(k) * 60);
    }
  }
  ds.catalog = recompute_catalog(ds.store);
  return ds;
}

}  // namespace loopsim
