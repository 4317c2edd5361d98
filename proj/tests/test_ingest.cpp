#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

#include "loopsim/loopsim.hpp"
#include "oracles.hpp"

using namespace loopsim;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_events_tsv(in);
}

std::string header() { return std::string(kTsvHeader) + "\n"; }

// Id-independent dump: per session (sorted by first timestamp), the user's
// first-seen rank and the list of (item-artist-label, timestamp, origin, round).
std::vector<std::string> canonical(const SessionStore& store) {
  std::vector<std::string> out;
  for (std::size_t s = 0; s < store.session_count(); ++s) {
    std::string line;
    for (std::size_t p : store.session_events(SessionId(s))) {
      const Event& e = store.events()[p];
      line += std::to_string(e.timestamp) + ":" + std::string(to_string(e.origin)) + ":" +
              std::to_string(e.round) + ";";
    }
    out.push_back(line);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::multiset<std::tuple<std::int64_t, int, std::uint32_t>> event_multiset(const SessionStore& s) {
  std::multiset<std::tuple<std::int64_t, int, std::uint32_t>> m;
  for (const Event& e : s.events())
    m.insert({e.timestamp, static_cast<int>(e.origin), recompute_catalog(s).playcount[e.item.index()]});
  return m;
}

}  // namespace

TEST(ParseTsv, ThreeLinesOneSession) {
  const auto ds = parse(header() +
                        "s1\tu1\ta\tx\t100\torganic\t0\n"
                        "s1\tu1\tb\tx\t101\torganic\t0\n"
                        "s1\tu1\tc\ty\t102\torganic\t0\n");
  EXPECT_EQ(ds.store.event_count(), 3u);
  EXPECT_EQ(ds.store.session_count(), 1u);
  EXPECT_EQ(ds.store.item_count(), 3u);
  EXPECT_EQ(ds.catalog.artist_count(), 2u);
  for (const Event& e : ds.store.events()) {
    EXPECT_EQ(e.origin, Origin::kOrganic);
    EXPECT_EQ(e.round, 0);
  }
}

TEST(ParseTsv, SharedItemPlaycount) {
  const auto ds = parse(header() +
                        "s1\tu1\tsong\tart\t1\torganic\t0\n"
                        "s2\tu2\tsong\tart\t2\torganic\t0\n");
  EXPECT_EQ(ds.catalog.playcount[0], 2u);
  EXPECT_EQ(ds.store.user_count(), 2u);
}

TEST(ParseTsv, AcceptsDuplicateTriples) {
  const auto ds = parse(header() +
                        "s1\tu1\ta\tx\t5\torganic\t0\n"
                        "s1\tu1\ta\tx\t5\torganic\t0\n");
  EXPECT_EQ(ds.store.event_count(), 2u);
}

TEST(ParseTsv, ReportsLineNumberOnMalformedInput) {
  try {
    parse(header() + "s1\tu1\ta\tx\t5\torganic\t0\n" + "s1\tu1\ta\tx\tnotanumber\torganic\t0\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse(header() + "s1\tu1\ta\tx\t5\torganic\n"), ParseError);
  EXPECT_THROW(parse(header() + "s1\tu1\ta\tx\t5\tbogus\t0\n"), ParseError);
  EXPECT_THROW(parse(header() + "s1\tu1\ta\tx\t5\torganic\t3\n"), ParseError);
  EXPECT_THROW(parse(header() + "s1\tu1\ta\tx\t-5\torganic\t0\n"), ParseError);
  EXPECT_THROW(parse(header() + "s1\tu1\ta\tx\t5\torganic\t0\textra\n"), ParseError);
  EXPECT_THROW(parse("wrong\theader\n"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse(header() + "s1\tu1\ta\tx\t1\torganic\t0\ns2\tu1\ta\ty\t2\torganic\t0\n"),
               ParseError);
}

TEST(WriteTsv, EmptyStoreIsHeaderOnly) {
  SessionStore store;
  EXPECT_EQ(to_tsv(store), header());
}

TEST(WriteTsv, SimulatedEventsCarryOriginColumn) {
  auto ds = generate_synthetic({.n_sessions = 3, .n_items = 10, .n_artists = 2});
  const ItemId items[] = {ItemId(1), ItemId(2)};
  ds.store.append_session(UserId(0), items, ds.store.max_timestamp() + 1, 4);
  const auto text = to_tsv(ds.store);
  EXPECT_NE(text.find("\tsimulated\t4\n"), std::string::npos);
  EXPECT_EQ(text.substr(0, kTsvHeader.size() + 1), header());
}

TEST(TsvRoundTrip, PreservesEventsAndGroupingUpToIds) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto ds = generate_synthetic(
        {.n_sessions = 40, .n_items = 60, .n_artists = 6, .zipf_exponent = 0.8, .rng_seed = seed});
    // Mix in simulated sessions.
    for (int k = 0; k < 5; ++k) {
      const ItemId items[] = {ItemId(static_cast<std::uint32_t>(k)), ItemId(7), ItemId(3)};
      ds.store.append_session(UserId(k), items, ds.store.max_timestamp() + 1, 1 + k % 2);
    }
    const auto back = parse(to_tsv(ds.store));
    EXPECT_EQ(back.store.event_count(), ds.store.event_count());
    EXPECT_EQ(back.store.session_count(), ds.store.session_count());
    EXPECT_EQ(canonical(back.store), canonical(ds.store));
    EXPECT_EQ(event_multiset(back.store), event_multiset(ds.store));
    // Dense ids written in store order re-intern to an identical file.
    EXPECT_EQ(to_tsv(parse(to_tsv(back.store)).store), to_tsv(back.store));
  }
}

TEST(Synthetic, SameConfigSameStore) {
  const SynthConfig cfg{.n_sessions = 200, .n_items = 300, .n_artists = 10, .rng_seed = 9};
  EXPECT_EQ(to_tsv(generate_synthetic(cfg).store), to_tsv(generate_synthetic(cfg).store));
  auto other = cfg;
  other.rng_seed = 10;
  EXPECT_NE(to_tsv(generate_synthetic(cfg).store), to_tsv(generate_synthetic(other).store));
}

TEST(Synthetic, ShapeAndArtistsAssigned) {
  const SynthConfig cfg{.n_sessions = 100, .n_items = 50, .n_artists = 5,
                        .session_len_min = 3, .session_len_max = 7};
  const auto ds = generate_synthetic(cfg);
  EXPECT_EQ(ds.store.session_count(), 100u);
  EXPECT_EQ(ds.catalog.size(), 50u);
  for (std::size_t s = 0; s < 100; ++s) {
    const auto n = ds.store.session_events(SessionId(s)).size();
    EXPECT_GE(n, 3u);
    EXPECT_LE(n, 7u);
  }
  for (ArtistId a : ds.catalog.artist_of) EXPECT_LT(a.value, 5u);
}

TEST(Synthetic, NearUniformExponentHasLowGini) {
  // 10^5 draws: 10^4 sessions of exactly 10 events.
  const SynthConfig cfg{.n_sessions = 10000, .n_items = 1000, .n_artists = 10,
                        .zipf_exponent = 0.01, .session_len_min = 10, .session_len_max = 10};
  const auto ds = generate_synthetic(cfg);
  ASSERT_EQ(ds.store.event_count(), 100000u);
  std::vector<double> freq(ds.catalog.playcount.begin(), ds.catalog.playcount.end());
  EXPECT_LT(gini(freq), 0.2);
  EXPECT_NEAR(gini(freq), oracle::gini_mad(freq), 1e-9);
}

TEST(Synthetic, SteepExponentFavoursTopRank) {
  const SynthConfig cfg{.n_sessions = 10000, .n_items = 1000, .n_artists = 10,
                        .zipf_exponent = 1.5, .session_len_min = 10, .session_len_max = 10};
  const auto ds = generate_synthetic(cfg);
  EXPECT_GT(ds.catalog.playcount[0], ds.catalog.playcount[99]);
  // Expected share of rank 1 is 1 / H(1000, 1.5) ~= 0.39.
  EXPECT_NEAR(static_cast<double>(ds.catalog.playcount[0]) / 1e5, 0.3880, 0.01);
}

TEST(Synthetic, RejectsInvalidConfig) {
  EXPECT_THROW(generate_synthetic({.zipf_exponent = 0.0}), InvalidInput);
  EXPECT_THROW(generate_synthetic({.zipf_exponent = -1.0}), InvalidInput);
  EXPECT_THROW(generate_synthetic({.n_items = 10, .n_artists = 11}), InvalidInput);
  EXPECT_THROW(generate_synthetic({.session_len_min = 5, .session_len_max = 4}), InvalidInput);
  EXPECT_THROW(generate_synthetic({.session_len_min = 0}), InvalidInput);
  EXPECT_THROW(generate_synthetic({.n_sessions = 0}), InvalidInput);
}

TEST(Fingerprint, TracksContent) {
  auto ds = generate_synthetic({.n_sessions = 10, .n_items = 20, .n_artists = 2});
  const auto f0 = fingerprint(ds.store);
  EXPECT_EQ(f0, fingerprint(generate_synthetic({.n_sessions = 10, .n_items = 20, .n_artists = 2}).store));
  const ItemId items[] = {ItemId(0)};
  ds.store.append_session(UserId(0), items, ds.store.max_timestamp() + 1, 1);
  EXPECT_NE(f0, fingerprint(ds.store));
}
