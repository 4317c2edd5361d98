#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "loopsim/dataset.hpp"
#include "loopsim/ingest.hpp"
#include "loopsim/metrics.hpp"
#include "loopsim/recommenders.hpp"
#include "loopsim/reranking.hpp"
#include "loopsim/rng.hpp"

namespace loopsim {

struct SimulationConfig {
  Algorithm algorithm{Algorithm::kSknn};
  AlgorithmParams params;
  RerankStrategy rerank{RerankStrategy::kNone};
  int rounds{30};
  std::size_t playlist_len{30};
  std::size_t accept_n{10};
  int retrain_every{3};
  std::size_t metrics_k{10};
  // Candidates requested per seed before re-ranking; the re-ranked list is
  // truncated back to playlist_len, so penalized items can leave the
  // playlist. 0 means 2 * playlist_len.
  std::size_t candidate_pool{0};
  std::uint64_t rng_seed{42};
  // Worker threads; 0 means "use LOOPSIM_THREADS or the hardware count".
  // Results do not depend on this value.
  unsigned threads{0};

  void validate() const {
    if (rounds < 1) throw InvalidInput("rounds must be >= 1");
    if (retrain_every < 1) throw InvalidInput("retrain_every must be >= 1");
    if (playlist_len < 1) throw InvalidInput("playlist_len must be >= 1");
    if (accept_n > playlist_len) throw InvalidInput("accept_n must not exceed playlist_len");
    if (metrics_k < 1) throw InvalidInput("metrics_k must be >= 1");
    if (candidate_pool != 0 && candidate_pool < playlist_len)
      throw InvalidInput("candidate_pool must be 0 or >= playlist_len");
    params.sknn.validate();
    params.cagh.validate();
  }

  std::size_t pool_size() const { return candidate_pool == 0 ? 2 * playlist_len : candidate_pool; }

  // Number of RoundReports a run produces.
  int measurement_count() const { return (rounds + retrain_every - 1) / retrain_every; }
};

struct RunManifest {
  SimulationConfig config;
  std::string dataset_fingerprint;  // hex FNV-1a of the input TSV serialization
  std::size_t initial_events{0};
  std::size_t final_events{0};
  std::size_t organic_sessions{0};
  std::vector<RoundReport> reports;
  // Wall-clock seconds per round; not part of the deterministic output.
  std::vector<double> round_seconds;
  double total_seconds{0.0};
};

// Thrown when a round fails; carries the failing round number.
class SimulationError : public Error {
 public:
  SimulationError(int round, const std::string& what)
      : Error("round " + std::to_string(round) + ": " + what), round_(round) {}
  int round() const { return round_; }

 private:
  int round_;
};

inline unsigned worker_threads(unsigned requested) {
  unsigned n = requested;
  if (n == 0) {
    n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("LOOPSIM_THREADS")) {
      unsigned cap = 0;
      std::string_view s(env);
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
      if (ec == std::errc{} && p == s.data() + s.size() && cap > 0) n = cap;
    }
  }
  return n;
}

// Runs fn(i) for i in [0, n) over contiguous chunks. fn must only write to
// slots owned by i.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        const std::size_t lo = n * t / threads;
        const std::size_t hi = n * (t + 1) / threads;
        try {
          for (std::size_t i = lo; i < hi; ++i) fn(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct SeedAssignment {
  SessionId session;
  ItemId item;
};

inline std::vector<SessionId> organic_sessions(const SessionStore& store) {
  std::vector<SessionId> out;
  for (std::size_t s = 0; s < store.session_count(); ++s)
    if (store.is_organic(SessionId(s))) out.push_back(SessionId(s));
  return out;
}

// One uniformly drawn track per organic session, from a stream keyed by
// (round, session).
inline std::vector<SeedAssignment> select_seeds(const SessionStore& store, std::uint64_t master_seed,
                                                int round) {
  std::vector<SeedAssignment> seeds;
  for (SessionId s : organic_sessions(store)) {
    const auto items = session_items(store, s);
    if (items.empty()) continue;
    RngStream rng(master_seed, {static_cast<std::uint64_t>(StreamPurpose::kSeed),
                                static_cast<std::uint64_t>(round), s.value});
    seeds.push_back({s, items[rng.below(items.size())]});
  }
  if (seeds.empty()) throw EmptyDataset("select_seeds: store has no organic sessions");
  return seeds;
}

// Uniform sample without replacement of min(accept_n, |list|) items,
// returned in list order.
inline std::vector<ItemId> accept_tracks(const RecommendationList& list, std::size_t accept_n,
                                         RngStream& rng) {
  const std::size_t n = list.items.size();
  const std::size_t m = std::min(accept_n, n);
  // Partial Fisher-Yates over positions.
  std::vector<std::size_t> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = i;
  for (std::size_t i = 0; i < m; ++i) std::swap(pos[i], pos[i + rng.below(n - i)]);
  pos.resize(m);
  std::sort(pos.begin(), pos.end());
  std::vector<ItemId> out;
  out.reserve(m);
  for (std::size_t p : pos) out.push_back(list.items[p].item);
  return out;
}

// Per-round hook for tests and progress reporting.
struct RoundObserver {
  std::function<void(int round, const SessionStore&)> after_round;
};

// Runs the generate / accept / retrain loop on `store`, which grows by one
// simulated session per organic session and round (seed + accepted tracks).
// With accept_n == 0 nothing is appended.
//
// Each round: refit when (round - 1) % retrain_every == 0, draw fresh seeds,
// recommend playlist_len tracks per seed, re-rank, measure in rounds that
// follow a refit, accept tracks, append sessions, update re-rank state.
// Measurements always query the round-1 seed assignment.
inline RunManifest run_simulation(SessionStore& store, const SimulationConfig& config,
                                  const RoundObserver& observer = {}) {
  config.validate();
  using clock = std::chrono::steady_clock;
  const auto run_start = clock::now();
  const unsigned threads = worker_threads(config.threads);

  RunManifest manifest;
  manifest.config = config;
  {
    std::ostringstream hex;
    hex << std::hex << fingerprint(store);
    manifest.dataset_fingerprint = hex.str();
  }
  manifest.initial_events = store.event_count();

  std::vector<SeedAssignment> measure_seeds;
  std::vector<std::unordered_set<ItemId>> relevant;
  std::vector<ItemId> measure_seed_items;
  std::unique_ptr<Model> model;
  ItemCatalog catalog;
  RerankState state;

  auto recommend_all = [&](const std::vector<SeedAssignment>& seeds) {
    std::vector<RecommendationList> lists(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t j) {
      const ItemId seed[] = {seeds[j].item};
      auto list = model->recommend(seed, config.pool_size());
      list.seed_session = seeds[j].session;
      list = rerank(list, config.rerank, state, store.user_of(seeds[j].session));
      if (list.items.size() > config.playlist_len) list.items.resize(config.playlist_len);
      lists[j] = std::move(list);
    });
    return lists;
  };

  for (int round = 1; round <= config.rounds; ++round) {
    const auto round_start = clock::now();
    try {
      const bool refit = (round - 1) % config.retrain_every == 0;
      if (refit) {
        catalog = recompute_catalog(store);
        model = fit_model(config.algorithm, config.params, store, catalog);
      }

      const auto seeds = select_seeds(store, config.rng_seed, round);
      const auto lists = recommend_all(seeds);

      if (round == 1) {
        measure_seeds = seeds;
        manifest.organic_sessions = seeds.size();
        for (const auto& sa : seeds) {
          measure_seed_items.push_back(sa.item);
          std::unordered_set<ItemId> rel;
          for (ItemId i : session_items(store, sa.session))
            if (i != sa.item) rel.insert(i);
          relevant.push_back(std::move(rel));
        }
      }

      if (refit) {
        const auto measured = round == 1 ? lists : recommend_all(measure_seeds);
        RoundReport rep = measure(measured, measure_seed_items, relevant, catalog, config.metrics_k);
        rep.iteration = static_cast<int>(manifest.reports.size()) + 1;
        rep.round = round;
        manifest.reports.push_back(rep);
      }

      std::vector<Acceptance> accepted(seeds.size());
      parallel_for(seeds.size(), threads, [&](std::size_t j) {
        RngStream rng(config.rng_seed, {static_cast<std::uint64_t>(StreamPurpose::kAccept),
                                        static_cast<std::uint64_t>(round), seeds[j].session.value});
        accepted[j].user = store.user_of(seeds[j].session);
        accepted[j].items = accept_tracks(lists[j], config.accept_n, rng);
      });

      if (config.accept_n > 0) {
        for (std::size_t j = 0; j < seeds.size(); ++j) {
          std::vector<ItemId> session{seeds[j].item};
          session.insert(session.end(), accepted[j].items.begin(), accepted[j].items.end());
          store.append_session(accepted[j].user, session, store.max_timestamp() + 1, round);
        }
      }
      state.update_after_round(lists, accepted);
    } catch (const SimulationError&) {
      throw;
    } catch (const std::exception& e) {
      throw SimulationError(round, e.what());
    }
    manifest.round_seconds.push_back(
        std::chrono::duration<double>(clock::now() - round_start).count());
    if (observer.after_round) observer.after_round(round, store);
  }

  manifest.final_events = store.event_count();
  manifest.total_seconds = std::chrono::duration<double>(clock::now() - run_start).count();
  return manifest;
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

struct ReportDelta {
  double gini{0.0};
  double coverage{0.0};
  double popularity_abs{0.0};
  double popularity_rel{0.0};
  double precision{0.0};
  double recall{0.0};
  double f1{0.0};

  friend bool operator==(const ReportDelta&, const ReportDelta&) = default;
};

inline ReportDelta operator-(const RoundReport& a, const RoundReport& b) {
  return {a.gini - b.gini,
          static_cast<double>(a.coverage) - static_cast<double>(b.coverage),
          a.popularity_abs - b.popularity_abs,
          a.popularity_rel - b.popularity_rel,
          a.precision - b.precision,
          a.recall - b.recall,
          a.f1 - b.f1};
}

// Reports of several runs aligned by iteration. deltas[r][t] is run r minus
// run 0 at iteration t (deltas[0] is all zeros).
struct Comparison {
  std::vector<std::string> labels;
  std::vector<std::vector<RoundReport>> reports;
  std::vector<std::vector<ReportDelta>> deltas;

  std::size_t iterations() const { return reports.empty() ? 0 : reports.front().size(); }
};

inline std::string run_label(const RunManifest& m) {
  std::string s(to_string(m.config.algorithm));
  if (m.config.rerank != RerankStrategy::kNone) s += "+" + std::string(to_string(m.config.rerank));
  return s;
}

inline Comparison compare_runs(std::span<const RunManifest> manifests) {
  if (manifests.empty()) throw InvalidInput("compare_runs: no runs given");
  const auto& ref = manifests.front();
  Comparison cmp;
  for (std::size_t r = 0; r < manifests.size(); ++r) {
    const auto& m = manifests[r];
    if (m.config.rounds != ref.config.rounds || m.config.retrain_every != ref.config.retrain_every ||
        m.reports.size() != ref.reports.size())
      throw InvalidInput("compare_runs: run " + std::to_string(r) +
                         " has a different round schedule than run 0");
    cmp.labels.push_back("r" + std::to_string(r) + "_" + run_label(m));
    cmp.reports.push_back(m.reports);
    std::vector<ReportDelta> d;
    for (std::size_t t = 0; t < m.reports.size(); ++t) d.push_back(m.reports[t] - ref.reports[t]);
    cmp.deltas.push_back(std::move(d));
  }
  return cmp;
}

}  // namespace loopsim
