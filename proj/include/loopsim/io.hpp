#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "loopsim/engine.hpp"

namespace loopsim {

// Shortest round-trip decimal form of a double.
inline std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

// ---------------------------------------------------------------------------
// Manifest JSON
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json config_to_json(const SimulationConfig& c) {
  nlohmann::ordered_json j;
  j["algorithm"] = std::string(to_string(c.algorithm));
  j["algorithm_params"] = {
      {"k_neighbors", c.params.sknn.k_neighbors},
      {"sample_size", c.params.sknn.sample_size == SknnParams::kNoSampling
                          ? 0
                          : c.params.sknn.sample_size},
      {"k_artists", c.params.cagh.k_artists},
      {"hits_per_artist", c.params.cagh.hits_per_artist},
  };
  j["rerank"] = std::string(to_string(c.rerank));
  j["rounds"] = c.rounds;
  j["playlist_len"] = c.playlist_len;
  j["accept_n"] = c.accept_n;
  j["retrain_every"] = c.retrain_every;
  j["metrics_k"] = c.metrics_k;
  j["candidate_pool"] = c.pool_size();
  j["rng_seed"] = c.rng_seed;
  return j;
}

inline SimulationConfig config_from_json(const nlohmann::ordered_json& j) {
  SimulationConfig c;
  c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  const auto& p = j.at("algorithm_params");
  c.params.sknn.k_neighbors = p.at("k_neighbors").get<std::size_t>();
  const auto sample = p.at("sample_size").get<std::size_t>();
  c.params.sknn.sample_size = sample == 0 ? SknnParams::kNoSampling : sample;
  c.params.cagh.k_artists = p.at("k_artists").get<std::size_t>();
  c.params.cagh.hits_per_artist = p.at("hits_per_artist").get<std::size_t>();
  c.rerank = parse_rerank(j.at("rerank").get<std::string>());
  c.rounds = j.at("rounds").get<int>();
  c.playlist_len = j.at("playlist_len").get<std::size_t>();
  c.accept_n = j.at("accept_n").get<std::size_t>();
  c.retrain_every = j.at("retrain_every").get<int>();
  c.metrics_k = j.at("metrics_k").get<std::size_t>();
  c.candidate_pool = j.at("candidate_pool").get<std::size_t>();
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return c;
}

inline nlohmann::ordered_json report_to_json(const RoundReport& r) {
  return {{"iteration", r.iteration}, {"round", r.round},
          {"gini", r.gini},           {"coverage", r.coverage},
          {"pop_abs", r.popularity_abs}, {"pop_rel", r.popularity_rel},
          {"precision", r.precision}, {"recall", r.recall},
          {"f1", r.f1}};
}

inline RoundReport report_from_json(const nlohmann::ordered_json& j) {
  RoundReport r;
  r.iteration = j.at("iteration").get<int>();
  r.round = j.at("round").get<int>();
  r.gini = j.at("gini").get<double>();
  r.coverage = j.at("coverage").get<std::size_t>();
  r.popularity_abs = j.at("pop_abs").get<double>();
  r.popularity_rel = j.at("pop_rel").get<double>();
  r.precision = j.at("precision").get<double>();
  r.recall = j.at("recall").get<double>();
  r.f1 = j.at("f1").get<double>();
  return r;
}

// Wall-clock timings are left out unless asked for, so that the default
// serialization is reproducible byte for byte.
inline std::string manifest_to_json(const RunManifest& m, bool include_timings = false) {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(m.config);
  j["dataset_fingerprint"] = m.dataset_fingerprint;
  j["initial_events"] = m.initial_events;
  j["final_events"] = m.final_events;
  j["organic_sessions"] = m.organic_sessions;
  auto reps = nlohmann::ordered_json::array();
  for (const auto& r : m.reports) reps.push_back(report_to_json(r));
  j["reports"] = std::move(reps);
  if (include_timings) {
    j["timings"] = {{"round_seconds", m.round_seconds}, {"total_seconds", m.total_seconds}};
  }
  return j.dump(2) + "\n";
}

inline RunManifest manifest_from_json(std::string_view text) {
  RunManifest m;
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    m.config = config_from_json(j.at("config"));
    m.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
    m.initial_events = j.at("initial_events").get<std::size_t>();
    m.final_events = j.at("final_events").get<std::size_t>();
    m.organic_sessions = j.at("organic_sessions").get<std::size_t>();
    for (const auto& r : j.at("reports")) m.reports.push_back(report_from_json(r));
    if (j.contains("timings")) {
      m.round_seconds = j["timings"].at("round_seconds").get<std::vector<double>>();
      m.total_seconds = j["timings"].at("total_seconds").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kReportCsvHeader =
    "iteration,gini,coverage,pop_abs,pop_rel,precision,recall,f1";

inline std::string reports_to_csv(std::span<const RoundReport> reports) {
  std::string out(kReportCsvHeader);
  out += '\n';
  for (const auto& r : reports) {
    out += std::to_string(r.iteration) + ',' + format_number(r.gini) + ',' +
           std::to_string(r.coverage) + ',' + format_number(r.popularity_abs) + ',' +
           format_number(r.popularity_rel) + ',' + format_number(r.precision) + ',' +
           format_number(r.recall) + ',' + format_number(r.f1) + '\n';
  }
  return out;
}

// One column group per run, then one delta group per run after the first.
inline std::string comparison_to_csv(const Comparison& cmp) {
  static constexpr std::string_view kFields[] = {"gini",      "coverage", "pop_abs", "pop_rel",
                                                 "precision", "recall",   "f1"};
  std::string out = "iteration";
  for (const auto& label : cmp.labels)
    for (auto f : kFields) out += "," + label + "_" + std::string(f);
  for (std::size_t r = 1; r < cmp.labels.size(); ++r)
    for (auto f : kFields) out += ",delta_" + cmp.labels[r] + "_" + std::string(f);
  out += '\n';

  for (std::size_t t = 0; t < cmp.iterations(); ++t) {
    out += std::to_string(t + 1);
    for (const auto& reps : cmp.reports) {
      const auto& r = reps[t];
      for (double v : {r.gini, static_cast<double>(r.coverage), r.popularity_abs, r.popularity_rel,
                       r.precision, r.recall, r.f1})
        out += "," + format_number(v);
    }
    for (std::size_t r = 1; r < cmp.deltas.size(); ++r) {
      const auto& d = cmp.deltas[r][t];
      for (double v : {d.gini, d.coverage, d.popularity_abs, d.popularity_rel, d.precision,
                       d.recall, d.f1})
        out += "," + format_number(v);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run configuration file
// ---------------------------------------------------------------------------

// Settings read from a `key = value` file. Lines starting with '#' and blank
// lines are ignored; unknown keys are rejected.
struct RunConfigFile {
  SimulationConfig sim;
  std::string dataset;
  std::string out;
};

namespace detail {

template <typename T>
T config_number(std::string_view value, const std::string& key) {
  T v{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || p != value.data() + value.size())
    throw InvalidInput("config: bad value '" + std::string(value) + "' for key '" + key + "'");
  return v;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

// Applies one setting; throws InvalidInput for unknown keys or bad values.
inline void apply_setting(RunConfigFile& cfg, const std::string& key, std::string_view value) {
  auto& s = cfg.sim;
  if (key == "dataset") {
    cfg.dataset = std::string(value);
  } else if (key == "out") {
    cfg.out = std::string(value);
  } else if (key == "algorithm") {
    s.algorithm = parse_algorithm(value);
  } else if (key == "rerank") {
    s.rerank = parse_rerank(value);
  } else if (key == "rounds") {
    s.rounds = detail::config_number<int>(value, key);
  } else if (key == "playlist_len") {
    s.playlist_len = detail::config_number<std::size_t>(value, key);
  } else if (key == "accept_n") {
    s.accept_n = detail::config_number<std::size_t>(value, key);
  } else if (key == "retrain_every") {
    s.retrain_every = detail::config_number<int>(value, key);
  } else if (key == "metrics_k") {
    s.metrics_k = detail::config_number<std::size_t>(value, key);
  } else if (key == "candidate_pool") {
    s.candidate_pool = detail::config_number<std::size_t>(value, key);
  } else if (key == "seed") {
    s.rng_seed = detail::config_number<std::uint64_t>(value, key);
  } else if (key == "k_neighbors") {
    s.params.sknn.k_neighbors = detail::config_number<std::size_t>(value, key);
  } else if (key == "sample_size") {
    const auto n = detail::config_number<std::size_t>(value, key);
    s.params.sknn.sample_size = n == 0 ? SknnParams::kNoSampling : n;
  } else if (key == "k_artists") {
    s.params.cagh.k_artists = detail::config_number<std::size_t>(value, key);
  } else if (key == "hits_per_artist") {
    s.params.cagh.hits_per_artist = detail::config_number<std::size_t>(value, key);
  } else {
    throw InvalidInput("config: unknown key '" + key + "'");
  }
}

inline RunConfigFile parse_run_config(std::istream& in) {
  RunConfigFile cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto l = detail::trim(line);
    if (l.empty() || l.front() == '#') continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(cfg, std::string(detail::trim(l.substr(0, eq))), detail::trim(l.substr(eq + 1)));
  }
  return cfg;
}

inline RunConfigFile parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config '" + path + "'");
  return parse_run_config(static_cast<std::istream&>(in));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace loopsim
