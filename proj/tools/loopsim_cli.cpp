// loopsim: synthesize datasets, run feedback-loop simulations, compare runs.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "loopsim/loopsim.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct SynthOptions {
  loopsim::SynthConfig cfg;
  std::string out;
};

struct SimulateOptions {
  std::string config;
  std::string dataset;
  std::string out;
  std::string algorithm;
  std::string rerank;
  std::optional<int> rounds;
  std::optional<std::size_t> playlist_len;
  std::optional<std::size_t> accept_n;
  std::optional<int> retrain_every;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k_neighbors;
  std::optional<std::size_t> sample_size;
  std::optional<std::size_t> k_artists;
  std::optional<std::size_t> hits_per_artist;
  bool timings{false};
};

struct CompareOptions {
  std::vector<std::string> manifests;
  std::string out;
};

int run_synth(const SynthOptions& o) {
  try {
    o.cfg.validate();
  } catch (const loopsim::InvalidInput& e) {
    std::cerr << "synth: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    const auto ds = loopsim::generate_synthetic(o.cfg);
    if (o.out.empty() || o.out == "-") {
      loopsim::write_events_tsv(ds.store, std::cout);
    } else {
      loopsim::write_events_tsv(ds.store, o.out);
      std::cerr << "wrote " << ds.store.event_count() << " events in " << ds.store.session_count()
                << " sessions to " << o.out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "synth: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

int run_simulate(const SimulateOptions& o) {
  loopsim::RunConfigFile cfg;
  try {
    if (!o.config.empty()) cfg = loopsim::parse_run_config(o.config);
    if (!o.dataset.empty()) cfg.dataset = o.dataset;
    if (!o.out.empty()) cfg.out = o.out;
    auto set = [&](const char* key, const std::string& v) { loopsim::apply_setting(cfg, key, v); };
    if (!o.algorithm.empty()) set("algorithm", o.algorithm);
    if (!o.rerank.empty()) set("rerank", o.rerank);
    if (o.rounds) cfg.sim.rounds = *o.rounds;
    if (o.playlist_len) cfg.sim.playlist_len = *o.playlist_len;
    if (o.accept_n) cfg.sim.accept_n = *o.accept_n;
    if (o.retrain_every) cfg.sim.retrain_every = *o.retrain_every;
    if (o.seed) cfg.sim.rng_seed = *o.seed;
    if (o.k_neighbors) cfg.sim.params.sknn.k_neighbors = *o.k_neighbors;
    if (o.sample_size) set("sample_size", std::to_string(*o.sample_size));
    if (o.k_artists) cfg.sim.params.cagh.k_artists = *o.k_artists;
    if (o.hits_per_artist) cfg.sim.params.cagh.hits_per_artist = *o.hits_per_artist;
    if (cfg.dataset.empty()) throw loopsim::InvalidInput("no dataset given (--dataset or 'dataset =')");
    if (cfg.out.empty()) throw loopsim::InvalidInput("no output directory given (--out or 'out =')");
    cfg.sim.validate();
  } catch (const loopsim::Error& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return kExitUsage;
  }

  loopsim::Dataset ds;
  try {
    ds = loopsim::parse_events_tsv(cfg.dataset);
  } catch (const loopsim::ParseError& e) {
    std::cerr << "simulate: " << cfg.dataset << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const auto manifest = loopsim::run_simulation(ds.store, cfg.sim);
    std::filesystem::create_directories(cfg.out);
    const std::filesystem::path dir(cfg.out);
    loopsim::write_file((dir / "manifest.json").string(), loopsim::manifest_to_json(manifest));
    loopsim::write_file((dir / "report.csv").string(), loopsim::reports_to_csv(manifest.reports));
    if (o.timings) {
      nlohmann::ordered_json t;
      t["round_seconds"] = manifest.round_seconds;
      t["total_seconds"] = manifest.total_seconds;
      loopsim::write_file((dir / "timings.json").string(), t.dump(2) + "\n");
    }
    std::cerr << "wrote " << manifest.reports.size() << " reports to " << cfg.out << "\n";
  } catch (const loopsim::SimulationError& e) {
    std::cerr << "simulate: failed in " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "simulate: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

int run_compare(const CompareOptions& o) {
  std::vector<loopsim::RunManifest> runs;
  loopsim::Comparison cmp;
  try {
    for (const auto& path : o.manifests)
      runs.push_back(loopsim::manifest_from_json(loopsim::read_file(path)));
    cmp = loopsim::compare_runs(runs);
  } catch (const loopsim::Error& e) {
    std::cerr << "compare: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    const auto csv = loopsim::comparison_to_csv(cmp);
    if (o.out.empty() || o.out == "-") {
      std::cout << csv;
    } else {
      loopsim::write_file(o.out, csv);
    }
  } catch (const std::exception& e) {
    std::cerr << "compare: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Longitudinal feedback-loop simulator for session-based recommenders"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic Zipf session dataset (TSV)");
  synth_cmd->add_option("--sessions", synth.cfg.n_sessions, "Number of sessions")->capture_default_str();
  synth_cmd->add_option("--items", synth.cfg.n_items, "Number of items")->capture_default_str();
  synth_cmd->add_option("--artists", synth.cfg.n_artists, "Number of artists")->capture_default_str();
  synth_cmd->add_option("--zipf", synth.cfg.zipf_exponent, "Zipf exponent (> 0)")->capture_default_str();
  synth_cmd->add_option("--len-min", synth.cfg.session_len_min, "Minimum session length")->capture_default_str();
  synth_cmd->add_option("--len-max", synth.cfg.session_len_max, "Maximum session length")->capture_default_str();
  synth_cmd->add_option("--seed", synth.cfg.rng_seed, "RNG seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output TSV path ('-' for stdout)");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run one simulation; writes manifest.json and report.csv");
  sim_cmd->add_option("--config", sim.config, "key = value configuration file");
  sim_cmd->add_option("--dataset", sim.dataset, "Input TSV dataset");
  sim_cmd->add_option("--out", sim.out, "Output directory");
  sim_cmd->add_option("--algorithm", sim.algorithm, "sknn | cagh | markov | pop");
  sim_cmd->add_option("--rerank", sim.rerank, "none | strategy1 | strategy2");
  sim_cmd->add_option("--rounds", sim.rounds, "Simulation rounds (default 30)");
  sim_cmd->add_option("--playlist-len", sim.playlist_len, "Recommendations per seed (default 30)");
  sim_cmd->add_option("--accept-n", sim.accept_n, "Accepted tracks per playlist (default 10)");
  sim_cmd->add_option("--retrain-every", sim.retrain_every, "Rounds between refits (default 3)");
  sim_cmd->add_option("--seed", sim.seed, "Master RNG seed (default 42)");
  sim_cmd->add_option("--k-neighbors", sim.k_neighbors, "SKNN neighbors (default 100)");
  sim_cmd->add_option("--sample-size", sim.sample_size, "SKNN recent-session sample, 0 = all (default 1000)");
  sim_cmd->add_option("--k-artists", sim.k_artists, "CAGH similar artists (default 10)");
  sim_cmd->add_option("--hits-per-artist", sim.hits_per_artist, "CAGH hits per artist (default 20)");
  sim_cmd->add_flag("--timings", sim.timings, "Also write timings.json");

  CompareOptions cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Align several manifests by iteration into one CSV");
  cmp_cmd->add_option("manifests", cmp.manifests, "manifest.json files")->required();
  cmp_cmd->add_option("--out", cmp.out, "Output CSV path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*synth_cmd) return run_synth(synth);
  if (*sim_cmd) return run_simulate(sim);
  if (*cmp_cmd) return run_compare(cmp);
  return kExitUsage;
}
