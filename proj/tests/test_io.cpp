#include <gtest/gtest.h>

#include <sstream>

#include "loopsim/loopsim.hpp"

using namespace loopsim;

namespace {

RunManifest sample_manifest() {
  RunManifest m;
  m.config.algorithm = Algorithm::kCagh;
  m.config.rerank = RerankStrategy::kStrategy2;
  m.config.rounds = 6;
  m.config.params.sknn.sample_size = SknnParams::kNoSampling;
  m.config.params.cagh.k_artists = 4;
  m.config.rng_seed = 1234567890123ULL;
  m.dataset_fingerprint = "deadbeef";
  m.initial_events = 10;
  m.final_events = 70;
  m.organic_sessions = 3;
  for (int t = 1; t <= 2; ++t)
    m.reports.push_back({t, 3 * t - 2, 0.1 * t + 1.0 / 3.0, static_cast<std::size_t>(10 + t), 2.5, -0.125,
                         0.3, 0.7, 0.42});
  return m;
}

}  // namespace

TEST(ManifestJson, RoundTripIsExact) {
  const auto m = sample_manifest();
  const auto text = manifest_to_json(m);
  const auto back = manifest_from_json(text);
  EXPECT_EQ(back.reports, m.reports);
  EXPECT_EQ(back.config.algorithm, Algorithm::kCagh);
  EXPECT_EQ(back.config.rerank, RerankStrategy::kStrategy2);
  EXPECT_EQ(back.config.params.sknn.sample_size, SknnParams::kNoSampling);
  EXPECT_EQ(back.config.params.cagh.k_artists, 4u);
  EXPECT_EQ(back.config.rng_seed, 1234567890123ULL);
  EXPECT_EQ(back.config.candidate_pool, 60u);
  EXPECT_EQ(back.dataset_fingerprint, "deadbeef");
  EXPECT_EQ(manifest_to_json(back), text);
}

TEST(ManifestJson, TimingsOnlyWhenRequested) {
  auto m = sample_manifest();
  m.round_seconds = {0.5, 0.25};
  m.total_seconds = 0.75;
  EXPECT_EQ(manifest_to_json(m).find("timings"), std::string::npos);
  const auto with = manifest_to_json(m, true);
  EXPECT_NE(with.find("timings"), std::string::npos);
  EXPECT_EQ(manifest_from_json(with).total_seconds, 0.75);
}

TEST(ManifestJson, MalformedInputRejected) {
  EXPECT_THROW(manifest_from_json("{"), InvalidInput);
  EXPECT_THROW(manifest_from_json("{}"), InvalidInput);
  EXPECT_THROW(manifest_from_json("[1,2]"), InvalidInput);
}

TEST(ReportCsv, HeaderAndRows) {
  const auto m = sample_manifest();
  const auto csv = reports_to_csv(m.reports);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kReportCsvHeader);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7);
  }
  EXPECT_EQ(rows, 2);
  EXPECT_NE(csv.find("\n1,0.43333333333333335,11,2.5,-0.125,0.3,0.7,0.42\n"), std::string::npos);
}

TEST(ComparisonCsv, ColumnGroupsPerRun) {
  const auto m = sample_manifest();
  const std::vector<RunManifest> runs{m, m};
  const auto csv = comparison_to_csv(compare_runs(runs));
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 7 * 3);
  EXPECT_NE(header.find("r0_cagh+strategy2_gini"), std::string::npos);
  EXPECT_NE(header.find("r1_cagh+strategy2_gini"), std::string::npos);
  EXPECT_NE(header.find("delta_r1_cagh+strategy2_f1"), std::string::npos);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(RunConfig, ParsesKeyValueFile) {
  std::istringstream in(
      "# desk run\n"
      "dataset = data/desk.tsv\n"
      "out=runs/a\n"
      "algorithm = markov\n"
      "rerank = strategy1\n"
      "\n"
      "rounds = 12\n"
      "seed = 7\n"
      "sample_size = 0\n"
      "hits_per_artist = 5\n");
  const auto cfg = parse_run_config(in);
  EXPECT_EQ(cfg.dataset, "data/desk.tsv");
  EXPECT_EQ(cfg.out, "runs/a");
  EXPECT_EQ(cfg.sim.algorithm, Algorithm::kMarkov);
  EXPECT_EQ(cfg.sim.rerank, RerankStrategy::kStrategy1);
  EXPECT_EQ(cfg.sim.rounds, 12);
  EXPECT_EQ(cfg.sim.rng_seed, 7u);
  EXPECT_EQ(cfg.sim.params.sknn.sample_size, SknnParams::kNoSampling);
  EXPECT_EQ(cfg.sim.params.cagh.hits_per_artist, 5u);
  EXPECT_EQ(cfg.sim.playlist_len, 30u);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  std::istringstream unknown("dataset = x\nlearning_rate = 0.1\n");
  EXPECT_THROW(parse_run_config(unknown), InvalidInput);
  std::istringstream bad("rounds = ten\n");
  EXPECT_THROW(parse_run_config(bad), InvalidInput);
  std::istringstream noeq("rounds 10\n");
  EXPECT_THROW(parse_run_config(noeq), InvalidInput);
  std::istringstream alg("algorithm = gru\n");
  EXPECT_THROW(parse_run_config(alg), InvalidInput);
}
