#include "spinheat/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace {

using namespace spinheat;
namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path("harness_test_out") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) fields.push_back(item);
    rows.push_back(fields);
  }
  return rows;
}

TEST(SampleConfigs, DeterministicAndUniform) {
  const auto lat = build_lattice({LatticeKind::chain, {4}, Boundary::open});
  const auto once = sample_configs(lat, 2, 5, 99);
  const auto twice = sample_configs(lat, 2, 5, 99);
  ASSERT_EQ(once.size(), 5u);
  for (std::size_t k = 0; k < once.size(); ++k)
    EXPECT_EQ(once[k].up_set(), twice[k].up_set());

  // full set when every spin is up
  for (const auto& cfg : sample_configs(lat, 4, 3, 7))
    EXPECT_EQ(cfg.up_set(), (std::vector<int>{0, 1, 2, 3}));

  // frequencies of the 6 two-site subsets stay near 1/6
  std::map<std::vector<int>, int> counts;
  const int trials = 10000;
  const auto samples = sample_configs(lat, 2, trials, 12345);
  for (const auto& cfg : samples) ++counts[cfg.up_set()];
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [subset, count] : counts)
    EXPECT_NEAR(count / static_cast<double>(trials), 1.0 / 6.0, 0.02);

  EXPECT_THROW(sample_configs(lat, 5, 1, 1), config_error);
  EXPECT_THROW(sample_configs(lat, 2, 0, 1), config_error);
}

TEST(Parsing, LatticeSpecs) {
  const LatticeSpec chain = parse_lattice("chain:10:periodic");
  EXPECT_EQ(chain.kind, LatticeKind::chain);
  EXPECT_EQ(chain.extents, (std::vector<int>{10}));
  EXPECT_EQ(chain.boundary, Boundary::periodic);
  EXPECT_EQ(chain.label(), "chain:10:periodic");

  const LatticeSpec box = parse_lattice("box3d:2:2:2:periodic");
  EXPECT_EQ(box.kind, LatticeKind::box3d);
  EXPECT_EQ(box.extents, (std::vector<int>{2, 2, 2}));

  EXPECT_THROW(parse_lattice("chain:10"), config_error);
  EXPECT_THROW(parse_lattice("blob:3:open"), config_error);
  EXPECT_THROW(parse_lattice("chain:x:open"), config_error);
  EXPECT_THROW(parse_lattice("box2d:3:periodic"), config_error);
}

TEST(Parsing, S0AndMuGrids) {
  EXPECT_EQ(parse_s0("block").mode, S0Mode::block);
  EXPECT_EQ(parse_s0("random").mode, S0Mode::random);
  EXPECT_EQ(parse_s0("random:20").count, 20);
  const S0Source expl = parse_s0("0,3,5");
  EXPECT_EQ(expl.mode, S0Mode::explicit_sites);
  EXPECT_EQ(expl.sites, (std::vector<int>{0, 3, 5}));
  EXPECT_THROW(parse_s0("0,a,5"), config_error);

  const MuGrid grid = parse_mu("0:10:0.25");
  EXPECT_TRUE(grid.set);
  const auto values = grid.linear_values();
  EXPECT_EQ(values.size(), 41u);
  EXPECT_DOUBLE_EQ(values.front(), 0.0);
  EXPECT_DOUBLE_EQ(values.back(), 10.0);

  const MuGrid single = parse_mu("1.5");
  EXPECT_EQ(single.linear_values(), (std::vector<double>{1.5}));

  const MuGrid geo = parse_mu_geometric("1e-3:1e-1:8");
  EXPECT_TRUE(geo.geometric);
  EXPECT_EQ(geo.geo_points, 8);
  EXPECT_THROW(parse_mu("1:2"), config_error);
  EXPECT_THROW(parse_mu_geometric("1:2"), config_error);
}

TEST(Config, JsonRoundTrip) {
  const fs::path dir = fresh_dir("config");
  ExperimentConfig cfg;
  cfg.suite = Suite::sweep;
  cfg.lattices = {parse_lattice("chain:10:periodic")};
  cfg.n_up = 5;
  cfg.s0 = parse_s0("random:3");
  cfg.mu = parse_mu("0:2:0.5");
  cfg.seed = 777;
  cfg.backend.backend = EvolveBackend::dense;

  const fs::path file = dir / "config.json";
  write_json(file, to_json(cfg));
  const ExperimentConfig loaded = load_config(file.string());
  EXPECT_EQ(loaded.suite, Suite::sweep);
  ASSERT_EQ(loaded.lattices.size(), 1u);
  EXPECT_EQ(loaded.lattices[0].label(), "chain:10:periodic");
  EXPECT_EQ(loaded.n_up, 5);
  EXPECT_EQ(loaded.s0.mode, S0Mode::random);
  EXPECT_EQ(loaded.s0.count, 3);
  EXPECT_EQ(loaded.seed, 777u);
  EXPECT_EQ(loaded.backend.backend, EvolveBackend::dense);

  EXPECT_THROW(load_config((dir / "missing.json").string()), config_error);
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_THROW(load_config((dir / "broken.json").string()), config_error);
}

TEST(RunVerify, TinyChainPassesWithExpectedRows) {
  const fs::path dir = fresh_dir("verify_tiny");
  ExperimentConfig cfg;
  cfg.suite = Suite::verify;
  cfg.lattices = {parse_lattice("chain:2:open")};
  cfg.s0 = parse_s0("0");
  cfg.mu = parse_mu("0.1:1.1:1.0");  // two grid points
  cfg.out_dir = dir.string();

  const RunResult result = run_verify(cfg);
  EXPECT_EQ(result.exit_code, kExitOk);
  EXPECT_EQ(result.summary["failures"], 0);

  // header + h1 + involution + commutation + 2 mu rows x 2 identities
  const auto rows = read_csv(dir / "verify.csv");
  ASSERT_EQ(rows.size(), 8u);
  int mu_rows = 0;
  for (const auto& row : rows)
    if (row[3] == "projection_heat" || row[3] == "q_expectation_symmetry")
      ++mu_rows;
  EXPECT_EQ(mu_rows, 4);

  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

TEST(RunVerify, DefaultFamilyIsWired) {
  const auto family = default_verify_family();
  ASSERT_EQ(family.size(), 10u);
  EXPECT_EQ(family.front().label(), "chain:6:open");
  EXPECT_EQ(family.back().label(), "box3d:2:2:2:periodic");
}

TEST(RunVerify, RejectsOversizedMagnonCount) {
  ExperimentConfig cfg;
  cfg.suite = Suite::verify;
  cfg.lattices = {parse_lattice("chain:4:open")};
  cfg.n_up = 9;
  cfg.out_dir = fresh_dir("verify_bad").string();
  EXPECT_THROW(run_verify(cfg), config_error);
}

TEST(RunSweep, TwoChainSummaryAndDeterminism) {
  ExperimentConfig cfg;
  cfg.suite = Suite::sweep;
  cfg.lattices = {parse_lattice("chain:2:open")};
  cfg.n_up = 1;
  cfg.s0 = parse_s0("0");
  cfg.mu = parse_mu("0:4:0.5");

  const fs::path dir1 = fresh_dir("sweep_a");
  cfg.out_dir = dir1.string();
  const RunResult first = run_sweep(cfg);
  EXPECT_EQ(first.exit_code, kExitOk);
  EXPECT_LE(first.summary["max_g1"].get<double>(), 1e-12);

  const fs::path dir2 = fresh_dir("sweep_b");
  cfg.out_dir = dir2.string();
  run_sweep(cfg);
  EXPECT_EQ(slurp(dir1 / "sweep.csv"), slurp(dir2 / "sweep.csv"));
  EXPECT_EQ(slurp(dir1 / "summary.json"), slurp(dir2 / "summary.json"));
}

TEST(RunSweep, SummaryMatchesCsvExtrema) {
  ExperimentConfig cfg;
  cfg.suite = Suite::sweep;
  cfg.lattices = {parse_lattice("chain:8:periodic")};
  cfg.n_up = 4;
  cfg.s0 = parse_s0("random:3");
  cfg.mu = parse_mu("0:3:0.5");
  cfg.seed = 5;
  const fs::path dir = fresh_dir("sweep_extrema");
  cfg.out_dir = dir.string();
  const RunResult result = run_sweep(cfg);

  const auto rows = read_csv(dir / "sweep.csv");
  ASSERT_GT(rows.size(), 1u);
  double max_g1 = 0.0, max_g2 = 0.0, max_g4 = 0.0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    max_g1 = std::max(max_g1, std::stod(rows[r][6]));
    max_g2 = std::max(max_g2, std::stod(rows[r][7]));
    max_g4 = std::max(max_g4, std::stod(rows[r][8]));
  }
  EXPECT_EQ(result.summary["max_g1"].get<double>(), max_g1);
  EXPECT_EQ(result.summary["max_g2"].get<double>(), max_g2);
  EXPECT_EQ(result.summary["max_g4"].get<double>(), max_g4);
}

TEST(RunSweep, SingleZeroGridGivesZeroMaxima) {
  ExperimentConfig cfg;
  cfg.suite = Suite::sweep;
  cfg.lattices = {parse_lattice("chain:6:periodic")};
  cfg.n_up = 3;
  cfg.s0 = parse_s0("block");
  cfg.mu = parse_mu("0");
  cfg.out_dir = fresh_dir("sweep_zero").string();
  const RunResult result = run_sweep(cfg);
  EXPECT_EQ(result.summary["max_g1"].get<double>(), 0.0);
  EXPECT_EQ(result.summary["max_g2"].get<double>(), 0.0);
  EXPECT_EQ(result.summary["max_g4"].get<double>(), 0.0);
}

TEST(RunRate, TwoChainReportsIdenticallyZero) {
  ExperimentConfig cfg;
  cfg.suite = Suite::rate;
  cfg.lattices = {parse_lattice("chain:2:open")};
  cfg.n_up = 1;
  cfg.s0 = parse_s0("0");
  cfg.out_dir = fresh_dir("rate_zero").string();
  const RunResult result = run_rate(cfg);
  EXPECT_EQ(result.exit_code, kExitOk);
  const auto& fit = result.summary["fits"][0];
  EXPECT_TRUE(fit["identically_zero"].get<bool>());
  EXPECT_EQ(fit["outcome"], "identically zero at this precision");
}

TEST(RunRate, RejectsLinearGrid) {
  ExperimentConfig cfg;
  cfg.suite = Suite::rate;
  cfg.lattices = {parse_lattice("chain:6:periodic")};
  cfg.mu = parse_mu("0:2:0.5");
  cfg.out_dir = fresh_dir("rate_linear").string();
  EXPECT_THROW(run_rate(cfg), config_error);
}

TEST(RunLocality, ZeroRowsBeyondEccentricityAndAtZeroTime) {
  ExperimentConfig cfg;
  cfg.suite = Suite::locality;
  cfg.lattices = {parse_lattice("chain:6:periodic")};
  cfg.n_up = 3;
  cfg.s0 = parse_s0("block");
  cfg.locality_site = 0;
  cfg.locality_radii = {3, 5};  // eccentricity of the 6-ring is 3
  cfg.locality_samples = 4;
  cfg.out_dir = fresh_dir("locality_far").string();
  const RunResult result = run_locality(cfg);
  EXPECT_EQ(result.exit_code, kExitOk);
  for (const auto& row : result.summary["probes"][0]["rows"])
    EXPECT_EQ(row["influence"].get<double>(), 0.0);

  cfg.locality_mu = 0.0;
  cfg.locality_radii = {1, 2};
  cfg.out_dir = fresh_dir("locality_mu0").string();
  const RunResult at_zero = run_locality(cfg);
  for (const auto& row : at_zero.summary["probes"][0]["rows"])
    EXPECT_LE(row["influence"].get<double>(), 1e-15);
}

TEST(RunAny, ResourceCeilingSurfaces) {
  ExperimentConfig cfg;
  cfg.suite = Suite::sweep;
  cfg.lattices = {parse_lattice("chain:10:periodic")};
  cfg.n_up = 5;
  cfg.s0 = parse_s0("block");
  cfg.mu = parse_mu("0:1:0.5");
  cfg.backend.amplitude_ceiling = 16;  // sector needs 252 amplitudes
  cfg.out_dir = fresh_dir("resource").string();
  EXPECT_THROW(run_sweep(cfg), resource_error);
}

TEST(Manifest, ListsOnlyExistingOutputs) {
  ExperimentConfig cfg;
  cfg.suite = Suite::sweep;
  cfg.lattices = {parse_lattice("chain:4:open")};
  cfg.n_up = 2;
  cfg.s0 = parse_s0("block");
  cfg.mu = parse_mu("0:1:0.5");
  const fs::path dir = fresh_dir("manifest");
  cfg.out_dir = dir.string();
  run_sweep(cfg);

  nlohmann::json manifest;
  std::ifstream(dir / "manifest.json") >> manifest;
  for (const auto& name : manifest["outputs"])
    EXPECT_TRUE(fs::exists(dir / name.get<std::string>()));
  EXPECT_EQ(manifest["version"], kVersion);
  EXPECT_TRUE(manifest.contains("timestamp"));
  EXPECT_TRUE(manifest["timings"].contains("sweep_seconds"));
}

}  // namespace
