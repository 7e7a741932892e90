#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>
#include <unistd.h>

#include "levelstat/config.hpp"
#include "levelstat/error.hpp"
#include "levelstat/io.hpp"
#include "levelstat/pipeline.hpp"

using namespace levelstat;
using namespace levelstat::pipeline;
namespace fs = std::filesystem;

namespace {

config::AnalysisConfig small() {
  config::AnalysisConfig c;
  c.ensemble_count = 3000;
  c.powerspec_n = 128;
  c.powerspec_sequences = 40;
  c.calibration_sequences = 200;
  c.length_steps = 1;
  c.bootstrap_resamples = 20;
  c.eef_realizations = 12;
  c.band_low_ghz = 8.0;
  c.band_high_ghz = 9.0;
  c.margin_ghz = 0.3;
  c.eef_grid_step_ghz = 0.0025;
  c.gamma_points = 20;
  return c;
}

fs::path scratch(const std::string& name) {
  return fs::temp_directory_path() / ("levelstat_test_pipeline_" + std::to_string(::getpid())) / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("every subcommand produces a consistent bundle") {
  const auto c = small();
  for (const auto& sub : subcommands()) {
    CAPTURE(sub);
    const auto b = run_pipeline(c, sub);
    CHECK(b.subcommand == sub);
    CHECK_FALSE(b.tables.empty());
    const auto manifest = nlohmann::json::parse(b.manifest_json());
    CHECK(manifest["subcommand"] == sub);
    std::set<std::string> names;
    for (const auto& t : b.tables) {
      CHECK(names.insert(t.name).second);
      for (const auto& row : t.rows) CHECK(row.size() == t.columns.size());
    }
    CHECK(manifest["tables"].size() == b.tables.size());
    for (const auto& t : manifest["tables"]) {
      CHECK(names.count(t["name"].get<std::string>()) == 1);
      CHECK(t.contains("operation"));
      CHECK(t.contains("provenance"));
    }
    CHECK(manifest["config"]["seed_master"] == "20240501");
  }
  CHECK_THROWS_AS(run_pipeline(c, "plot"), ConfigError);
}

TEST_CASE("eef-theory table is monotone from 3 toward 2.5") {
  const auto b = run_pipeline(config::AnalysisConfig{}, "eef-theory");
  const auto& t = b.table("eef_semi_poisson");
  CHECK(t.rows.front()[1] > 2.99);
  CHECK(t.rows.back()[1] < 2.51);
  for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(t.rows[i][1] < t.rows[i - 1][1]);
}

TEST_CASE("nnsd on generated semi-Poisson levels") {
  auto c = small();
  c.ensemble_count = 20000;
  const auto b = run_pipeline(c, "nnsd");
  CHECK(std::abs(b.result("nnsd.eta") - 2.0) < 0.1);
  CHECK(b.result("nnsd.ks_poisson") > 0.1);
  CHECK(b.table("nnsd_histogram").provenance == Provenance::Estimate);
  CHECK(b.table("nnsd_semi_poisson").provenance == Provenance::Theory);
}

TEST_CASE("bundles are deterministic and written atomically") {
  const auto c = small();
  const auto a = run_pipeline(c, "full-report");
  const auto b = run_pipeline(c, "full-report");
  CHECK(a.manifest_json() == b.manifest_json());
  const auto da = scratch("a"), db = scratch("b");
  a.write(da);
  b.write(db);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(da)) {
    ++files;
    CHECK(slurp(e.path()) == slurp(db / e.path().filename()));
  }
  CHECK(files == a.tables.size() + a.files.size() + 1);
  auto other = c;
  other.seed_master += 1;
  CHECK(run_pipeline(other, "generate").manifest_json() != run_pipeline(c, "generate").manifest_json());
  fs::remove_all(da.parent_path());
}

TEST_CASE("ingested S-parameters give the in-memory curve") {
  auto c = small();
  c.write_sparams = true;
  const auto mem = run_pipeline(c, "eef-sim");
  REQUIRE(mem.files.size() == 1);
  const auto path = scratch("sparams.csv");
  fs::create_directories(path.parent_path());
  io::write_atomic(path, mem.files[0].second);
  auto from_file = small();
  from_file.sparam_file = path.string();
  const auto ing = run_pipeline(from_file, "eef-sim");
  CHECK(ing.table("eef_curve").rows == mem.table("eef_curve").rows);
  fs::remove_all(path.parent_path());
}

TEST_CASE("levels from a resonance file") {
  const auto gen = run_pipeline(small(), "generate");
  const auto& t = gen.table("levels");
  io::ResonanceTable res;
  for (const auto& row : t.rows) res.rows.push_back({0, row.back(), std::nullopt});
  const auto path = scratch("levels.csv");
  fs::create_directories(path.parent_path());
  io::write_resonances(path, res);
  auto c = small();
  c.level_source = "file";
  c.resonance_file = path.string();
  const auto b = run_pipeline(c, "nnsd");
  CHECK(std::abs(b.result("nnsd.eta") - run_pipeline(small(), "nnsd").result("nnsd.eta")) < 0.05);
  fs::remove_all(path.parent_path());
}

TEST_CASE("two-scatterer billiard sweep is far from Poisson") {
  auto c = small();
  c.level_source = "billiard";
  c.band_low_ghz = 8.0;
  c.band_high_ghz = 13.5;
  c.length_steps = 25;
  const auto b = run_pipeline(c, "nnsd");
  CHECK(b.result("nnsd.eta") > 1.5);
  CHECK(b.result("nnsd.ks_poisson") > 0.1);
}
