#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "levelstat/billiard.hpp"
#include "levelstat/ensembles.hpp"
#include "levelstat/error.hpp"
#include "levelstat/io.hpp"
#include "levelstat/parallel.hpp"
#include "levelstat/scattering.hpp"

using namespace levelstat;
using namespace levelstat::io;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("levelstat_test_io_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("doubles round-trip exactly") {
  Rng rng({3, 3});
  for (int i = 0; i < 20000; ++i) {
    const double v = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.below(200)) - 100);
    CHECK(same_bits(parse_double(format_double(v), "t", 1), v));
  }
  for (double v : {0.0, -0.0, 1.0, 0.1, 5e-324, 1.7976931348623157e308}) CHECK(same_bits(parse_double(format_double(v), "t", 1), v));
  CHECK(parse_double("+2.5", "t", 1) == 2.5);
  CHECK_THROWS_AS(parse_double("1.0x", "t", 1), ParseError);
  CHECK_THROWS_AS(parse_double("nan", "t", 1), ParseError);
  CHECK_THROWS_AS(parse_double("", "t", 1), ParseError);
  CHECK_THROWS_AS(format_double(INFINITY), DomainError);
  CHECK(parse_int("-42", "t", 1) == -42);
  CHECK_THROWS_AS(parse_int("4.2", "t", 1), ParseError);
}

TEST_CASE("resonance files") {
  const auto t = parse_resonances("# realization_id, frequency_ghz\n0,8.1\n0,8.2\n1,8.05\n", "mem");
  CHECK(t.rows.size() == 3);
  CHECK(t.realizations() == std::vector<std::int64_t>{0, 1});
  CHECK(t.sequence(0).size() == 2);
  CHECK_THROWS_AS(t.sequence(7), DataError);

  const auto w = parse_resonances("# realization_id,frequency_ghz,width_ghz\n0,8.1,0.001\n0,8.2,\n", "mem");
  CHECK(w.rows[0].width == 0.001);
  CHECK_FALSE(w.rows[1].width.has_value());

  try {
    parse_resonances("# realization_id,frequency_ghz\n0,8.2\n0,8.1\n", "bad.csv");
    FAIL("expected an ordering error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("bad.csv:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_resonances("# realization_id,frequency_ghz\n0,8.2\n0,8.2000000000001\n", "d"), DataError);
  try {
    parse_resonances("# realization_id,frequency_ghz\n0,8.2\n0,abc\n", "p.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_resonances("0,8.2\n", "h"), ParseError);
  CHECK_THROWS_AS(parse_resonances("# realization_id,frequency_ghz\n0,8.2,1\n", "f"), ParseError);

  const auto plain = parse_resonances("# levels\n1.5\n2.5\n\n3.5\n", "plain", ResonanceFormat::Plain);
  CHECK(plain.rows.size() == 3);
  CHECK(plain.rows[2].realization_id == 0);
}

TEST_CASE("billiard spectrum round-trips through a file") {
  const billiard::CavityGeometry g;
  const auto p = billiard::perturb_point_scatterers(g, {{{0.1, 0.07, 100.0}}}, {1.0, 13.5});
  const std::vector<LevelSequence> seqs{p.sequence(), billiard::rectangle_eigenfrequencies(g, 13.5)};
  const auto table = resonance_table(seqs);
  const auto path = scratch("res.csv");
  write_resonances(path, table);
  const auto back = ingest_resonances(path);
  REQUIRE(back.rows.size() == table.rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    CHECK(back.rows[i].realization_id == table.rows[i].realization_id);
    CHECK(same_bits(back.rows[i].frequency, table.rows[i].frequency));
  }
  CHECK(format_resonances(back) == format_resonances(table));
  fs::remove(path);
}

TEST_CASE("S-parameter tables") {
  const auto levels = ensembles::sample_daisy_levels(100, 1, {1, 1});
  const auto model = scattering::make_model(scattering::DiagonalLevels{levels}, 0.3, 0.3, {}, 1.0, 0.0);
  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(20.0 + 0.25 * i);
  std::vector<scattering::SMatrixSeries> series;
  for (std::uint64_t r = 0; r < 3; ++r) series.push_back(scattering::simulate_smatrix(model, grid, {8, r}));

  const auto table = sparam_table(series);
  CHECK(table.rows.size() == 600);
  const auto path = scratch("s.csv");
  write_sparams(path, table);
  const auto back = ingest_sparams(path).series();
  REQUIRE(back.size() == 3);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(back[r].realization_id == series[r].realization_id);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(same_bits(back[r].grid[i], grid[i]));
      CHECK(same_bits(back[r].entries[i].ab.imag(), series[r].entries[i].ab.imag()));
      CHECK(same_bits(back[r].entries[i].bb.real(), series[r].entries[i].bb.real()));
    }
  }
  fs::remove(path);

  const std::string header = "# realization_id,frequency_ghz,re_saa,im_saa,re_sab,im_sab,re_sba,im_sba,re_sbb,im_sbb\n";
  CHECK_THROWS_AS(parse_sparams(header + "0,1,1.5,0,0,0,0,0,0,0\n", "m"), DataError);
  CHECK_THROWS_AS(parse_sparams(header + "0,1,0,0,0,0,0,0,0,0\n0,1.1,0,0,0,0,0,0,0,0\n0,1.3,0,0,0,0,0,0,0,0\n", "g"),
                  DataError);
  CHECK_THROWS_AS(parse_sparams(header + "0,1,0,0,0,0,0,0,0\n", "n"), ParseError);
  CHECK_THROWS_AS(parse_sparams("# wrong\n", "h"), ParseError);
}

TEST_CASE("atomic writes replace the target") {
  const auto path = scratch("atomic.txt");
  write_atomic(path, "first");
  write_atomic(path, "second");
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text == "second");
  for (const auto& e : fs::directory_iterator(path.parent_path()))
    CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
  fs::remove_all(path.parent_path());
}
