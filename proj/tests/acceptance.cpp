// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "levelstat/billiard.hpp"
#include "levelstat/config.hpp"
#include "levelstat/ensembles.hpp"
#include "levelstat/io.hpp"
#include "levelstat/parallel.hpp"
#include "levelstat/pipeline.hpp"
#include "levelstat/scattering.hpp"
#include "levelstat/special.hpp"
#include "levelstat/stats.hpp"
#include "levelstat/unfolding.hpp"
#include "oracles.hpp"

using namespace levelstat;
using stats::FormFactorKind;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [failed]");
  }
};

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<double> spacings_of(const LevelSequence& seq, std::size_t order = 1) {
  return unfolding::spacings(unfolding::rescale_unit_mean(seq), order);
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return g;
}

void eta_recovery(Outcome& o) {
  const auto sp = spacings_of(ensembles::sample_gamma_levels({StatKind::SemiPoisson, 100001, 2.0, 0}, {101, 1}));
  const auto po = spacings_of(ensembles::sample_gamma_levels({StatKind::Poisson, 100001, 1.0, 0}, {101, 2}));
  const auto paper = spacings_of(ensembles::sample_gamma_levels({StatKind::SemiPoisson, 9225, 2.0, 0}, {101, 3}));
  const auto fsp = stats::fit_eta(sp), fpo = stats::fit_eta(po), fpaper = stats::fit_eta(paper);
  o.require(fsp.eta >= 1.97 && fsp.eta <= 2.03, "semi-Poisson eta " + num(fsp.eta));
  o.require(fpo.eta >= 0.97 && fpo.eta <= 1.03, "Poisson eta " + num(fpo.eta));
  o.require(fpaper.count == 9224 && fpaper.std_error <= 0.05,
            "eta " + num(fpaper.eta) + " +- " + num(fpaper.std_error) + " at " + std::to_string(fpaper.count));
}

void distribution_matching(Outcome& o) {
  const auto daisy = ensembles::sample_daisy_levels(1000001, 1, {102, 1});
  const auto s1 = spacings_of(daisy, 1);
  const auto s2 = spacings_of(daisy, 2);
  const double ks1 = stats::gof_distance(
      s1, [](double s) { return stats::theory_integrated_nnsd(stats::SpacingLaw::semi_poisson(), s); });
  const double ks2 = stats::gof_distance(s2, stats::theory_integrated_second_nnsd);
  const auto po = spacings_of(ensembles::sample_gamma_levels({StatKind::Poisson, 1000001, 1.0, 0}, {102, 2}));
  const double ks_po = stats::gof_distance(
      po, [](double s) { return stats::theory_integrated_nnsd(stats::SpacingLaw::semi_poisson(), s); });
  o.require(s1.size() == 1000000 && ks1 < 0.005, "KS nnsd " + num(ks1, 3));
  o.require(ks2 < 0.005, "KS second nnsd " + num(ks2, 3));
  o.require(ks_po > 0.1, "KS Poisson vs semi-Poisson " + num(ks_po, 3));
}

void power_spectrum(Outcome& o) {
  const std::size_t n = 512;
  const auto sp = stats::ensemble_power_spectrum(FormFactorKind::SemiPoisson, n, 1000, {103, 1});
  const auto po = stats::ensemble_power_spectrum(FormFactorKind::Poisson, n, 1000, {103, 2});
  const double rms = stats::relative_rms_deviation(sp, FormFactorKind::SemiPoisson, stats::kSemiPoissonDeltaOffset, 1, n / 4);
  double a = 0.0, b = 0.0;
  for (std::size_t k = 1; k <= n / 64; ++k) {
    a += sp.at(k);
    b += po.at(k);
  }
  o.require(rms < 0.05, "relative RMS " + num(100.0 * rms, 3) + "% at delta " + num(stats::kSemiPoissonDeltaOffset));
  o.require(std::abs(a / b - 0.5) <= 0.05, "small-k ratio " + num(a / b, 4));
}

void closed_vs_quadrature(Outcome& o) {
  double worst = 0.0;
  for (double g : log_grid(1e-3, 1e3, 50)) {
    const double q = scattering::eef_theory_integral(FormFactorKind::SemiPoisson, g);
    worst = std::max(worst, std::abs(scattering::eef_theory_sp_closed(g) - q) / q);
  }
  o.require(worst < 1e-8, "max relative difference " + num(worst, 3));
}

void limits(Outcome& o) {
  const double lo = scattering::eef_theory_sp_closed(1e-6);
  const double hi = scattering::eef_theory_sp_closed(1e6);
  o.require(std::abs(lo - 3.0) < 1e-4, "F(1e-6) = " + num(lo, 10));
  o.require(std::abs(hi - 2.5) < 1e-3, "F(1e6) = " + num(hi, 10));
  const auto grid = log_grid(1e-3, 1e3, 50);
  bool decreasing = true;
  for (std::size_t i = 1; i < grid.size(); ++i)
    decreasing &= scattering::eef_theory_sp_closed(grid[i]) < scattering::eef_theory_sp_closed(grid[i - 1]);
  o.require(decreasing, "strictly decreasing on the 50-point grid");
}

void goe_saturation(Outcome& o) {
  const double f50 = scattering::eef_theory_goe(50.0);
  o.require(f50 >= 2.0 && f50 <= 2.05, "F_GOE(50) = " + num(f50));

  // Energies in units of the mean spacing; 50 parasitic channels give gamma_tot = 20.
  const std::size_t dim = 400, realizations = 200;
  const auto parasitic = scattering::calibrate_parasitic(50, 0.2, 0.2, 100.0, 20.0, 300.0, 20.0 * (1 + 1e-9));
  const auto model = scattering::make_model(scattering::GoeSource{dim}, 0.2, 0.2, parasitic, 1.0, 0.0);
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(100.0 + 0.5 * i);
  std::vector<scattering::SMatrixSeries> ens(realizations);
  parallel_for(realizations, [&](std::size_t r) { ens[r] = scattering::simulate_smatrix(model, grid, RandomSeed{106, 0}.child(r)); });
  const auto curve = scattering::eef_estimate(ens, {10.0, 100.0, 100.0},
                                              [&](double nu) { return parasitic.gamma_internal(nu); });
  o.require(!curve.points.empty(), std::to_string(curve.points.size()) + " curve points");
  for (const auto& p : curve.points) {
    const double th = scattering::eef_theory_goe(p.gamma_tot);
    o.require(std::abs(p.f_value - th) <= 0.15,
              "gamma " + num(p.gamma_tot, 4) + ": F " + num(p.f_value, 4) + " vs " + num(th, 4));
  }
}

void semi_poisson_end_to_end(Outcome& o) {
  const config::AnalysisConfig c;  // cavity band 8 to 13.5 GHz, gamma_tot 1.5 to 4
  const auto bundle = pipeline::run_pipeline(c, "eef-sim");
  const auto& t = bundle.table("eef_curve");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < t.columns.size(); ++i) col[t.columns[i]] = i;
  std::size_t inside = 0;
  for (const auto& row : t.rows) {
    const double g = row[col.at("gamma_tot")];
    const double th = scattering::eef_theory_sp_closed(g);
    const double slope = (scattering::eef_theory_sp_closed(g * 1.001) - scattering::eef_theory_sp_closed(g * 0.999)) /
                         (0.002 * g);
    const double sigma = std::hypot(row[col.at("std_dev")], slope * row[col.at("gamma_std")]);
    if (std::abs(row[col.at("f")] - th) <= 2.0 * sigma) ++inside;
  }
  const double frac = t.rows.empty() ? 0.0 : static_cast<double>(inside) / static_cast<double>(t.rows.size());
  const double g_lo = t.rows.front()[col.at("gamma_tot")], g_hi = t.rows.back()[col.at("gamma_tot")];
  o.require(g_lo > 1.3 && g_hi < 4.2 && g_hi > 3.5, "gamma_tot " + num(g_lo, 3) + " to " + num(g_hi, 3));
  o.require(frac >= 0.9, std::to_string(inside) + "/" + std::to_string(t.rows.size()) + " windows within 2 sigma");
}

void special_functions(Outcome& o) {
  double low = 0.0, high = 0.0, deriv = 0.0;
  for (double x : log_grid(1e-6, 50.0, 800)) {
    const auto a = sici(x);
    const auto b = test::sici_oracle(x);
    low = std::max({low, std::abs(a.si - b.si), std::abs(a.ci - b.ci)});
  }
  for (double x : log_grid(50.0 * (1 + 1e-12), 1e4, 400)) {
    const auto a = sici(x);
    const auto b = test::sici_oracle(x);
    high = std::max({high, std::abs(a.si - b.si), std::abs(a.ci - b.ci)});
  }
  const double h = 1e-5;
  for (double x = 0.5; x <= 50.0; x += 0.125) {
    const auto p = sici(x + h), m = sici(x - h);
    deriv = std::max({deriv, std::abs((p.si - m.si) / (2 * h) - std::sin(x) / x),
                      std::abs((p.ci - m.ci) / (2 * h) - std::cos(x) / x)});
  }
  o.require(low < 1e-12, "max error on (0, 50] " + num(low, 3));
  o.require(high < 1e-10, "max error on (50, 1e4] " + num(high, 3));
  o.require(deriv < 1e-6, "derivative residual " + num(deriv, 3));
}

void billiard_checks(Outcome& o) {
  const billiard::CavityGeometry g{0.365, 0.202, 0.008};
  const auto fit = unfolding::fit_weyl(billiard::rectangle_eigenfrequencies(g, 18.0));
  const double rel = fit.law.a2 / billiard::weyl_law(g).a2 - 1.0;
  o.require(std::abs(rel) < 0.01, "free-fit a2 off by " + num(100.0 * rel, 3) + "%");

  const auto one = billiard::perturb_point_scatterers(g, {{{0.1, 0.07, 100.0}}}, {1.0, 13.5});
  const double frac = test::interlacing_fraction(one);
  o.require(frac == 1.0, "interlacing " + num(100.0 * frac, 4) + "% of " + std::to_string(one.shifted_roots) + " roots");

  const auto zero = billiard::perturb_point_scatterers(g, {{{0.1, 0.07, 0.0}, {0.27, 0.13, 0.0}}}, {1.0, 13.5});
  double worst = zero.levels.size() == zero.unperturbed.size() ? 0.0 : 1.0;
  for (std::size_t i = 0; i < std::min(zero.levels.size(), zero.unperturbed.size()); ++i)
    worst = std::max(worst, std::abs(zero.levels[i] / zero.unperturbed[i] - 1.0));
  o.require(worst <= 1e-9, "zero strength deviation " + num(worst, 3));
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    out[e.path().filename().string()] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return out;
}

void determinism_and_io(Outcome& o) {
  const fs::path root = fs::temp_directory_path() / ("levelstat_acceptance_" + std::to_string(::getpid()));
  config::AnalysisConfig c;
  c.eef_realizations = 30;
  c.calibration_sequences = 2000;

  pipeline::run_pipeline(c, "full-report").write(root / "a");
  ::setenv("LEVELSTAT_THREADS", "3", 1);
  pipeline::run_pipeline(c, "full-report").write(root / "b");
  ::unsetenv("LEVELSTAT_THREADS");
  const auto a = read_dir(root / "a"), b = read_dir(root / "b");
  o.require(!a.empty() && a == b, "full-report twice: " + std::to_string(a.size()) + " files identical");

  const billiard::CavityGeometry g;
  const auto spectrum = billiard::perturb_point_scatterers(g, {{{0.1, 0.07, 100.0}, {0.27, 0.13, 100.0}}}, {8.0, 13.5});
  const std::vector<LevelSequence> seqs{spectrum.sequence()};
  const auto res = io::resonance_table(seqs);
  io::write_resonances(root / "res.csv", res);
  const auto res_back = io::ingest_resonances(root / "res.csv");
  bool lossless = res_back.rows.size() == res.rows.size();
  for (std::size_t i = 0; lossless && i < res.rows.size(); ++i)
    lossless = std::memcmp(&res.rows[i].frequency, &res_back.rows[i].frequency, sizeof(double)) == 0;

  auto small = c;
  small.eef_realizations = 12;
  small.band_high_ghz = 9.0;
  small.write_sparams = true;
  const auto mem = pipeline::run_pipeline(small, "eef-sim");
  io::write_atomic(root / "sparams.csv", mem.files.at(0).second);
  const auto table = io::ingest_sparams(root / "sparams.csv");
  lossless = lossless && io::format_sparams(table) == mem.files.at(0).second;
  o.require(lossless, "resonance and S-parameter round trips bit-exact");

  auto ingest = small;
  ingest.write_sparams = false;
  ingest.sparam_file = (root / "sparams.csv").string();
  const auto from_file = pipeline::run_pipeline(ingest, "eef-sim");
  o.require(from_file.table("eef_curve").rows == mem.table("eef_curve").rows,
            "ingested and in-memory EEF curves identical (" + std::to_string(mem.table("eef_curve").rows.size()) +
                " points)");
  fs::remove_all(root);
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0 when no runtime bound applies
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "eta recovery", 10.0, eta_recovery},
      {2, "distribution matching", 30.0, distribution_matching},
      {3, "power spectrum", 60.0, power_spectrum},
      {4, "closed form vs quadrature", 1.0, closed_vs_quadrature},
      {5, "limits", 0.0, limits},
      {6, "GOE saturation", 600.0, goe_saturation},
      {7, "semi-Poisson scattering", 900.0, semi_poisson_end_to_end},
      {8, "special functions", 0.0, special_functions},
      {9, "billiard", 0.0, billiard_checks},
      {10, "determinism and IO", 0.0, determinism_and_io},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_s > 0.0) o.require(secs < c.limit_s, "runtime " + num(secs, 3) + " s, limit " + num(c.limit_s) + " s");
    else o.detail << "; runtime " << num(secs, 3) << " s";
    if (!o.pass) ++failures;
    std::printf("criterion %d (%s): %s: %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
