// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "phq/harness.hpp"
#include "phq/lindblad.hpp"
#include "phq/observables.hpp"

using namespace phq;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

json load_json(const std::string &name) {
  std::ifstream in(std::string(PHQ_CONFIG_DIR) + "/" + name);
  return json::parse(in);
}

std::size_t argmax(const std::vector<double> &v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::size_t argmin(const std::vector<double> &v) {
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Verdict overlap_peak_with_g2_dip() {
  const auto out = sweep_frequency(parse_config(load_json("two_photon_sweep.json")));
  const auto delta = out.table.column_values("Delta/J");
  const auto ov = out.table.column_values("overlap");
  const auto g2 = out.table.column_values("g2_cm");
  const auto err = out.table.column_values("g2_cm_err");
  const std::size_t k = argmax(ov);
  const double med = median(g2);
  const bool located = std::abs(delta[k] + 3.36) <= 0.05;
  const bool suppressed = med - g2[k] >= 3.0 * err[k];
  return {located && suppressed && out.table.flagged() == 0,
          fmt("peak Delta=%.4f (overlap %.4f), g2 there %.4g, median %.4g, 3*err %.3g, flagged %zu", delta[k], ov[k],
              g2[k], med, 3.0 * err[k], out.table.flagged())};
}

Verdict three_photon_peak() {
  json doc = load_json("three_photon_sweep.json");
  doc["sweep"]["Delta"] = {{"from", -3.295}, {"to", -2.895}, {"steps", 81}};
  const auto out = sweep_frequency(parse_config(doc));
  const auto delta = out.table.column_values("Delta/J");
  const auto ov = out.table.column_values("overlap");
  const auto g3 = out.table.column_values("g3_cm");
  const std::size_t kp = argmax(ov);
  const std::size_t kd = argmin(g3);
  const bool located = std::abs(delta[kp] + 3.095) <= 0.05;
  const bool dip = std::abs(delta[kd] + 3.095) <= 0.05 && std::abs(delta[kd] - delta[kp]) <= 0.05;
  return {located && dip && out.table.flagged() == 0,
          fmt("overlap peak Delta=%.4f (%.4f), g3 minimum Delta=%.4f (%.4g), flagged %zu", delta[kp], ov[kp],
              delta[kd], g3[kd], out.table.flagged())};
}

Verdict linear_limit() {
  double worst = 0.0;
  std::size_t points = 0, flagged = 0;
  json fqh = load_json("two_photon_sweep.json");
  fqh["params"]["U"] = 0.0;
  fqh["sweep"]["Delta"]["steps"] = 31;
  json bh = load_json("linear_limit.json");
  bh["model"] = "BoseHubbard";
  for (const json &doc : {fqh, load_json("linear_limit.json"), bh}) {
    const auto out = sweep_frequency(parse_config(doc));
    for (double g : out.table.column_values("g2_cm")) {
      worst = std::max(worst, std::abs(g - 1.0));
    }
    points += out.table.rows.size();
    flagged += out.table.flagged();
  }
  return {worst <= 1e-6 && flagged == 0, fmt("max |g2-1| = %.3g over %zu points, flagged %zu", worst, points, flagged)};
}

Verdict size_scaling() {
  const auto bh = sweep_size(parse_config(load_json("size_sweep_bh.json")));
  const auto fqh = sweep_size(parse_config(load_json("size_sweep_fqh.json")));
  const auto g_bh = bh.table.column_values("g2_cm");
  const auto g_est = bh.table.column_values("g_max_est");
  bool monotone = true, within = true;
  for (std::size_t k = 0; k < g_bh.size(); ++k) {
    if (k > 0 && !(g_bh[k] < g_bh[k - 1] && g_bh[k] > 1.0)) {
      monotone = false;
    }
    const double ratio = g_bh[k] / g_est[k];
    if (!(ratio >= 0.5 && ratio <= 2.0)) {
      within = false;
    }
  }
  const auto g_fqh = fqh.table.column_values("g2_cm");
  const auto ov = fqh.table.column_values("overlap");
  const auto [gmin, gmax] = std::minmax_element(g_fqh.begin(), g_fqh.end());
  const double g_spread = (*gmax - *gmin) / *gmax;
  double ov_dev = 0.0;
  for (double o : ov) {
    ov_dev = std::max(ov_dev, std::abs(o - ov.back()) / ov.back());
  }
  const bool flat_g = g_spread < 0.10;
  const bool flat_ov = ov_dev < 0.10;
  std::string detail = fmt("BH monotone %s, within 2x %s; g2 BH:", monotone ? "yes" : "no", within ? "yes" : "no");
  for (std::size_t k = 0; k < g_bh.size(); ++k) {
    detail += fmt(" %.3g/%.3g", g_bh[k], g_est[k]);
  }
  detail += fmt("; FQH g2 spread %.1f%% (", 100.0 * g_spread);
  for (double g : g_fqh) {
    detail += fmt(" %.3g", g);
  }
  detail += fmt(" ), overlap max deviation %.2f%%", 100.0 * ov_dev);
  return {monotone && within && flat_g && flat_ov && bh.table.flagged() == 0 && fqh.table.flagged() == 0, detail};
}

// Random parameter sets on a lattice where the eigensolve is cheap. Only
// manifolds below the truncation are compared.
Verdict chain_vs_eigen() {
  const double beta = 0.01;
  const double tol = std::max(1e-8, 3.0 * beta * beta);
  const int nmax = 3;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> kappa_d(0.002, 0.04), delta_d(-5.0, 0.0);
  std::uniform_int_distribution<int> u_d(0, 2);
  const auto g = build_geometry(3, 3, 1);
  int passed = 0, failures = 0;
  double worst = 0.0;
  std::string worst_case;
  for (int k = 0; k < 20; ++k) {
    ModelParams p;
    p.kappa = kappa_d(rng);
    p.Delta = delta_d(rng);
    const int u = u_d(rng);
    p.U = u == 1 ? 1.0 : 0.0;
    p.hard_core = u == 2;
    p.beta = beta;
    try {
      const HeffBlocks blocks = assemble_heff(g, p, nmax);
      const auto chain = solve_perturbative_chain(blocks, nmax);
      const auto eig = solve_eigen_metastable(blocks);
      double err = 0.0;
      for (int n = 1; n <= nmax - 1; ++n) {
        err = std::max(err, (chain.psi[n] - eig.psi[n]).cwiseAbs().maxCoeff() / eig.psi[n].cwiseAbs().maxCoeff());
      }
      passed += err <= tol;
      if (err > worst) {
        worst = err;
        worst_case = fmt("kappa=%.4f Delta=%.3f U=%s", p.kappa, p.Delta, u == 2 ? "HC" : (u == 1 ? "1" : "0"));
      }
    } catch (const std::exception &) {
      ++failures;
    }
  }
  return {passed == 20, fmt("%d/20 within %.1e, %d solver failures, worst %.3g at %s", passed, tol, failures, worst,
                            worst_case.c_str())};
}

Verdict lindblad_scaling() {
  const RunConfig cfg = parse_config(load_json("lindblad.json"));
  const auto out = validate_lindblad(cfg);
  bool ok = out.table.flagged() == 0;
  std::string detail;
  for (const auto &r : out.summary["error_ratios"]) {
    for (const char *key : {"G1_ratio", "G2_ratio"}) {
      const bool num = r[key].is_number();
      const double v = num ? r[key].get<double>() : 0.0;
      ok = ok && num && v >= 2.5 && v <= 6.0;
      detail += fmt("case %d %s %.4f; ", r["case"].get<int>(), key, v);
    }
  }
  const auto beta = out.table.column_values("beta");
  for (const char *col : {"G1_rel_err", "G2_rel_err"}) {
    const auto e = out.table.column_values(col);
    for (std::size_t k = 0; k < e.size(); ++k) {
      ok = ok && e[k] < 10.0 * beta[k] * beta[k];
    }
    detail += fmt("max %s %.3g; ", col, *std::max_element(e.begin(), e.end()));
  }
  return {ok, detail + fmt("flagged %zu", out.table.flagged())};
}

Verdict laughlin_ed_overlap() {
  const auto g = build_geometry(6, 6, 4);
  const auto choice = select_laughlin_convention(enumerate_manifold(g, 2, 1), build_link_phases(g));
  const double pinned = 0.999062;
  const bool ok = choice.ed_overlap >= 0.95 && std::abs(choice.ed_overlap - pinned) <= 1e-6;
  return {ok, fmt("overlap %.6f (pinned %.6f), convention %s", choice.ed_overlap, pinned,
                  choice.convention.tag().c_str())};
}

Verdict structural_invariants() {
  const double two_pi = 2.0 * std::numbers::pi;
  double flux_err = 0.0, gauge_err = 0.0, herm = 0.0, sum_err = 0.0;
  bool round_trip = true;
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> angle(0.0, two_pi);
  for (auto [nx, ny, nphi] : {std::tuple{6, 6, 4}, {6, 6, 6}, {4, 4, 2}, {3, 5, 4}, {5, 5, 3}}) {
    const auto geo = build_geometry(nx, ny, nphi);
    const auto links = build_link_phases(geo);
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        flux_err = std::max(flux_err, std::abs(plaquette_product(links, x, y) - std::polar(1.0, -two_pi * geo.alpha())));
      }
    }
    const auto basis = enumerate_manifold(geo, 2, 2);
    const auto h = build_hopping_block(basis, links);
    herm = std::max(herm, hermiticity_defect(h));
    std::vector<double> chi(static_cast<std::size_t>(geo.num_sites()));
    for (double &c : chi) {
      c = angle(rng);
    }
    const auto e0 = dense_lowest(h, static_cast<int>(basis.dim())).values;
    const auto e1 = dense_lowest(build_hopping_block(basis, gauge_transform(links, chi)), static_cast<int>(basis.dim())).values;
    gauge_err = std::max(gauge_err, (e0 - e1).cwiseAbs().maxCoeff());
  }
  for (int ns = 1; ns <= 16; ++ns) {
    for (int cap = 1; cap <= 3; ++cap) {
      for (int n = 0; n <= std::min(3, cap * ns); ++n) {
        const auto b = enumerate_manifold(build_geometry(ns, 1, 0), n, cap);
        for (std::size_t k = 0; k < b.dim(); ++k) {
          round_trip = round_trip && b.rank(b.unrank(k)) == k;
        }
      }
    }
  }
  for (bool hard : {true, false}) {
    ModelParams p;
    p.hard_core = hard;
    p.U = hard ? 0.0 : 1.0;
    p.Delta = -3.3;
    p.kappa = 0.01;
    const auto blocks = assemble_heff(build_geometry(4, 4, 4), p, 3);
    herm = std::max(herm, hermiticity_defect(full_hsys(blocks)));
    const auto st = solve_perturbative_chain(blocks, 3);
    for (int n : {2, 3}) {
      sum_err = std::max(sum_err, std::abs(two_point_projected(st, blocks, n).sum() - n * (n - 1.0)));
    }
  }
  const bool ok = flux_err <= 1e-12 && gauge_err <= 1e-10 && round_trip && herm <= 1e-14 && sum_err <= 1e-10;
  return {ok, fmt("flux %.2g, gauge %.2g, rank round trip %s, hermiticity %.2g, two-point sum %.2g", flux_err,
                  gauge_err, round_trip ? "ok" : "broken", herm, sum_err)};
}

Verdict protocol_gap() {
  ProtocolSchedule on;
  ProtocolSchedule off = on;
  off.impurity_on = false;
  const auto r_on = track_spectrum(on);
  const auto r_off = track_spectrum(off);
  const double gap_on = r_on.min_gap(ProtocolStage::Flux, ProtocolStage::Melt);
  const double gap_off = r_off.min_gap(ProtocolStage::Flux, ProtocolStage::Melt);
  const double final_overlap = r_on.records.back().overlap0;
  return {gap_on > gap_off && final_overlap > 0.9 && r_on.flagged() == 0,
          fmt("min gap iv-v %.4g (impurity off %.3g), final overlap %.6f, flagged %zu", gap_on, gap_off,
              final_overlap, r_on.flagged())};
}

} // namespace

int main() {
  const std::vector<std::pair<const char *, std::function<Verdict()>>> criteria = {
      {"6x6 two-photon overlap peak with g2 suppression", overlap_peak_with_g2_dip},
      {"6x6 three-photon overlap peak with g3 dip", three_photon_peak},
      {"linear limit g2 = 1", linear_limit},
      {"size scaling of g2 and overlap", size_scaling},
      {"perturbative chain vs eigensolver", chain_vs_eigen},
      {"Lindblad leading-order scaling", lindblad_scaling},
      {"Laughlin pair vs exact diagonalization", laughlin_ed_overlap},
      {"structural invariants", structural_invariants},
      {"adiabatic protocol gap and final overlap", protocol_gap},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception &e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.pass;
    std::printf("criterion %zu %s: %s | %s (%.1f s)\n", k + 1, v.pass ? "PASS" : "FAIL", criteria[k].first,
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
