#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <omp.h>

#include "phq/harness.hpp"
#include "phq/observables.hpp"

using namespace phq;
using nlohmann::json;

namespace {

json small_fqh(double from, double to, int steps) {
  return {{"model", "FQH"},
          {"geometry", {{"Nx", 4}, {"Ny", 4}, {"Nphi", 4}}},
          {"params", {{"U", "HARD_CORE"}, {"kappa", 0.01}, {"beta", 0.01}, {"Nmax", 3}}},
          {"sweep", {{"Delta", {{"from", from}, {"to", to}, {"steps", steps}}}}},
          {"seed", 3}};
}

std::filesystem::path scratch_dir(const std::string &name) {
  const auto p = std::filesystem::temp_directory_path() / ("phq_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

} // namespace

TEST(Config, DefaultsAndInteractionSpelling) {
  const RunConfig c = parse_config(small_fqh(-3.0, -3.0, 1));
  EXPECT_TRUE(c.params.hard_core);
  EXPECT_EQ(c.target_photons(), 2);
  EXPECT_EQ(c.effective_nphi(), 4);
  EXPECT_EQ(c.seed, 3u);

  json bh = small_fqh(-3.0, -3.0, 1);
  bh["model"] = "BoseHubbard";
  bh["params"]["U"] = 2.5;
  const RunConfig b = parse_config(bh);
  EXPECT_FALSE(b.params.hard_core);
  EXPECT_EQ(b.params.U, 2.5);
  EXPECT_EQ(b.effective_nphi(), 0);
  EXPECT_EQ(b.target_photons(), 2);
  bh["flux"] = true;
  EXPECT_EQ(parse_config(bh).effective_nphi(), 4);
}

TEST(Config, RejectsMalformedInput) {
  json j = small_fqh(-3.0, -3.0, 1);
  j["colour"] = "blue";
  EXPECT_THROW(parse_config(j), std::invalid_argument);
  j = small_fqh(-3.0, -3.0, 1);
  j["params"]["U"] = "INFINITE";
  EXPECT_THROW(parse_config(j), std::invalid_argument);
  j = small_fqh(-3.0, -3.0, 1);
  j["params"]["kappa"] = -0.1;
  EXPECT_THROW(parse_config(j), std::invalid_argument);
  j = small_fqh(-3.0, -3.0, 1);
  j["geometry"]["Nz"] = 2;
  EXPECT_THROW(parse_config(j), std::invalid_argument);
  j = small_fqh(-3.0, -3.0, 1);
  j["seed"] = -4;
  EXPECT_THROW(parse_config(j), std::invalid_argument);
  EXPECT_THROW(load_config("/nonexistent/config.json"), std::exception);
}

TEST(Config, AxisValues) {
  const AxisRange a{-3.6, -3.0, 121};
  const auto v = a.values();
  ASSERT_EQ(v.size(), 121u);
  EXPECT_EQ(v.front(), -3.6);
  EXPECT_EQ(v.back(), -3.0);
  EXPECT_NEAR(v[60], -3.3, 1e-15);
  EXPECT_EQ((AxisRange{2.0, 5.0, 1}.values()), std::vector<double>{2.0});
}

TEST(Output, NumbersRoundTrip) {
  for (double v : {0.1, -3.36, 1.0 / 3.0, 1e-300, 123456789.125, 0.0}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.5), "0.5");
}

TEST(Sweep, DeterministicAcrossThreadCounts) {
  const RunConfig c = parse_config(small_fqh(-3.4, -2.6, 9));
  omp_set_num_threads(1);
  const std::string one = table_to_csv(sweep_frequency(c).table);
  omp_set_num_threads(4);
  const std::string four = table_to_csv(sweep_frequency(c).table);
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, table_to_csv(sweep_frequency(c).table));
}

TEST(Sweep, SinglePointEqualsDirectSolve) {
  const RunConfig c = parse_config(small_fqh(-2.9, -2.9, 1));
  const auto out = sweep_frequency(c);
  ASSERT_EQ(out.table.rows.size(), 1u);
  ModelParams p = c.params;
  p.Delta = -2.9;
  const auto blocks = assemble_heff(build_geometry(4, 4, 4), p, 3);
  const auto st = solve_perturbative_chain(blocks, 3, c.rel_tol);
  const auto rep = correlation_report(st, blocks, 2);
  EXPECT_EQ(out.table.column_values("g2_cm")[0], rep.g2_cm);
  EXPECT_EQ(out.table.column_values("g3_cm")[0], rep.g3_cm);
  EXPECT_EQ(out.table.column_values("n_tot")[0], rep.n_tot);
  EXPECT_EQ(out.table.flagged(), 0u);
}

TEST(Sweep, LinearLimitIsCoherent) {
  json j = small_fqh(-4.5, -2.0, 26);
  j["params"]["U"] = 0.0;
  const auto out = sweep_frequency(parse_config(j));
  EXPECT_EQ(out.table.flagged(), 0u);
  for (double g : out.table.column_values("g2_cm")) {
    EXPECT_NEAR(g, 1.0, 1e-6);
  }
}

TEST(Sweep, StrongInteractionApproachesHardCore) {
  const double delta = -2.825;
  const auto hc = sweep_frequency(parse_config(small_fqh(delta, delta, 1)));
  json j = small_fqh(delta, delta, 1);
  j["params"]["U"] = 0.0;
  j["sweep"]["U"] = {{"from", 100.0}, {"to", 1000.0}, {"steps", 2}};
  const auto soft = sweep_interaction(parse_config(j));
  ASSERT_EQ(soft.table.flagged(), 0u);
  const auto rel = [&](const std::string &col, std::size_t row) {
    return std::abs(soft.table.column_values(col)[row] / hc.table.column_values(col)[0] - 1.0);
  };
  EXPECT_LT(rel("overlap", 0), 0.01);
  EXPECT_LT(rel("n_tot", 0), 0.01);
  // g2 carries an O(J/U) virtual double-occupancy correction.
  EXPECT_LT(rel("g2_cm", 1), 0.01);
  EXPECT_NEAR(rel("g2_cm", 0) / rel("g2_cm", 1), 10.0, 1.0);
}

TEST(Sweep, InteractionEndpointsBracketTheResponse) {
  json j = small_fqh(-2.825, -2.825, 1);
  j["params"]["U"] = 0.0;
  j["sweep"]["U"] = {{"from", 0.0}, {"to", 10.0}, {"steps", 3}};
  const auto out = sweep_interaction(parse_config(j));
  const auto g2 = out.table.column_values("g2_cm");
  const auto ov = out.table.column_values("overlap");
  EXPECT_NEAR(g2.front(), 1.0, 1e-6);
  EXPECT_LT(g2.back(), 0.5);
  EXPECT_GT(ov.back(), ov.front());
}

TEST(Sweep, ZeroDriveIsFlaggedNotNaN) {
  json j = small_fqh(-3.0, -2.8, 3);
  j["params"]["beta"] = 0.0;
  const auto out = sweep_frequency(parse_config(j));
  EXPECT_EQ(out.table.flagged(), 3u);
  for (std::size_t r = 0; r < out.table.rows.size(); ++r) {
    EXPECT_EQ(out.table.flags[r], "UNDERFLOW");
    for (double v : out.table.rows[r]) {
      EXPECT_TRUE(std::isfinite(v));
    }
  }
}

TEST(Sweep, SingleSizeReducesToOneRun) {
  json j = {{"model", "BoseHubbard"},
            {"params", {{"U", "HARD_CORE"}, {"kappa", 0.04}, {"beta", 0.01}, {"Nmax", 2}}},
            {"sweep", {{"sizes", {{3, 3}}}, {"window_steps", 21}}}};
  const auto out = sweep_size(parse_config(j));
  ASSERT_EQ(out.table.rows.size(), 1u);
  EXPECT_EQ(out.table.flagged(), 0u);
  EXPECT_GT(out.table.column_values("g2_cm")[0], 1.0);
}

TEST(Lindblad, DefaultCasesScaleAsDriveSquared) {
  const auto out = validate_lindblad(parse_config(json::parse(R"({
    "lindblad": {"cases": [{"Nx": 2, "Ny": 2, "Nphi": 1, "U": "HARD_CORE", "kappa": 0.1, "Delta": -1.5}]}
  })")));
  EXPECT_EQ(out.table.flagged(), 0u);
  ASSERT_TRUE(out.summary.contains("error_ratios"));
  for (const auto &r : out.summary["error_ratios"]) {
    for (const char *key : {"G1_ratio", "G2_ratio"}) {
      ASSERT_TRUE(r[key].is_number()) << key;
      EXPECT_GE(r[key].get<double>(), 2.5) << key;
      EXPECT_LE(r[key].get<double>(), 6.0) << key;
    }
  }
}

TEST(Output, RunDirectoryLayout) {
  const RunConfig c = parse_config(small_fqh(-3.0, -2.9, 2));
  const auto out = sweep_frequency(c);
  const auto dir = scratch_dir("layout");
  EXPECT_EQ(write_run(c, out, dir.string(), 2, true), 0u);
  std::ifstream m(dir / "manifest.json");
  const json manifest = json::parse(m);
  EXPECT_EQ(manifest["schema_version"], kSchemaVersion);
  EXPECT_EQ(manifest["code_version"], kCodeVersion);
  EXPECT_EQ(manifest["command"], "sweep-frequency");
  EXPECT_EQ(manifest["threads"], 2);
  EXPECT_EQ(manifest["points"].size(), 2u);
  EXPECT_FALSE(manifest["laughlin_convention"].is_null());
  EXPECT_EQ(manifest["config"], c.raw);

  std::ifstream csv(dir / "results.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("Delta/J,", 0), 0u);
  EXPECT_EQ(header.substr(header.size() - 5), ",flag");
  EXPECT_TRUE(std::filesystem::exists(dir / "plot.svg"));
  std::filesystem::remove_all(dir);
}

TEST(Sweep, BoseHubbardBlockadeMinimumAtBandBottom) {
  json j = {{"model", "BoseHubbard"},
            {"geometry", {{"Nx", 6}, {"Ny", 6}, {"Nphi", 0}}},
            {"params", {{"U", "HARD_CORE"}, {"kappa", 0.002}, {"beta", 0.01}, {"Nmax", 3}}},
            {"observables", {"g2_cm"}},
            {"sweep", {{"Delta", {{"from", -4.1}, {"to", -3.9}, {"steps", 21}}}}}};
  const auto out = sweep_frequency(parse_config(j));
  const auto g2 = out.table.column_values("g2_cm");
  const auto k = static_cast<std::size_t>(std::min_element(g2.begin(), g2.end()) - g2.begin());
  EXPECT_NEAR(out.table.column_values("Delta/J")[k], -4.0, 1e-12);
}
