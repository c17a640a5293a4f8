#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "phq/protocol.hpp"

namespace phq {

inline constexpr const char *kCodeVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

enum class ModelKind { FQH, BoseHubbard };

struct AxisRange {
  double from = 0.0;
  double to = 0.0;
  int steps = 1;

  /// Evenly spaced, endpoints included; one step gives `from`.
  std::vector<double> values() const;
};

struct LindbladCase {
  int nx = 2;
  int ny = 2;
  int nphi = 1;
  bool hard_core = true;
  double U = 0.0;
  double kappa = 0.1;
  double Delta = -1.5;
};

/// Validated run configuration. `raw` keeps the input document verbatim for
/// the manifest.
struct RunConfig {
  ModelKind model = ModelKind::FQH;
  int nx = 6;
  int ny = 6;
  int nphi = 4;
  bool flux = true; ///< Bose-Hubbard only: false forces alpha = 0
  ModelParams params;
  int nmax = 3;
  int n_ph = 0; ///< target manifold; 0 picks Nphi/2 (FQH) or 2 (Bose-Hubbard)

  std::string solver = "chain"; ///< chain | eigen
  double rel_tol = 1e-10;

  std::optional<AxisRange> delta_axis;
  std::optional<AxisRange> u_axis;
  std::vector<std::pair<int, int>> sizes;
  double window_kappa = 3.0; ///< size sweep: half-width of the Delta scan around E2/2, in kappa
  int window_steps = 121;

  std::vector<std::string> observables{"g2_cm", "g3_cm", "overlap", "n_tot"};

  std::optional<ProtocolSchedule> protocol;
  bool protocol_compare_off = true;

  std::vector<LindbladCase> lindblad_cases;
  std::vector<double> lindblad_betas{0.01, 0.005};
  int lindblad_nmax = 2;

  std::string output_dir = "out";
  std::uint64_t seed = 1;
  nlohmann::json raw;

  int target_photons() const;
  /// Flux quanta actually threaded through the lattice.
  int effective_nphi() const;
  bool wants(const std::string &observable) const;
};

/// Throws std::invalid_argument naming the offending field.
RunConfig parse_config(const nlohmann::json &doc);
RunConfig load_config(const std::string &path);

/// One row per sweep point. `flags[k]` is empty for a clean row and a short
/// diagnostic code otherwise; numeric cells of a flagged row may be zero but
/// are never NaN.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> flags;
  std::vector<std::string> details;

  std::size_t flagged() const;
  std::size_t column(const std::string &name) const;
  std::vector<double> column_values(const std::string &name) const;
};

/// Table plus run-level facts that go into the manifest.
struct RunOutput {
  std::string command;
  ResultTable table;
  nlohmann::json summary = nlohmann::json::object();
  std::string started_at;
  std::string finished_at;
};

RunOutput sweep_frequency(const RunConfig &cfg);
RunOutput sweep_interaction(const RunConfig &cfg);
RunOutput sweep_size(const RunConfig &cfg);
RunOutput run_protocol(const RunConfig &cfg);
RunOutput validate_lindblad(const RunConfig &cfg);

/// Shortest round-trip decimal form, so equal doubles print equal text.
std::string format_number(double v);

/// Header row, then one line per row; the last column is the flag code.
std::string table_to_csv(const ResultTable &t);

/// Writes manifest.json first, then results.csv and, when requested, plot.svg.
/// Returns the number of flagged rows.
std::size_t write_run(const RunConfig &cfg, const RunOutput &out, const std::string &dir, int threads,
                      bool with_plot);

} // namespace phq
