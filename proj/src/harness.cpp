#include "phq/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "phq/lindblad.hpp"
#include "phq/observables.hpp"
#include "phq/svg_plot.hpp"

namespace phq {

using json = nlohmann::json;

namespace {

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- config parsing -------------------------------------------------------

void check_keys(const json &obj, std::initializer_list<const char *> allowed, const std::string &where) {
  if (!obj.is_object()) {
    throw std::invalid_argument(where + " must be an object");
  }
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char *k) { return it.key() == k; });
    if (!known) {
      throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
    }
  }
}

double number(const json &obj, const char *key, const std::string &where, double fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const json &v = obj.at(key);
  if (!v.is_number()) {
    throw std::invalid_argument(where + "." + key + " must be a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw std::invalid_argument(where + "." + key + " must be finite");
  }
  return d;
}

int integer(const json &obj, const char *key, const std::string &where, int fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const json &v = obj.at(key);
  if (!v.is_number_integer()) {
    throw std::invalid_argument(where + "." + key + " must be an integer");
  }
  return v.get<int>();
}

bool boolean(const json &obj, const char *key, const std::string &where, bool fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  if (!obj.at(key).is_boolean()) {
    throw std::invalid_argument(where + "." + key + " must be true or false");
  }
  return obj.at(key).get<bool>();
}

std::string text(const json &obj, const char *key, const std::string &where, const std::string &fallback) {
  if (!obj.contains(key)) {
    return fallback;
  }
  if (!obj.at(key).is_string()) {
    throw std::invalid_argument(where + "." + key + " must be a string");
  }
  return obj.at(key).get<std::string>();
}

AxisRange parse_axis(const json &v, const std::string &where) {
  AxisRange a;
  if (v.is_number()) {
    a.from = a.to = v.get<double>();
    a.steps = 1;
  } else {
    check_keys(v, {"from", "to", "steps"}, where);
    a.from = number(v, "from", where, 0.0);
    a.to = number(v, "to", where, a.from);
    a.steps = integer(v, "steps", where, 1);
  }
  if (a.steps < 1) {
    throw std::invalid_argument(where + ".steps must be at least 1");
  }
  return a;
}

// U is a number or the string HARD_CORE.
void parse_interaction(const json &obj, const std::string &where, bool &hard_core, double &u) {
  if (!obj.contains("U")) {
    return;
  }
  const json &v = obj.at("U");
  if (v.is_string()) {
    if (v.get<std::string>() != "HARD_CORE") {
      throw std::invalid_argument(where + ".U must be a number or \"HARD_CORE\"");
    }
    hard_core = true;
    u = 0.0;
  } else if (v.is_number()) {
    hard_core = false;
    u = v.get<double>();
  } else {
    throw std::invalid_argument(where + ".U must be a number or \"HARD_CORE\"");
  }
}

ProtocolSchedule parse_protocol(const json &v, bool &compare_off) {
  const std::string where = "protocol";
  check_keys(v, {"Nx", "Ny", "pin_Nx", "pin_Ny", "impurity", "V_sl", "V_pert", "alpha_final", "points_per_stage",
                 "impurity_on", "compare_impurity_off"},
             where);
  ProtocolSchedule s;
  s.nx = integer(v, "Nx", where, s.nx);
  s.ny = integer(v, "Ny", where, s.ny);
  s.pin_nx = integer(v, "pin_Nx", where, s.pin_nx);
  s.pin_ny = integer(v, "pin_Ny", where, s.pin_ny);
  if (v.contains("impurity")) {
    const json &imp = v.at("impurity");
    if (!imp.is_array() || imp.size() != 2 || !imp[0].is_number_integer() || !imp[1].is_number_integer()) {
      throw std::invalid_argument("protocol.impurity must be [x, y]");
    }
    s.impurity_x = imp[0].get<int>();
    s.impurity_y = imp[1].get<int>();
  }
  s.v_sl = number(v, "V_sl", where, s.v_sl);
  s.v_pert = number(v, "V_pert", where, s.v_pert);
  s.alpha_final = number(v, "alpha_final", where, s.alpha_final);
  s.points_per_stage = integer(v, "points_per_stage", where, s.points_per_stage);
  s.impurity_on = boolean(v, "impurity_on", where, s.impurity_on);
  compare_off = boolean(v, "compare_impurity_off", where, true);
  s.validate();
  return s;
}

std::vector<LindbladCase> default_lindblad_cases() {
  LindbladCase square;
  LindbladCase chain;
  chain.nx = 1;
  chain.ny = 3;
  chain.nphi = 0;
  return {square, chain};
}

json to_json(const AxisRange &a) { return {{"from", a.from}, {"to", a.to}, {"steps", a.steps}}; }

json resolved_json(const RunConfig &cfg) {
  json j;
  j["model"] = cfg.model == ModelKind::FQH ? "FQH" : "BoseHubbard";
  j["geometry"] = {{"Nx", cfg.nx}, {"Ny", cfg.ny}, {"Nphi", cfg.nphi}, {"Nphi_effective", cfg.effective_nphi()}};
  j["flux"] = cfg.flux;
  j["params"] = {{"J", cfg.params.J},
                 {"U", cfg.params.hard_core ? json("HARD_CORE") : json(cfg.params.U)},
                 {"kappa", cfg.params.kappa},
                 {"beta", cfg.params.beta},
                 {"Nmax", cfg.nmax}};
  j["n_ph"] = cfg.target_photons();
  j["solver"] = {{"method", cfg.solver}, {"rel_tol", cfg.rel_tol}};
  json sweep = json::object();
  if (cfg.delta_axis) {
    sweep["Delta"] = to_json(*cfg.delta_axis);
  }
  if (cfg.u_axis) {
    sweep["U"] = to_json(*cfg.u_axis);
  }
  if (!cfg.sizes.empty()) {
    json sizes = json::array();
    for (auto [x, y] : cfg.sizes) {
      sizes.push_back({x, y});
    }
    sweep["sizes"] = sizes;
    sweep["window_kappa"] = cfg.window_kappa;
    sweep["window_steps"] = cfg.window_steps;
  }
  j["sweep"] = sweep;
  j["observables"] = cfg.observables;
  if (cfg.protocol) {
    const ProtocolSchedule &s = *cfg.protocol;
    j["protocol"] = {{"Nx", s.nx},
                     {"Ny", s.ny},
                     {"pin_Nx", s.pin_nx},
                     {"pin_Ny", s.pin_ny},
                     {"impurity", {s.impurity_x, s.impurity_y}},
                     {"V_sl", s.v_sl},
                     {"V_pert", s.v_pert},
                     {"alpha_final", s.alpha_final},
                     {"points_per_stage", s.points_per_stage},
                     {"impurity_on", s.impurity_on},
                     {"compare_impurity_off", cfg.protocol_compare_off}};
  }
  json cases = json::array();
  for (const auto &c : cfg.lindblad_cases) {
    cases.push_back({{"Nx", c.nx},
                     {"Ny", c.ny},
                     {"Nphi", c.nphi},
                     {"U", c.hard_core ? json("HARD_CORE") : json(c.U)},
                     {"kappa", c.kappa},
                     {"Delta", c.Delta}});
  }
  j["lindblad"] = {{"cases", cases}, {"betas", cfg.lindblad_betas}, {"Nmax", cfg.lindblad_nmax}};
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  return j;
}

// ---- per-point evaluation -------------------------------------------------

struct RowOutcome {
  std::vector<double> cells;
  std::string flag;
  std::string detail;
};

template <class F> std::vector<RowOutcome> run_points(std::size_t n, std::size_t width, F &&f) {
  std::vector<RowOutcome> out(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    RowOutcome r;
    try {
      r = f(static_cast<std::size_t>(k));
    } catch (const AmbiguousEigenpair &e) {
      r.flag = "AMBIGUOUS_EIGENPAIR";
      r.detail = e.what();
    } catch (const SolverError &e) {
      r.flag = "SOLVER_FAIL";
      r.detail = e.what();
    } catch (const std::domain_error &e) {
      r.flag = "UNDERFLOW";
      r.detail = e.what();
    } catch (const std::exception &e) {
      r.flag = "ERROR";
      r.detail = e.what();
    }
    if (r.flag.empty() && std::any_of(r.cells.begin(), r.cells.end(), [](double v) { return !std::isfinite(v); })) {
      r.flag = "NONFINITE";
      r.detail = "non-finite value in row";
    }
    if (!r.flag.empty() || r.cells.size() != width) {
      if (r.flag.empty()) {
        r.flag = "ERROR";
        r.detail = "row width mismatch";
      }
      r.cells.assign(width, 0.0);
    }
    out[static_cast<std::size_t>(k)] = std::move(r);
  }
  return out;
}

struct LaughlinTarget {
  CMat pair; // embedded in the target basis
  ConventionChoice choice;
};

LaughlinTarget laughlin_target(const LatticeGeometry &g, int n_ph, const ManifoldBasis &target, unsigned seed) {
  const ManifoldBasis hc(g, n_ph, 1);
  LaughlinTarget t;
  t.choice = select_laughlin_convention(hc, build_link_phases(g), seed);
  if (target.cap() == 1) {
    t.pair = t.choice.pair;
    return t;
  }
  t.pair = CMat::Zero(static_cast<Eigen::Index>(target.dim()), t.choice.pair.cols());
  for (std::size_t k = 0; k < hc.dim(); ++k) {
    t.pair.row(static_cast<Eigen::Index>(target.rank(hc.state(k)))) = t.choice.pair.row(static_cast<Eigen::Index>(k));
  }
  return t;
}

void record_convention(json &summary, const LaughlinTarget &t) {
  summary["laughlin_convention"] = t.choice.convention.tag();
  summary["laughlin_ed_overlap"] = t.choice.ed_overlap;
  summary["laughlin_candidate_overlaps"] = t.choice.candidate_overlaps;
}

std::vector<std::string> metastable_columns(const RunConfig &cfg) {
  std::vector<std::string> c;
  for (const auto &o : {"g2_cm", "g3_cm"}) {
    if (cfg.wants(o)) {
      c.push_back(o);
      c.push_back(std::string(o) + "_err");
    }
  }
  if (cfg.wants("overlap")) {
    c.push_back("overlap");
  }
  if (cfg.wants("n_tot")) {
    c.push_back("n_tot");
  }
  c.insert(c.end(), {"lambda_re/J", "lambda_im/J", "max_residual", "iterations"});
  return c;
}

MetastableState solve_state(const RunConfig &cfg, const HeffBlocks &blocks) {
  if (cfg.solver == "eigen") {
    return solve_eigen_metastable(blocks);
  }
  return solve_perturbative_chain(blocks, cfg.nmax, cfg.rel_tol);
}

RowOutcome metastable_row(const RunConfig &cfg, const HeffBlocks &blocks, const CMat *pair) {
  RowOutcome r;
  const MetastableState st = solve_state(cfg, blocks);
  const int nph = cfg.target_photons();
  const CorrelationReport rep = correlation_report(st, blocks, nph);
  if (cfg.wants("g2_cm")) {
    r.cells.insert(r.cells.end(), {rep.g2_cm, rep.g2_cm_error});
  }
  if (cfg.wants("g3_cm")) {
    r.cells.insert(r.cells.end(), {rep.g3_cm, rep.g3_cm_error});
  }
  if (cfg.wants("overlap")) {
    r.cells.push_back(overlap_with_manifold(st.psi[static_cast<std::size_t>(nph)], *pair));
  }
  if (cfg.wants("n_tot")) {
    r.cells.push_back(rep.n_tot);
  }
  int iters = 0;
  for (int it : st.solve_iterations) {
    iters += it;
  }
  r.cells.insert(r.cells.end(), {st.lambda.real(), st.lambda.imag(), st.max_solve_residual(), double(iters)});
  if (!st.scaling_ok) {
    r.flag = "SCALING_BOUND";
    r.detail = "manifold norm exceeded ||drive|| / (n kappa)";
  }
  return r;
}

void finish_table(ResultTable &t, std::vector<RowOutcome> rows) {
  for (auto &r : rows) {
    t.rows.push_back(std::move(r.cells));
    t.flags.push_back(std::move(r.flag));
    t.details.push_back(std::move(r.detail));
  }
}

} // namespace

// ---- config ---------------------------------------------------------------

std::vector<double> AxisRange::values() const {
  std::vector<double> v;
  for (int k = 0; k < steps; ++k) {
    v.push_back(steps == 1 ? from : from + (to - from) * double(k) / double(steps - 1));
  }
  return v;
}

int RunConfig::target_photons() const {
  if (n_ph > 0) {
    return n_ph;
  }
  if (model == ModelKind::FQH && nphi >= 2) {
    return nphi / 2;
  }
  return std::min(2, nmax);
}

int RunConfig::effective_nphi() const { return model == ModelKind::BoseHubbard && !flux ? 0 : nphi; }

bool RunConfig::wants(const std::string &observable) const {
  return std::find(observables.begin(), observables.end(), observable) != observables.end();
}

RunConfig parse_config(const json &doc) {
  check_keys(doc, {"model", "geometry", "params", "n_ph", "flux", "sweep", "observables", "solver", "protocol",
                   "lindblad", "output_dir", "seed"},
             "config");
  RunConfig cfg;
  cfg.raw = doc;

  const std::string model = text(doc, "model", "config", "FQH");
  if (model == "FQH") {
    cfg.model = ModelKind::FQH;
  } else if (model == "BoseHubbard") {
    cfg.model = ModelKind::BoseHubbard;
    cfg.flux = false;
  } else {
    throw std::invalid_argument("config.model must be FQH or BoseHubbard");
  }
  cfg.flux = boolean(doc, "flux", "config", cfg.flux);

  if (doc.contains("geometry")) {
    const json &g = doc.at("geometry");
    check_keys(g, {"Nx", "Ny", "Nphi"}, "geometry");
    cfg.nx = integer(g, "Nx", "geometry", cfg.nx);
    cfg.ny = integer(g, "Ny", "geometry", cfg.ny);
    cfg.nphi = integer(g, "Nphi", "geometry", cfg.nphi);
  }
  cfg.params.hard_core = true;
  if (doc.contains("params")) {
    const json &p = doc.at("params");
    check_keys(p, {"J", "U", "kappa", "beta", "Nmax"}, "params");
    cfg.params.J = number(p, "J", "params", cfg.params.J);
    parse_interaction(p, "params", cfg.params.hard_core, cfg.params.U);
    cfg.params.kappa = number(p, "kappa", "params", cfg.params.kappa);
    cfg.params.beta = number(p, "beta", "params", cfg.params.beta);
    cfg.nmax = integer(p, "Nmax", "params", cfg.nmax);
  }
  cfg.n_ph = integer(doc, "n_ph", "config", 0);

  if (doc.contains("sweep")) {
    const json &s = doc.at("sweep");
    check_keys(s, {"Delta", "U", "sizes", "window_kappa", "window_steps"}, "sweep");
    if (s.contains("Delta")) {
      cfg.delta_axis = parse_axis(s.at("Delta"), "sweep.Delta");
    }
    if (s.contains("U")) {
      cfg.u_axis = parse_axis(s.at("U"), "sweep.U");
    }
    if (s.contains("sizes")) {
      const json &sz = s.at("sizes");
      if (!sz.is_array() || sz.empty()) {
        throw std::invalid_argument("sweep.sizes must be a non-empty list of [Nx, Ny]");
      }
      for (const auto &e : sz) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
          throw std::invalid_argument("sweep.sizes entries must be [Nx, Ny]");
        }
        cfg.sizes.emplace_back(e[0].get<int>(), e[1].get<int>());
      }
    }
    cfg.window_kappa = number(s, "window_kappa", "sweep", cfg.window_kappa);
    cfg.window_steps = integer(s, "window_steps", "sweep", cfg.window_steps);
  }

  if (doc.contains("solver")) {
    const json &s = doc.at("solver");
    check_keys(s, {"method", "rel_tol"}, "solver");
    cfg.solver = text(s, "method", "solver", cfg.solver);
    cfg.rel_tol = number(s, "rel_tol", "solver", cfg.rel_tol);
  }
  if (doc.contains("protocol")) {
    cfg.protocol = parse_protocol(doc.at("protocol"), cfg.protocol_compare_off);
  }
  if (doc.contains("lindblad")) {
    const json &l = doc.at("lindblad");
    check_keys(l, {"cases", "betas", "Nmax"}, "lindblad");
    cfg.lindblad_nmax = integer(l, "Nmax", "lindblad", cfg.lindblad_nmax);
    if (l.contains("betas")) {
      cfg.lindblad_betas.clear();
      for (const auto &b : l.at("betas")) {
        if (!b.is_number() || !(b.get<double>() > 0.0)) {
          throw std::invalid_argument("lindblad.betas must be positive numbers");
        }
        cfg.lindblad_betas.push_back(b.get<double>());
      }
    }
    if (l.contains("cases")) {
      for (const auto &c : l.at("cases")) {
        check_keys(c, {"Nx", "Ny", "Nphi", "U", "kappa", "Delta"}, "lindblad.cases[]");
        LindbladCase lc;
        lc.nx = integer(c, "Nx", "lindblad.cases[]", lc.nx);
        lc.ny = integer(c, "Ny", "lindblad.cases[]", lc.ny);
        lc.nphi = integer(c, "Nphi", "lindblad.cases[]", lc.nphi);
        parse_interaction(c, "lindblad.cases[]", lc.hard_core, lc.U);
        lc.kappa = number(c, "kappa", "lindblad.cases[]", lc.kappa);
        lc.Delta = number(c, "Delta", "lindblad.cases[]", lc.Delta);
        cfg.lindblad_cases.push_back(lc);
      }
    }
  }
  if (cfg.lindblad_cases.empty()) {
    cfg.lindblad_cases = default_lindblad_cases();
  }
  cfg.output_dir = text(doc, "output_dir", "config", cfg.output_dir);
  if (doc.contains("seed")) {
    const json &sv = doc.at("seed");
    if (!sv.is_number_unsigned() && !(sv.is_number_integer() && sv.get<std::int64_t>() >= 0)) {
      throw std::invalid_argument("config.seed must be a non-negative integer");
    }
    cfg.seed = sv.get<std::uint64_t>();
  }

  // Cross-field checks.
  build_geometry(cfg.nx, cfg.ny, cfg.nphi);
  cfg.params.validate();
  if (cfg.nmax < 1) {
    throw std::invalid_argument("params.Nmax must be at least 1");
  }
  if (cfg.solver != "chain" && cfg.solver != "eigen") {
    throw std::invalid_argument("solver.method must be chain or eigen");
  }
  if (!(cfg.rel_tol > 0.0 && cfg.rel_tol < 1e-2)) {
    throw std::invalid_argument("solver.rel_tol must lie in (0, 1e-2)");
  }
  if (cfg.n_ph < 0 || cfg.target_photons() > cfg.nmax) {
    throw std::invalid_argument("n_ph must lie in [1, Nmax]");
  }
  if (cfg.window_steps < 1 || !(cfg.window_kappa >= 0.0)) {
    throw std::invalid_argument("sweep window must have positive steps and non-negative width");
  }
  if (cfg.lindblad_nmax < 2) {
    throw std::invalid_argument("lindblad.Nmax must be at least 2");
  }
  for (auto [x, y] : cfg.sizes) {
    build_geometry(x, y, cfg.nphi);
  }
  if (cfg.u_axis && cfg.params.hard_core) {
    cfg.params.hard_core = false;
  }

  const auto overlap_ok = [&cfg] {
    return cfg.model == ModelKind::FQH && cfg.effective_nphi() == 2 * cfg.target_photons();
  };
  const auto applicable = [&](const std::string &o) {
    if (o == "g2_cm") {
      return cfg.nmax >= 2;
    }
    if (o == "g3_cm") {
      return cfg.nmax >= 3;
    }
    if (o == "overlap") {
      return overlap_ok();
    }
    return o == "n_tot";
  };
  if (doc.contains("observables")) {
    cfg.observables.clear();
    for (const auto &o : doc.at("observables")) {
      if (!o.is_string()) {
        throw std::invalid_argument("observables must be strings");
      }
      const std::string name = o.get<std::string>();
      if (name != "g2_cm" && name != "g3_cm" && name != "overlap" && name != "n_tot") {
        throw std::invalid_argument("unknown observable '" + name + "'");
      }
      if (!applicable(name)) {
        throw std::invalid_argument("observable '" + name + "' does not apply to this model, flux or Nmax");
      }
      cfg.observables.push_back(name);
    }
  } else {
    std::vector<std::string> keep;
    for (const auto &o : cfg.observables) {
      if (applicable(o)) {
        keep.push_back(o);
      }
    }
    cfg.observables = keep;
  }
  return cfg;
}

RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error &e) {
    throw std::invalid_argument("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

// ---- tables ---------------------------------------------------------------

std::size_t ResultTable::flagged() const {
  return static_cast<std::size_t>(std::count_if(flags.begin(), flags.end(), [](const std::string &f) {
    return !f.empty();
  }));
}

std::size_t ResultTable::column(const std::string &name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) {
    throw std::out_of_range("no column " + name);
  }
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> ResultTable::column_values(const std::string &name) const {
  const std::size_t c = column(name);
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto &r : rows) {
    v.push_back(r[c]);
  }
  return v;
}

std::string format_number(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) {
      break;
    }
  }
  return buf;
}

std::string table_to_csv(const ResultTable &t) {
  std::ostringstream os;
  for (const auto &c : t.columns) {
    os << c << ',';
  }
  os << "flag\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (double v : t.rows[r]) {
      os << format_number(v) << ',';
    }
    os << t.flags[r] << '\n';
  }
  return os.str();
}

// ---- sweeps ---------------------------------------------------------------

RunOutput sweep_frequency(const RunConfig &cfg) {
  RunOutput out;
  out.command = "sweep-frequency";
  out.started_at = now_utc();
  if (!cfg.delta_axis) {
    throw std::invalid_argument("sweep-frequency needs sweep.Delta");
  }
  const LatticeGeometry g = build_geometry(cfg.nx, cfg.ny, cfg.effective_nphi());
  const LinkPhaseTable links = build_link_phases(g);
  const auto bases = enumerate_manifolds(g, cfg.nmax, default_cap(cfg.params, cfg.nmax));
  std::optional<LaughlinTarget> target;
  if (cfg.wants("overlap")) {
    target = laughlin_target(g, cfg.target_photons(), bases[static_cast<std::size_t>(cfg.target_photons())],
                             static_cast<unsigned>(cfg.seed));
    record_convention(out.summary, *target);
  }
  const std::vector<double> deltas = cfg.delta_axis->values();
  out.table.columns = {"Delta/J"};
  const auto cols = metastable_columns(cfg);
  out.table.columns.insert(out.table.columns.end(), cols.begin(), cols.end());
  auto rows = run_points(deltas.size(), out.table.columns.size(), [&](std::size_t k) {
    ModelParams p = cfg.params;
    p.Delta = deltas[k];
    const HeffBlocks blocks = assemble_heff_blocks(p, bases, links);
    RowOutcome r = metastable_row(cfg, blocks, target ? &target->pair : nullptr);
    r.cells.insert(r.cells.begin(), deltas[k]);
    return r;
  });
  finish_table(out.table, std::move(rows));
  out.finished_at = now_utc();
  return out;
}

RunOutput sweep_interaction(const RunConfig &cfg) {
  RunOutput out;
  out.command = "sweep-interaction";
  out.started_at = now_utc();
  if (!cfg.u_axis) {
    throw std::invalid_argument("sweep-interaction needs sweep.U");
  }
  if (!cfg.delta_axis || cfg.delta_axis->steps != 1) {
    throw std::invalid_argument("sweep-interaction needs a single sweep.Delta value");
  }
  const double delta = cfg.delta_axis->from;
  const LatticeGeometry g = build_geometry(cfg.nx, cfg.ny, cfg.effective_nphi());
  const LinkPhaseTable links = build_link_phases(g);
  ModelParams soft = cfg.params;
  soft.hard_core = false;
  soft.Delta = delta;
  const auto bases = enumerate_manifolds(g, cfg.nmax, default_cap(soft, cfg.nmax));
  std::optional<LaughlinTarget> target;
  if (cfg.wants("overlap")) {
    target = laughlin_target(g, cfg.target_photons(), bases[static_cast<std::size_t>(cfg.target_photons())],
                             static_cast<unsigned>(cfg.seed));
    record_convention(out.summary, *target);
  }
  const std::vector<double> us = cfg.u_axis->values();
  out.table.columns = {"U/J", "Delta/J"};
  const auto cols = metastable_columns(cfg);
  out.table.columns.insert(out.table.columns.end(), cols.begin(), cols.end());
  auto rows = run_points(us.size(), out.table.columns.size(), [&](std::size_t k) {
    ModelParams p = soft;
    p.U = us[k];
    p.validate();
    const HeffBlocks blocks = assemble_heff_blocks(p, bases, links);
    RowOutcome r = metastable_row(cfg, blocks, target ? &target->pair : nullptr);
    r.cells.insert(r.cells.begin(), {us[k], delta});
    return r;
  });
  finish_table(out.table, std::move(rows));
  out.finished_at = now_utc();
  return out;
}

RunOutput sweep_size(const RunConfig &cfg) {
  RunOutput out;
  out.command = "sweep-size";
  out.started_at = now_utc();
  if (cfg.sizes.empty()) {
    throw std::invalid_argument("sweep-size needs sweep.sizes");
  }
  if (cfg.nmax < 2) {
    throw std::invalid_argument("sweep-size needs Nmax >= 2");
  }
  const bool bh = cfg.model == ModelKind::BoseHubbard;
  const bool fixed_delta = cfg.delta_axis.has_value();
  if (fixed_delta && cfg.delta_axis->steps != 1) {
    throw std::invalid_argument("sweep-size takes at most a single sweep.Delta value");
  }
  const int nph = cfg.target_photons();
  const bool with_overlap = !bh && cfg.wants("overlap");
  if (bh) {
    out.table.columns = {"Nx", "Ny", "area", "Delta/J", "g2_cm", "g2_cm_err", "g_max_est", "delta_U/J", "E1/J",
                         "E2/J", "max_residual"};
  } else {
    out.table.columns = {"Nx", "Ny", "area", "Delta/J", "g2_cm", "g2_cm_err", "overlap", "laughlin_ed_overlap",
                         "E_res/J", "max_residual"};
  }
  if (!bh && !with_overlap) {
    throw std::invalid_argument("FQH size sweep needs the overlap observable (Nphi = 2 n_ph)");
  }
  const auto seed = static_cast<unsigned>(cfg.seed);
  auto rows = run_points(cfg.sizes.size(), out.table.columns.size(), [&](std::size_t k) {
    const auto [nx, ny] = cfg.sizes[k];
    const int nphi = bh && !cfg.flux ? 0 : cfg.nphi;
    const LatticeGeometry g = build_geometry(nx, ny, nphi);
    const LinkPhaseTable links = build_link_phases(g);
    const auto bases = enumerate_manifolds(g, cfg.nmax, default_cap(cfg.params, cfg.nmax));
    RowOutcome r;
    if (bh) {
      const NonlinearityEstimate est = nonlinearity_estimate(assemble_heff_blocks(cfg.params, bases, links), seed);
      double best = -1.0, best_delta = 0.0, best_err = 0.0, worst_res = 0.0;
      std::vector<double> window;
      if (fixed_delta) {
        window.push_back(cfg.delta_axis->from);
      } else {
        const double half = cfg.window_kappa * cfg.params.kappa;
        window = AxisRange{0.5 * est.e2 - half, 0.5 * est.e2 + half, cfg.window_steps}.values();
      }
      for (double d : window) {
        ModelParams p = cfg.params;
        p.Delta = d;
        const HeffBlocks blocks = assemble_heff_blocks(p, bases, links);
        const MetastableState st = solve_state(cfg, blocks);
        if (!st.scaling_ok) {
          r.flag = "SCALING_BOUND";
          r.detail = "manifold norm exceeded ||drive|| / (n kappa)";
        }
        const double g2 = gn_detection_mode(st, blocks, DetectionMode::uniform(g.num_sites()), 2);
        worst_res = std::max(worst_res, st.max_solve_residual());
        if (g2 > best) {
          best = g2;
          best_delta = d;
          best_err = g2 * (gn_relative_correction(st, 2) + 4.0 * st.max_solve_residual());
        }
      }
      r.cells = {double(nx), double(ny), double(nx * ny), best_delta, best, best_err, est.g_max, est.delta_u,
                 est.e1, est.e2, worst_res};
    } else {
      const LaughlinTarget t = laughlin_target(g, nph, bases[static_cast<std::size_t>(nph)], seed);
      const double e_res = t.choice.ed.values(0) / double(nph);
      ModelParams p = cfg.params;
      p.Delta = fixed_delta ? cfg.delta_axis->from : e_res;
      const HeffBlocks blocks = assemble_heff_blocks(p, bases, links);
      const MetastableState st = solve_state(cfg, blocks);
      if (!st.scaling_ok) {
        r.flag = "SCALING_BOUND";
        r.detail = "manifold norm exceeded ||drive|| / (n kappa)";
      }
      const CorrelationReport rep = correlation_report(st, blocks, nph);
      r.cells = {double(nx),
                 double(ny),
                 double(nx * ny),
                 p.Delta,
                 rep.g2_cm,
                 rep.g2_cm_error,
                 overlap_with_manifold(st.psi[static_cast<std::size_t>(nph)], t.pair),
                 t.choice.ed_overlap,
                 e_res,
                 st.max_solve_residual()};
      r.detail = t.choice.convention.tag();
    }
    return r;
  });
  if (!bh) {
    json tags = json::array();
    for (const auto &r : rows) {
      tags.push_back(r.flag.empty() ? r.detail : "");
    }
    out.summary["laughlin_convention_per_size"] = tags;
    for (auto &r : rows) {
      if (r.flag.empty()) {
        r.detail.clear();
      }
    }
  }
  out.summary["branch"] = bh ? "BoseHubbard" : "FQH";
  out.summary["flux"] = bh ? cfg.flux : true;
  finish_table(out.table, std::move(rows));
  out.finished_at = now_utc();
  return out;
}

RunOutput run_protocol(const RunConfig &cfg) {
  RunOutput out;
  out.command = "protocol";
  out.started_at = now_utc();
  const ProtocolSchedule schedule = cfg.protocol.value_or(ProtocolSchedule{});
  const ProtocolResult res = track_spectrum(schedule);
  out.table.columns = {"stage", "s", "progress", "V_sl/J", "V_pert/J", "alpha", "E0/J", "E1/J", "gap/J",
                       "overlap0", "overlap1", "continuity", "residual"};
  for (const auto &rec : res.records) {
    const double stage = static_cast<int>(rec.controls.stage);
    out.table.rows.push_back({stage, rec.controls.s, stage - 2.0 + rec.controls.s, rec.controls.v_sl,
                              rec.controls.v_pert, rec.controls.alpha, rec.e0, rec.e1, rec.gap, rec.overlap0,
                              rec.overlap1, rec.continuity, rec.residual});
    out.table.flags.push_back(rec.level_crossing ? "LEVEL_CROSSING" : "");
    out.table.details.push_back(rec.level_crossing ? "successive ground-state overlap below 0.5" : "");
  }
  out.summary["laughlin_convention"] = res.convention.tag();
  out.summary["laughlin_ed_overlap"] = res.laughlin_ed_overlap;
  out.summary["min_gap_iv_v"] = res.min_gap(ProtocolStage::Flux, ProtocolStage::Melt);
  out.summary["final_overlap0"] = res.records.back().overlap0;
  out.summary["pinning_sites"] = schedule.pinning_sites();
  if (cfg.protocol_compare_off && schedule.impurity_on) {
    ProtocolSchedule off = schedule;
    off.impurity_on = false;
    const ProtocolResult r_off = track_spectrum(off);
    out.summary["min_gap_iv_v_impurity_off"] = r_off.min_gap(ProtocolStage::Flux, ProtocolStage::Melt);
    out.summary["level_crossings_impurity_off"] = r_off.flagged();
  }
  out.finished_at = now_utc();
  return out;
}

RunOutput validate_lindblad(const RunConfig &cfg) {
  RunOutput out;
  out.command = "lindblad-validate";
  out.started_at = now_utc();
  out.table.columns = {"case", "Nx", "Ny", "Nphi", "hard_core", "U/J", "kappa/J", "Delta/J", "beta",
                       "G1_exact", "G1_metastable", "G1_rel_err", "G2_exact", "G2_metastable", "G2_rel_err",
                       "liouvillian_residual"};
  struct Task {
    std::size_t case_index;
    double beta;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cfg.lindblad_cases.size(); ++c) {
    for (double b : cfg.lindblad_betas) {
      tasks.push_back({c, b});
    }
  }
  auto rows = run_points(tasks.size(), out.table.columns.size(), [&](std::size_t k) {
    const LindbladCase &lc = cfg.lindblad_cases[tasks[k].case_index];
    ModelParams p;
    p.hard_core = lc.hard_core;
    p.U = lc.U;
    p.kappa = lc.kappa;
    p.Delta = lc.Delta;
    p.beta = tasks[k].beta;
    const LatticeGeometry g = build_geometry(lc.nx, lc.ny, lc.nphi);
    const Liouvillian l = build_liouvillian(g, p, cfg.lindblad_nmax);
    const CMat rho = exact_steady_state(l);
    const MetastableState st = solve_perturbative_chain(l.blocks, cfg.lindblad_nmax, cfg.rel_tol);
    const DetectionMode cm = DetectionMode::uniform(g.num_sites());
    RowOutcome r;
    const double g1e = Gn_exact(l, rho, cm, 1);
    const double g2e = Gn_exact(l, rho, cm, 2);
    const double e1 = compare_Gn(l, rho, st, cm, 1);
    const double e2 = compare_Gn(l, rho, st, cm, 2);
    r.cells = {double(tasks[k].case_index), double(lc.nx), double(lc.ny), double(lc.nphi),
               lc.hard_core ? 1.0 : 0.0, lc.U, lc.kappa, lc.Delta, p.beta, g1e,
               Gn_leading(st, l.blocks, cm, 1), e1, g2e, Gn_leading(st, l.blocks, cm, 2), e2,
               liouvillian_residual(l, rho)};
    const double bound = 10.0 * p.beta * p.beta;
    if (!(e1 < bound && e2 < bound)) {
      r.flag = "ORACLE_MISMATCH";
      r.detail = "relative G error not below 10 beta^2";
    }
    return r;
  });
  // Error ratios between successive betas of each case.
  json ratios = json::array();
  const std::size_t nb = cfg.lindblad_betas.size();
  for (std::size_t c = 0; c < cfg.lindblad_cases.size(); ++c) {
    for (std::size_t b = 0; b + 1 < nb; ++b) {
      const auto &hi = rows[c * nb + b].cells;
      const auto &lo = rows[c * nb + b + 1].cells;
      const auto ratio = [](double a, double d) { return d > 0.0 ? json(a / d) : json(nullptr); };
      ratios.push_back({{"case", c},
                        {"beta_hi", cfg.lindblad_betas[b]},
                        {"beta_lo", cfg.lindblad_betas[b + 1]},
                        {"G1_ratio", ratio(hi[11], lo[11])},
                        {"G2_ratio", ratio(hi[14], lo[14])}});
    }
  }
  out.summary["error_ratios"] = ratios;
  finish_table(out.table, std::move(rows));
  out.finished_at = now_utc();
  return out;
}

// ---- output ---------------------------------------------------------------

std::size_t write_run(const RunConfig &cfg, const RunOutput &out, const std::string &dir, int threads,
                      bool with_plot) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["code_version"] = kCodeVersion;
  manifest["command"] = out.command;
  manifest["started_at"] = out.started_at;
  manifest["finished_at"] = out.finished_at;
  manifest["threads"] = threads;
  manifest["seed"] = cfg.seed;
  manifest["config"] = cfg.raw;
  manifest["resolved"] = resolved_json(cfg);
  manifest["summary"] = out.summary;
  manifest["laughlin_convention"] =
      out.summary.contains("laughlin_convention") ? out.summary["laughlin_convention"] : json(nullptr);
  manifest["columns"] = out.table.columns;
  manifest["results"] = "results.csv";
  json points = json::array();
  for (std::size_t r = 0; r < out.table.rows.size(); ++r) {
    json p = {{"row", r}, {"flag", out.table.flags[r]}};
    if (!out.table.details[r].empty()) {
      p["detail"] = out.table.details[r];
    }
    points.push_back(p);
  }
  manifest["points"] = points;
  manifest["flagged_rows"] = out.table.flagged();

  {
    std::ofstream m(fs::path(dir) / "manifest.json");
    m << manifest.dump(2) << '\n';
    if (!m) {
      throw std::runtime_error("failed to write manifest in " + dir);
    }
  }
  {
    std::ofstream c(fs::path(dir) / "results.csv");
    c << table_to_csv(out.table);
    if (!c) {
      throw std::runtime_error("failed to write results in " + dir);
    }
  }
  if (with_plot && !out.table.rows.empty()) {
    std::vector<PlotSeries> series;
    for (const char *name : {"overlap", "g2_cm", "g3_cm", "g_max_est", "gap/J", "overlap0", "overlap1"}) {
      const auto &cols = out.table.columns;
      if (std::find(cols.begin(), cols.end(), name) != cols.end()) {
        series.push_back({name, out.table.column_values(name)});
      }
    }
    std::string xname = out.table.columns.front();
    if (out.command == "protocol") {
      xname = "progress";
    } else if (out.command == "sweep-size") {
      xname = "area";
    }
    if (!series.empty()) {
      std::ofstream s(fs::path(dir) / "plot.svg");
      s << render_svg(out.command, xname, out.table.column_values(xname), series);
    }
  }
  return out.table.flagged();
}

} // namespace phq
