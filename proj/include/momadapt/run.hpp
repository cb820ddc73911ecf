#pragma once

// Run orchestration: config parsing, the four run modes (single solve,
// uniform-refinement sweep, adaptive run, reference generation), data
// export for tables and figures, and run-directory comparison.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "momadapt/adapt.hpp"
#include "momadapt/problems.hpp"

namespace momadapt {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RunMode { solve, uniform_sweep, adapt, reference };

struct RunConfig {
  int schema_version = 1;
  std::variant<HeatTransferConfig, ShockConfig> problem;
  RunMode mode = RunMode::solve;
  bool full_scale = false;
  unsigned long seed = 0;  ///< echoed for property-test utilities only

  NewtonConfig newton;
  AdaptConfig adapt;
  int sweep_max_order = 12;
  std::optional<double> reference_j;  ///< adds an err_vs_ref column if set

  // (x, v) grid of the distribution export; x runs over element centroids.
  int grid_nv = 81;
  double grid_v_lo = -6.0;
  double grid_v_hi = 6.0;

  bool is_heat_transfer() const {
    return std::holds_alternative<HeatTransferConfig>(problem);
  }
  std::string problem_name() const {
    return is_heat_transfer() ? "heat_transfer" : "shock";
  }
};

namespace detail {

inline const nlohmann::json* find_field(const nlohmann::json& j,
                                        const std::string& key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

template <typename T>
void read_field(const nlohmann::json& j, const std::string& key, T& out) {
  if (const nlohmann::json* f = find_field(j, key)) {
    try {
      out = f->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config field '" + key + "' has the wrong type");
    }
  }
}

inline void reject_unknown_keys(const nlohmann::json& j,
                                const std::string& scope,
                                std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok)
      throw ConfigError("unknown config field '" + scope + key + "'");
  }
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Write-temp-then-rename so partially written files never appear.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

/// Parse and validate a config document (JSON text). Unknown fields,
/// type errors, and out-of-range values are reported with the field name.
inline RunConfig parse_run_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");

  detail::reject_unknown_keys(
      j, "",
      {"schema_version", "problem", "mode", "full_scale", "seed",
       "heat_transfer", "shock", "newton", "adapt", "sweep", "reference_j",
       "grid"});

  RunConfig cfg;
  detail::read_field(j, "schema_version", cfg.schema_version);
  if (cfg.schema_version != 1)
    throw ConfigError("unsupported schema_version (expected 1)");

  std::string problem = "heat_transfer";
  detail::read_field(j, "problem", problem);
  std::string mode = "solve";
  detail::read_field(j, "mode", mode);
  if (mode == "solve")
    cfg.mode = RunMode::solve;
  else if (mode == "uniform_sweep")
    cfg.mode = RunMode::uniform_sweep;
  else if (mode == "adapt")
    cfg.mode = RunMode::adapt;
  else if (mode == "reference")
    cfg.mode = RunMode::reference;
  else
    throw ConfigError("config field 'mode' must be one of solve, "
                      "uniform_sweep, adapt, reference");

  detail::read_field(j, "full_scale", cfg.full_scale);
  detail::read_field(j, "seed", cfg.seed);

  int initial_order = 0, dual_increment = 0, reference_order = 0;
  if (problem == "heat_transfer") {
    HeatTransferConfig ht;
    if (cfg.full_scale) ht.n_elements = 1000;
    if (const nlohmann::json* sub = detail::find_field(j, "heat_transfer")) {
      detail::reject_unknown_keys(*sub, "heat_transfer.",
                                  {"theta_left", "theta_ratio", "knudsen",
                                   "n_elements", "renorm_n", "initial_order",
                                   "dual_increment", "reference_order"});
      detail::read_field(*sub, "theta_left", ht.theta_left);
      detail::read_field(*sub, "theta_ratio", ht.theta_ratio);
      detail::read_field(*sub, "knudsen", ht.knudsen);
      detail::read_field(*sub, "n_elements", ht.n_elements);
      detail::read_field(*sub, "renorm_n", ht.renorm_n);
      detail::read_field(*sub, "initial_order", ht.initial_order);
      detail::read_field(*sub, "dual_increment", ht.dual_increment);
      detail::read_field(*sub, "reference_order", ht.reference_order);
    }
    try {
      ht.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    initial_order = ht.initial_order;
    dual_increment = ht.dual_increment;
    reference_order = ht.reference_order;
    cfg.problem = ht;
  } else if (problem == "shock") {
    ShockConfig ss;
    if (cfg.full_scale) ss.n_elements = 1250;
    if (const nlohmann::json* sub = detail::find_field(j, "shock")) {
      detail::reject_unknown_keys(*sub, "shock.",
                                  {"mach", "lambda", "n_elements", "dof_n",
                                   "renorm_n", "initial_order",
                                   "dual_increment", "reference_order"});
      detail::read_field(*sub, "mach", ss.mach);
      detail::read_field(*sub, "lambda", ss.lambda);
      detail::read_field(*sub, "n_elements", ss.n_elements);
      detail::read_field(*sub, "dof_n", ss.dof_n);
      detail::read_field(*sub, "renorm_n", ss.renorm_n);
      detail::read_field(*sub, "initial_order", ss.initial_order);
      detail::read_field(*sub, "dual_increment", ss.dual_increment);
      detail::read_field(*sub, "reference_order", ss.reference_order);
    }
    try {
      ss.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    initial_order = ss.initial_order;
    dual_increment = ss.dual_increment;
    reference_order = ss.reference_order;
    cfg.problem = ss;
  } else {
    throw ConfigError(
        "config field 'problem' must be heat_transfer or shock");
  }

  if (const nlohmann::json* sub = detail::find_field(j, "newton")) {
    detail::reject_unknown_keys(*sub, "newton.",
                                {"residual_tol", "max_iters", "max_halvings"});
    detail::read_field(*sub, "residual_tol", cfg.newton.residual_tol);
    detail::read_field(*sub, "max_iters", cfg.newton.max_iters);
    detail::read_field(*sub, "max_halvings", cfg.newton.max_halvings);
  }

  cfg.adapt.initial_order = initial_order;
  cfg.adapt.dual_increment = dual_increment;
  if (const nlohmann::json* sub = detail::find_field(j, "adapt")) {
    detail::reject_unknown_keys(
        *sub, "adapt.",
        {"tol", "max_iterations", "max_order", "refine_increment",
         "fraction_c"});
    detail::read_field(*sub, "tol", cfg.adapt.estimate_tol);
    detail::read_field(*sub, "max_iterations", cfg.adapt.max_iterations);
    detail::read_field(*sub, "max_order", cfg.adapt.max_order);
    detail::read_field(*sub, "refine_increment", cfg.adapt.refine_increment);
    detail::read_field(*sub, "fraction_c", cfg.adapt.marking.fraction_c);
  }
  cfg.adapt.newton = cfg.newton;

  cfg.sweep_max_order = reference_order;
  if (const nlohmann::json* sub = detail::find_field(j, "sweep")) {
    detail::reject_unknown_keys(*sub, "sweep.", {"max_order"});
    detail::read_field(*sub, "max_order", cfg.sweep_max_order);
  }

  if (detail::find_field(j, "reference_j")) {
    double rj = 0.0;
    detail::read_field(j, "reference_j", rj);
    cfg.reference_j = rj;
  }

  if (const nlohmann::json* sub = detail::find_field(j, "grid")) {
    detail::reject_unknown_keys(*sub, "grid.", {"nv", "v_lo", "v_hi"});
    detail::read_field(*sub, "nv", cfg.grid_nv);
    detail::read_field(*sub, "v_lo", cfg.grid_v_lo);
    detail::read_field(*sub, "v_hi", cfg.grid_v_hi);
  }
  if (cfg.grid_nv < 2) throw ConfigError("grid.nv must be >= 2");
  if (!(cfg.grid_v_lo < cfg.grid_v_hi))
    throw ConfigError("grid.v_lo must be below grid.v_hi");

  try {
    cfg.newton.validate();
    cfg.adapt.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.sweep_max_order < initial_order)
    throw ConfigError("sweep.max_order below the initial order");
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

/// Resolved-config echo used both for run.json and for compatibility
/// checks in compare().
inline nlohmann::json config_echo(const RunConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = cfg.schema_version;
  j["problem"] = cfg.problem_name();
  j["full_scale"] = cfg.full_scale;
  j["seed"] = cfg.seed;
  if (cfg.is_heat_transfer()) {
    const auto& ht = std::get<HeatTransferConfig>(cfg.problem);
    j["heat_transfer"] = {{"theta_left", ht.theta_left},
                          {"theta_ratio", ht.theta_ratio},
                          {"knudsen", ht.knudsen},
                          {"n_elements", ht.n_elements},
                          {"renorm_n", ht.renorm_n},
                          {"initial_order", ht.initial_order},
                          {"dual_increment", ht.dual_increment},
                          {"reference_order", ht.reference_order}};
  } else {
    const auto& ss = std::get<ShockConfig>(cfg.problem);
    j["shock"] = {{"mach", ss.mach},
                  {"lambda", ss.lambda},
                  {"n_elements", ss.n_elements},
                  {"dof_n", ss.dof_n},
                  {"renorm_n", ss.renorm_n},
                  {"initial_order", ss.initial_order},
                  {"dual_increment", ss.dual_increment},
                  {"reference_order", ss.reference_order}};
  }
  j["newton"] = {{"residual_tol", cfg.newton.residual_tol},
                 {"max_iters", cfg.newton.max_iters},
                 {"max_halvings", cfg.newton.max_halvings}};
  j["adapt"] = {{"tol", cfg.adapt.estimate_tol},
                {"max_iterations", cfg.adapt.max_iterations},
                {"max_order", cfg.adapt.max_order},
                {"refine_increment", cfg.adapt.refine_increment},
                {"fraction_c", cfg.adapt.marking.fraction_c}};
  j["sweep"] = {{"max_order", cfg.sweep_max_order}};
  j["grid"] = {{"nv", cfg.grid_nv},
               {"v_lo", cfg.grid_v_lo},
               {"v_hi", cfg.grid_v_hi}};
  return j;
}

namespace detail {

struct ConvergenceRow {
  int iter;
  int dof;
  double goal;
  double estimate;
  double bound_cancel;
  double bound_triangle;
};

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows,
                                   std::optional<double> reference_j) {
  std::string s = "iter,dof,J,estimate,bound_cancel,bound_triangle";
  if (reference_j) s += ",err_vs_ref";
  s += "\n";
  for (const auto& r : rows) {
    s += std::to_string(r.iter) + "," + std::to_string(r.dof) + "," +
         format_double(r.goal) + "," + format_double(r.estimate) + "," +
         format_double(r.bound_cancel) + "," + format_double(r.bound_triangle);
    if (reference_j) s += "," + format_double(std::abs(r.goal - *reference_j));
    s += "\n";
  }
  return s;
}

inline std::string orders_csv(const Mesh1D& mesh, const OrderMap& orders) {
  std::string s = "element,x_center,M_kappa\n";
  for (int k = 0; k < mesh.n_elements; ++k)
    s += std::to_string(k) + "," + format_double(mesh.centroid(k)) + "," +
         std::to_string(orders[k]) + "\n";
  return s;
}

inline std::string fields_csv(const DGSolution& sol,
                              const AssemblyContext& ctx) {
  std::string s = "x,rho,u,theta,heat_flux\n";
  for (int k = 0; k < ctx.mesh.n_elements; ++k) {
    const MomentState ms =
        conserved_moments(sol.coeffs[k], ctx.renorm, ctx.backgrounds[k]);
    const std::vector<double> bm = beta_monomial_moments(
        sol.coeffs[k], ctx.renorm, ctx.backgrounds[k], 3, VRange::full);
    // Heat flux about the local bulk velocity, <(v-u)^3 beta>.
    const double q = bm[3] - 3.0 * ms.u * bm[2] + 3.0 * ms.u * ms.u * bm[1] -
                     ms.u * ms.u * ms.u * bm[0];
    s += format_double(ctx.mesh.centroid(k)) + "," + format_double(ms.rho) +
         "," + format_double(ms.u) + "," + format_double(ms.theta) + "," +
         format_double(q) + "\n";
  }
  return s;
}

inline std::string distribution_csv(const DGSolution& sol,
                                    const AssemblyContext& ctx,
                                    const RunConfig& cfg) {
  std::string s = "x,v,f\n";
  for (int k = 0; k < ctx.mesh.n_elements; ++k) {
    const double x = ctx.mesh.centroid(k);
    for (int i = 0; i < cfg.grid_nv; ++i) {
      const double v = cfg.grid_v_lo + (cfg.grid_v_hi - cfg.grid_v_lo) * i /
                                           (cfg.grid_nv - 1);
      const double f =
          eval_beta(sol.coeffs[k], ctx.renorm, ctx.backgrounds[k], v);
      s += format_double(x) + "," + format_double(v) + "," + format_double(f) +
           "\n";
    }
  }
  return s;
}

/// Solve at uniform orders and estimate against the enriched dual.
inline ConvergenceRow solve_and_estimate(const ProblemSetup& prob,
                                         const RunConfig& cfg, int order,
                                         int iter,
                                         std::optional<DGSolution>* primal_out) {
  const int n = prob.ctx.mesh.n_elements;
  OrderMap orders = OrderMap::uniform(n, order);
  auto [primal, trace] =
      newton_solve(DGSolution::zero(prob.ctx.mesh, orders), prob.ctx,
                   cfg.newton);
  OrderMap dual_orders = OrderMap::uniform(n, order + prob.dual_increment);
  const Eigen::VectorXd grad =
      goal_gradient(primal, prob.ctx, prob.goal, dual_orders);
  const DGSolution dual = dual_solve(primal, prob.ctx, dual_orders, grad);
  const ErrorBreakdown br = error_indicators(primal, dual, prob.ctx);
  ConvergenceRow row{iter, orders.dof(),
                     goal_value(primal, prob.ctx, prob.goal), br.estimate,
                     br.bound_cancel, br.bound_triangle};
  if (primal_out) *primal_out = std::move(primal);
  return row;
}

}  // namespace detail

/// Execute a run and write convergence.csv, orders.csv, fields.csv,
/// distribution.csv and run.json into out_dir. On solver failure the files
/// produced so far and a run.json carrying the error are preserved, then
/// the exception is rethrown.
inline void run(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const ProblemSetup prob =
      cfg.is_heat_transfer()
          ? build_problem(std::get<HeatTransferConfig>(cfg.problem))
          : build_problem(std::get<ShockConfig>(cfg.problem));

  nlohmann::json meta;
  meta["config"] = config_echo(cfg);
  meta["mode"] = cfg.mode == RunMode::solve          ? "solve"
                 : cfg.mode == RunMode::uniform_sweep ? "uniform_sweep"
                 : cfg.mode == RunMode::adapt         ? "adapt"
                                                      : "reference";
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<detail::ConvergenceRow> rows;
  try {
    if (cfg.mode == RunMode::solve || cfg.mode == RunMode::reference) {
      const int order = cfg.mode == RunMode::solve ? prob.initial_order
                                                   : prob.reference_order;
      std::optional<DGSolution> primal;
      rows.push_back(detail::solve_and_estimate(prob, cfg, order, 0, &primal));
      detail::write_file_atomic(out_dir / "orders.csv",
                                detail::orders_csv(prob.ctx.mesh,
                                                   primal->orders));
      detail::write_file_atomic(out_dir / "fields.csv",
                                detail::fields_csv(*primal, prob.ctx));
      detail::write_file_atomic(out_dir / "distribution.csv",
                                detail::distribution_csv(*primal, prob.ctx,
                                                         cfg));
    } else if (cfg.mode == RunMode::uniform_sweep) {
      std::optional<DGSolution> primal;
      int iter = 0;
      for (int order = prob.initial_order; order <= cfg.sweep_max_order;
           order += 2, ++iter)
        rows.push_back(
            detail::solve_and_estimate(prob, cfg, order, iter, &primal));
      detail::write_file_atomic(out_dir / "orders.csv",
                                detail::orders_csv(prob.ctx.mesh,
                                                   primal->orders));
      detail::write_file_atomic(out_dir / "fields.csv",
                                detail::fields_csv(*primal, prob.ctx));
      detail::write_file_atomic(out_dir / "distribution.csv",
                                detail::distribution_csv(*primal, prob.ctx,
                                                         cfg));
    } else {
      const AdaptState state = semr_loop(prob, cfg.adapt);
      for (const AdaptRecord& rec : state.history)
        rows.push_back({rec.iteration, rec.dof, rec.goal, rec.estimate,
                        rec.bound_cancel, rec.bound_triangle});
      meta["adapt"] = {{"stop_reason", state.stop_reason},
                       {"reached_tolerance", state.reached_tolerance},
                       {"ranks", state.ranks}};
      detail::write_file_atomic(out_dir / "orders.csv",
                                detail::orders_csv(prob.ctx.mesh,
                                                   state.primal.orders));
      detail::write_file_atomic(out_dir / "fields.csv",
                                detail::fields_csv(state.primal, prob.ctx));
      detail::write_file_atomic(out_dir / "distribution.csv",
                                detail::distribution_csv(state.primal,
                                                         prob.ctx, cfg));
      if (state.newton_failed) throw NewtonFailure(state.stop_reason);
    }
  } catch (const std::exception& e) {
    detail::write_file_atomic(out_dir / "convergence.csv",
                              detail::convergence_csv(rows, cfg.reference_j));
    meta["error"] = e.what();
    detail::write_file_atomic(out_dir / "run.json", meta.dump(2) + "\n");
    throw;
  }

  detail::write_file_atomic(out_dir / "convergence.csv",
                            detail::convergence_csv(rows, cfg.reference_j));
  const auto t1 = std::chrono::steady_clock::now();
  meta["timings"] = {
      {"total_seconds",
       std::chrono::duration<double>(t1 - t0).count()}};
  detail::write_file_atomic(out_dir / "run.json", meta.dump(2) + "\n");
}

namespace detail {

struct ParsedRun {
  nlohmann::json meta;
  std::vector<std::vector<double>> rows;  // numeric convergence.csv body
};

inline ParsedRun read_run_dir(const std::filesystem::path& dir) {
  ParsedRun out;
  {
    std::ifstream in(dir / "run.json");
    if (!in)
      throw std::runtime_error("cannot read " + (dir / "run.json").string());
    in >> out.meta;
  }
  std::ifstream in(dir / "convergence.csv");
  if (!in)
    throw std::runtime_error("cannot read " +
                             (dir / "convergence.csv").string());
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

/// Compare a candidate run against a reference run: per refinement level,
/// |J - J_ref|, the estimate, both bounds, and the effectivity
/// estimate / (J - J_ref). J_ref is the last level of the reference run.
/// Incompatible problem configurations are rejected.
inline std::string compare_runs(const std::filesystem::path& ref_dir,
                                const std::filesystem::path& cand_dir) {
  const detail::ParsedRun ref = detail::read_run_dir(ref_dir);
  const detail::ParsedRun cand = detail::read_run_dir(cand_dir);

  const auto key = [](const nlohmann::json& meta) {
    nlohmann::json k;
    const auto& c = meta.at("config");
    k["problem"] = c.at("problem");
    k[c.at("problem").get<std::string>()] =
        c.at(c.at("problem").get<std::string>());
    return k;
  };
  if (key(ref.meta) != key(cand.meta))
    throw std::runtime_error(
        "compare_runs: reference and candidate use different problems");
  if (ref.rows.empty() || cand.rows.empty())
    throw std::runtime_error("compare_runs: empty convergence data");

  const double j_ref = ref.rows.back()[2];
  std::string s = "iter,dof,abs_err,estimate,bound_cancel,bound_triangle,"
                  "effectivity\n";
  for (const auto& row : cand.rows) {
    const double err = row[2] - j_ref;
    const double eff = row[3] / err;  // may be inf/nan when err == 0
    s += std::to_string(static_cast<int>(row[0])) + "," +
         std::to_string(static_cast<int>(row[1])) + "," +
         detail::format_double(std::abs(err)) + "," +
         detail::format_double(row[3]) + "," + detail::format_double(row[4]) +
         "," + detail::format_double(row[5]) + "," +
         detail::format_double(eff) + "\n";
  }
  return s;
}

}  // namespace momadapt
