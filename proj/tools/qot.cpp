// qot: command-line front end for the transport solvers.
//
//   qot verify     problem.json
//   qot primal     problem.json [--out dir] [--grid N] [--epsilon x] ...
//   qot dual       problem.json
//   qot gap        problem.json
//   qot becker-li  problem.json
//
// Exit codes: 0 ok, 1 validation/domain failure, 2 parse failure,
// 3 non-convergence.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "qot/connections.hpp"
#include "qot/dual.hpp"
#include "qot/errors.hpp"
#include "qot/functionals.hpp"
#include "qot/lindblad.hpp"
#include "qot/primal.hpp"
#include "qot/problem_io.hpp"

namespace fs = std::filesystem;
using namespace qot;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kParse = 2, kNoConvergence = 3 };

struct Overrides {
  std::string out = ".";
  std::optional<int> grid;
  std::optional<double> epsilon;
  std::optional<std::string> connection;
  std::optional<long long> seed;
  std::optional<int> max_iter;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

LoadedProblem load_with(const std::string& file, const Overrides& ov) {
  LoadedProblem lp = load_problem(file);
  Json cfg = lp.config;
  if (ov.grid) cfg["grid_n"] = *ov.grid;
  if (ov.epsilon) cfg["epsilon"] = *ov.epsilon;
  if (ov.connection) cfg["connection"] = *ov.connection;
  if (ov.seed) cfg["seed"] = *ov.seed;
  if (ov.max_iter) cfg["max_iter"] = *ov.max_iter;
  LoadedProblem out = reload(cfg);
  out.notices = lp.notices;
  return out;
}

void emit(const Json& report, const Overrides& ov) {
  fs::create_directories(ov.out);
  std::ofstream(fs::path(ov.out) / "report.json") << report.dump(2) << '\n';
  std::cout << report.dump(2) << std::endl;
}

Json base_report(const std::string& command, const LoadedProblem& lp) {
  Json r{{"command", command}, {"config", lp.config}};
  if (!lp.notices.empty()) r["notices"] = lp.notices;
  return r;
}

int cmd_verify(const std::string& file, const Overrides& ov) {
  const LoadedProblem lp = load_with(file, ov);
  const TransportProblem& p = lp.problem;
  Json report = base_report("verify", lp);
  const auto t0 = Clock::now();

  const ValidationReport vr = validate_jump_set(p.js);
  const double dbc = check_dbc(p.js, 20, p.seed);
  const SuperOperator l = lindblad_superop(p.js);
  const Generator gen{l, superop_adjoint(l)};
  const double unit = gns_norm(gen.forward.apply(Matrix::Identity(p.dim(), p.dim())));
  const double inv = gns_norm(gen.adjoint.apply(p.js.sigma()));
  const ErgodicityReport erg = check_ergodic(gen);
  const double cp_short = check_cp(gen, 0.1);
  const double cp_long = check_cp(gen, 1.0);
  const FamilyAudit fam = audit_family(p.conn, p.js);
  const AxiomReport ax = connection_axioms(p.conn, 20, p.seed);

  Json checks = Json::object();
  checks["jump_set"] = validation_to_json(vr);
  checks["detailed_balance"] = {{"residual", dbc}, {"passed", dbc < 1e-9}};
  checks["unitality"] = {{"residual", unit}, {"passed", unit < 1e-10}};
  checks["invariance"] = {{"residual", inv}, {"passed", inv < 1e-10}};
  checks["ergodic"] = {{"kernel_dim", erg.kernel_dim}, {"passed", erg.ergodic}};
  checks["complete_positivity"] = {{"min_choi_t0.1", cp_short}, {"min_choi_t1", cp_long},
                                   {"passed", cp_short >= -1e-9 && cp_long >= -1e-9}};
  checks["connection_family"] = {{"symmetry", fam.symmetry}, {"min_value", fam.min_value},
                                 {"homogeneity", fam.homogeneity}, {"passed", fam.passed}};
  checks["connection_axioms"] = {{"monotonicity", ax.monotonicity}, {"transformer", ax.transformer},
                                 {"continuity", ax.continuity}, {"passed", ax.passed}};
  bool all = true;
  for (const auto& [name, c] : checks.items()) all = all && c.at("passed").get<bool>();
  report["checks"] = checks;
  report["passed"] = all;
  report["timings"] = {{"total_s", seconds_since(t0)}};
  emit(report, ov);
  return all ? kOk : kInvalid;
}

PrimalSolution run_primal(const TransportProblem& p, Json& report, Json& timings) {
  const auto t0 = Clock::now();
  PrimalSolution ps = solve_primal(p);
  timings["primal_s"] = seconds_since(t0);
  report["primal"] = primal_to_json(ps);
  report["functionals"] = functionals_to_json(functional_report(p.js, ps.rho_path));
  return ps;
}

void write_rho(const PrimalSolution& ps, const Overrides& ov, Json& report) {
  fs::create_directories(ov.out);
  const fs::path path = fs::path(ov.out) / "rho_path.csv";
  std::ofstream out(path);
  write_rho_csv(out, ps);
  report["rho_path_csv"] = path.string();
}

void write_potentials(const DualSolution& ds, int grid, const Overrides& ov, Json& report) {
  fs::create_directories(ov.out);
  const fs::path path = fs::path(ov.out) / "potential_path.csv";
  std::ofstream out(path);
  write_potential_csv(out, ds, grid);
  report["potential_path_csv"] = path.string();
}

int cmd_primal(const std::string& file, const Overrides& ov) {
  const LoadedProblem lp = load_with(file, ov);
  validate_problem(lp.problem);
  Json report = base_report("primal", lp);
  Json timings = Json::object();
  const PrimalSolution ps = run_primal(lp.problem, report, timings);
  write_rho(ps, ov, report);
  report["timings"] = timings;
  emit(report, ov);
  return ps.converged ? kOk : kNoConvergence;
}

int cmd_dual(const std::string& file, const Overrides& ov) {
  const LoadedProblem lp = load_with(file, ov);
  validate_problem(lp.problem);
  Json report = base_report("dual", lp);
  const auto t0 = Clock::now();
  const DualSolution ds = solve_dual(lp.problem);
  report["dual"] = dual_to_json(ds);
  write_potentials(ds, lp.problem.grid_n, ov, report);
  report["timings"] = {{"dual_s", seconds_since(t0)}};
  emit(report, ov);
  return ds.converged && ds.feasible ? kOk : kNoConvergence;
}

int cmd_gap(const std::string& file, const Overrides& ov) {
  const LoadedProblem lp = load_with(file, ov);
  validate_problem(lp.problem);
  Json report = base_report("gap", lp);
  Json timings = Json::object();
  const PrimalSolution ps = run_primal(lp.problem, report, timings);
  const auto t0 = Clock::now();
  const DualSolution ds = solve_dual(lp.problem, &ps);
  timings["dual_s"] = seconds_since(t0);
  report["dual"] = dual_to_json(ds);
  const double half = 0.5 * ps.action;
  report["absolute_gap"] = half - ds.objective;
  report["relative_gap"] = (half - ds.objective) / std::max(half, 1e-12);
  report["weak_duality_margin"] = check_weak_duality(ps, ds);
  const bool ok = ps.converged && ds.converged && ds.feasible;
  report["converged"] = ok;
  write_rho(ps, ov, report);
  write_potentials(ds, lp.problem.grid_n, ov, report);
  report["timings"] = timings;
  emit(report, ov);
  return ok ? kOk : kNoConvergence;
}

int cmd_becker_li(const std::string& file, const Overrides& ov) {
  const LoadedProblem lp = load_with(file, ov);
  validate_problem(lp.problem);
  if (lp.problem.conn.kind() != ConnectionKind::kms)
    throw UnsupportedError("becker-li: the reformulation is only available for the kms connection");
  Json report = base_report("becker-li", lp);
  Json timings = Json::object();
  const PrimalSolution ps = run_primal(lp.problem, report, timings);
  const auto t0 = Clock::now();
  const BeckerLiSolution bl = solve_primal_becker_li(lp.problem);
  timings["becker_li_s"] = seconds_since(t0);
  const double diff = std::abs(ps.action - bl.value);
  report["becker_li"] = {{"value", bl.value},
                         {"path_cost", bl.path_cost},
                         {"entropy_boundary", bl.boundary},
                         {"iterations", bl.path.iterations},
                         {"converged", bl.path.converged}};
  report["absolute_difference"] = diff;
  report["relative_difference"] = diff / std::max(std::abs(ps.action), 1e-12);
  report["timings"] = timings;
  emit(report, ov);
  return ps.converged && bl.path.converged ? kOk : kNoConvergence;
}

const char* error_kind(const Error& e) {
  if (dynamic_cast<const PreconditionError*>(&e)) return "precondition";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const StructuralError*>(&e)) return "structural";
  if (dynamic_cast<const UnsupportedError*>(&e)) return "unsupported";
  return "error";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noncommutative transport distances and their duality"};
  app.require_subcommand(1);
  Overrides ov;
  std::string file;

  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("problem", file, "problem file (JSON)")->required();
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--grid", ov.grid, "number of time intervals");
    sub->add_option("--epsilon", ov.epsilon, "drift strength");
    sub->add_option("--connection", ov.connection, "kms or arithmetic");
    sub->add_option("--seed", ov.seed, "random seed");
    sub->add_option("--max-iter", ov.max_iter, "iteration cap");
    return sub;
  };
  CLI::App* verify = add("verify", "check the generator and connection hypotheses");
  CLI::App* primal = add("primal", "solve the transport problem");
  CLI::App* dual = add("dual", "solve the HJB dual problem");
  CLI::App* gap = add("gap", "solve both problems and report the duality gap");
  CLI::App* bl = add("becker-li", "compare with the entropic reformulation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    if (verify->parsed()) return cmd_verify(file, ov);
    if (primal->parsed()) return cmd_primal(file, ov);
    if (dual->parsed()) return cmd_dual(file, ov);
    if (gap->parsed()) return cmd_gap(file, ov);
    if (bl->parsed()) return cmd_becker_li(file, ov);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    Json j{{"error", e.what()}, {"kind", error_kind(e)}};
    std::cout << j.dump(2) << std::endl;
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kOk;
}
