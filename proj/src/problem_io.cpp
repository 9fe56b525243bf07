#include "qot/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "qot/errors.hpp"

namespace qot {

namespace {

const Json& require_field(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  return doc.at(key);
}

double number_or(const Json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  const Json& v = doc.at(key);
  if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

long long integer_or(const Json& doc, const char* key, long long fallback) {
  if (!doc.contains(key)) return fallback;
  const Json& v = doc.at(key);
  if (!v.is_number_integer()) throw ParseError(std::string("field '") + key + "' must be an integer");
  return v.get<long long>();
}

std::string string_or(const Json& doc, const char* key, const std::string& fallback) {
  if (!doc.contains(key)) return fallback;
  const Json& v = doc.at(key);
  if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

JumpOperatorSet jump_set_from(const Json& doc, bool unit_trace, Index& n, Json& resolved) {
  if (doc.contains("preset")) {
    const Json& pr = doc.at("preset");
    if (!pr.is_object()) throw ParseError("'preset' must be an object");
    const std::string name = string_or(pr, "name", "");
    PresetParams params;
    Json out{{"name", name}};
    if (name == "depolarizing") {
      params.n = static_cast<int>(integer_or(pr, "n", doc.contains("n") ? integer_or(doc, "n", 2) : 2));
      out["n"] = params.n;
    } else if (name == "two_point") {
      params.p = number_or(pr, "p", 0.5);
      out["p"] = params.p;
    } else if (name == "dephasing_free_chain") {
      const Json& w = require_field(pr, "weights");
      if (!w.is_array()) throw ParseError("'weights' must be an array");
      for (const auto& x : w) {
        if (!x.is_number()) throw ParseError("'weights' entries must be numbers");
        params.weights.push_back(x.get<double>());
      }
      out["weights"] = params.weights;
    } else {
      throw ParseError("unknown preset '" + name + "'");
    }
    resolved["preset"] = out;
    JumpOperatorSet js = preset(name, params);
    if (doc.contains("n") && integer_or(doc, "n", 0) != js.dim()) throw ParseError("'n' does not match the preset dimension");
    n = js.dim();
    return js;
  }
  if (doc.contains("jump_set")) {
    const Json& js_doc = doc.at("jump_set");
    n = static_cast<Index>(integer_or(doc, "n", 0));
    if (n <= 0) throw ParseError("explicit jump sets need a positive 'n'");
    Matrix sigma = matrix_from_json(require_field(js_doc, "sigma"), n, "sigma");
    if (unit_trace) sigma *= static_cast<double>(n);
    const Json& jl = require_field(js_doc, "jumps");
    if (!jl.is_array() || jl.empty()) throw ParseError("'jumps' must be a nonempty array");
    std::vector<Jump> jumps;
    for (const auto& item : jl) {
      jumps.push_back(Jump{matrix_from_json(require_field(item, "V"), n, "V"), number_or(item, "omega", 0.0)});
      if (!item.contains("omega")) throw ParseError("jump entry is missing 'omega'");
    }
    resolved["jump_set"] = js_doc;
    if (js_doc.contains("involution")) {
      const Json& inv = js_doc.at("involution");
      if (!inv.is_array()) throw ParseError("'involution' must be an array");
      std::vector<std::size_t> idx;
      for (const auto& x : inv) {
        if (!x.is_number_integer() || x.get<long long>() < 0) throw ParseError("'involution' entries must be indices");
        idx.push_back(x.get<std::size_t>());
      }
      return JumpOperatorSet(std::move(sigma), std::move(jumps), std::move(idx));
    }
    return JumpOperatorSet::with_inferred_involution(std::move(sigma), std::move(jumps));
  }
  throw ParseError("problem needs either 'preset' or 'jump_set'");
}

void write_complex(std::ostream& out, Complex z) {
  out << ',' << z.real() << ',' << z.imag();
}

}  // namespace

Matrix matrix_from_json(const Json& j, Index n, const std::string& what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != n) {
    throw ParseError(what + ": expected " + std::to_string(n) + " rows");
  }
  Matrix m(n, n);
  for (Index r = 0; r < n; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n)
      throw ParseError(what + ": row " + std::to_string(r) + " must have " + std::to_string(n) + " entries");
    for (Index c = 0; c < n; ++c) {
      const Json& e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) {
        m(r, c) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ParseError(what + ": entry (" + std::to_string(r) + ", " + std::to_string(c) + ") is not a [re, im] pair");
      }
    }
  }
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

LoadedProblem parse_problem(const Json& doc) {
  if (!doc.is_object()) throw ParseError("problem file must hold a JSON object");
  std::vector<std::string> notices;
  Json cfg = Json::object();
  const std::string convention = string_or(doc, "trace_convention", "normalized");
  if (convention != "normalized" && convention != "unit") throw ParseError("trace_convention must be 'normalized' or 'unit'");
  Index n = 0;
  JumpOperatorSet js = jump_set_from(doc, convention == "unit", n, cfg);
  cfg["n"] = n;

  const std::string conn_name = string_or(doc, "connection", "kms");
  ConnectionFamily conn;
  if (conn_name == "kms") {
    conn = ConnectionFamily::kms(js);
  } else if (conn_name == "arithmetic") {
    conn = ConnectionFamily::arithmetic(js.size());
  } else {
    throw ParseError("unknown connection '" + conn_name + "'");
  }
  cfg["connection"] = conn_name;

  cfg["trace_convention"] = convention;
  Matrix rho0 = matrix_from_json(require_field(doc, "rho0"), n, "rho0");
  Matrix rho1 = matrix_from_json(require_field(doc, "rho1"), n, "rho1");
  cfg["rho0"] = matrix_to_json(rho0);
  cfg["rho1"] = matrix_to_json(rho1);
  if (convention == "unit") {
    rho0 *= static_cast<double>(n);
    rho1 *= static_cast<double>(n);
    notices.push_back("densities given with unit trace (rho0, rho1 and an explicit sigma) were rescaled by n = " + std::to_string(n));
  }

  TransportProblem p{std::move(js), std::move(conn), std::move(rho0), std::move(rho1)};
  p.epsilon = number_or(doc, "epsilon", 0.0);
  p.grid_n = static_cast<int>(integer_or(doc, "grid_n", 16));
  p.tol = number_or(doc, "tol", 1e-8);
  p.delta_min = number_or(doc, "delta_min", 1e-6);
  p.max_iter = static_cast<int>(integer_or(doc, "max_iter", 3000));
  const long long seed = integer_or(doc, "seed", 0);
  if (seed < 0) throw ParseError("'seed' must be nonnegative");
  p.seed = static_cast<std::uint64_t>(seed);
  cfg["epsilon"] = p.epsilon;
  cfg["grid_n"] = p.grid_n;
  cfg["tol"] = p.tol;
  cfg["delta_min"] = p.delta_min;
  cfg["max_iter"] = p.max_iter;
  cfg["seed"] = p.seed;

  return LoadedProblem{std::move(p), std::move(cfg), std::move(notices)};
}

LoadedProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return parse_problem(doc);
}

LoadedProblem reload(const Json& config) { return parse_problem(config); }

Json validation_to_json(const ValidationReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"passed", c.passed}});
    if (!c.detail.empty()) checks.back()["detail"] = c.detail;
  }
  return {{"passed", r.passed()}, {"max_residual", r.max_residual()}, {"checks", checks}};
}

Json primal_to_json(const PrimalSolution& s) {
  return {{"W2", s.action},
          {"W", std::sqrt(std::max(s.action, 0.0))},
          {"continuity_residual", s.continuity_residual},
          {"projected_gradient_norm", s.pg_norm},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"interval_action", s.interval_action}};
}

Json dual_to_json(const DualSolution& s) {
  return {{"objective", s.objective},
          {"worst_violation", s.worst_violation},
          {"feasibility_shift", s.shift},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"feasible", s.feasible},
          {"violations", s.violations}};
}

Json functionals_to_json(const FunctionalReport& r) {
  return {{"entropy_start", r.entropy_start}, {"entropy_end", r.entropy_end}, {"fisher_values", r.fisher_values}};
}

void write_rho_csv(std::ostream& out, const PrimalSolution& s) {
  if (s.rho_path.empty()) return;
  const Index n = s.rho_path.front().rows();
  const int grid = static_cast<int>(s.rho_path.size()) - 1;
  out << "t";
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) out << ",re_" << r << '_' << c << ",im_" << r << '_' << c;
  out << ",action_density\r\n";
  out << std::setprecision(17);
  for (int i = 0; i <= grid; ++i) {
    out << static_cast<double>(i) / grid;
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) write_complex(out, s.rho_path[static_cast<std::size_t>(i)](r, c));
    out << ',';
    if (i < grid && static_cast<std::size_t>(i) < s.interval_action.size())
      out << s.interval_action[static_cast<std::size_t>(i)] * grid;
    out << "\r\n";
  }
}

void write_potential_csv(std::ostream& out, const DualSolution& s, int grid_n) {
  if (s.node_potentials.empty()) return;
  const Index n = s.node_potentials.front().rows();
  out << "t";
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) out << ",re_" << r << '_' << c << ",im_" << r << '_' << c;
  out << ",violation";
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) out << ",witness_re_" << r << '_' << c << ",witness_im_" << r << '_' << c;
  out << "\r\n";
  out << std::setprecision(17);
  for (int i = 0; i <= grid_n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out << static_cast<double>(i) / grid_n;
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) write_complex(out, s.node_potentials[k](r, c));
    out << ',';
    const bool has = i < grid_n && k < s.violations.size() && k < s.witness_densities.size();
    if (has) out << s.violations[k];
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) {
        if (has) {
          write_complex(out, s.witness_densities[k](r, c));
        } else {
          out << ",,";
        }
      }
    out << "\r\n";
  }
}

}  // namespace qot
