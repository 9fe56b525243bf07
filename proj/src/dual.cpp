#include "qot/dual.hpp"

#include <cmath>
#include <sstream>

#include "qot/derivation.hpp"
#include "qot/errors.hpp"
#include "qot/optimize.hpp"
#include "qot/parallel.hpp"

namespace qot {

namespace {

struct DualContext {
  const TransportProblem& p;
  Generator gen;
  std::vector<Matrix> basis;
  double floor;

  explicit DualContext(const TransportProblem& prob)
      : p(prob), gen(build_generator(prob.js)), basis(traceless_hermitian_basis(prob.dim())), floor(1e-12) {
    if (prob.conn.kind() == ConnectionKind::arithmetic) floor = 0.0;
  }
};

struct IntervalTerms {
  Matrix m;        // A_dot + eps L A_mid
  VectorField g;   // grad A_mid
  Matrix mid;
};

IntervalTerms interval_terms(const DualContext& c, const Matrix& a, const Matrix& b) {
  IntervalTerms t;
  t.mid = 0.5 * (a + b);
  t.m = (b - a) / c.p.dt();
  if (c.p.epsilon != 0.0) t.m += c.p.epsilon * c.gen.forward.apply(t.mid);
  t.m = hermitian_part(t.m);
  t.g = grad(c.p.js, t.mid);
  return t;
}

HjbResult ascend(const DualContext& c, const IntervalTerms& t, const Matrix& start, const HjbOptions& opt) {
  const Index n = c.p.dim();
  const Matrix id = Matrix::Identity(n, n);
  const double total = static_cast<double>(n);
  const Objective f = [&](const RealVector& x, RealVector& g) {
    const Matrix rho = id + from_traceless_coords(c.basis, x);
    const Spectrum s = connection_spectrum(c.p.conn, rho);
    const double value = ntrace(t.m * rho).real() + 0.5 * weighted_norm_sq(c.p.conn, s, t.g);
    const Matrix grad_rho = t.m + 0.5 * quadform_gradient(c.p.conn, s, t.g);
    g = -traceless_coords(c.basis, grad_rho);
    return -value;
  };
  const Projection project = [&](const RealVector& x) {
    return traceless_coords(c.basis, project_density(id + from_traceless_coords(c.basis, x), c.floor, total));
  };
  SpgOptions so;
  so.max_iter = opt.max_iter;
  so.pg_tol = opt.pg_tol;
  const SpgResult r = spg_minimize(f, project, traceless_coords(c.basis, start), so);
  HjbResult out;
  out.value = -r.value;
  out.witness = id + from_traceless_coords(c.basis, r.x);
  out.converged = r.converged;
  return out;
}

HjbResult violation_with(const DualContext& c, const Matrix& a, const Matrix& b, const HjbOptions& opt) {
  const Index n = c.p.dim();
  const IntervalTerms t = interval_terms(c, a, b);
  HjbResult best = ascend(c, t, opt.warm ? *opt.warm : Matrix::Identity(n, n), opt);
  Rng rng(opt.seed);
  for (int k = 0; k < opt.restarts; ++k) {
    const HjbResult r = ascend(c, t, random_density(n, rng, 0.01), opt);
    if (r.value > best.value) best = r;
  }
  return best;
}

// Danskin gradients of sup_rho c_i with respect to A_i and A_{i+1}.
std::pair<Matrix, Matrix> violation_gradients(const DualContext& c, const Matrix& mid, const Matrix& rho) {
  const double dt = c.p.dt();
  const Spectrum s = connection_spectrum(c.p.conn, rho);
  Matrix common = 0.5 * hermitian_part(apply_weighted_laplacian(c.p.js, c.p.conn, s, mid));
  if (c.p.epsilon != 0.0) common += 0.5 * c.p.epsilon * hermitian_part(c.gen.adjoint.apply(rho));
  return {common - rho / dt, common + rho / dt};
}

std::vector<double> node_times(int n) {
  std::vector<double> t;
  for (int i = 0; i <= n; ++i) t.push_back(static_cast<double>(i) / n);
  return t;
}

void evaluate_all(const DualContext& c, const std::vector<Matrix>& nodes, std::vector<Matrix>& witnesses,
                  std::vector<double>& values, int restarts) {
  const auto n_int = static_cast<std::size_t>(c.p.grid_n);
  values.assign(n_int, 0.0);
  witnesses.resize(n_int, Matrix::Identity(c.p.dim(), c.p.dim()));
  parallel_for(n_int, [&](std::size_t i) {
    HjbOptions ho;
    ho.warm = &witnesses[i];
    ho.restarts = restarts;
    ho.seed = c.p.seed + 7919 * i;
    HjbResult r = violation_with(c, nodes[i], nodes[i + 1], ho);
    values[i] = r.value;
    witnesses[i] = std::move(r.witness);
  });
}

DualSolution solve_reduced(const DualContext& c, std::vector<Matrix> start, const DualOptions& opt) {
  const TransportProblem& p = c.p;
  const Index n = p.dim();
  const auto m = static_cast<Index>(c.basis.size());
  const auto nodes = static_cast<std::size_t>(p.grid_n) + 1;
  std::vector<Matrix> witnesses(nodes - 1, Matrix::Identity(n, n));
  std::vector<double> values;

  auto to_nodes = [&](const RealVector& x) {
    std::vector<Matrix> a;
    for (std::size_t i = 0; i < nodes; ++i) a.push_back(from_traceless_coords(c.basis, x.segment(static_cast<Index>(i) * m, m)));
    return a;
  };
  const Objective f = [&](const RealVector& x, RealVector& g) {
    const std::vector<Matrix> a = to_nodes(x);
    evaluate_all(c, a, witnesses, values, 0);
    std::vector<Matrix> grads(nodes, Matrix::Zero(n, n));
    grads.front() += p.rho0;
    grads.back() -= p.rho1;
    double value = -dual_objective(a, p.rho0, p.rho1);
    for (std::size_t i = 0; i + 1 < nodes; ++i) {
      value += p.dt() * values[i];
      const auto [gl, gr] = violation_gradients(c, 0.5 * (a[i] + a[i + 1]), witnesses[i]);
      grads[i] += p.dt() * gl;
      grads[i + 1] += p.dt() * gr;
    }
    g.resize(x.size());
    for (std::size_t i = 0; i < nodes; ++i) g.segment(static_cast<Index>(i) * m, m) = traceless_coords(c.basis, grads[i]);
    return value;
  };

  RealVector x0(static_cast<Index>(nodes) * m);
  for (std::size_t i = 0; i < nodes; ++i) x0.segment(static_cast<Index>(i) * m, m) = traceless_coords(c.basis, start[i]);

  SpgOptions so;
  so.max_iter = opt.max_iter;
  so.pg_tol = 1e-8;
  so.rel_tol = opt.tol;
  const SpgResult r = spg_minimize(f, [](const RealVector& x) { return x; }, x0, so);

  DualSolution sol;
  sol.node_potentials = to_nodes(r.x);
  evaluate_all(c, sol.node_potentials, witnesses, values, 0);
  // constants c_{i+1} = c_i - dt v_i make every interval tight
  double shift = 0.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    sol.node_potentials[i] += shift * Matrix::Identity(n, n);
    if (i + 1 < nodes) shift -= p.dt() * values[i];
  }
  sol.witness_densities = witnesses;
  sol.iterations = r.iterations;
  sol.converged = r.converged;
  return sol;
}

DualSolution solve_penalty(const DualContext& c, std::vector<Matrix> start, const DualOptions& opt) {
  const TransportProblem& p = c.p;
  const Index n = p.dim();
  const auto m = static_cast<Index>(c.basis.size());
  const Index block = m + 1;  // traceless coordinates and tau(A)
  const auto nodes = static_cast<std::size_t>(p.grid_n) + 1;
  std::vector<Matrix> witnesses(nodes - 1, Matrix::Identity(n, n));
  std::vector<double> values;
  const Matrix id = Matrix::Identity(n, n);

  auto to_nodes = [&](const RealVector& x) {
    std::vector<Matrix> a;
    for (std::size_t i = 0; i < nodes; ++i) {
      const auto off = static_cast<Index>(i) * block;
      a.push_back(from_traceless_coords(c.basis, x.segment(off, m)) + x(off + m) * id);
    }
    return a;
  };
  auto pack = [&](const std::vector<Matrix>& a) {
    RealVector x(static_cast<Index>(nodes) * block);
    for (std::size_t i = 0; i < nodes; ++i) {
      const auto off = static_cast<Index>(i) * block;
      x.segment(off, m) = traceless_coords(c.basis, a[i]);
      x(off + m) = i == 0 ? 0.0 : ntrace(a[i]).real();
    }
    return x;
  };
  // tau(A_0) is the gauge and stays 0
  const Projection fix_gauge = [&](const RealVector& x) {
    RealVector y = x;
    y(m) = 0.0;
    return y;
  };

  RealVector x = pack(start);
  int iterations = 0;
  bool converged = true;
  for (double mu = 1.0; mu <= 1e6 * 1.0000001; mu *= 10.0) {
    const Objective f = [&](const RealVector& y, RealVector& g) {
      const std::vector<Matrix> a = to_nodes(y);
      evaluate_all(c, a, witnesses, values, 0);
      std::vector<Matrix> grads(nodes, Matrix::Zero(n, n));
      grads.front() += p.rho0;
      grads.back() -= p.rho1;
      double value = -dual_objective(a, p.rho0, p.rho1);
      for (std::size_t i = 0; i + 1 < nodes; ++i) {
        const double viol = std::max(0.0, values[i]);
        if (viol == 0.0) continue;
        value += mu * viol * viol;
        const auto [gl, gr] = violation_gradients(c, 0.5 * (a[i] + a[i + 1]), witnesses[i]);
        grads[i] += 2.0 * mu * viol * gl;
        grads[i + 1] += 2.0 * mu * viol * gr;
      }
      g.resize(y.size());
      for (std::size_t i = 0; i < nodes; ++i) {
        const auto off = static_cast<Index>(i) * block;
        g.segment(off, m) = traceless_coords(c.basis, grads[i]);
        g(off + m) = ntrace(grads[i]).real();
      }
      return value;
    };
    SpgOptions so;
    so.max_iter = opt.max_iter;
    so.pg_tol = 1e-8;
    so.rel_tol = opt.tol;
    const SpgResult r = spg_minimize(f, fix_gauge, x, so);
    x = r.x;
    iterations += r.iterations;
    converged = converged && r.converged;
  }
  DualSolution sol;
  sol.node_potentials = to_nodes(x);
  sol.witness_densities = witnesses;
  sol.iterations = iterations;
  sol.converged = converged;
  return sol;
}

}  // namespace

HjbResult hjb_violation(const TransportProblem& p, const Matrix& a_i, const Matrix& a_next, const HjbOptions& opt) {
  require_hermitian(a_i, "hjb_violation");
  require_hermitian(a_next, "hjb_violation");
  const DualContext c(p);
  return violation_with(c, a_i, a_next, opt);
}

double hjb_violation_arithmetic(const TransportProblem& p, const Matrix& a_i, const Matrix& a_next) {
  if (p.conn.kind() != ConnectionKind::arithmetic) throw UnsupportedError("closed form needs the arithmetic family");
  const DualContext c(p);
  const IntervalTerms t = interval_terms(c, a_i, a_next);
  Matrix m = t.m;
  for (const auto& gj : t.g.components) m += 0.25 * (gj * gj.adjoint() + gj.adjoint() * gj);
  Eigen::SelfAdjointEigenSolver<Matrix> s(hermitian_part(m), Eigen::EigenvaluesOnly);
  return s.eigenvalues()(s.eigenvalues().size() - 1);
}

double dual_objective(const std::vector<Matrix>& potentials, const Matrix& rho0, const Matrix& rho1) {
  if (potentials.size() < 2) throw DimensionError("dual_objective: need at least two node potentials");
  return ntrace(potentials.back() * rho1).real() - ntrace(potentials.front() * rho0).real();
}

std::vector<Matrix> lift_potentials(const std::vector<Matrix>& psi) {
  if (psi.empty()) throw DimensionError("lift_potentials: empty input");
  const std::size_t n = psi.size();
  std::vector<Matrix> a(n + 1);
  if (n == 1) {
    a[0] = a[1] = psi[0];
    return a;
  }
  a[0] = 1.5 * psi[0] - 0.5 * psi[1];
  for (std::size_t i = 1; i < n; ++i) a[i] = 0.5 * (psi[i - 1] + psi[i]);
  a[n] = 1.5 * psi[n - 1] - 0.5 * psi[n - 2];
  return a;
}

void certify(const TransportProblem& p, DualSolution& sol, const DualOptions& opt) {
  const DualContext c(p);
  const auto n_int = static_cast<std::size_t>(p.grid_n);
  if (sol.node_potentials.size() != n_int + 1) throw DimensionError("certify: wrong number of node potentials");
  if (sol.witness_densities.size() != n_int) sol.witness_densities.assign(n_int, Matrix::Identity(p.dim(), p.dim()));
  evaluate_all(c, sol.node_potentials, sol.witness_densities, sol.violations, opt.certify_restarts);
  double worst = -std::numeric_limits<double>::infinity();
  for (double v : sol.violations) worst = std::max(worst, v);
  sol.shift = 0.0;
  if (worst > 0.0) {
    const auto t = node_times(p.grid_n);
    for (std::size_t i = 0; i <= n_int; ++i)
      sol.node_potentials[i] -= worst * t[i] * Matrix::Identity(p.dim(), p.dim());
    for (double& v : sol.violations) v -= worst;
    sol.shift = worst;
  }
  sol.worst_violation = -std::numeric_limits<double>::infinity();
  for (double v : sol.violations) sol.worst_violation = std::max(sol.worst_violation, v);
  sol.objective = dual_objective(sol.node_potentials, p.rho0, p.rho1);
  sol.feasible = std::isfinite(sol.objective) && sol.worst_violation <= opt.feasibility_tol;
}

DualSolution solve_dual(const TransportProblem& p, const PrimalSolution* warm_start, const DualOptions& opt) {
  validate_problem(p);
  const DualContext c(p);
  const Index n = p.dim();
  std::vector<Matrix> start(static_cast<std::size_t>(p.grid_n) + 1, Matrix::Zero(n, n));
  if (warm_start && warm_start->potential_path.size() == static_cast<std::size_t>(p.grid_n)) {
    start = lift_potentials(warm_start->potential_path);
  } else {
    // potentials of the linear interpolation are a cheap, usually close start
    start = lift_potentials(eliminate_velocity(p, init_path(p)).potentials);
  }
  DualSolution sol = opt.method == DualMethod::reduced ? solve_reduced(c, start, opt) : solve_penalty(c, start, opt);
  certify(p, sol, opt);
  return sol;
}

double check_weak_duality(const PrimalSolution& primal, const DualSolution& dual) {
  if (primal.potential_path.size() + 1 != dual.node_potentials.size())
    throw DimensionError("check_weak_duality: primal and dual grids differ");
  return 0.5 * primal.action - dual.objective;
}

}  // namespace qot
