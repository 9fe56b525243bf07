#include "qot/primal.hpp"

#include <cmath>
#include <sstream>

#include "qot/derivation.hpp"
#include "qot/errors.hpp"
#include "qot/functionals.hpp"
#include "qot/optimize.hpp"
#include "qot/parallel.hpp"

namespace qot {

namespace {

struct Workspace {
  Generator gen;
  std::vector<Matrix> basis;
};

Workspace make_workspace(const TransportProblem& p) {
  return Workspace{build_generator(p.js), traceless_hermitian_basis(p.dim())};
}

void check_endpoint(const Matrix& rho, Index n, const char* name) {
  if (rho.rows() != n || rho.cols() != n) {
    std::ostringstream os;
    os << name << ": expected a " << n << "x" << n << " matrix";
    throw DimensionError(os.str());
  }
  require_hermitian(rho, name);
  const double tr = ntrace(rho).real();
  if (std::abs(tr - 1.0) > 1e-8) {
    std::ostringstream os;
    os << name << ": normalized trace is " << tr << ", expected 1";
    throw ValidationError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> s(hermitian_part(rho), Eigen::EigenvaluesOnly);
  if (!(s.eigenvalues()(0) > 0.0)) {
    std::ostringstream os;
    os << name << ": density is not strictly positive (smallest eigenvalue " << s.eigenvalues()(0) << ")";
    throw PreconditionError(os.str());
  }
}

// (rho_{i+1} - rho_i) / dt - eps L^dagger rho_m with the round-off trace removed.
Matrix interval_rhs(const TransportProblem& p, const Workspace& w, const Matrix& a, const Matrix& b) {
  Matrix g = (b - a) / p.dt();
  if (p.epsilon != 0.0) g -= p.epsilon * w.gen.adjoint.apply(0.5 * (a + b));
  g = hermitian_part(g);
  g -= ntrace(g) * Matrix::Identity(p.dim(), p.dim());
  return g;
}

struct IntervalData {
  Matrix potential;
  VectorField velocity;
  double action = 0.0;
  double residual = 0.0;
  Matrix grad_left;
  Matrix grad_right;
};

IntervalData solve_interval(const TransportProblem& p, const Workspace& w, const Matrix& a, const Matrix& b,
                            bool want_gradient, bool want_velocity) {
  IntervalData d;
  const Matrix mid = hermitian_part(0.5 * (a + b));
  const PotentialSolver solver(p.js, p.conn, mid);
  const Matrix g = interval_rhs(p, w, a, b);
  d.potential = solver.solve(g);
  d.action = p.dt() * gns_inner(d.potential, g).real();
  const VectorField ga = grad(p.js, d.potential);
  if (want_velocity) {
    d.velocity = apply_connection(p.conn, solver.spectrum(), ga);
    Matrix res = (b - a) / p.dt() + divergence(p.js, d.velocity);
    if (p.epsilon != 0.0) res -= p.epsilon * w.gen.adjoint.apply(mid);
    d.residual = gns_norm(res);
  }
  if (want_gradient) {
    const Matrix x = quadform_gradient(p.conn, solver.spectrum(), ga);
    Matrix common = -0.5 * p.dt() * x;
    if (p.epsilon != 0.0) common -= p.epsilon * p.dt() * hermitian_part(w.gen.forward.apply(d.potential));
    d.grad_right = common + 2.0 * d.potential;
    d.grad_left = common - 2.0 * d.potential;
  }
  return d;
}

double objective_with(const TransportProblem& p, const Workspace& w, const std::vector<Matrix>& path,
                      std::vector<Matrix>* gradient) {
  const auto n_int = static_cast<std::size_t>(p.grid_n);
  std::vector<IntervalData> parts(n_int);
  parallel_for(n_int, [&](std::size_t i) {
    parts[i] = solve_interval(p, w, path[i], path[i + 1], gradient != nullptr, false);
  });
  double total = 0.0;
  for (const auto& d : parts) total += d.action;
  if (gradient) {
    gradient->assign(n_int + 1, Matrix::Zero(p.dim(), p.dim()));
    for (std::size_t i = 0; i < n_int; ++i) {
      (*gradient)[i] += parts[i].grad_left;
      (*gradient)[i + 1] += parts[i].grad_right;
    }
  }
  return total;
}

// Reduced problem written over interior coordinates; `cost` evaluates the
// full path objective and optionally its node gradients.
using PathCost = std::function<double(const std::vector<Matrix>&, std::vector<Matrix>*)>;

PrimalSolution minimize_path(const TransportProblem& p, const Workspace& w, const PathCost& cost,
                             const PrimalOptions& opt) {
  const Index n = p.dim();
  const std::size_t interior = static_cast<std::size_t>(p.grid_n) - 1;
  const auto m = static_cast<Index>(w.basis.size());

  std::vector<Matrix> start = opt.warm_path ? opt.initial : init_path(p);
  if (start.size() != static_cast<std::size_t>(p.grid_n) + 1) throw DimensionError("solve_primal: warm path has wrong length");
  start.front() = p.rho0;
  start.back() = p.rho1;

  auto to_path = [&](const RealVector& x) {
    std::vector<Matrix> path = start;
    for (std::size_t k = 0; k < interior; ++k)
      path[k + 1] = Matrix::Identity(n, n) + from_traceless_coords(w.basis, x.segment(static_cast<Index>(k) * m, m));
    return path;
  };
  auto project = [&](const RealVector& x) {
    RealVector out(x.size());
    for (std::size_t k = 0; k < interior; ++k) {
      const Matrix rho = Matrix::Identity(n, n) + from_traceless_coords(w.basis, x.segment(static_cast<Index>(k) * m, m));
      out.segment(static_cast<Index>(k) * m, m) =
          traceless_coords(w.basis, project_density(rho, p.delta_min, static_cast<double>(n)));
    }
    return out;
  };
  const Objective f = [&](const RealVector& x, RealVector& g) {
    const std::vector<Matrix> path = to_path(x);
    if (opt.gradient == GradientMode::finite_difference) {
      g = fd_gradient([&](const RealVector& y) { return cost(to_path(y), nullptr); }, x, opt.fd_step);
      return cost(path, nullptr);
    }
    std::vector<Matrix> grads;
    const double v = cost(path, &grads);
    g.resize(x.size());
    for (std::size_t k = 0; k < interior; ++k)
      g.segment(static_cast<Index>(k) * m, m) = traceless_coords(w.basis, grads[k + 1]);
    return v;
  };

  RealVector x0(static_cast<Index>(interior) * m);
  for (std::size_t k = 0; k < interior; ++k)
    x0.segment(static_cast<Index>(k) * m, m) = traceless_coords(w.basis, start[k + 1]);

  PrimalSolution sol;
  if (interior == 0 || x0.size() == 0) {
    sol.rho_path = start;
    sol.converged = true;
  } else {
    SpgOptions so;
    so.max_iter = p.max_iter;
    so.pg_tol = p.tol;
    so.rel_tol = p.tol * 1e-4;
    const SpgResult r = spg_minimize(f, project, x0, so);
    sol.rho_path = to_path(r.x);
    sol.iterations = r.iterations;
    sol.converged = r.converged;
    sol.pg_norm = r.pg_norm;
  }
  return sol;
}

void fill_elimination(const TransportProblem& p, PrimalSolution& sol) {
  const Elimination e = eliminate_velocity(p, sol.rho_path);
  sol.potential_path = e.potentials;
  sol.velocity_path = e.velocities;
  sol.interval_action = e.interval_action;
  sol.action = e.action;
  sol.continuity_residual = e.continuity_residual;
}

TransportProblem drift_free(const TransportProblem& p) {
  TransportProblem q = p;
  q.epsilon = 0.0;
  return q;
}

}  // namespace

void validate_problem(const TransportProblem& p) {
  const Index n = p.dim();
  if (p.grid_n < 2) throw ValidationError("grid_n must be at least 2");
  if (!(p.epsilon >= 0.0)) throw ValidationError("epsilon must be nonnegative");
  if (!(p.delta_min >= 0.0) || p.delta_min * static_cast<double>(n) >= static_cast<double>(n))
    throw ValidationError("positivity floor must lie in [0, 1)");
  if (p.conn.size() != p.js.size()) throw DimensionError("connection family size differs from jump count");
  if (p.conn.kind() == ConnectionKind::kms) {
    const auto w = p.js.omegas();
    for (std::size_t j = 0; j < w.size(); ++j)
      if (std::abs(w[j] - p.conn.omegas()[j]) > 1e-12)
        throw ValidationError("kms connection frequencies do not match the jump set");
  }
  check_endpoint(p.rho0, n, "rho0");
  check_endpoint(p.rho1, n, "rho1");
}

std::vector<Matrix> init_path(const TransportProblem& p) {
  std::vector<Matrix> path;
  for (int i = 0; i <= p.grid_n; ++i) {
    const double t = static_cast<double>(i) / p.grid_n;
    path.push_back((1.0 - t) * p.rho0 + t * p.rho1);
  }
  return path;
}

Elimination eliminate_velocity(const TransportProblem& p, const std::vector<Matrix>& rho_path) {
  if (rho_path.size() != static_cast<std::size_t>(p.grid_n) + 1) throw DimensionError("eliminate_velocity: path length must be N+1");
  const Workspace w = make_workspace(p);
  const auto n_int = static_cast<std::size_t>(p.grid_n);
  std::vector<IntervalData> parts(n_int);
  parallel_for(n_int, [&](std::size_t i) {
    parts[i] = solve_interval(p, w, rho_path[i], rho_path[i + 1], false, true);
  });
  Elimination e;
  for (auto& d : parts) {
    e.potentials.push_back(std::move(d.potential));
    e.velocities.push_back(std::move(d.velocity));
    e.interval_action.push_back(d.action);
    e.action += d.action;
    e.continuity_residual = std::max(e.continuity_residual, d.residual);
  }
  return e;
}

double reduced_objective(const TransportProblem& p, const std::vector<Matrix>& rho_path, std::vector<Matrix>* gradient) {
  if (rho_path.size() != static_cast<std::size_t>(p.grid_n) + 1) throw DimensionError("reduced_objective: path length must be N+1");
  return objective_with(p, make_workspace(p), rho_path, gradient);
}

PrimalSolution solve_primal(const TransportProblem& p, const PrimalOptions& opt) {
  validate_problem(p);
  const Workspace w = make_workspace(p);
  PrimalSolution sol = minimize_path(
      p, w, [&](const std::vector<Matrix>& path, std::vector<Matrix>* g) { return objective_with(p, w, path, g); }, opt);
  fill_elimination(p, sol);
  return sol;
}

double becker_li_objective(const TransportProblem& p, const std::vector<Matrix>& rho_path, std::vector<Matrix>* gradient) {
  if (p.conn.kind() != ConnectionKind::kms) throw UnsupportedError("Becker-Li reformulation requires the kms connection");
  const TransportProblem q = drift_free(p);
  const Workspace w = make_workspace(q);
  double total = objective_with(q, w, rho_path, gradient);
  if (p.epsilon == 0.0) return total;
  const double e2 = p.epsilon * p.epsilon;
  const auto n_int = static_cast<std::size_t>(p.grid_n);
  std::vector<double> fisher(n_int);
  std::vector<Matrix> fisher_grad(n_int);
  parallel_for(n_int, [&](std::size_t i) {
    const Matrix mid = hermitian_part(0.5 * (rho_path[i] + rho_path[i + 1]));
    fisher[i] = fisher_info(p.js, mid);
    if (gradient) fisher_grad[i] = fisher_info_gradient(p.js, mid);
  });
  for (std::size_t i = 0; i < n_int; ++i) {
    total += p.dt() * e2 * fisher[i];
    if (gradient) {
      (*gradient)[i] += 0.5 * p.dt() * e2 * fisher_grad[i];
      (*gradient)[i + 1] += 0.5 * p.dt() * e2 * fisher_grad[i];
    }
  }
  return total;
}

BeckerLiSolution solve_primal_becker_li(const TransportProblem& p, const PrimalOptions& opt) {
  if (p.conn.kind() != ConnectionKind::kms) throw UnsupportedError("Becker-Li reformulation requires the kms connection");
  validate_problem(p);
  const TransportProblem q = drift_free(p);
  const Workspace w = make_workspace(q);
  BeckerLiSolution out;
  out.path = minimize_path(
      q, w, [&](const std::vector<Matrix>& path, std::vector<Matrix>* g) { return becker_li_objective(p, path, g); }, opt);
  fill_elimination(q, out.path);
  out.path_cost = becker_li_objective(p, out.path.rho_path);
  if (p.epsilon != 0.0)
    out.boundary = 2.0 * p.epsilon * (rel_entropy(p.rho1, p.js.sigma()) - rel_entropy(p.rho0, p.js.sigma()));
  out.value = out.path_cost + out.boundary;
  return out;
}

RealVector pack_interior(const std::vector<Matrix>& rho_path) {
  if (rho_path.size() < 2) return {};
  const Index n = rho_path.front().rows();
  const std::vector<Matrix> basis = traceless_hermitian_basis(n);
  const auto m = static_cast<Index>(basis.size());
  RealVector x(static_cast<Index>(rho_path.size() - 2) * m);
  for (std::size_t k = 1; k + 1 < rho_path.size(); ++k)
    x.segment(static_cast<Index>(k - 1) * m, m) = traceless_coords(basis, rho_path[k]);
  return x;
}

std::vector<Matrix> unpack_interior(const TransportProblem& p, const RealVector& x) {
  const Index n = p.dim();
  const std::vector<Matrix> basis = traceless_hermitian_basis(n);
  const auto m = static_cast<Index>(basis.size());
  if (x.size() != static_cast<Index>(p.grid_n - 1) * m) throw DimensionError("unpack_interior: wrong coordinate count");
  std::vector<Matrix> path{p.rho0};
  for (int k = 0; k + 1 < p.grid_n; ++k)
    path.push_back(Matrix::Identity(n, n) + from_traceless_coords(basis, x.segment(k * m, m)));
  path.push_back(p.rho1);
  return path;
}

// ---------------------------------------------------------------------------
// Classical reduction

namespace {

struct Edge {
  Index a, b;
  double rate;  // |c|^2
  double omega;
  const MeanKernel* kernel;
};

bool is_diagonal(const Matrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Index l = 0; l < m.cols(); ++l)
    for (Index k = 0; k < m.rows(); ++k)
      if (k != l && std::abs(m(k, l)) > 1e-12 * scale) return false;
  return true;
}

}  // namespace

OracleResult diagonal_oracle(const TransportProblem& p, int refine) {
  validate_problem(p);
  const Index n = p.dim();
  if (!is_diagonal(p.js.sigma()) || !is_diagonal(p.rho0) || !is_diagonal(p.rho1))
    throw UnsupportedError("diagonal_oracle: sigma and endpoints must be diagonal");

  std::vector<Edge> edges;
  for (std::size_t j = 0; j < p.js.size(); ++j) {
    const Matrix& v = p.js.op(j);
    Index a = -1, b = -1;
    int nonzero = 0;
    for (Index l = 0; l < n; ++l)
      for (Index k = 0; k < n; ++k)
        if (std::abs(v(k, l)) > 1e-12) {
          ++nonzero;
          a = k;
          b = l;
        }
    if (nonzero != 1 || a == b) throw UnsupportedError("diagonal_oracle: jumps must be multiples of off-diagonal matrix units");
    edges.push_back({a, b, std::norm(v(a, b)), p.js.omega(j), &p.conn.kernel(j)});
  }

  const int grid = refine * p.grid_n;
  const double dt = 1.0 / grid;
  const RealVector q0 = p.rho0.diagonal().real();
  const RealVector q1 = p.rho1.diagonal().real();

  auto adjoint_generator = [&](const RealVector& q) {
    RealVector out = RealVector::Zero(n);
    for (const auto& e : edges) {
      const double flux = e.rate * (std::exp(-e.omega / 2) * q(e.b) - std::exp(e.omega / 2) * q(e.a));
      out(e.a) += flux;
      out(e.b) -= flux;
    }
    return out;
  };

  auto interval_value = [&](const RealVector& qa, const RealVector& qb) {
    const RealVector mid = 0.5 * (qa + qb);
    RealVector r = (qb - qa) / dt - p.epsilon * adjoint_generator(mid);
    r.array() -= r.mean();
    RealMatrix lap = RealMatrix::Zero(n, n);
    for (const auto& e : edges) {
      const double wgt = e.rate * (*e.kernel)(mid(e.a), mid(e.b));
      lap(e.a, e.a) += wgt;
      lap(e.b, e.b) += wgt;
      lap(e.a, e.b) -= wgt;
      lap(e.b, e.a) -= wgt;
    }
    // ground the last node
    const RealVector pot = lap.topLeftCorner(n - 1, n - 1).ldlt().solve(r.head(n - 1));
    return dt * pot.dot(r.head(n - 1)) / static_cast<double>(n);
  };

  const std::size_t interior = static_cast<std::size_t>(grid) - 1;
  auto to_path = [&](const RealVector& x) {
    std::vector<RealVector> path{q0};
    for (std::size_t k = 0; k < interior; ++k) {
      RealVector q = x.segment(static_cast<Index>(k) * n, n);
      q.array() += 1.0 - q.mean();
      path.push_back(q);
    }
    path.push_back(q1);
    return path;
  };
  // Central differences; a node only enters its two neighbouring intervals.
  const Objective f = [&](const RealVector& x, RealVector& g) {
    std::vector<RealVector> path = to_path(x);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) total += interval_value(path[i], path[i + 1]);
    g.resize(x.size());
    const double h = 1e-6;
    for (std::size_t k = 0; k < interior; ++k) {
      for (Index c = 0; c < n; ++c) {
        RealVector y = x.segment(static_cast<Index>(k) * n, n);
        double side[2];
        for (int s = 0; s < 2; ++s) {
          y(c) = x(static_cast<Index>(k) * n + c) + (s == 0 ? h : -h);
          RealVector q = y;
          q.array() += 1.0 - q.mean();
          side[s] = interval_value(path[k], q) + interval_value(q, path[k + 2]);
        }
        g(static_cast<Index>(k) * n + c) = (side[0] - side[1]) / (2 * h);
      }
    }
    return total;
  };
  const Projection project = [&](const RealVector& x) {
    RealVector out(x.size());
    for (std::size_t k = 0; k < interior; ++k)
      out.segment(static_cast<Index>(k) * n, n) =
          project_capped_simplex(x.segment(static_cast<Index>(k) * n, n), p.delta_min, static_cast<double>(n));
    return out;
  };

  RealVector x0(static_cast<Index>(interior) * n);
  for (std::size_t k = 0; k < interior; ++k) {
    const double t = static_cast<double>(k + 1) / grid;
    x0.segment(static_cast<Index>(k) * n, n) = (1.0 - t) * q0 + t * q1;
  }
  SpgOptions so;
  so.max_iter = 20000;
  so.pg_tol = 1e-9;
  so.rel_tol = 1e-13;
  const SpgResult r = spg_minimize(f, project, x0, so);
  OracleResult out;
  out.value = r.value;
  out.path = to_path(r.x);
  out.iterations = r.iterations;
  out.converged = r.converged;
  return out;
}

}  // namespace qot
