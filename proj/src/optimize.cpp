#include "qot/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "qot/errors.hpp"

namespace qot {

SpgResult spg_minimize(const Objective& f, const Projection& project, RealVector x0, const SpgOptions& opt) {
  SpgResult r;
  RealVector x = project(x0);
  RealVector g(x.size());
  double fx = f(x, g);
  r.evaluations = 1;
  if (!std::isfinite(fx)) throw DomainError("spg: objective is not finite at the starting point");

  std::deque<double> history{fx};
  double best = fx;
  RealVector best_x = x;
  double best_at_window_start = fx;

  RealVector d = project(x - g) - x;
  double pg = d.norm();
  double alpha = pg > 0 ? std::clamp(1.0 / d.lpNorm<Eigen::Infinity>(), opt.step_min, opt.step_max) : 1.0;

  int it = 0;
  for (; it < opt.max_iter; ++it) {
    if (pg <= opt.pg_tol) {
      r.converged = true;
      break;
    }
    d = project(x - alpha * g) - x;
    const double slope = g.dot(d);
    const double ref = *std::max_element(history.begin(), history.end());

    double lambda = 1.0;
    RealVector xn, gn(x.size());
    double fn = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + lambda * d;
      // a trial point outside the objective's domain counts as +inf
      try {
        fn = f(xn, gn);
      } catch (const Error&) {
        fn = std::numeric_limits<double>::infinity();
      }
      ++r.evaluations;
      if (std::isfinite(fn) && fn <= ref + opt.armijo * lambda * slope) break;
      // safeguarded quadratic interpolation
      double next = 0.5 * lambda;
      if (std::isfinite(fn)) {
        const double denom = 2.0 * (fn - fx - lambda * slope);
        if (denom > 0) next = std::clamp(-slope * lambda * lambda / denom, 0.1 * lambda, 0.5 * lambda);
      }
      lambda = next;
    }
    if (!std::isfinite(fn)) break;

    const RealVector s = xn - x;
    const RealVector y = gn - g;
    const double sy = s.dot(y);
    // nonsmooth objectives can give sy <= 0; keep the previous step then
    if (sy > 0) alpha = std::clamp(s.squaredNorm() / sy, opt.step_min, opt.step_max);

    x = xn;
    g = gn;
    fx = fn;
    history.push_back(fx);
    if (static_cast<int>(history.size()) > opt.memory) history.pop_front();
    if (fx < best) {
      best = fx;
      best_x = x;
    }
    pg = (project(x - g) - x).norm();

    if (opt.rel_tol > 0 && (it + 1) % opt.memory == 0) {
      const double drop = best_at_window_start - best;
      if (drop <= opt.rel_tol * std::max(std::abs(best), 1.0)) {
        r.converged = true;
        ++it;
        break;
      }
      best_at_window_start = best;
    }
  }
  r.iterations = it;
  if (fx <= best) {
    r.x = x;
    r.value = fx;
  } else {
    r.x = best_x;
    r.value = best;
  }
  RealVector gb(x.size());
  if (r.x.size() && (r.x - x).norm() > 0) {
    f(r.x, gb);
    ++r.evaluations;
    r.pg_norm = (project(r.x - gb) - r.x).norm();
  } else {
    r.pg_norm = pg;
  }
  return r;
}

RealVector project_capped_simplex(const RealVector& v, double lo, double total) {
  const Index n = v.size();
  const double mass = total - lo * static_cast<double>(n);
  if (mass < 0) {
    std::ostringstream os;
    os << "project_capped_simplex: floor " << lo << " incompatible with total " << total;
    throw DomainError(os.str());
  }
  // Project w = v - lo onto {w >= 0, sum w = mass}.
  RealVector w = v.array() - lo;
  std::vector<double> u(w.data(), w.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (Index k = 0; k < n; ++k) {
    cum += u[static_cast<std::size_t>(k)];
    const double t = (cum - mass) / static_cast<double>(k + 1);
    if (k + 1 == n || u[static_cast<std::size_t>(k + 1)] <= t) {
      theta = t;
      break;
    }
  }
  return (w.array() - theta).cwiseMax(0.0) + lo;
}

Matrix project_density(const Matrix& h, double lo, double total) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(h));
  const RealVector lam = project_capped_simplex(solver.eigenvalues(), lo, total);
  const Matrix& u = solver.eigenvectors();
  return hermitian_part(u * lam.cast<Complex>().asDiagonal() * u.adjoint());
}

RealVector fd_gradient(const std::function<double(const RealVector&)>& f, const RealVector& x, double h) {
  RealVector g(x.size());
  RealVector y = x;
  for (Index k = 0; k < x.size(); ++k) {
    y(k) = x(k) + h;
    const double fp = f(y);
    y(k) = x(k) - h;
    const double fm = f(y);
    y(k) = x(k);
    g(k) = (fp - fm) / (2 * h);
  }
  return g;
}

}  // namespace qot
