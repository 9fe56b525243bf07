#pragma once

// Spectral projected gradient (Barzilai-Borwein steps with a nonmonotone
// Armijo search) for smooth minimization over a closed convex set given by
// its Euclidean projection.

#include <functional>
#include <limits>

#include "qot/linalg.hpp"

namespace qot {

struct SpgOptions {
  int max_iter = 2000;
  double pg_tol = 1e-9;       // stop when |P(x - g) - x| <= pg_tol
  double rel_tol = 0.0;       // or when the best value drops by <= rel_tol * max(|f|, 1) over `memory` steps
  int memory = 10;            // nonmonotone window
  double armijo = 1e-4;
  double step_min = 1e-12;
  double step_max = 1e12;
};

struct SpgResult {
  RealVector x;
  double value = std::numeric_limits<double>::infinity();
  double pg_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Returns f(x) and writes the gradient into g.
using Objective = std::function<double(const RealVector& x, RealVector& g)>;
using Projection = std::function<RealVector(const RealVector& x)>;

SpgResult spg_minimize(const Objective& f, const Projection& project, RealVector x0, const SpgOptions& opt = {});

/// Euclidean projection of v onto {x : x_k >= lo, sum x = total}.
/// Throws DomainError when total < lo * size.
RealVector project_capped_simplex(const RealVector& v, double lo, double total);

/// Projection of a Hermitian matrix onto {rho : rho >= lo, tr rho = total}
/// in the Frobenius norm, through its eigenvalues.
Matrix project_density(const Matrix& h, double lo, double total);

/// Central-difference gradient of a scalar function.
RealVector fd_gradient(const std::function<double(const RealVector&)>& f, const RealVector& x, double h);

}  // namespace qot
