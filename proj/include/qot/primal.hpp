#pragma once

// Discretized Benamou-Brenier problem on the uniform grid t_i = i / N:
//
//   (rho_{i+1} - rho_i) / dt + div V_i = eps L^dagger rho_m,   rho_m = (rho_i + rho_{i+1}) / 2
//   action = sum_i dt <V_i, [rho_m]^{-1} V_i>
//
// Velocities are eliminated through V_i = [rho_m] grad A_i with
// K_{rho_m} A_i = (rho_{i+1} - rho_i) / dt - eps L^dagger rho_m, leaving a
// convex problem in the interior densities.

#include <cstdint>
#include <vector>

#include "qot/connections.hpp"
#include "qot/field.hpp"
#include "qot/linalg.hpp"
#include "qot/lindblad.hpp"

namespace qot {

struct TransportProblem {
  JumpOperatorSet js;
  ConnectionFamily conn;
  Matrix rho0;
  Matrix rho1;
  double epsilon = 0.0;
  int grid_n = 16;
  double tol = 1e-8;
  int max_iter = 3000;
  double delta_min = 1e-6;
  std::uint64_t seed = 0;

  double dt() const { return 1.0 / grid_n; }
  Index dim() const { return js.dim(); }
};

/// Checks shapes, hermiticity, tau = 1 and strict positivity of the
/// endpoints, family size and (for kms) matching frequencies. Throws
/// DimensionError, ValidationError or PreconditionError.
void validate_problem(const TransportProblem& p);

std::vector<Matrix> init_path(const TransportProblem& p);

struct Elimination {
  std::vector<Matrix> potentials;        // A_i, traceless
  std::vector<VectorField> velocities;   // V_i = [rho_m] grad A_i
  std::vector<double> interval_action;   // dt <grad A_i, [rho_m] grad A_i>
  double action = 0.0;
  double continuity_residual = 0.0;      // max_i |rho_dot + div V_i - eps L^dagger rho_m|
};

/// Drift-free elimination is obtained with epsilon = 0 in `p`.
Elimination eliminate_velocity(const TransportProblem& p, const std::vector<Matrix>& rho_path);

enum class GradientMode { analytic, finite_difference };

struct PrimalOptions {
  GradientMode gradient = GradientMode::analytic;
  double fd_step = 1e-5;
  bool warm_path = false;           // start from `initial` instead of the linear path
  std::vector<Matrix> initial;
};

struct PrimalSolution {
  std::vector<Matrix> rho_path;
  std::vector<VectorField> velocity_path;
  std::vector<Matrix> potential_path;
  std::vector<double> interval_action;
  double action = 0.0;
  double continuity_residual = 0.0;
  double pg_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Reduced objective and its gradient (tau pairing) with respect to every
/// node density; gradient entries for the endpoints are also filled.
double reduced_objective(const TransportProblem& p, const std::vector<Matrix>& rho_path,
                         std::vector<Matrix>* gradient = nullptr);

PrimalSolution solve_primal(const TransportProblem& p, const PrimalOptions& opt = {});

struct BeckerLiSolution {
  PrimalSolution path;       // drift-free path and potentials
  double path_cost = 0.0;    // sum dt (<W, [rho_m]^{-1} W> + eps^2 I(rho_m))
  double boundary = 0.0;     // 2 eps (D(rho1 || sigma) - D(rho0 || sigma))
  double value = 0.0;
};

/// Throws UnsupportedError unless the family is kms.
double becker_li_objective(const TransportProblem& p, const std::vector<Matrix>& rho_path,
                           std::vector<Matrix>* gradient = nullptr);
BeckerLiSolution solve_primal_becker_li(const TransportProblem& p, const PrimalOptions& opt = {});

/// Classical reduction for diagonal data whose jumps are multiples of matrix
/// units: a weighted graph transport problem on the eigenvalue simplex solved
/// on a grid of 4N intervals with finite-difference gradients. Throws
/// UnsupportedError on non-diagonal data.
struct OracleResult {
  double value = 0.0;
  std::vector<RealVector> path;
  int iterations = 0;
  bool converged = false;
};
OracleResult diagonal_oracle(const TransportProblem& p, int refine = 4);

/// Coordinates of the interior nodes (N-1 blocks of n^2-1 entries) relative
/// to the identity, and back.
RealVector pack_interior(const std::vector<Matrix>& rho_path);
std::vector<Matrix> unpack_interior(const TransportProblem& p, const RealVector& x);

}  // namespace qot
