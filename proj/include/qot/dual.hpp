#pragma once

// Discrete HJB subsolutions: node potentials A_0..A_N such that on every
// interval
//
//   c_i(rho) = tau((A_dot + eps L A_m) rho) + 1/2 <grad A_m, [rho] grad A_m> <= 0
//
// for all densities rho, with A_dot = (A_{i+1} - A_i) / dt and
// A_m = (A_i + A_{i+1}) / 2. The dual value is tau(A_N rho1) - tau(A_0 rho0).

#include <cstdint>
#include <optional>
#include <vector>

#include "qot/primal.hpp"

namespace qot {

struct HjbOptions {
  int restarts = 0;                  // extra random starting densities
  std::uint64_t seed = 0;
  const Matrix* warm = nullptr;      // starting density (defaults to the identity)
  double pg_tol = 1e-9;
  int max_iter = 5000;
};

struct HjbResult {
  double value = 0.0;
  Matrix witness;
  bool converged = false;
};

/// sup over densities of c_i(rho) by projected ascent. Densities are kept
/// >= 1e-12 for kms-type kernels and >= 0 otherwise.
HjbResult hjb_violation(const TransportProblem& p, const Matrix& a_i, const Matrix& a_next, const HjbOptions& opt = {});

/// Closed form for the arithmetic family: largest eigenvalue of
/// A_dot + eps L A_m + 1/4 sum_j (G_j G_j^* + G_j^* G_j), G = grad A_m.
double hjb_violation_arithmetic(const TransportProblem& p, const Matrix& a_i, const Matrix& a_next);

double dual_objective(const std::vector<Matrix>& potentials, const Matrix& rho0, const Matrix& rho1);

enum class DualMethod { reduced, penalty };

struct DualOptions {
  DualMethod method = DualMethod::reduced;
  int max_iter = 2000;
  double tol = 1e-10;
  double feasibility_tol = 1e-7;
  int certify_restarts = 5;
};

struct DualSolution {
  std::vector<Matrix> node_potentials;
  std::vector<Matrix> witness_densities;
  std::vector<double> violations;
  double objective = 0.0;
  double worst_violation = 0.0;
  double shift = 0.0;        // feasibility restoration applied after certification
  int iterations = 0;
  bool converged = false;
  bool feasible = false;
};

/// Lift of primal midpoint potentials to node potentials: interior nodes are
/// neighbour averages, the endpoints are extrapolated.
std::vector<Matrix> lift_potentials(const std::vector<Matrix>& midpoint_potentials);

/// Re-evaluates every interval with fresh random restarts and shifts the
/// path by -worst * t * 1 when a positive violation is found.
void certify(const TransportProblem& p, DualSolution& sol, const DualOptions& opt);

DualSolution solve_dual(const TransportProblem& p, const PrimalSolution* warm_start = nullptr,
                        const DualOptions& opt = {});

/// 1/2 primal action - dual objective.
double check_weak_duality(const PrimalSolution& primal, const DualSolution& dual);

}  // namespace qot
