#pragma once

// Commutator calculus attached to a jump set: d_j A = [V_j, A], grad, its
// negative adjoint div, the real structure J and the weighted Laplacian
// K_rho(A) = -div([rho]_Lambda grad A).

#include "qot/connections.hpp"
#include "qot/field.hpp"
#include "qot/linalg.hpp"
#include "qot/lindblad.hpp"

namespace qot {

Matrix partial(const JumpOperatorSet& js, std::size_t j, const Matrix& a);
VectorField grad(const JumpOperatorSet& js, const Matrix& a);

/// -sum_j [V_j^*, W_j], so that <grad A, W> = -tau(A^* div W).
Matrix divergence(const JumpOperatorSet& js, const VectorField& w);

/// Anti-linear involution: component j* of the output is -(W_j)^*.
VectorField j_map(const JumpOperatorSet& js, const VectorField& w);

/// max_j |J(W)_j - W_j|; a field is real when this is <= 1e-10.
double real_residual(const JumpOperatorSet& js, const VectorField& w);
bool is_real(const JumpOperatorSet& js, const VectorField& w, double tol = 1e-10);

/// K_rho(A) = -div([rho]_Lambda grad A) for a precomputed spectrum of rho.
Matrix apply_weighted_laplacian(const JumpOperatorSet& js, const ConnectionFamily& conn, const Spectrum& rho,
                                const Matrix& a);

/// Superoperator matrix of K_rho. Throws DomainError unless rho > 0.
SuperOperator weighted_laplacian(const JumpOperatorSet& js, const ConnectionFamily& conn, const Matrix& rho);

/// K_rho restricted to traceless Hermitian matrices, in the basis of
/// traceless_hermitian_basis. Factorized once, solved many times; js and conn
/// must outlive the solver.
class PotentialSolver {
 public:
  /// Throws DomainError unless rho > 0 and StructuralError when the restricted
  /// operator is singular (kernel of grad larger than the constants).
  PotentialSolver(const JumpOperatorSet& js, const ConnectionFamily& conn, const Matrix& rho);

  const Spectrum& spectrum() const { return spectrum_; }
  Matrix apply(const Matrix& a) const;

  /// Traceless Hermitian A with K_rho(A) = g. Throws PreconditionError when
  /// tau(g) != 0 (to 1e-10 relative to |g|).
  Matrix solve(const Matrix& g) const;

  /// Smallest and largest eigenvalue of the restricted operator.
  double min_eigenvalue() const { return eig_.eigenvalues()(0); }
  double max_eigenvalue() const { return eig_.eigenvalues()(eig_.eigenvalues().size() - 1); }

 private:
  const JumpOperatorSet* js_;
  const ConnectionFamily* conn_;
  Spectrum spectrum_;
  std::vector<Matrix> basis_;
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig_;
};

Matrix solve_potential(const JumpOperatorSet& js, const ConnectionFamily& conn, const Matrix& rho, const Matrix& g);

/// Real coordinates tau(B_a X) of a Hermitian matrix in the traceless
/// Hermitian basis, and the inverse map (traceless part only).
RealVector traceless_coords(const std::vector<Matrix>& basis, const Matrix& x);
Matrix from_traceless_coords(const std::vector<Matrix>& basis, const RealVector& c);

}  // namespace qot
