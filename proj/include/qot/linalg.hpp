#pragma once

// Dense linear algebra on M_n(C) viewed as the GNS Hilbert space of the
// normalized trace: <A, B> = tau(A^* B), tau = tr / n.

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace qot {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

/// Normalized trace tr(M) / n.
Complex ntrace(const Matrix& m);

/// GNS inner product tau(A^* B); conjugate-linear in the first slot.
Complex gns_inner(const Matrix& a, const Matrix& b);

/// sqrt(tau(A^* A)).
double gns_norm(const Matrix& a);

/// Largest entrywise deviation |H_kl - conj(H_lk)|.
double hermitian_residual(const Matrix& h);

/// Throws ValidationError when h is not Hermitian to 1e-10 (relative to max(1, |h|_max)).
void require_hermitian(const Matrix& h, const char* what);

Matrix hermitian_part(const Matrix& m);

/// Spectral data of a Hermitian matrix.
///
/// `values` are ascending distinct eigenvalues after merging those within
/// 1e-10 * spectral radius; `projections` are the matching spectral
/// projections. `vectors` holds an orthonormal eigenbasis (columns) and
/// `vector_values` the clustered eigenvalue of each column, so that
/// sum_k vector_values[k] u_k u_k^* equals sum_k values[k] projections[k].
struct Spectrum {
  RealVector values;
  std::vector<Matrix> projections;
  Matrix vectors;
  RealVector vector_values;

  Index dim() const { return vectors.rows(); }
  double min_value() const { return values.size() ? values(0) : 0.0; }
  double max_value() const { return values.size() ? values(values.size() - 1) : 0.0; }
};

Spectrum eigh(const Matrix& h);

/// sum_k f(lambda_k) E_k. Throws DomainError when f is not finite at an eigenvalue.
Matrix matfunc(const Matrix& h, const std::function<double(double)>& f);
Matrix matfunc(const Spectrum& s, const std::function<double(double)>& f);

/// Linear map on n x n matrices represented in the orthonormal basis
/// {sqrt(n) E_kl} ordered column-major. The coordinates of A are vec(A)/sqrt(n),
/// so the representing matrix coincides with the one acting on vec(A).
class SuperOperator {
 public:
  SuperOperator() = default;
  SuperOperator(Index dim, Matrix rep);

  static SuperOperator identity(Index dim);

  Index dim() const { return dim_; }
  const Matrix& matrix() const { return rep_; }

  Matrix apply(const Matrix& a) const;
  Matrix operator()(const Matrix& a) const { return apply(a); }

  SuperOperator operator*(const SuperOperator& other) const;
  SuperOperator operator+(const SuperOperator& other) const;
  SuperOperator operator-(const SuperOperator& other) const;
  SuperOperator operator*(Complex s) const;

 private:
  Index dim_ = 0;
  Matrix rep_;
};

using LinearMap = std::function<Matrix(const Matrix&)>;

/// Builds the matrix of a linear map by applying it to the basis. Throws
/// ValidationError when a spot check on basis sums shows non-linearity.
SuperOperator superop_matrix(Index dim, const LinearMap& k);

/// GNS adjoint: <K^dagger A, B> = <A, K B>.
SuperOperator superop_adjoint(const SuperOperator& k);

Eigen::VectorXcd vec(const Matrix& a);
Matrix unvec(const Eigen::VectorXcd& v, Index dim);

/// Matrix unit E_kl (zero-based).
Matrix matrix_unit(Index dim, Index k, Index l);

/// GNS-orthonormal basis of the traceless Hermitian matrices
/// (generalized Gell-Mann matrices scaled by sqrt(n/2)); n^2 - 1 elements.
std::vector<Matrix> traceless_hermitian_basis(Index dim);

// Random sampling used by audits and tests.
Matrix random_matrix(Index dim, Rng& rng);
Matrix random_hermitian(Index dim, Rng& rng);
Matrix random_unitary(Index dim, Rng& rng);
/// Random density (tau = 1) with eigenvalues >= min_eig (in normalized units).
Matrix random_density(Index dim, Rng& rng, double min_eig = 0.05);
/// Random positive definite matrix with spectrum in [lo, hi].
Matrix random_positive(Index dim, Rng& rng, double lo, double hi);

}  // namespace qot
