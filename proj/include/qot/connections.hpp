#pragma once

// Operator connections acting on H_{A,J} through the spectral representation
//
//   [rho]_Lambda A = sum_{k,l} m(lambda_k, lambda_l) E_k A E_l
//
// where m is the scalar mean kernel of the connection and E_k are the spectral
// projections of rho.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qot/field.hpp"
#include "qot/linalg.hpp"
#include "qot/lindblad.hpp"

namespace qot {

/// KMS mean int_0^1 e^{w(s-1/2)} x^s y^{1-s} ds for x, y > 0.
/// Throws DomainError for nonpositive arguments.
double kms_mean(double omega, double x, double y);
double kms_mean_dx(double omega, double x, double y);
double kms_mean_dy(double omega, double x, double y);

/// Scalar mean kernel m(x, y) of a connection, with partial derivatives.
struct MeanKernel {
  std::function<double(double, double)> value;
  // Optional; central differences are used when empty.
  std::function<double(double, double)> dx;
  std::function<double(double, double)> dy;
  // Whether m extends continuously to x = 0 or y = 0.
  bool allows_zero = false;

  double operator()(double x, double y) const { return value(x, y); }
  double partial_x(double x, double y) const;
  double partial_y(double x, double y) const;
};

/// KMS kernel with the boundary extension m(0, y) = m(x, 0) = 0.
MeanKernel kms_kernel(double omega);
MeanKernel arithmetic_kernel();

enum class ConnectionKind { kms, arithmetic, custom };

class ConnectionFamily {
 public:
  /// KMS kernels bound to the Bohr frequencies of js.
  static ConnectionFamily kms(const JumpOperatorSet& js);
  static ConnectionFamily kms(const std::vector<double>& omegas);
  static ConnectionFamily arithmetic(std::size_t count);
  static ConnectionFamily custom(std::vector<MeanKernel> kernels);

  ConnectionKind kind() const { return kind_; }
  std::string name() const;
  std::size_t size() const { return kernels_.size(); }
  const MeanKernel& kernel(std::size_t j) const { return kernels_[j]; }
  const std::vector<double>& omegas() const { return omegas_; }

 private:
  ConnectionKind kind_ = ConnectionKind::custom;
  std::vector<MeanKernel> kernels_;
  std::vector<double> omegas_;
};

struct FamilyAudit {
  double symmetry = 0.0;      // max |m_{j*}(x,y) - m_j(y,x)| / scale
  double min_value = 0.0;     // smallest sampled m_j
  double homogeneity = 0.0;   // max |m(cx,cy) - c m(x,y)| / scale
  bool passed = false;
};

/// Pointwise checks of the kernel family on a log-spaced sample grid.
FamilyAudit audit_family(const ConnectionFamily& conn, const JumpOperatorSet& js);

/// Spectrum of rho checked against the family's kernel domain; tiny negative
/// eigenvalues from round-off are clamped to 0. Throws DomainError otherwise.
Spectrum connection_spectrum(const ConnectionFamily& conn, const Matrix& rho);

VectorField apply_connection(const ConnectionFamily& conn, const Matrix& rho, const VectorField& v);
VectorField apply_connection(const ConnectionFamily& conn, const Spectrum& rho, const VectorField& v);

/// <V, [rho]^{-1} V> with the kernel convention: +infinity when V has overlap
/// larger than 1e-9 |V| with the numerical kernel (eigenvalues below 1e-12 * max).
double quad_inverse(const ConnectionFamily& conn, const Matrix& rho, const VectorField& v);

/// <V, [rho]_Lambda V>.
double weighted_norm_sq(const ConnectionFamily& conn, const Matrix& rho, const VectorField& v);
double weighted_norm_sq(const ConnectionFamily& conn, const Spectrum& rho, const VectorField& v);

/// <V, (d f(B)[A]) V> for f(X) = [X]_Lambda by central differences with one
/// Richardson step.
double frechet_quadform(const ConnectionFamily& conn, const Matrix& b, const Matrix& a, const VectorField& v);

/// Hermitian X with tau(X H) = d/ds <G, [rho + sH]_Lambda G> at s = 0
/// (Daleckii-Krein divided differences of the kernels).
Matrix quadform_gradient(const ConnectionFamily& conn, const Spectrum& rho, const VectorField& g);

/// Matrix-level connection Lambda(A, B) = A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}
/// with f(t) = m(1, t). A must be positive definite.
Matrix connection_mean(const MeanKernel& kernel, const Matrix& a, const Matrix& b);

struct AxiomReport {
  double monotonicity = 0.0;       // worst lambda_min(Lambda(C,D) - Lambda(A,B))
  double transformer = 0.0;        // worst lambda_min(Lambda(CAC,CBC) - C Lambda(A,B) C)
  double continuity = 0.0;         // worst lambda_min(Lambda(A_k,B_k) - Lambda(A_{k+1},B_{k+1}))
  double continuity_limit = 0.0;   // largest |Lambda(A + 1e-6, B + 1e-6) - Lambda(A, B)|
  bool passed = false;             // all margins >= -1e-9
};

AxiomReport connection_axioms(const MeanKernel& kernel, int trials, std::uint64_t seed = 0, Index dim = 3);
/// Worst margins over all kernels of the family.
AxiomReport connection_axioms(const ConnectionFamily& conn, int trials, std::uint64_t seed = 0, Index dim = 3);

/// Values <V, (K + (1/n) id)^{-1} V> for K = [rho]_Lambda and n = 10^0, ..., 10^{steps-1}.
std::vector<double> monotone_inverse_convergence(const ConnectionFamily& conn, const Matrix& rho,
                                                 const VectorField& v, int steps);

}  // namespace qot
