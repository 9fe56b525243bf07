#pragma once

// Detailed-balance Lindblad generators in Alicki form:
//
//   L(A) = sum_j ( e^{-w_j/2} V_j^* [A, V_j] - e^{w_j/2} [A, V_j] V_j^* )
//
// with tau(V_j^* V_k) = delta_jk, tau(V_j) = 0, {V_j} closed under adjoints and
// sigma V_j sigma^{-1} = e^{-w_j} V_j.

#include <cstdint>
#include <string>
#include <vector>

#include "qot/linalg.hpp"

namespace qot {

struct Jump {
  Matrix op;
  double omega = 0.0;
};

/// Alicki data {(V_j, w_j)} together with the invariant density sigma and the
/// index involution j -> j* with V_{j*} = V_j^*. Only shapes and index ranges
/// are checked on construction; see validate_jump_set for the algebraic
/// conditions.
class JumpOperatorSet {
 public:
  JumpOperatorSet(Matrix sigma, std::vector<Jump> jumps, std::vector<std::size_t> involution);

  /// Pairs each jump with the jump equal to its adjoint. Throws
  /// ValidationError if some V_j has no adjoint partner.
  static JumpOperatorSet with_inferred_involution(Matrix sigma, std::vector<Jump> jumps);

  Index dim() const { return sigma_.rows(); }
  std::size_t size() const { return jumps_.size(); }
  const Matrix& sigma() const { return sigma_; }
  const Matrix& op(std::size_t j) const { return jumps_[j].op; }
  double omega(std::size_t j) const { return jumps_[j].omega; }
  std::size_t adjoint_index(std::size_t j) const { return involution_[j]; }
  const std::vector<Jump>& jumps() const { return jumps_; }
  const std::vector<std::size_t>& involution() const { return involution_; }
  std::vector<double> omegas() const;

  /// Copy with w_j replaced (used to build deliberately broken fixtures).
  JumpOperatorSet with_omega(std::size_t j, double omega) const;

 private:
  Matrix sigma_;
  std::vector<Jump> jumps_;
  std::vector<std::size_t> involution_;
};

struct ValidationCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool passed() const;
  double max_residual() const;
  const ValidationCheck* find(const std::string& name) const;
};

/// Per-condition residuals of the Alicki conditions; passes iff every
/// residual is <= 1e-10. Throws PreconditionError when sigma is singular.
ValidationReport validate_jump_set(const JumpOperatorSet& js);

/// Direct evaluation of the Alicki formula (no validation).
Matrix apply_lindblad(const JumpOperatorSet& js, const Matrix& a);

/// Matrix of the Alicki formula (no validation).
SuperOperator lindblad_superop(const JumpOperatorSet& js);

struct Generator {
  SuperOperator forward;  // L
  SuperOperator adjoint;  // L^dagger w.r.t. tau(A^* B)
};

/// Validates js and builds L and its adjoint. Throws ValidationError on an
/// invalid jump set.
Generator build_generator(const JumpOperatorSet& js);

/// exp(tL) by scaling and squaring with a Taylor kernel. Throws DomainError for t < 0.
SuperOperator semigroup(const Generator& g, double t);
SuperOperator superop_exp(const SuperOperator& k, double t);

/// Max residual of the sigma-detailed-balance condition, both infinitesimally
/// tau((LA)^* B sigma) = tau(A^* (LB) sigma) and for P_t at t in {0.1, 1}, over
/// `samples` random Hermitian pairs. Does not validate js.
double check_dbc(const JumpOperatorSet& js, int samples, std::uint64_t seed = 0);

struct ErgodicityReport {
  bool ergodic = false;
  int kernel_dim = 0;
};

/// Kernel dimension of L from singular values below 1e-8 * largest.
ErgodicityReport check_ergodic(const Generator& g);

/// Smallest eigenvalue of the Choi matrix sum_kl E_kl (x) P_t(E_kl).
double check_cp(const Generator& g, double t);

struct PresetParams {
  int n = 2;                    // depolarizing
  double p = 0.5;               // two_point
  std::vector<double> weights;  // dephasing_free_chain: stationary weights (any positive scale)
};

/// depolarizing(n): sigma = 1, jumps = GNS-orthonormal traceless Hermitian basis, w = 0.
JumpOperatorSet make_depolarizing(int n);

/// two_point(p): sigma = diag(2p, 2(1-p)), V_1 = sqrt2 E_12, V_2 = sqrt2 E_21,
/// w_1 = log((1-p)/p), w_2 = -w_1.
JumpOperatorSet make_two_point(double p);

/// Reversible nearest-neighbour chain on k = weights.size() states embedded
/// diagonally. sigma = k * diag(pi) with pi = weights / sum(weights); for each
/// edge (i, i+1) the jumps sqrt(k) E_{i,i+1} and sqrt(k) E_{i+1,i} with
/// w = log(pi_{i+1} / pi_i) and its negative.
JumpOperatorSet make_dephasing_free_chain(const std::vector<double>& weights);

/// Dispatch by name: "depolarizing", "two_point", "dephasing_free_chain".
JumpOperatorSet preset(const std::string& name, const PresetParams& params);

}  // namespace qot
