#pragma once

#include <vector>

#include "qot/connections.hpp"
#include "qot/linalg.hpp"
#include "qot/lindblad.hpp"

namespace qot {

/// D(rho || sigma) = tau(rho (log rho - log sigma)). Throws DomainError when an
/// eigenvalue of either argument is below 1e-12.
double rel_entropy(const Matrix& rho, const Matrix& sigma);

/// I(rho) = <grad phi, [rho]_omega grad phi> with phi = log rho - log sigma and
/// the KMS family of js.
double fisher_info(const JumpOperatorSet& js, const Matrix& rho);

/// Gradient of I in the tau pairing (Hermitian, traceless part not taken).
Matrix fisher_info_gradient(const JumpOperatorSet& js, const Matrix& rho);

/// Frechet derivative of log at rho applied to a Hermitian direction.
Matrix log_derivative(const Spectrum& rho, const Matrix& h);

struct FunctionalReport {
  double entropy_start = 0.0;
  double entropy_end = 0.0;
  std::vector<double> fisher_values;
};

FunctionalReport functional_report(const JumpOperatorSet& js, const std::vector<Matrix>& rho_path);

}  // namespace qot
