#include "qot/functionals.hpp"

#include <cmath>
#include <sstream>

#include "qot/derivation.hpp"
#include "qot/errors.hpp"

namespace qot {

namespace {

constexpr double kEigenGuard = 1e-12;

Spectrum guarded_spectrum(const Matrix& m, const char* what) {
  Spectrum s = eigh(m);
  if (s.min_value() < kEigenGuard) {
    std::ostringstream os;
    os << what << ": smallest eigenvalue " << s.min_value() << " is below " << kEigenGuard;
    throw DomainError(os.str());
  }
  return s;
}

Matrix log_of(const Spectrum& s) {
  return matfunc(s, [](double x) { return std::log(x); });
}

}  // namespace

double rel_entropy(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows()) throw DimensionError("rel_entropy: dimension mismatch");
  const Matrix diff = log_of(guarded_spectrum(rho, "rel_entropy")) - log_of(guarded_spectrum(sigma, "rel_entropy"));
  return ntrace(rho * diff).real();
}

double fisher_info(const JumpOperatorSet& js, const Matrix& rho) {
  const Spectrum s = guarded_spectrum(rho, "fisher_info");
  const Matrix phi = log_of(s) - log_of(guarded_spectrum(js.sigma(), "fisher_info"));
  return weighted_norm_sq(ConnectionFamily::kms(js), s, grad(js, phi));
}

Matrix log_derivative(const Spectrum& rho, const Matrix& h) {
  const Matrix& u = rho.vectors;
  const RealVector& lam = rho.vector_values;
  Matrix w = u.adjoint() * h * u;
  for (Index l = 0; l < lam.size(); ++l)
    for (Index k = 0; k < lam.size(); ++k) {
      const double a = lam(k), b = lam(l);
      const double dd = std::abs(a - b) <= 1e-9 * std::max(a, b) ? 2.0 / (a + b) : (std::log(a) - std::log(b)) / (a - b);
      w(k, l) *= dd;
    }
  return hermitian_part(u * w * u.adjoint());
}

Matrix fisher_info_gradient(const JumpOperatorSet& js, const Matrix& rho) {
  const ConnectionFamily conn = ConnectionFamily::kms(js);
  const Spectrum s = guarded_spectrum(rho, "fisher_info");
  const Matrix phi = log_of(s) - log_of(guarded_spectrum(js.sigma(), "fisher_info"));
  const VectorField g = grad(js, phi);
  const Matrix kphi = apply_weighted_laplacian(js, conn, s, phi);
  return quadform_gradient(conn, s, g) + 2.0 * log_derivative(s, hermitian_part(kphi));
}

FunctionalReport functional_report(const JumpOperatorSet& js, const std::vector<Matrix>& rho_path) {
  FunctionalReport r;
  if (rho_path.empty()) return r;
  r.entropy_start = rel_entropy(rho_path.front(), js.sigma());
  r.entropy_end = rel_entropy(rho_path.back(), js.sigma());
  for (const auto& rho : rho_path) r.fisher_values.push_back(fisher_info(js, rho));
  return r;
}

}  // namespace qot
