#include "qot/connections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qot/errors.hpp"

namespace qot {

namespace {

// phi(c) = (e^c - 1) / c, continued by 1 at c = 0.
double phi(double c) {
  if (std::abs(c) < 1e-6) return 1.0 + c / 2.0 + c * c / 6.0;
  return std::expm1(c) / c;
}

// phi'(c) = (c e^c - (e^c - 1)) / c^2.
double phi_prime(double c) {
  if (std::abs(c) < 1e-2) {
    const double c2 = c * c;
    return 0.5 + c / 3.0 + c2 / 8.0 + c2 * c / 30.0 + c2 * c2 / 144.0 + c2 * c2 * c / 840.0 + c2 * c2 * c2 / 5760.0;
  }
  return (c * std::exp(c) - std::expm1(c)) / (c * c);
}

void require_positive_args(double x, double y, const char* what) {
  if (!(x > 0.0) || !(y > 0.0)) {
    std::ostringstream os;
    os << what << ": arguments must be positive (x = " << x << ", y = " << y << ")";
    throw DomainError(os.str());
  }
}

double central_partial(const std::function<double(double, double)>& f, double x, double y, bool in_x) {
  const double base = in_x ? x : y;
  const double h = 1e-6 * std::max(std::abs(base), 1e-8);
  if (in_x) return (f(x + h, y) - f(x - h, y)) / (2 * h);
  return (f(x, y + h) - f(x, y - h)) / (2 * h);
}

double lambda_min(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(h), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

void require_matching(const ConnectionFamily& conn, const VectorField& v) {
  if (conn.size() != v.size()) throw DimensionError("connection: family size differs from field component count");
}

}  // namespace

double kms_mean(double omega, double x, double y) {
  require_positive_args(x, y, "kms_mean");
  const double c = omega + std::log(x) - std::log(y);
  // Both forms equal the integral; pick the one without overflow.
  if (c > 0.0) return std::exp(omega / 2) * x * phi(-c);
  return std::exp(-omega / 2) * y * phi(c);
}

double kms_mean_dx(double omega, double x, double y) {
  require_positive_args(x, y, "kms_mean_dx");
  const double c = omega + std::log(x) - std::log(y);
  return std::exp(-omega / 2) * y * phi_prime(c) / x;
}

double kms_mean_dy(double omega, double x, double y) {
  require_positive_args(x, y, "kms_mean_dy");
  const double c = omega + std::log(x) - std::log(y);
  return std::exp(-omega / 2) * (phi(c) - phi_prime(c));
}

double MeanKernel::partial_x(double x, double y) const {
  return dx ? dx(x, y) : central_partial(value, x, y, true);
}

double MeanKernel::partial_y(double x, double y) const {
  return dy ? dy(x, y) : central_partial(value, x, y, false);
}

MeanKernel kms_kernel(double omega) {
  MeanKernel k;
  k.value = [omega](double x, double y) {
    if (x == 0.0 || y == 0.0) {
      if (x < 0.0 || y < 0.0) throw DomainError("kms kernel: negative argument");
      return 0.0;
    }
    return kms_mean(omega, x, y);
  };
  k.dx = [omega](double x, double y) {
    if (x == 0.0 && y > 0.0) return std::numeric_limits<double>::infinity();
    if (x == 0.0 || y == 0.0) return 0.0;
    return kms_mean_dx(omega, x, y);
  };
  k.dy = [omega](double x, double y) {
    if (y == 0.0 && x > 0.0) return std::numeric_limits<double>::infinity();
    if (x == 0.0 || y == 0.0) return 0.0;
    return kms_mean_dy(omega, x, y);
  };
  k.allows_zero = true;
  return k;
}

MeanKernel arithmetic_kernel() {
  MeanKernel k;
  k.value = [](double x, double y) { return 0.5 * (x + y); };
  k.dx = [](double, double) { return 0.5; };
  k.dy = [](double, double) { return 0.5; };
  k.allows_zero = true;
  return k;
}

ConnectionFamily ConnectionFamily::kms(const JumpOperatorSet& js) { return kms(js.omegas()); }

ConnectionFamily ConnectionFamily::kms(const std::vector<double>& omegas) {
  ConnectionFamily f;
  f.kind_ = ConnectionKind::kms;
  f.omegas_ = omegas;
  for (double w : omegas) f.kernels_.push_back(kms_kernel(w));
  return f;
}

ConnectionFamily ConnectionFamily::arithmetic(std::size_t count) {
  ConnectionFamily f;
  f.kind_ = ConnectionKind::arithmetic;
  f.kernels_.assign(count, arithmetic_kernel());
  return f;
}

ConnectionFamily ConnectionFamily::custom(std::vector<MeanKernel> kernels) {
  ConnectionFamily f;
  f.kind_ = ConnectionKind::custom;
  f.kernels_ = std::move(kernels);
  return f;
}

std::string ConnectionFamily::name() const {
  switch (kind_) {
    case ConnectionKind::kms: return "kms";
    case ConnectionKind::arithmetic: return "arithmetic";
    case ConnectionKind::custom: return "custom";
  }
  return "custom";
}

FamilyAudit audit_family(const ConnectionFamily& conn, const JumpOperatorSet& js) {
  if (conn.size() != js.size()) throw DimensionError("audit_family: family size differs from jump count");
  std::vector<double> grid;
  for (int e = -6; e <= 6; ++e) grid.push_back(std::pow(10.0, e / 2.0));
  FamilyAudit audit;
  audit.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < conn.size(); ++j) {
    const MeanKernel& mj = conn.kernel(j);
    const MeanKernel& mstar = conn.kernel(js.adjoint_index(j));
    for (double x : grid)
      for (double y : grid) {
        const double v = mj(x, y);
        const double scale = std::max(1.0, std::abs(v));
        audit.symmetry = std::max(audit.symmetry, std::abs(mstar(x, y) - mj(y, x)) / scale);
        audit.min_value = std::min(audit.min_value, v);
        for (double c : {0.5, 3.0})
          audit.homogeneity = std::max(audit.homogeneity, std::abs(mj(c * x, c * y) - c * v) / (c * scale));
      }
  }
  audit.passed = audit.symmetry <= 1e-10 && audit.min_value > 0.0 && audit.homogeneity <= 1e-10;
  return audit;
}

Spectrum connection_spectrum(const ConnectionFamily& conn, const Matrix& rho) {
  Spectrum s = eigh(rho);
  bool zero_ok = true;
  for (std::size_t j = 0; j < conn.size(); ++j) zero_ok = zero_ok && conn.kernel(j).allows_zero;
  const double tol = 1e-12 * std::max(1.0, std::abs(s.max_value()));
  const double lo = s.min_value();
  if (lo < -tol || (!zero_ok && lo <= 0.0)) {
    std::ostringstream os;
    os << "connection: eigenvalue " << lo << " of rho is outside the kernel domain";
    throw DomainError(os.str());
  }
  s.values = s.values.cwiseMax(0.0);
  s.vector_values = s.vector_values.cwiseMax(0.0);
  return s;
}

VectorField apply_connection(const ConnectionFamily& conn, const Spectrum& rho, const VectorField& v) {
  require_matching(conn, v);
  const Matrix& u = rho.vectors;
  const RealVector& lam = rho.vector_values;
  const Index n = rho.dim();
  VectorField out;
  out.components.reserve(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const MeanKernel& m = conn.kernel(j);
    Matrix w = u.adjoint() * v[j] * u;
    for (Index l = 0; l < n; ++l)
      for (Index k = 0; k < n; ++k) w(k, l) *= m(lam(k), lam(l));
    out.components.push_back(u * w * u.adjoint());
  }
  return out;
}

VectorField apply_connection(const ConnectionFamily& conn, const Matrix& rho, const VectorField& v) {
  return apply_connection(conn, connection_spectrum(conn, rho), v);
}

double weighted_norm_sq(const ConnectionFamily& conn, const Spectrum& rho, const VectorField& v) {
  require_matching(conn, v);
  const Matrix& u = rho.vectors;
  const RealVector& lam = rho.vector_values;
  const Index n = rho.dim();
  double acc = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const MeanKernel& m = conn.kernel(j);
    const Matrix w = u.adjoint() * v[j] * u;
    for (Index l = 0; l < n; ++l)
      for (Index k = 0; k < n; ++k) acc += m(lam(k), lam(l)) * std::norm(w(k, l));
  }
  return acc / static_cast<double>(n);
}

double weighted_norm_sq(const ConnectionFamily& conn, const Matrix& rho, const VectorField& v) {
  return weighted_norm_sq(conn, connection_spectrum(conn, rho), v);
}

double quad_inverse(const ConnectionFamily& conn, const Matrix& rho, const VectorField& v) {
  require_matching(conn, v);
  const Spectrum s = connection_spectrum(conn, rho);
  const Matrix& u = s.vectors;
  const RealVector& lam = s.vector_values;
  const Index n = s.dim();

  struct Term {
    double eig;
    double weight;
  };
  std::vector<Term> terms;
  double eig_max = 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const MeanKernel& m = conn.kernel(j);
    const Matrix w = u.adjoint() * v[j] * u;
    for (Index l = 0; l < n; ++l)
      for (Index k = 0; k < n; ++k) {
        const double mu = m(lam(k), lam(l));
        const double wt = std::norm(w(k, l)) / static_cast<double>(n);
        eig_max = std::max(eig_max, mu);
        total += wt;
        terms.push_back({mu, wt});
      }
  }
  if (total == 0.0) return 0.0;
  const double cutoff = 1e-12 * eig_max;
  double acc = 0.0;
  double kernel_weight = 0.0;
  for (const auto& t : terms) {
    if (t.eig <= cutoff) {
      kernel_weight += t.weight;
    } else {
      acc += t.weight / t.eig;
    }
  }
  if (std::sqrt(kernel_weight) > 1e-9 * std::sqrt(total)) return std::numeric_limits<double>::infinity();
  return acc;
}

double frechet_quadform(const ConnectionFamily& conn, const Matrix& b, const Matrix& a, const VectorField& v) {
  const double bn = gns_norm(b);
  const double an = gns_norm(a);
  if (an == 0.0) return 0.0;
  const Spectrum sb = connection_spectrum(conn, b);
  const Spectrum sa = connection_spectrum(conn, a);
  if (sb.min_value() <= 0.0 || sa.min_value() <= 0.0) {
    throw DomainError("frechet_quadform: A and B must be strictly positive");
  }
  const auto f = [&](double s) { return weighted_norm_sq(conn, Matrix(b + s * a), v); };
  const auto diff = [&](double h) { return (f(h) - f(-h)) / (2.0 * h); };
  const double h = 1e-5 * bn / an;
  return (4.0 * diff(h / 2.0) - diff(h)) / 3.0;
}

Matrix quadform_gradient(const ConnectionFamily& conn, const Spectrum& rho, const VectorField& g) {
  require_matching(conn, g);
  const Matrix& u = rho.vectors;
  const RealVector& lam = rho.vector_values;
  const Index n = rho.dim();
  Matrix xhat = Matrix::Zero(n, n);

  // First divided difference of m in one argument; the derivative on (near) ties.
  const auto divided = [](const MeanKernel& m, double a, double b, double other, bool first) {
    const double scale = std::max(std::abs(a), std::abs(b));
    if (std::abs(a - b) <= 1e-5 * scale) {
      const double mid = 0.5 * (a + b);
      return first ? m.partial_x(mid, other) : m.partial_y(other, mid);
    }
    return first ? (m(a, other) - m(b, other)) / (a - b) : (m(other, a) - m(other, b)) / (a - b);
  };

  std::vector<double> d1(static_cast<std::size_t>(n * n * n));
  std::vector<double> d2(static_cast<std::size_t>(n * n * n));
  for (std::size_t j = 0; j < g.size(); ++j) {
    const MeanKernel& m = conn.kernel(j);
    const Matrix gh = u.adjoint() * g[j] * u;
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b)
        for (Index o = 0; o < n; ++o) {
          const auto idx = static_cast<std::size_t>((a * n + b) * n + o);
          d1[idx] = divided(m, lam(a), lam(b), lam(o), true);
          d2[idx] = divided(m, lam(a), lam(b), lam(o), false);
        }
    // xhat(b, a) is the coefficient of H(a, b).
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) {
        Complex acc{};
        for (Index l = 0; l < n; ++l)
          acc += d1[static_cast<std::size_t>((a * n + b) * n + l)] * gh(b, l) * std::conj(gh(a, l));
        for (Index k = 0; k < n; ++k)
          acc += d2[static_cast<std::size_t>((a * n + b) * n + k)] * gh(k, a) * std::conj(gh(k, b));
        xhat(b, a) += acc;
      }
  }
  return hermitian_part(u * xhat * u.adjoint());
}

Matrix connection_mean(const MeanKernel& kernel, const Matrix& a, const Matrix& b) {
  const Spectrum sa = eigh(a);
  if (!(sa.min_value() > 0.0)) throw DomainError("connection_mean: A must be positive definite");
  const Matrix a_half = matfunc(sa, [](double x) { return std::sqrt(x); });
  const Matrix a_mhalf = matfunc(sa, [](double x) { return 1.0 / std::sqrt(x); });
  const Matrix t = hermitian_part(a_mhalf * b * a_mhalf);
  const Spectrum st = eigh(t);
  const double tol = 1e-12 * std::max(1.0, std::abs(st.max_value()));
  if (st.min_value() < -tol) throw DomainError("connection_mean: B must be positive semidefinite");
  const Matrix ft = matfunc(st, [&](double x) { return kernel(1.0, std::max(x, 0.0)); });
  return hermitian_part(a_half * ft * a_half);
}

AxiomReport connection_axioms(const MeanKernel& kernel, int trials, std::uint64_t seed, Index dim) {
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(0.3, 1.5);
  std::bernoulli_distribution coin(0.5);
  AxiomReport r;
  r.monotonicity = r.transformer = r.continuity = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Matrix a = random_positive(dim, rng, 0.1, 2.0);
    const Matrix b = random_positive(dim, rng, 0.1, 2.0);
    const Matrix lam_ab = connection_mean(kernel, a, b);

    const Matrix p = random_positive(dim, rng, 0.0, 1.0);
    const Matrix q = random_positive(dim, rng, 0.0, 1.0);
    r.monotonicity = std::min(r.monotonicity, lambda_min(connection_mean(kernel, a + p, b + q) - lam_ab));

    const Matrix u = random_unitary(dim, rng);
    RealVector d(dim);
    for (Index k = 0; k < dim; ++k) d(k) = coin(rng) ? uni(rng) : -uni(rng);
    const Matrix c = hermitian_part(u * d.cast<Complex>().asDiagonal() * u.adjoint());
    const Matrix lhs = c * lam_ab * c;
    const Matrix rhs = connection_mean(kernel, c * a * c, c * b * c);
    r.transformer = std::min(r.transformer, lambda_min(rhs - lhs));

    const Matrix id = Matrix::Identity(dim, dim);
    Matrix prev = connection_mean(kernel, a + id, b + id);
    for (int k = 2; k <= 1024; k *= 2) {
      const double s = 1.0 / k;
      const Matrix cur = connection_mean(kernel, a + s * id, b + s * id);
      r.continuity = std::min(r.continuity, lambda_min(prev - cur));
      prev = cur;
    }
    const Matrix near = connection_mean(kernel, a + 1e-6 * id, b + 1e-6 * id);
    r.continuity_limit = std::max(r.continuity_limit, (near - lam_ab).cwiseAbs().maxCoeff());
  }
  r.passed = r.monotonicity >= -1e-9 && r.transformer >= -1e-9 && r.continuity >= -1e-9;
  return r;
}

AxiomReport connection_axioms(const ConnectionFamily& conn, int trials, std::uint64_t seed, Index dim) {
  AxiomReport worst;
  worst.monotonicity = worst.transformer = worst.continuity = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < conn.size(); ++j) {
    const AxiomReport r = connection_axioms(conn.kernel(j), trials, seed + j, dim);
    worst.monotonicity = std::min(worst.monotonicity, r.monotonicity);
    worst.transformer = std::min(worst.transformer, r.transformer);
    worst.continuity = std::min(worst.continuity, r.continuity);
    worst.continuity_limit = std::max(worst.continuity_limit, r.continuity_limit);
  }
  worst.passed = worst.monotonicity >= -1e-9 && worst.transformer >= -1e-9 && worst.continuity >= -1e-9;
  return worst;
}

std::vector<double> monotone_inverse_convergence(const ConnectionFamily& conn, const Matrix& rho,
                                                 const VectorField& v, int steps) {
  require_matching(conn, v);
  const Spectrum s = connection_spectrum(conn, rho);
  const Matrix& u = s.vectors;
  const RealVector& lam = s.vector_values;
  const Index n = s.dim();
  std::vector<std::pair<double, double>> terms;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const Matrix w = u.adjoint() * v[j] * u;
    for (Index l = 0; l < n; ++l)
      for (Index k = 0; k < n; ++k)
        terms.emplace_back(conn.kernel(j)(lam(k), lam(l)), std::norm(w(k, l)) / static_cast<double>(n));
  }
  std::vector<double> values;
  for (int step = 0; step < steps; ++step) {
    const double shift = std::pow(10.0, -step);
    double acc = 0.0;
    for (const auto& [mu, wt] : terms) acc += wt / (mu + shift);
    values.push_back(acc);
  }
  return values;
}

}  // namespace qot
