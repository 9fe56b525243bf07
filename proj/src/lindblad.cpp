#include "qot/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "qot/errors.hpp"

namespace qot {

namespace {

constexpr double kAlickiTol = 1e-10;

ValidationCheck make_check(std::string name, double residual, double tol, std::string detail = {}) {
  return ValidationCheck{std::move(name), residual, tol, residual <= tol, std::move(detail)};
}

}  // namespace

JumpOperatorSet::JumpOperatorSet(Matrix sigma, std::vector<Jump> jumps, std::vector<std::size_t> involution)
    : sigma_(std::move(sigma)), jumps_(std::move(jumps)), involution_(std::move(involution)) {
  if (sigma_.rows() != sigma_.cols() || sigma_.rows() == 0) throw DimensionError("JumpOperatorSet: sigma must be square");
  if (jumps_.empty()) throw ValidationError("JumpOperatorSet: at least one jump operator is required");
  if (involution_.size() != jumps_.size()) throw ValidationError("JumpOperatorSet: involution size differs from jump count");
  for (std::size_t j = 0; j < jumps_.size(); ++j) {
    if (jumps_[j].op.rows() != dim() || jumps_[j].op.cols() != dim()) {
      throw DimensionError("JumpOperatorSet: jump operator dimension differs from sigma");
    }
    if (involution_[j] >= jumps_.size()) throw ValidationError("JumpOperatorSet: involution index out of range");
  }
}

JumpOperatorSet JumpOperatorSet::with_inferred_involution(Matrix sigma, std::vector<Jump> jumps) {
  std::vector<std::size_t> inv(jumps.size());
  for (std::size_t j = 0; j < jumps.size(); ++j) {
    const Matrix adj = jumps[j].op.adjoint();
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < jumps.size(); ++k) {
      if (jumps[k].op.rows() != adj.rows() || jumps[k].op.cols() != adj.cols()) {
        throw DimensionError("JumpOperatorSet: jump operator dimension mismatch");
      }
      const double r = (jumps[k].op - adj).cwiseAbs().maxCoeff();
      if (r < best) {
        best = r;
        best_k = k;
      }
    }
    if (best > kAlickiTol) {
      std::ostringstream os;
      os << "involution: jump " << j << " has no adjoint partner (closest residual " << best << ")";
      throw ValidationError(os.str());
    }
    inv[j] = best_k;
  }
  return JumpOperatorSet(std::move(sigma), std::move(jumps), std::move(inv));
}

std::vector<double> JumpOperatorSet::omegas() const {
  std::vector<double> w;
  w.reserve(jumps_.size());
  for (const auto& j : jumps_) w.push_back(j.omega);
  return w;
}

JumpOperatorSet JumpOperatorSet::with_omega(std::size_t j, double omega) const {
  JumpOperatorSet copy = *this;
  copy.jumps_.at(j).omega = omega;
  return copy;
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

double ValidationReport::max_residual() const {
  double worst = 0.0;
  for (const auto& c : checks) worst = std::max(worst, c.residual);
  return worst;
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ValidationReport validate_jump_set(const JumpOperatorSet& js) {
  require_hermitian(js.sigma(), "validate_jump_set: sigma");
  const Spectrum sig = eigh(js.sigma());
  if (!(sig.min_value() > 1e-12 * std::max(1.0, sig.max_value()))) {
    throw PreconditionError("validate_jump_set: sigma must be strictly positive");
  }
  const Matrix sigma_inv = matfunc(sig, [](double x) { return 1.0 / x; });

  ValidationReport report;
  const std::size_t m = js.size();

  double ortho = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < m; ++k) {
      const Complex target = (j == k) ? 1.0 : 0.0;
      ortho = std::max(ortho, std::abs(gns_inner(js.op(j), js.op(k)) - target));
    }
  report.checks.push_back(make_check("orthonormality", ortho, kAlickiTol));

  double trace = 0.0;
  std::size_t worst_trace = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = std::abs(ntrace(js.op(j)));
    if (t > trace) {
      trace = t;
      worst_trace = j;
    }
  }
  report.checks.push_back(make_check("traceless", trace, kAlickiTol, "worst jump " + std::to_string(worst_trace)));

  double inv = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t js_j = js.adjoint_index(j);
    inv = std::max(inv, (js.op(js_j) - js.op(j).adjoint()).cwiseAbs().maxCoeff());
    if (js.adjoint_index(js_j) != j) inv = std::numeric_limits<double>::infinity();
  }
  report.checks.push_back(make_check("involution", inv, kAlickiTol));

  double modular = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const Matrix lhs = js.sigma() * js.op(j) * sigma_inv;
    modular = std::max(modular, (lhs - std::exp(-js.omega(j)) * js.op(j)).norm());
  }
  report.checks.push_back(make_check("modular_relation", modular, kAlickiTol));

  double freq = 0.0;
  for (std::size_t j = 0; j < m; ++j) freq = std::max(freq, std::abs(js.omega(js.adjoint_index(j)) + js.omega(j)));
  report.checks.push_back(make_check("bohr_antisymmetry", freq, kAlickiTol));

  return report;
}

Matrix apply_lindblad(const JumpOperatorSet& js, const Matrix& a) {
  const Index n = js.dim();
  if (a.rows() != n || a.cols() != n) throw DimensionError("apply_lindblad: dimension mismatch");
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < js.size(); ++j) {
    const Matrix& v = js.op(j);
    const Matrix comm = a * v - v * a;
    const double w = js.omega(j);
    out += std::exp(-w / 2) * (v.adjoint() * comm) - std::exp(w / 2) * (comm * v.adjoint());
  }
  return out;
}

SuperOperator lindblad_superop(const JumpOperatorSet& js) {
  return superop_matrix(js.dim(), [&](const Matrix& a) { return apply_lindblad(js, a); });
}

Generator build_generator(const JumpOperatorSet& js) {
  const ValidationReport report = validate_jump_set(js);
  if (!report.passed()) {
    std::ostringstream os;
    os << "build_generator: invalid jump set:";
    for (const auto& c : report.checks)
      if (!c.passed) os << " " << c.name << " (residual " << c.residual << ")";
    throw ValidationError(os.str());
  }
  SuperOperator l = lindblad_superop(js);
  SuperOperator ladj = superop_adjoint(l);
  return Generator{std::move(l), std::move(ladj)};
}

SuperOperator superop_exp(const SuperOperator& k, double t) {
  const Index n2 = k.matrix().rows();
  Matrix x = k.matrix() * t;
  const double norm = x.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  x /= std::ldexp(1.0, squarings);

  // Taylor series to order 20; |x| <= 1/2 keeps the remainder below 1e-25.
  Matrix result = Matrix::Identity(n2, n2);
  Matrix term = Matrix::Identity(n2, n2);
  for (int order = 1; order <= 20; ++order) {
    term = term * x / static_cast<double>(order);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return SuperOperator(k.dim(), std::move(result));
}

SuperOperator semigroup(const Generator& g, double t) {
  if (!(t >= 0.0)) throw DomainError("semigroup: t must be nonnegative");
  if (t == 0.0) return SuperOperator::identity(g.forward.dim());
  return superop_exp(g.forward, t);
}

double check_dbc(const JumpOperatorSet& js, int samples, std::uint64_t seed) {
  const Index n = js.dim();
  const SuperOperator l = lindblad_superop(js);
  const std::vector<SuperOperator> maps{l, superop_exp(l, 0.1), superop_exp(l, 1.0)};
  Rng rng(seed);
  double worst = 0.0;
  const Matrix& sigma = js.sigma();
  for (int s = 0; s < samples; ++s) {
    const Matrix a = random_hermitian(n, rng);
    const Matrix b = random_hermitian(n, rng);
    for (const auto& k : maps) {
      const Complex lhs = ntrace(k.apply(a).adjoint() * b * sigma);
      const Complex rhs = ntrace(a.adjoint() * k.apply(b) * sigma);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

ErgodicityReport check_ergodic(const Generator& g) {
  Eigen::JacobiSVD<Matrix> svd(g.forward.matrix());
  const RealVector& s = svd.singularValues();
  const double cutoff = 1e-8 * s(0);
  int kernel = 0;
  for (Index k = 0; k < s.size(); ++k)
    if (s(k) <= cutoff) ++kernel;
  return ErgodicityReport{kernel == 1, kernel};
}

double check_cp(const Generator& g, double t) {
  const Index n = g.forward.dim();
  const SuperOperator p = semigroup(g, t);
  Matrix choi = Matrix::Zero(n * n, n * n);
  for (Index k = 0; k < n; ++k)
    for (Index l = 0; l < n; ++l) choi.block(k * n, l * n, n, n) = p.apply(matrix_unit(n, k, l));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(choi), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

JumpOperatorSet make_depolarizing(int n) {
  if (n < 2) throw DomainError("depolarizing: n must be >= 2");
  std::vector<Jump> jumps;
  for (auto& b : traceless_hermitian_basis(n)) jumps.push_back(Jump{std::move(b), 0.0});
  std::vector<std::size_t> inv(jumps.size());
  std::iota(inv.begin(), inv.end(), std::size_t{0});
  return JumpOperatorSet(Matrix::Identity(n, n), std::move(jumps), std::move(inv));
}

JumpOperatorSet make_two_point(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("two_point: p must lie in (0, 1)");
  Matrix sigma = Matrix::Zero(2, 2);
  sigma(0, 0) = 2.0 * p;
  sigma(1, 1) = 2.0 * (1.0 - p);
  const double w = std::log((1.0 - p) / p);
  std::vector<Jump> jumps{{std::sqrt(2.0) * matrix_unit(2, 0, 1), w}, {std::sqrt(2.0) * matrix_unit(2, 1, 0), -w}};
  return JumpOperatorSet(std::move(sigma), std::move(jumps), {1, 0});
}

JumpOperatorSet make_dephasing_free_chain(const std::vector<double>& weights) {
  const auto k = static_cast<Index>(weights.size());
  if (k < 2) throw DomainError("dephasing_free_chain: need at least two states");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("dephasing_free_chain: weights must be positive");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  Matrix sigma = Matrix::Zero(k, k);
  for (Index i = 0; i < k; ++i) sigma(i, i) = static_cast<double>(k) * weights[static_cast<std::size_t>(i)] / total;

  const double c = std::sqrt(static_cast<double>(k));
  std::vector<Jump> jumps;
  std::vector<std::size_t> inv;
  for (Index i = 0; i + 1 < k; ++i) {
    const double w = std::log(weights[static_cast<std::size_t>(i + 1)] / weights[static_cast<std::size_t>(i)]);
    const std::size_t base = jumps.size();
    jumps.push_back(Jump{c * matrix_unit(k, i, i + 1), w});
    jumps.push_back(Jump{c * matrix_unit(k, i + 1, i), -w});
    inv.push_back(base + 1);
    inv.push_back(base);
  }
  return JumpOperatorSet(std::move(sigma), std::move(jumps), std::move(inv));
}

JumpOperatorSet preset(const std::string& name, const PresetParams& params) {
  if (name == "depolarizing") return make_depolarizing(params.n);
  if (name == "two_point") return make_two_point(params.p);
  if (name == "dephasing_free_chain") return make_dephasing_free_chain(params.weights);
  throw DomainError("preset: unknown preset '" + name + "'");
}

}  // namespace qot
