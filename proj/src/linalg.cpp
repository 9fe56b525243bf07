#include "qot/linalg.hpp"

#include <cmath>
#include <sstream>

#include "qot/errors.hpp"

namespace qot {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

}  // namespace

Complex ntrace(const Matrix& m) {
  require_square(m, "ntrace");
  if (m.rows() == 0) throw DimensionError("ntrace: empty matrix");
  return m.trace() / static_cast<double>(m.rows());
}

Complex gns_inner(const Matrix& a, const Matrix& b) {
  require_square(a, "gns_inner");
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("gns_inner: dimension mismatch");
  }
  // tau(A^* B) = (1/n) sum_kl conj(A_kl) B_kl
  return a.conjugate().cwiseProduct(b).sum() / static_cast<double>(a.rows());
}

double gns_norm(const Matrix& a) {
  return std::sqrt(a.squaredNorm() / static_cast<double>(a.rows()));
}

double hermitian_residual(const Matrix& h) {
  require_square(h, "hermitian_residual");
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

void require_hermitian(const Matrix& h, const char* what) {
  require_square(h, what);
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (hermitian_residual(h) > 1e-10 * scale) {
    std::ostringstream os;
    os << what << ": matrix is not Hermitian (asymmetry " << hermitian_residual(h) << ")";
    throw ValidationError(os.str());
  }
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

Spectrum eigh(const Matrix& h) {
  require_hermitian(h, "eigh");
  const Index n = h.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(h));
  if (solver.info() != Eigen::Success) throw Error("eigh: eigensolver failed");

  Spectrum s;
  s.vectors = solver.eigenvectors();
  const RealVector& raw = solver.eigenvalues();
  const double radius = raw.size() ? raw.cwiseAbs().maxCoeff() : 0.0;
  const double tol = 1e-10 * radius;

  // Group consecutive (ascending) eigenvalues closer than tol.
  std::vector<std::pair<Index, Index>> clusters;
  Index start = 0;
  for (Index k = 1; k <= n; ++k) {
    if (k == n || raw(k) - raw(k - 1) > tol) {
      clusters.emplace_back(start, k);
      start = k;
    }
  }

  s.values.resize(static_cast<Index>(clusters.size()));
  s.vector_values.resize(n);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto [lo, hi] = clusters[c];
    const double rep = raw.segment(lo, hi - lo).mean();
    s.values(static_cast<Index>(c)) = rep;
    s.vector_values.segment(lo, hi - lo).setConstant(rep);
    const auto block = s.vectors.middleCols(lo, hi - lo);
    s.projections.push_back(block * block.adjoint());
  }
  return s;
}

Matrix matfunc(const Spectrum& s, const std::function<double(double)>& f) {
  const Index n = s.dim();
  Matrix out = Matrix::Zero(n, n);
  for (Index k = 0; k < s.values.size(); ++k) {
    const double fk = f(s.values(k));
    if (!std::isfinite(fk)) {
      std::ostringstream os;
      os << "matfunc: eigenvalue " << s.values(k) << " is outside the domain of f";
      throw DomainError(os.str());
    }
    out += fk * s.projections[static_cast<std::size_t>(k)];
  }
  return out;
}

Matrix matfunc(const Matrix& h, const std::function<double(double)>& f) {
  return matfunc(eigh(h), f);
}

SuperOperator::SuperOperator(Index dim, Matrix rep) : dim_(dim), rep_(std::move(rep)) {
  if (rep_.rows() != dim * dim || rep_.cols() != dim * dim) {
    throw DimensionError("SuperOperator: representation must be n^2 x n^2");
  }
}

SuperOperator SuperOperator::identity(Index dim) {
  return SuperOperator(dim, Matrix::Identity(dim * dim, dim * dim));
}

Matrix SuperOperator::apply(const Matrix& a) const {
  if (a.rows() != dim_ || a.cols() != dim_) throw DimensionError("SuperOperator::apply: dimension mismatch");
  return unvec(rep_ * vec(a), dim_);
}

SuperOperator SuperOperator::operator*(const SuperOperator& other) const {
  if (dim_ != other.dim_) throw DimensionError("SuperOperator: dimension mismatch");
  return SuperOperator(dim_, rep_ * other.rep_);
}

SuperOperator SuperOperator::operator+(const SuperOperator& other) const {
  if (dim_ != other.dim_) throw DimensionError("SuperOperator: dimension mismatch");
  return SuperOperator(dim_, rep_ + other.rep_);
}

SuperOperator SuperOperator::operator-(const SuperOperator& other) const {
  if (dim_ != other.dim_) throw DimensionError("SuperOperator: dimension mismatch");
  return SuperOperator(dim_, rep_ - other.rep_);
}

SuperOperator SuperOperator::operator*(Complex s) const { return SuperOperator(dim_, rep_ * s); }

Eigen::VectorXcd vec(const Matrix& a) {
  return Eigen::Map<const Eigen::VectorXcd>(a.data(), a.size());
}

Matrix unvec(const Eigen::VectorXcd& v, Index dim) {
  if (v.size() != dim * dim) throw DimensionError("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Matrix matrix_unit(Index dim, Index k, Index l) {
  Matrix e = Matrix::Zero(dim, dim);
  e(k, l) = 1.0;
  return e;
}

SuperOperator superop_matrix(Index dim, const LinearMap& k) {
  const Index n2 = dim * dim;
  Matrix rep(n2, n2);
  std::vector<Matrix> images;
  images.reserve(static_cast<std::size_t>(n2));
  for (Index c = 0; c < n2; ++c) {
    Matrix basis = Matrix::Zero(dim, dim);
    basis(c % dim, c / dim) = 1.0;
    Matrix img = k(basis);
    if (img.rows() != dim || img.cols() != dim) throw DimensionError("superop_matrix: map changes dimension");
    rep.col(c) = vec(img);
    images.push_back(std::move(img));
  }
  // Linearity spot check on a few sums of basis elements.
  for (Index c = 0; c + 1 < n2; c += std::max<Index>(1, n2 / 4)) {
    Matrix sum = Matrix::Zero(dim, dim);
    sum(c % dim, c / dim) = 1.0;
    sum((c + 1) % dim, (c + 1) / dim) = Complex(0.0, 2.0);
    const Matrix lhs = k(sum);
    const Matrix rhs = images[static_cast<std::size_t>(c)] + Complex(0.0, 2.0) * images[static_cast<std::size_t>(c + 1)];
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      throw ValidationError("superop_matrix: map failed the linearity spot check");
    }
  }
  return SuperOperator(dim, std::move(rep));
}

SuperOperator superop_adjoint(const SuperOperator& k) {
  return SuperOperator(k.dim(), k.matrix().adjoint());
}

std::vector<Matrix> traceless_hermitian_basis(Index dim) {
  std::vector<Matrix> basis;
  const double scale = std::sqrt(static_cast<double>(dim) / 2.0);
  const Complex i(0.0, 1.0);
  for (Index k = 0; k < dim; ++k) {
    for (Index l = k + 1; l < dim; ++l) {
      basis.push_back(scale * (matrix_unit(dim, k, l) + matrix_unit(dim, l, k)));
      basis.push_back(scale * (-i * matrix_unit(dim, k, l) + i * matrix_unit(dim, l, k)));
    }
  }
  // Diagonal generators: sqrt(2/(m(m+1))) (sum_{k<m} E_kk - m E_mm).
  for (Index m = 1; m < dim; ++m) {
    Matrix d = Matrix::Zero(dim, dim);
    for (Index k = 0; k < m; ++k) d(k, k) = 1.0;
    d(m, m) = -static_cast<double>(m);
    const double norm = std::sqrt(2.0 / static_cast<double>(m * (m + 1)));
    basis.push_back(scale * norm * d);
  }
  return basis;
}

Matrix random_matrix(Index dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(dim, dim);
  for (Index c = 0; c < dim; ++c)
    for (Index r = 0; r < dim; ++r) m(r, c) = Complex(normal(rng), normal(rng));
  return m;
}

Matrix random_hermitian(Index dim, Rng& rng) { return hermitian_part(random_matrix(dim, rng)); }

Matrix random_unitary(Index dim, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(dim, rng));
  Matrix q = qr.householderQ();
  // Fix phases so the distribution is Haar.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < dim; ++k) {
    const Complex d = r(k, k);
    if (std::abs(d) > 0) q.col(k) *= d / std::abs(d);
  }
  return q;
}

Matrix random_positive(Index dim, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> uni(lo, hi);
  const Matrix u = random_unitary(dim, rng);
  RealVector d(dim);
  for (Index k = 0; k < dim; ++k) d(k) = uni(rng);
  return hermitian_part(u * d.cast<Complex>().asDiagonal() * u.adjoint());
}

Matrix random_density(Index dim, Rng& rng, double min_eig) {
  std::exponential_distribution<double> expo(1.0);
  RealVector w(dim);
  for (Index k = 0; k < dim; ++k) w(k) = expo(rng);
  // Eigenvalues in normalized units: sum = n, each >= min_eig.
  const double n = static_cast<double>(dim);
  const double free = n - n * min_eig;
  w = (w / w.sum()) * free;
  w.array() += min_eig;
  const Matrix u = random_unitary(dim, rng);
  return hermitian_part(u * w.cast<Complex>().asDiagonal() * u.adjoint());
}

}  // namespace qot
