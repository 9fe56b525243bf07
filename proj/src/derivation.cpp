#include "qot/derivation.hpp"

#include <cmath>
#include <sstream>

#include "qot/errors.hpp"

namespace qot {

namespace {

void require_field(const JumpOperatorSet& js, const VectorField& w) {
  if (w.size() != js.size()) throw DimensionError("field has wrong component count for the jump set");
  for (const auto& c : w.components)
    if (c.rows() != js.dim() || c.cols() != js.dim()) throw DimensionError("field component has wrong shape");
}

}  // namespace

Matrix partial(const JumpOperatorSet& js, std::size_t j, const Matrix& a) {
  if (j >= js.size()) throw DimensionError("partial: jump index out of range");
  if (a.rows() != js.dim() || a.cols() != js.dim()) throw DimensionError("partial: shape mismatch");
  const Matrix& v = js.op(j);
  return v * a - a * v;
}

VectorField grad(const JumpOperatorSet& js, const Matrix& a) {
  VectorField out;
  out.components.reserve(js.size());
  for (std::size_t j = 0; j < js.size(); ++j) out.components.push_back(partial(js, j, a));
  return out;
}

Matrix divergence(const JumpOperatorSet& js, const VectorField& w) {
  require_field(js, w);
  Matrix out = Matrix::Zero(js.dim(), js.dim());
  for (std::size_t j = 0; j < js.size(); ++j) {
    const Matrix vs = js.op(j).adjoint();
    out -= vs * w[j] - w[j] * vs;
  }
  return out;
}

VectorField j_map(const JumpOperatorSet& js, const VectorField& w) {
  require_field(js, w);
  VectorField out = VectorField::zero(js.size(), js.dim());
  for (std::size_t j = 0; j < js.size(); ++j) out[js.adjoint_index(j)] = -w[j].adjoint();
  return out;
}

double real_residual(const JumpOperatorSet& js, const VectorField& w) {
  const VectorField jw = j_map(js, w);
  double r = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) r = std::max(r, (jw[j] - w[j]).cwiseAbs().maxCoeff());
  return r;
}

bool is_real(const JumpOperatorSet& js, const VectorField& w, double tol) { return real_residual(js, w) <= tol; }

Matrix apply_weighted_laplacian(const JumpOperatorSet& js, const ConnectionFamily& conn, const Spectrum& rho,
                                const Matrix& a) {
  return -divergence(js, apply_connection(conn, rho, grad(js, a)));
}

SuperOperator weighted_laplacian(const JumpOperatorSet& js, const ConnectionFamily& conn, const Matrix& rho) {
  const Spectrum s = connection_spectrum(conn, rho);
  if (!(s.min_value() > 0.0)) throw DomainError("weighted_laplacian: rho must be strictly positive");
  return superop_matrix(js.dim(), [&](const Matrix& a) { return apply_weighted_laplacian(js, conn, s, a); });
}

RealVector traceless_coords(const std::vector<Matrix>& basis, const Matrix& x) {
  RealVector c(static_cast<Index>(basis.size()));
  for (std::size_t a = 0; a < basis.size(); ++a) c(static_cast<Index>(a)) = gns_inner(basis[a], x).real();
  return c;
}

Matrix from_traceless_coords(const std::vector<Matrix>& basis, const RealVector& c) {
  Matrix x = Matrix::Zero(basis.front().rows(), basis.front().cols());
  for (std::size_t a = 0; a < basis.size(); ++a) x += c(static_cast<Index>(a)) * basis[a];
  return x;
}

PotentialSolver::PotentialSolver(const JumpOperatorSet& js, const ConnectionFamily& conn, const Matrix& rho)
    : js_(&js), conn_(&conn), spectrum_(connection_spectrum(conn, rho)), basis_(traceless_hermitian_basis(js.dim())) {
  if (conn.size() != js.size()) throw DimensionError("PotentialSolver: family size differs from jump count");
  if (!(spectrum_.min_value() > 0.0)) throw DomainError("solve_potential: rho must be strictly positive");
  const auto m = static_cast<Index>(basis_.size());
  RealMatrix k(m, m);
  for (Index b = 0; b < m; ++b) {
    const Matrix kb = apply(basis_[static_cast<std::size_t>(b)]);
    for (Index a = 0; a < m; ++a) k(a, b) = gns_inner(basis_[static_cast<std::size_t>(a)], kb).real();
  }
  k = 0.5 * (k + k.transpose());
  eig_.compute(k);
  const double top = std::max(std::abs(max_eigenvalue()), 1e-300);
  if (min_eigenvalue() <= 1e-10 * top) {
    int null_dim = 1;
    for (Index a = 0; a < m; ++a) null_dim += eig_.eigenvalues()(a) <= 1e-10 * top ? 1 : 0;
    std::ostringstream os;
    os << "solve_potential: weighted Laplacian has a kernel of dimension " << null_dim
       << " (generator not ergodic)";
    throw StructuralError(os.str());
  }
}

Matrix PotentialSolver::apply(const Matrix& a) const { return apply_weighted_laplacian(*js_, *conn_, spectrum_, a); }

Matrix PotentialSolver::solve(const Matrix& g) const {
  require_hermitian(g, "solve_potential");
  const double tr = std::abs(ntrace(g));
  if (tr > 1e-10 * std::max(1.0, gns_norm(g))) {
    std::ostringstream os;
    os << "solve_potential: right-hand side has nonzero trace (tau(g) = " << tr << ")";
    throw PreconditionError(os.str());
  }
  const RealVector rhs = traceless_coords(basis_, g);
  const RealVector y = eig_.eigenvectors().transpose() * rhs;
  const RealVector x = eig_.eigenvectors() * y.cwiseQuotient(eig_.eigenvalues());
  return from_traceless_coords(basis_, x);
}

Matrix solve_potential(const JumpOperatorSet& js, const ConnectionFamily& conn, const Matrix& rho, const Matrix& g) {
  return PotentialSolver(js, conn, rho).solve(g);
}

}  // namespace qot
