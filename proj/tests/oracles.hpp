#pragma once

// Independent reference computations for the tests. Nothing here calls the
// spectral machinery under test except where noted.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "qot/field.hpp"
#include "qot/linalg.hpp"

namespace oracle {

using qot::Complex;
using qot::Index;
using qot::Matrix;
using qot::RealMatrix;
using qot::RealVector;

struct Quadrature {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;
};

// Gauss-Legendre rule by Newton iteration on P_n.
inline Quadrature gauss_legendre(int n) {
  Quadrature q;
  q.nodes.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  const double pi = std::acos(-1.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>(n - 1 - i);
    q.nodes[a] = 0.5 * (1.0 - x);
    q.nodes[b] = 0.5 * (1.0 + x);
    q.weights[a] = q.weights[b] = 0.5 * w;
  }
  return q;
}

// int_0^1 e^{w(s - 1/2)} x^s y^{1-s} ds
inline double kms_integral(double omega, double x, double y, int points = 200) {
  static const Quadrature q = gauss_legendre(200);
  const Quadrature& r = points == 200 ? q : gauss_legendre(points);
  double acc = 0.0;
  for (std::size_t k = 0; k < r.nodes.size(); ++k) {
    const double s = r.nodes[k];
    acc += r.weights[k] * std::exp(omega * (s - 0.5)) * std::pow(x, s) * std::pow(y, 1.0 - s);
  }
  return acc;
}

// Powers rho^s from a direct eigendecomposition.
inline Matrix power(const Eigen::SelfAdjointEigenSolver<Matrix>& es, double s) {
  const RealVector lam = es.eigenvalues().array().pow(s);
  return es.eigenvectors() * lam.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

// int_0^1 e^{w(s - 1/2)} rho^s V rho^{1-s} ds
inline Matrix kms_matrix_integral(double omega, const Matrix& rho, const Matrix& v) {
  static const Quadrature q = gauss_legendre(200);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  Matrix acc = Matrix::Zero(v.rows(), v.cols());
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    const double s = q.nodes[k];
    acc += q.weights[k] * std::exp(omega * (s - 0.5)) * power(es, s) * v * power(es, 1.0 - s);
  }
  return acc;
}

// Real coordinates of a complex matrix: (re, im) of every entry.
inline RealVector realify(const Matrix& m) {
  RealVector v(2 * m.size());
  for (Index k = 0; k < m.size(); ++k) {
    v(2 * k) = m.data()[k].real();
    v(2 * k + 1) = m.data()[k].imag();
  }
  return v;
}

inline Matrix complexify(const RealVector& v, Index n) {
  Matrix m(n, n);
  for (Index k = 0; k < m.size(); ++k) m.data()[k] = Complex(v(2 * k), v(2 * k + 1));
  return m;
}

// Minimum of <V, K^{-1} V> (tau pairing) subject to the real-linear
// constraint div(V) = b, where K acts componentwise as the given positive
// matrices on vec. Solved as a dense KKT system in real coordinates.
//   k_ops[j] : n^2 x n^2 complex matrix of K on component j (acting on vec)
//   div_op   : real matrix mapping stacked real field coordinates to realify(div V)
inline double constrained_min(const std::vector<Matrix>& k_ops, const RealMatrix& div_op, const RealVector& b, Index n) {
  const Index block = 2 * n * n;
  const Index dim = block * static_cast<Index>(k_ops.size());
  RealMatrix q = RealMatrix::Zero(dim, dim);
  for (std::size_t j = 0; j < k_ops.size(); ++j) {
    const Matrix kinv = k_ops[j].inverse();
    // tau(V^* K^{-1} V) = (1/n) vec(V)^* Kinv vec(V); realified Hermitian form
    RealMatrix r(block, block);
    for (Index c = 0; c < block; ++c) {
      RealVector e = RealVector::Zero(block);
      e(c) = 1.0;
      const Eigen::VectorXcd z = kinv * Eigen::Map<const Eigen::VectorXcd>(complexify(e, n).data(), n * n);
      Matrix zm = Eigen::Map<const Matrix>(z.data(), n, n);
      r.col(c) = realify(zm) / static_cast<double>(n);
    }
    q.block(static_cast<Index>(j) * block, static_cast<Index>(j) * block, block, block) = 0.5 * (r + r.transpose());
  }
  // minimize v^T q v s.t. D v = b
  const Index m = div_op.rows();
  RealMatrix kkt = RealMatrix::Zero(dim + m, dim + m);
  kkt.topLeftCorner(dim, dim) = 2.0 * q;
  kkt.topRightCorner(dim, m) = div_op.transpose();
  kkt.bottomLeftCorner(m, dim) = div_op;
  RealVector rhs = RealVector::Zero(dim + m);
  rhs.tail(m) = b;
  const RealVector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  const RealVector v = sol.head(dim);
  return v.dot(q * v);
}

}  // namespace oracle
