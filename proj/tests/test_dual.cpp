#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qot/derivation.hpp"
#include "qot/dual.hpp"
#include "qot/errors.hpp"

using namespace qot;

namespace {

// Half the continuum W^2 of the benchmark (see test_primal for the derivation).
constexpr double kHalfW2 = 0.5 * 0.0478275689794333;

Matrix diag(std::initializer_list<double> d) {
  Matrix m = Matrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  Index k = 0;
  for (double x : d) m(k, k) = x, ++k;
  return m;
}

TransportProblem benchmark(double eps = 0.0, int grid = 16) {
  const JumpOperatorSet js = make_two_point(0.3);
  TransportProblem p{js, ConnectionFamily::kms(js), diag({0.4, 1.6}), Matrix::Identity(2, 2)};
  p.epsilon = eps;
  p.grid_n = grid;
  return p;
}

// Brute-force sup over densities: dense grid on the Bloch ball of
// rho = 1 + x X + y Y + z Z (|r| <= 1) for n = 2.
double grid_violation(const TransportProblem& p, const Matrix& a, const Matrix& b) {
  const Generator gen = build_generator(p.js);
  const Matrix mid = 0.5 * (a + b);
  Matrix m = (b - a) / p.dt() + p.epsilon * gen.forward.apply(mid);
  const VectorField g = grad(p.js, mid);
  Matrix sx = Matrix::Zero(2, 2), sy = Matrix::Zero(2, 2), sz = Matrix::Zero(2, 2);
  sx(0, 1) = sx(1, 0) = 1.0;
  sy(0, 1) = Complex(0, -1);
  sy(1, 0) = Complex(0, 1);
  sz(0, 0) = 1.0;
  sz(1, 1) = -1.0;
  double best = -1e300;
  const int k = 24;
  for (int i = -k; i <= k; ++i)
    for (int j = -k; j <= k; ++j)
      for (int l = -k; l <= k; ++l) {
        const double x = 0.999 * i / k, y = 0.999 * j / k, z = 0.999 * l / k;
        if (x * x + y * y + z * z > 0.998) continue;
        const Matrix rho = Matrix::Identity(2, 2) + x * sx + y * sy + z * sz;
        best = std::max(best, ntrace(m * rho).real() + 0.5 * weighted_norm_sq(p.conn, rho, g));
      }
  return best;
}

}  // namespace

TEST_CASE("dual objective and lift") {
  const std::vector<Matrix> a{diag({1.0, -1.0}), diag({0.0, 0.0}), diag({2.0, 0.0})};
  CHECK(dual_objective(a, diag({0.4, 1.6}), Matrix::Identity(2, 2)) ==
        doctest::Approx(1.0 - 0.5 * (0.4 - 1.6)));
  CHECK_THROWS_AS(dual_objective({a[0]}, Matrix::Identity(2, 2), Matrix::Identity(2, 2)), DimensionError);

  const std::vector<Matrix> psi{diag({1, 0}), diag({3, 0}), diag({4, 0})};
  const auto lifted = lift_potentials(psi);
  REQUIRE(lifted.size() == 4);
  CHECK(lifted[0](0, 0).real() == doctest::Approx(0.0));
  CHECK(lifted[1](0, 0).real() == doctest::Approx(2.0));
  CHECK(lifted[2](0, 0).real() == doctest::Approx(3.5));
  CHECK(lifted[3](0, 0).real() == doctest::Approx(4.5));
}

TEST_CASE("HJB violation by projected ascent") {
  Rng rng(81);
  for (double eps : {0.0, 0.1}) {
    const TransportProblem p = benchmark(eps, 8);
    for (int t = 0; t < 3; ++t) {
      const Matrix a = random_hermitian(2, rng), b = random_hermitian(2, rng);
      HjbOptions opt;
      opt.restarts = 3;
      const HjbResult r = hjb_violation(p, a, b, opt);
      const double brute = grid_violation(p, a, b);
      CHECK(r.value >= brute - 1e-9);
      CHECK(r.value <= brute + 5e-2 * std::max(1.0, std::abs(brute)));
      CHECK(std::abs(ntrace(r.witness) - 1.0) < 1e-10);
      CHECK(eigh(r.witness).min_value() >= -1e-12);
    }
  }
  // the zero potential is exactly tight
  const TransportProblem p = benchmark();
  CHECK(std::abs(hjb_violation(p, Matrix::Zero(2, 2), Matrix::Zero(2, 2)).value) < 1e-12);
  // shifting by constants moves the value by the time derivative of the shift
  const Matrix a = random_hermitian(2, rng);
  const double v0 = hjb_violation(p, a, a).value;
  const double v1 = hjb_violation(p, a, a + 0.01 * Matrix::Identity(2, 2)).value;
  CHECK(v1 - v0 == doctest::Approx(0.01 / p.dt()).epsilon(1e-6));
}

TEST_CASE("arithmetic closed form") {
  Rng rng(82);
  for (double eps : {0.0, 0.1}) {
    const JumpOperatorSet js = make_two_point(0.3);
    TransportProblem p{js, ConnectionFamily::arithmetic(2), diag({0.4, 1.6}), Matrix::Identity(2, 2)};
    p.epsilon = eps;
    p.grid_n = 8;
    for (int t = 0; t < 10; ++t) {
      const Matrix a = random_hermitian(2, rng), b = random_hermitian(2, rng);
      HjbOptions opt;
      opt.restarts = 2;
      opt.pg_tol = 1e-12;
      const double ascent = hjb_violation(p, a, b, opt).value;
      const double closed = hjb_violation_arithmetic(p, a, b);
      CHECK(std::abs(ascent - closed) <= 1e-8 * std::max(1.0, std::abs(closed)));
    }
  }
  CHECK_THROWS_AS(hjb_violation_arithmetic(benchmark(), Matrix::Zero(2, 2), Matrix::Zero(2, 2)), UnsupportedError);
}

TEST_CASE("reduced dual on the benchmark") {
  const TransportProblem p = benchmark();
  const PrimalSolution ps = solve_primal(p);
  const DualSolution cold = solve_dual(p);
  const DualSolution warm = solve_dual(p, &ps);
  for (const DualSolution* d : {&cold, &warm}) {
    CHECK(d->feasible);
    CHECK(d->converged);
    CHECK(d->node_potentials.size() == 17);
    CHECK(d->worst_violation <= 1e-7);
    CHECK(check_weak_duality(ps, *d) >= -1e-6);
    CHECK(d->objective == doctest::Approx(kHalfW2).epsilon(2e-3));
    CHECK(std::abs(0.5 * ps.action - d->objective) <= 2e-2 * 0.5 * ps.action);
  }
}

TEST_CASE("penalty dual") {
  const TransportProblem p = benchmark(0.0, 8);
  const PrimalSolution ps = solve_primal(p);
  DualOptions opt;
  opt.method = DualMethod::penalty;
  const DualSolution d = solve_dual(p, &ps, opt);
  CHECK(d.feasible);
  CHECK(check_weak_duality(ps, d) >= -1e-6);
  CHECK(std::abs(0.5 * ps.action - d.objective) <= 2e-2 * 0.5 * ps.action);
}

TEST_CASE("certification restores feasibility") {
  const TransportProblem p = benchmark(0.1, 4);
  DualSolution sol;
  Rng rng(83);
  for (int i = 0; i <= 4; ++i) sol.node_potentials.push_back(random_hermitian(2, rng));
  certify(p, sol, DualOptions{});
  CHECK(sol.feasible);
  CHECK(sol.worst_violation <= 1e-12);
  CHECK(sol.shift > 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    HjbOptions opt;
    opt.restarts = 4;
    opt.seed = 99;
    CHECK(hjb_violation(p, sol.node_potentials[i], sol.node_potentials[i + 1], opt).value <= 1e-9);
  }
  // the bound then holds against any feasible path
  const PrimalSolution ps = solve_primal(p);
  CHECK(check_weak_duality(ps, sol) >= -1e-9);

  DualSolution wrong;
  wrong.node_potentials.assign(3, Matrix::Zero(2, 2));
  CHECK_THROWS_AS(certify(p, wrong, DualOptions{}), DimensionError);
}

TEST_CASE("stationary endpoints") {
  const JumpOperatorSet js = make_two_point(0.3);
  TransportProblem p{js, ConnectionFamily::kms(js), js.sigma(), js.sigma()};
  p.epsilon = 0.1;
  const DualSolution d = solve_dual(p);
  CHECK(d.feasible);
  CHECK(std::abs(d.objective) < 1e-6);
}
