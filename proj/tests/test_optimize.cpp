#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qot/errors.hpp"
#include "qot/optimize.hpp"
#include "qot/parallel.hpp"

using namespace qot;

TEST_CASE("capped simplex projection") {
  RealVector v(3);
  v << 0.2, 0.5, 0.3;
  CHECK((project_capped_simplex(v, 0.0, 1.0) - v).norm() < 1e-15);

  v << 5.0, -1.0, 0.0;
  const RealVector p = project_capped_simplex(v, 0.1, 3.0);
  CHECK(p.sum() == doctest::Approx(3.0));
  CHECK(p.minCoeff() >= 0.1 - 1e-15);
  CHECK(p(1) == doctest::Approx(0.1));
  CHECK(p(2) == doctest::Approx(0.1));

  CHECK_THROWS_AS(project_capped_simplex(v, 2.0, 3.0), DomainError);

  // optimality: <v - p, q - p> <= 0 for feasible q
  Rng rng(61);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 50; ++t) {
    RealVector w(4);
    for (Index k = 0; k < 4; ++k) w(k) = 2.0 * nd(rng);
    const RealVector pw = project_capped_simplex(w, 0.05, 4.0);
    CHECK(pw.sum() == doctest::Approx(4.0));
    CHECK(pw.minCoeff() >= 0.05 - 1e-14);
    for (int s = 0; s < 10; ++s) {
      RealVector q(4);
      for (Index k = 0; k < 4; ++k) q(k) = std::abs(nd(rng)) + 0.05;
      q = q.array() - 0.05;
      q *= (4.0 - 0.2) / q.sum();
      q.array() += 0.05;
      CHECK((w - pw).dot(q - pw) <= 1e-10);
    }
  }
}

TEST_CASE("density projection") {
  Rng rng(62);
  for (int t = 0; t < 10; ++t) {
    const Matrix h = random_hermitian(3, rng);
    const Matrix p = project_density(h, 1e-3, 3.0);
    CHECK(p.trace().real() == doctest::Approx(3.0));
    CHECK(eigh(p).min_value() >= 1e-3 - 1e-12);
    // idempotent
    CHECK((project_density(p, 1e-3, 3.0) - p).norm() < 1e-12);
  }
}

TEST_CASE("SPG on a box-constrained quadratic") {
  // minimize |x - c|^2_Q over the simplex
  RealMatrix q(3, 3);
  q << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  RealVector c(3);
  c << 1.0, -2.0, 0.5;
  const Objective f = [&](const RealVector& x, RealVector& g) {
    const RealVector d = x - c;
    g = 2.0 * q * d;
    return d.dot(q * d);
  };
  const Projection proj = [](const RealVector& x) { return project_capped_simplex(x, 0.0, 1.0); };
  RealVector x0 = RealVector::Constant(3, 1.0 / 3.0);
  SpgOptions opt;
  opt.pg_tol = 1e-12;
  const SpgResult r = spg_minimize(f, proj, x0, opt);
  CHECK(r.converged);
  CHECK(r.pg_norm <= 1e-12);
  // brute-force check on a fine grid of the simplex
  double best = 1e300;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; i + j <= 400; ++j) {
      RealVector x(3);
      x << i / 400.0, j / 400.0, (400 - i - j) / 400.0;
      RealVector g;
      best = std::min(best, f(x, g));
    }
  CHECK(r.value <= best + 1e-12);
  CHECK(r.value >= best - 1e-3);
}

TEST_CASE("SPG unconstrained Rosenbrock") {
  const Objective f = [](const RealVector& x, RealVector& g) {
    const double a = 1.0 - x(0), b = x(1) - x(0) * x(0);
    g.resize(2);
    g(0) = -2.0 * a - 400.0 * x(0) * b;
    g(1) = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  const Projection id = [](const RealVector& x) { return x; };
  RealVector x0(2);
  x0 << -1.2, 1.0;
  SpgOptions opt;
  opt.max_iter = 20000;
  opt.pg_tol = 1e-8;
  const SpgResult r = spg_minimize(f, id, x0, opt);
  CHECK(r.converged);
  CHECK(std::abs(r.x(0) - 1.0) < 1e-5);
  CHECK(std::abs(r.x(1) - 1.0) < 1e-5);
}

TEST_CASE("finite-difference gradient") {
  const auto f = [](const RealVector& x) { return std::sin(x(0)) * std::exp(x(1)) + x(2) * x(2) * x(0); };
  RealVector x(3);
  x << 0.3, -0.4, 1.2;
  const RealVector g = fd_gradient(f, x, 1e-6);
  CHECK(g(0) == doctest::Approx(std::cos(0.3) * std::exp(-0.4) + 1.44).epsilon(1e-8));
  CHECK(g(1) == doctest::Approx(std::sin(0.3) * std::exp(-0.4)).epsilon(1e-8));
  CHECK(g(2) == doctest::Approx(2 * 1.2 * 0.3).epsilon(1e-8));
}

TEST_CASE("parallel_for covers every index once") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), [&](std::size_t k) { hits[k] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK(worker_count() >= 1);
}
