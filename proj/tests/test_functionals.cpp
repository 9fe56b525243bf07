#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qot/derivation.hpp"
#include "qot/errors.hpp"
#include "qot/functionals.hpp"

using namespace qot;

namespace {

Matrix diag(std::initializer_list<double> d) {
  Matrix m = Matrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  Index k = 0;
  for (double x : d) m(k, k) = x, ++k;
  return m;
}

}  // namespace

TEST_CASE("relative entropy") {
  Rng rng(51);
  CHECK(std::abs(rel_entropy(Matrix::Identity(2, 2), Matrix::Identity(2, 2))) < 1e-15);
  const Matrix sigma = make_two_point(0.3).sigma();
  CHECK(std::abs(rel_entropy(sigma, sigma)) < 1e-14);

  // diagonal: (1/n) sum p log(p / q)
  const double want = 0.5 * (0.4 * std::log(0.4 / 0.6) + 1.6 * std::log(1.6 / 1.4));
  CHECK(rel_entropy(diag({0.4, 1.6}), sigma) == doctest::Approx(want).epsilon(1e-13));

  for (int t = 0; t < 20; ++t) {
    const Matrix rho = random_density(3, rng), s = random_density(3, rng);
    CHECK(rel_entropy(rho, s) >= -1e-13);
    // unitary invariance
    const Matrix u = random_unitary(3, rng);
    CHECK(rel_entropy(u * rho * u.adjoint(), u * s * u.adjoint()) == doctest::Approx(rel_entropy(rho, s)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(rel_entropy(diag({2.0, 0.0}), sigma), DomainError);
  CHECK_THROWS_AS(rel_entropy(sigma, diag({2.0, 1e-14})), DomainError);
  CHECK_THROWS_AS(rel_entropy(sigma, Matrix::Identity(3, 3)), DimensionError);
}

TEST_CASE("Fisher information") {
  const JumpOperatorSet js = make_two_point(0.3);
  CHECK(std::abs(fisher_info(js, js.sigma())) < 1e-14);
  Rng rng(52);
  for (int t = 0; t < 10; ++t) {
    const Matrix rho = random_density(2, rng, 0.1);
    CHECK(fisher_info(js, rho) > 0.0);
  }
  CHECK_THROWS_AS(fisher_info(js, diag({2.0, 0.0})), DomainError);

  // with the KMS kernel the weighted gradient of log rho - log sigma equals
  // the entropy production: I(rho) = -tau(L^dagger(rho) (log rho - log sigma))
  const Generator g = build_generator(js);
  for (int t = 0; t < 10; ++t) {
    const Matrix rho = random_density(2, rng, 0.1);
    const Matrix phi = matfunc(rho, [](double x) { return std::log(x); }) -
                       matfunc(js.sigma(), [](double x) { return std::log(x); });
    const double prod = -ntrace(g.adjoint.apply(rho) * phi).real();
    CHECK(fisher_info(js, rho) == doctest::Approx(prod).epsilon(1e-9));
  }
}

TEST_CASE("Fisher information gradient") {
  Rng rng(53);
  for (const auto& js : {make_two_point(0.3), make_depolarizing(2), make_dephasing_free_chain({1.0, 2.0, 3.0})}) {
    const Index n = js.dim();
    for (int t = 0; t < 5; ++t) {
      const Matrix rho = random_density(n, rng, 0.2);
      const Matrix h = random_hermitian(n, rng);
      const Matrix gr = fisher_info_gradient(js, rho);
      CHECK(hermitian_residual(gr) < 1e-10);
      const double s = 1e-5;
      const double fd = (fisher_info(js, rho + s * h) - fisher_info(js, rho - s * h)) / (2 * s);
      CHECK(ntrace(gr * h).real() == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("log derivative") {
  Rng rng(54);
  for (int t = 0; t < 10; ++t) {
    const Matrix rho = random_density(3, rng, 0.2);
    const Matrix h = random_hermitian(3, rng);
    const double s = 1e-6;
    const auto lg = [](double x) { return std::log(x); };
    const Matrix fd = (matfunc(rho + s * h, lg) - matfunc(rho - s * h, lg)) / (2 * s);
    CHECK((log_derivative(eigh(rho), h) - fd).norm() < 1e-7);
  }
  // commuting direction: rho^{-1} h
  const Matrix d = diag({0.5, 1.5});
  CHECK((log_derivative(eigh(d), Matrix::Identity(2, 2)) - diag({2.0, 1.0 / 1.5})).norm() < 1e-14);
}

TEST_CASE("functional report") {
  const JumpOperatorSet js = make_two_point(0.3);
  const std::vector<Matrix> path{diag({0.4, 1.6}), diag({0.5, 1.5}), diag({0.6, 1.4})};
  const FunctionalReport r = functional_report(js, path);
  CHECK(r.entropy_start == doctest::Approx(rel_entropy(path.front(), js.sigma())));
  CHECK(std::abs(r.entropy_end) < 1e-14);
  REQUIRE(r.fisher_values.size() == 3);
  CHECK(std::abs(r.fisher_values[2]) < 1e-14);
  CHECK(r.fisher_values[0] > r.fisher_values[1]);
}
