#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qot/errors.hpp"
#include "qot/lindblad.hpp"

using namespace qot;

namespace {

std::vector<JumpOperatorSet> presets() {
  return {make_depolarizing(2), make_depolarizing(3), make_two_point(0.3), make_two_point(0.5),
          make_dephasing_free_chain({1.0, 2.0, 3.0})};
}

// Two decoupled blocks {0, 1} and {2}: jumps never touch state 2.
JumpOperatorSet reducible() {
  const double c = std::sqrt(3.0);
  std::vector<Jump> jumps{{c * matrix_unit(3, 0, 1), 0.0}, {c * matrix_unit(3, 1, 0), 0.0}};
  return JumpOperatorSet(Matrix::Identity(3, 3), jumps, {1, 0});
}

}  // namespace

TEST_CASE("presets pass validation") {
  for (const auto& js : presets()) {
    const ValidationReport r = validate_jump_set(js);
    CHECK(r.passed());
    CHECK(r.max_residual() < 1e-12);
  }
}

TEST_CASE("two_point construction") {
  const JumpOperatorSet half = make_two_point(0.5);
  CHECK((half.sigma() - Matrix::Identity(2, 2)).norm() < 1e-15);
  CHECK(half.omega(0) == 0.0);
  CHECK(half.omega(1) == 0.0);

  const JumpOperatorSet js = make_two_point(0.3);
  CHECK(js.omega(0) == doctest::Approx(std::log(7.0 / 3.0)).epsilon(1e-14));
  CHECK(js.omega(0) == doctest::Approx(0.8473).epsilon(1e-4));
  CHECK(js.omega(1) == doctest::Approx(-js.omega(0)));
  // sigma V_1 sigma^{-1} = (p / (1-p)) V_1
  const Matrix lhs = js.sigma() * js.op(0) * js.sigma().inverse();
  CHECK((lhs - (0.3 / 0.7) * js.op(0)).norm() < 1e-14);

  CHECK_THROWS_AS(make_two_point(0.0), DomainError);
  CHECK_THROWS_AS(make_two_point(1.5), DomainError);
  CHECK_THROWS_AS(preset("nope", {}), DomainError);
}

TEST_CASE("depolarizing construction") {
  const JumpOperatorSet js = make_depolarizing(2);
  CHECK(js.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(js.adjoint_index(j) == j);
    CHECK(hermitian_residual(js.op(j)) < 1e-15);
  }
  CHECK(validate_jump_set(js).passed());
}

TEST_CASE("validation flags broken jump sets") {
  const JumpOperatorSet good = make_two_point(0.3);
  std::vector<Jump> jumps = good.jumps();
  jumps[0].op += 0.1 * Matrix::Identity(2, 2);
  jumps[1].op = jumps[0].op.adjoint();
  const ValidationReport r = validate_jump_set(JumpOperatorSet(good.sigma(), jumps, {1, 0}));
  CHECK_FALSE(r.passed());
  CHECK_FALSE(r.find("traceless")->passed);

  std::vector<Jump> lonely{good.jumps()[0]};
  CHECK_THROWS_AS(JumpOperatorSet::with_inferred_involution(good.sigma(), lonely), ValidationError);

  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 2.0;
  CHECK_THROWS_AS(validate_jump_set(JumpOperatorSet(singular, good.jumps(), {1, 0})), PreconditionError);

  CHECK_THROWS_AS(build_generator(good.with_omega(0, good.omega(0) + 0.1)), ValidationError);
}

TEST_CASE("generator formula") {
  const Generator g = build_generator(make_depolarizing(2));
  // L(A) = 8 (tau(A) 1 - A)
  Rng rng(11);
  for (int t = 0; t < 10; ++t) {
    const Matrix a = random_matrix(2, rng);
    const Matrix want = 8.0 * (ntrace(a) * Matrix::Identity(2, 2) - a);
    CHECK((g.forward.apply(a) - want).norm() < 1e-12);
  }
  Matrix want = Matrix::Zero(2, 2);
  want(0, 0) = -4.0;
  want(1, 1) = 4.0;
  CHECK((g.forward.apply(matrix_unit(2, 0, 0)) - want).norm() < 1e-12);

  // two_point(1/2) on diagonal matrices is the symmetric two-state chain
  const Generator h = build_generator(make_two_point(0.5));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  const Matrix ld = h.forward.apply(d);
  CHECK(std::abs(ld(0, 0) + 4.0) < 1e-12);
  CHECK(std::abs(ld(1, 1) - 4.0) < 1e-12);
  CHECK(std::abs(ld(0, 1)) < 1e-12);
}

TEST_CASE("generator invariants for every preset") {
  Rng rng(12);
  for (const auto& js : presets()) {
    const Generator g = build_generator(js);
    const Index n = js.dim();
    CHECK(gns_norm(g.forward.apply(Matrix::Identity(n, n))) < 1e-10);
    CHECK(gns_norm(g.adjoint.apply(js.sigma())) < 1e-10);
    CHECK(check_dbc(js, 10, 3) < 1e-9);
    CHECK(check_cp(g, 0.1) >= -1e-9);
    CHECK(check_cp(g, 1.0) >= -1e-9);
    CHECK(check_ergodic(g).ergodic);
    for (int t = 0; t < 5; ++t) {
      const Matrix a = random_hermitian(n, rng), b = random_hermitian(n, rng), x = random_matrix(n, rng);
      // self-adjoint for tau(A^* B sigma)
      const Complex lhs = ntrace(g.forward.apply(a).adjoint() * b * js.sigma());
      const Complex rhs = ntrace(a.adjoint() * g.forward.apply(b) * js.sigma());
      CHECK(std::abs(lhs - rhs) < 1e-9);
      CHECK(std::abs(ntrace(g.adjoint.apply(x))) < 1e-10);
    }
  }
}

TEST_CASE("semigroup") {
  const Generator g = build_generator(make_depolarizing(2));
  CHECK((semigroup(g, 0.0).matrix() - Matrix::Identity(4, 4)).norm() < 1e-12);
  CHECK_THROWS_AS(semigroup(g, -0.1), DomainError);

  Rng rng(13);
  const Matrix a = random_matrix(2, rng);
  const Matrix lim = semigroup(g, 3.0).apply(a);
  CHECK((lim - ntrace(a) * Matrix::Identity(2, 2)).norm() < 1e-6);
  // closed form: P_t A = tau(A) + e^{-8t}(A - tau(A))
  const Matrix closed = ntrace(a) * Matrix::Identity(2, 2) + std::exp(-8.0 * 0.3) * (a - ntrace(a) * Matrix::Identity(2, 2));
  CHECK((semigroup(g, 0.3).apply(a) - closed).norm() < 1e-12);

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (const auto& js : {make_two_point(0.3), make_dephasing_free_chain({1.0, 4.0, 2.0})}) {
    const Generator h = build_generator(js);
    for (int t = 0; t < 5; ++t) {
      const double s = uni(rng), u = uni(rng);
      const Matrix lhs = semigroup(h, s + u).matrix();
      const Matrix rhs = (semigroup(h, s) * semigroup(h, u)).matrix();
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8);
      const Index n = js.dim();
      CHECK(gns_norm(semigroup(h, s).apply(Matrix::Identity(n, n)) - Matrix::Identity(n, n)) < 1e-12);
    }
  }
}

TEST_CASE("detailed balance detects a perturbed frequency") {
  CHECK(check_dbc(make_two_point(0.3), 20) < 1e-9);
  CHECK(check_dbc(make_depolarizing(3), 20) < 1e-9);
  const JumpOperatorSet js = make_two_point(0.3);
  CHECK(check_dbc(js.with_omega(0, js.omega(0) + 0.1), 20) > 1e-3);
}

TEST_CASE("ergodicity") {
  const Generator dep = build_generator(make_depolarizing(2));
  const ErgodicityReport r = check_ergodic(dep);
  CHECK(r.ergodic);
  CHECK(r.kernel_dim == 1);
  CHECK(check_ergodic(build_generator(make_two_point(0.3))).ergodic);

  const ErgodicityReport red = check_ergodic(build_generator(reducible()));
  CHECK_FALSE(red.ergodic);
  CHECK(red.kernel_dim > 1);
}

TEST_CASE("complete positivity") {
  const Generator g = build_generator(make_two_point(0.3));
  // identity channel: Choi eigenvalues {n, 0, ...}
  CHECK(std::abs(check_cp(g, 0.0)) < 1e-12);
  CHECK(check_cp(build_generator(make_depolarizing(2)), 0.1) >= -1e-10);
  CHECK(check_cp(g, 1.0) >= -1e-10);
}

TEST_CASE("dephasing-free chain") {
  const JumpOperatorSet js = make_dephasing_free_chain({1.0, 2.0, 3.0});
  CHECK(js.size() == 4);
  CHECK(std::abs(ntrace(js.sigma()) - 1.0) < 1e-14);
  CHECK(js.omega(0) == doctest::Approx(std::log(2.0)));
  CHECK(validate_jump_set(js).passed());
  CHECK_THROWS_AS(make_dephasing_free_chain({1.0}), DomainError);
  CHECK_THROWS_AS(make_dephasing_free_chain({1.0, -1.0}), DomainError);
}
