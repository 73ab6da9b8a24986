#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "tmc/anova.hpp"
#include "tmc/estimators.hpp"
#include "tmc/fem1d.hpp"
#include "tmc/toeplitz.hpp"

using namespace tmc;

namespace {

Eigen::MatrixXd dense_of(const TridiagonalSystem& sys) {
  const Eigen::Index n = sys.diag.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = sys.diag[i];
    if (i + 1 < n) {
      a(i, i + 1) = sys.off[i];
      a(i + 1, i) = sys.off[i];
    }
  }
  return a;
}

}  // namespace

TEST_CASE("uniform assembly closed forms") {
  SUBCASE("y = 0, M = 4") {
    const Eigen::RowVectorXd y = Eigen::RowVectorXd::Zero(3);
    const TridiagonalSystem sys = assemble_uniform(y, 4);
    CHECK(sys.diag == Eigen::VectorXd::Constant(3, 16.0));
    CHECK(sys.off == Eigen::VectorXd::Constant(2, -8.0));
    CHECK(sys.rhs == Eigen::VectorXd::Constant(3, 0.25));
  }
  SUBCASE("y = 0 gives M * tridiag(-2, 4, -2) for any M") {
    for (Eigen::Index m : {2, 3, 8, 33}) {
      const Eigen::RowVectorXd y = Eigen::RowVectorXd::Zero(2);
      const TridiagonalSystem sys = assemble_uniform(y, m);
      CHECK(sys.diag == Eigen::VectorXd::Constant(m - 1, 4.0 * m));
      CHECK(sys.off == Eigen::VectorXd::Constant(std::max<Eigen::Index>(m - 2, 0),
                                                 -2.0 * m));
    }
  }
  SUBCASE("first-frequency diagonal coefficient at M = 4, k = 1") {
    const Eigen::MatrixXd coeff = uniform_coefficient_matrix(1, 4);
    CHECK(coeff(0, 0) == doctest::Approx(16.0 / std::numbers::pi).epsilon(1e-12));
  }
  SUBCASE("contributions are linear in y") {
    const Eigen::Index m = 8, s = 5;
    Eigen::RowVectorXd y(s);
    y << 0.3, -0.1, 0.45, 0.05, -0.5;
    const TridiagonalSystem sys = assemble_uniform(y, m);
    const Eigen::MatrixXd coeff = uniform_coefficient_matrix(s, m);
    const Eigen::RowVectorXd z = y * coeff;
    for (Eigen::Index k = 0; k < m - 1; ++k)
      CHECK(sys.diag[k] == doctest::Approx(4.0 * m + z[k]).epsilon(1e-13));
    for (Eigen::Index k = 0; k < m - 2; ++k)
      CHECK(sys.off[k] == doctest::Approx(-2.0 * m + z[m - 1 + k]).epsilon(1e-13));
  }
}

TEST_CASE("thomas_solve") {
  SUBCASE("hand case: tridiag(-1,2,-1) with unit rhs") {
    TridiagonalSystem sys;
    sys.diag = Eigen::VectorXd::Constant(2, 2.0);
    sys.off = Eigen::VectorXd::Constant(1, -1.0);
    sys.rhs = Eigen::VectorXd::Ones(2);
    const Eigen::VectorXd u = thomas_solve(sys);
    CHECK(u[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(u[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("identity diagonal returns the rhs") {
    TridiagonalSystem sys;
    sys.diag = Eigen::VectorXd::Ones(5);
    sys.off = Eigen::VectorXd::Zero(4);
    sys.rhs = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
    CHECK(thomas_solve(sys) == sys.rhs);
  }
  SUBCASE("matches a dense elimination oracle on random dominant systems") {
    const Eigen::Index n = 100;
    for (std::uint64_t seed : {1, 2, 3}) {
      const SampleStream r = make_stream(seed, 0, Law::UniformSym, 3 * n);
      TridiagonalSystem sys;
      sys.off = r.values.segment(0, n - 1);
      sys.diag = (2.5 + r.values.segment(n, n).array()).matrix();  // dominant
      sys.rhs = r.values.segment(2 * n, n);
      const Eigen::VectorXd mine = thomas_solve(sys);
      const Eigen::VectorXd oracle = dense_of(sys).partialPivLu().solve(sys.rhs);
      CHECK((mine - oracle).lpNorm<Eigen::Infinity>() <= 1e-10);

      // residual contract
      const Eigen::VectorXd residual = dense_of(sys) * mine - sys.rhs;
      CHECK(residual.lpNorm<Eigen::Infinity>() <=
            1e-10 * std::max(1.0, sys.rhs.lpNorm<Eigen::Infinity>()));
    }
  }
  SUBCASE("zero pivot throws") {
    TridiagonalSystem head;
    head.diag = Eigen::VectorXd::Zero(2);
    head.off = Eigen::VectorXd::Ones(1);
    head.rhs = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(thomas_solve(head), std::runtime_error);

    TridiagonalSystem mid;  // elimination makes the second pivot vanish
    mid.diag = Eigen::VectorXd::Ones(2);
    mid.off = Eigen::VectorXd::Ones(1);
    mid.rhs = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(thomas_solve(mid), std::runtime_error);
  }
}

TEST_CASE("uniform baseline u(1/2) = 1/16 at every even mesh") {
  const Eigen::RowVectorXd y = Eigen::RowVectorXd::Zero(4);
  for (Eigen::Index m : {2, 4, 6, 10, 64, 100, 256, 1000, 1024})
    CHECK(std::abs(solve_u_half_uniform(y, m) - 0.0625) < 1e-12);
  CHECK_THROWS_AS(solve_u_half_uniform(y, 5), std::invalid_argument);
  CHECK_THROWS_AS(solve_u_half_uniform(y, 127), std::invalid_argument);
}

TEST_CASE("uniform systems stay positive definite for boxed samples") {
  const Eigen::Index m = 32, s = 16;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SampleStream r = make_stream(seed, 0, Law::UniformSym, s);
    const TridiagonalSystem sys = assemble_uniform(r.values.transpose(), m);
    const Eigen::VectorXd u = thomas_solve(sys);
    CHECK(u.dot(dense_of(sys) * u) > 0.0);
  }
}

TEST_CASE("theta computation") {
  const Eigen::Index n = 8, s = 4, m = 6;
  const Eigen::VectorXd nodes = mesh_nodes(m);

  SUBCASE("node endpoints give exactly zero columns") {
    const Eigen::MatrixXd coeff = lognormal_sine_matrix(s, nodes);
    for (Eigen::Index j = 0; j < s; ++j) {
      CHECK(coeff(j, 0) == 0.0);
      CHECK(coeff(j, m) == 0.0);
    }
  }
  SUBCASE("zero samples give a zero matrix") {
    SampleStream zeros;
    zeros.values = Eigen::VectorXd::Zero(n + s - 1);
    const Eigen::MatrixXd thetas = compute_thetas(zeros, n, s, nodes);
    CHECK(thetas.lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("fast path matches direct per-sample summation") {
    const SampleStream stream = make_stream(7, 0, Law::StdNormal, n + s - 1);
    const Eigen::MatrixXd thetas = compute_thetas(stream, n, s, nodes);
    const Eigen::MatrixXd coeff = lognormal_sine_matrix(s, nodes);
    for (Eigen::Index row = 0; row < n; ++row)
      for (Eigen::Index q = 0; q <= m; ++q) {
        double direct = 0.0;
        for (Eigen::Index j = 0; j < s; ++j)
          direct += stream.values[row + s - 1 - j] * coeff(j, q);
        CHECK(std::abs(thetas(row, q) - direct) <= 1e-10);
      }
  }
}

TEST_CASE("log-normal assembly") {
  SUBCASE("zero field exponents give the exact unit-coefficient stiffness") {
    const Eigen::Index m = 12;
    const Eigen::RowVectorXd theta = Eigen::RowVectorXd::Zero(m + 1);
    const TridiagonalSystem sys = assemble_lognormal(theta, m);
    CHECK(sys.diag == Eigen::VectorXd::Constant(m - 1, 2.0 * m));
    CHECK(sys.off == Eigen::VectorXd::Constant(m - 2, -1.0 * m));
  }
  SUBCASE("theta = 0 baseline u(1/2) = 1/8 at every even mesh") {
    for (Eigen::Index m : {2, 4, 8, 50, 256, 1024}) {
      const Eigen::RowVectorXd theta = Eigen::RowVectorXd::Zero(m + 1);
      CHECK(std::abs(solve_u_half_lognormal(theta, m) - 0.125) < 1e-12);
    }
    const Eigen::RowVectorXd theta = Eigen::RowVectorXd::Zero(10);
    CHECK_THROWS_AS(solve_u_half_lognormal(theta, 9), std::invalid_argument);
  }
}

TEST_CASE("FEM solution matches the exact closed-form solve per sample") {
  // -(a u')' = 1 with u(0)=u(1)=0 solves to u(x) = int_0^x (C-t)/a(t) dt,
  // C = int_0^1 t/a dt / int_0^1 1/a dt; quadrature of that formula is an
  // independent route to u(1/2) that never touches the FEM machinery.
  const Eigen::Index s = 16, m = 256;
  const UnivariateLaw gl = gauss_legendre_law(200);
  const Eigen::VectorXd nodes01 = (gl.nodes.array() + 0.5).matrix();  // [0,1]
  const Eigen::VectorXd half_nodes = 0.5 * nodes01;                   // [0,1/2]

  const auto field_at = [&](const Eigen::RowVectorXd& y, double x) {
    double a = 2.0;
    for (Eigen::Index j = 1; j <= s; ++j)
      a += y[j - 1] * std::sin(2.0 * std::numbers::pi * j * x) /
           std::pow(double(j), 1.5);
    return a;
  };
  const auto exact_u_half = [&](const Eigen::RowVectorXd& y) {
    double inv_total = 0.0, t_over_a = 0.0, half = 0.0;
    for (Eigen::Index q = 0; q < nodes01.size(); ++q) {
      const double a = field_at(y, nodes01[q]);
      inv_total += gl.weights[q] / a;
      t_over_a += gl.weights[q] * nodes01[q] / a;
    }
    const double c = t_over_a / inv_total;
    for (Eigen::Index q = 0; q < half_nodes.size(); ++q)
      half += 0.5 * gl.weights[q] * (c - half_nodes[q]) /
              field_at(y, half_nodes[q]);
    return half;
  };

  double fem_mean = 0.0, exact_mean = 0.0, worst = 0.0;
  const int samples = 200;
  for (int r = 0; r < samples; ++r) {
    const SampleStream ys = make_stream(4242, r, Law::UniformSym, s);
    const Eigen::RowVectorXd y = ys.values.transpose();
    const double fem = solve_u_half_uniform(y, m);
    const double exact = exact_u_half(y);
    worst = std::max(worst, std::abs(fem - exact));
    fem_mean += fem / samples;
    exact_mean += exact / samples;
  }
  CHECK(worst < 1e-4);                            // discretization at M = 256
  CHECK(std::abs(fem_mean - exact_mean) < 5e-5);  // same-sample mean gap
  // the estimand itself sits near 0.0628 for this model
  CHECK(std::abs(exact_mean - 0.06276) < 5e-4);
}

TEST_CASE("estimator variance falls along an N ladder") {
  // fixed M = s, variance at 4N should drop below the one at N
  const Eigen::Index m = 16, s = 16;
  Eigen::MatrixXd coeff = uniform_coefficient_matrix(s, m);
  const Integrand f = make_linear_integrand(
      coeff, [m](Eigen::Ref<const Eigen::RowVectorXd> z) {
        return thomas_solve(assemble_uniform_from_expr(z, m))[m / 2 - 1];
      });
  int drops = 0, total = 0;
  for (std::uint64_t seed : {101, 202, 303, 404, 505}) {
    double prev = -1.0;
    for (Eigen::Index n : {16, 64, 256}) {
      const auto run = [&](std::uint64_t sd, std::uint64_t r) {
        return tmc_estimate(f, Law::UniformSym, n, sd, r + 1);
      };
      const double var = replicate(run, 25, seed).estimator_variance;
      if (prev >= 0.0) {
        ++total;
        if (var < prev) ++drops;
      }
      prev = var;
    }
  }
  CHECK(total == 10);
  CHECK(drops >= 9);
}
