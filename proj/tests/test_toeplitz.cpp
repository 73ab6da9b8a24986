#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>

#include "tmc/rng.hpp"
#include "tmc/sampling.hpp"
#include "tmc/toeplitz.hpp"

using namespace tmc;

namespace {

double max_rel_error(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  const double scale = std::max(1.0, want.lpNorm<Eigen::Infinity>());
  return (got - want).lpNorm<Eigen::Infinity>() / scale;
}

ToeplitzOperator random_operator(Eigen::Index rows, Eigen::Index cols,
                                 std::uint64_t seed) {
  return build_operator(make_stream(seed, 0, Law::UniformSym, rows + cols - 1),
                        rows, cols);
}

double time_matvecs(const ToeplitzOperator& op, const Eigen::VectorXd& a, int reps,
                    bool fast) {
  using Clock = std::chrono::steady_clock;
  double best = 1e300;
  volatile double sink = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const auto start = Clock::now();
    for (int r = 0; r < reps; ++r)
      sink = sink + (fast ? fast_matvec(op, a) : naive_matvec(op, a))[0];
    best = std::min(best,
                    std::chrono::duration<double>(Clock::now() - start).count());
  }
  return best;
}

}  // namespace

TEST_CASE("operator layout follows the reversed-window rule") {
  Eigen::VectorXd gen(3);
  gen << 1, 2, 3;
  const ToeplitzOperator op = make_toeplitz(gen, 2, 2);
  CHECK(op.entry(0, 0) == 2);
  CHECK(op.entry(0, 1) == 1);
  CHECK(op.entry(1, 0) == 3);
  CHECK(op.entry(1, 1) == 2);

  Eigen::VectorXd single(1);
  single << -0.75;
  const ToeplitzOperator tiny = make_toeplitz(single, 1, 1);
  CHECK(tiny.entry(0, 0) == -0.75);

  CHECK_THROWS_AS(make_toeplitz(gen, 2, 3), std::invalid_argument);
}

TEST_CASE("build_operator consumes exactly N+s-1 stream values") {
  const SampleStream stream = make_stream(12, 0, Law::UniformSym, 1038);
  const ToeplitzOperator op = build_operator(stream, 1024, 15);
  CHECK(op.generating.size() == 1038);

  // every diagonal is constant
  for (Eigen::Index n = 0; n + 1 < op.rows; ++n)
    for (Eigen::Index j = 0; j + 1 < op.cols; ++j)
      CHECK(op.entry(n, j) == op.entry(n + 1, j + 1));

  const SampleStream tight = make_stream(12, 0, Law::UniformSym, 10);
  CHECK_NOTHROW(build_operator(tight, 8, 3));
  CHECK_THROWS_AS(build_operator(tight, 9, 3), std::invalid_argument);
}

TEST_CASE("naive_matvec hand cases") {
  Eigen::VectorXd gen(3);
  gen << 1, 2, 3;
  const ToeplitzOperator op = make_toeplitz(gen, 2, 2);

  Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
  const Eigen::VectorXd y = naive_matvec(op, ones);
  CHECK(y[0] == 3);
  CHECK(y[1] == 5);

  CHECK(naive_matvec(op, Eigen::VectorXd::Zero(2)) == Eigen::VectorXd::Zero(2));

  // first basis vector extracts the first column (x_s, ..., x_{N+s-1})
  const ToeplitzOperator wide = random_operator(6, 4, 3);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(4);
  e1[0] = 1.0;
  const Eigen::VectorXd col = naive_matvec(wide, e1);
  for (Eigen::Index n = 0; n < 6; ++n)
    CHECK(col[n] == wide.generating[n + 3]);

  CHECK_THROWS_AS(naive_matvec(op, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("fast_matvec equals the naive oracle") {
  Eigen::VectorXd gen(3);
  gen << 1, 2, 3;
  const ToeplitzOperator small = make_toeplitz(gen, 2, 2);
  const Eigen::VectorXd y = fast_matvec(small, Eigen::VectorXd::Ones(2));
  CHECK(y[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(5.0).epsilon(1e-12));

  SUBCASE("tall operator") {
    const ToeplitzOperator op = random_operator(1024, 15, 21);
    const Eigen::VectorXd a = make_stream(22, 0, Law::StdNormal, 15).values;
    CHECK(max_rel_error(fast_matvec(op, a), naive_matvec(op, a)) <= 1e-10);
  }
  SUBCASE("wide operator") {
    const ToeplitzOperator op = random_operator(64, 1024, 23);
    const Eigen::VectorXd a = make_stream(24, 0, Law::StdNormal, 1024).values;
    CHECK(max_rel_error(fast_matvec(op, a), naive_matvec(op, a)) <= 1e-10);
  }
  SUBCASE("randomized sizes") {
    Xoshiro256pp gen_sizes(7);
    for (int trial = 0; trial < 30; ++trial) {
      const Eigen::Index rows = 1 + Eigen::Index(gen_sizes.next() % 300);
      const Eigen::Index cols = 1 + Eigen::Index(gen_sizes.next() % 300);
      const ToeplitzOperator op = random_operator(rows, cols, 100 + trial);
      const Eigen::VectorXd a = make_stream(200 + trial, 0, Law::StdNormal, cols).values;
      CHECK(max_rel_error(fast_matvec(op, a), naive_matvec(op, a)) <= 1e-10);
    }
  }
  CHECK_THROWS_AS(fast_matvec(small, Eigen::VectorXd::Zero(5)),
                  std::invalid_argument);
}

TEST_CASE("fast_matvec is linear") {
  const ToeplitzOperator op = random_operator(200, 37, 31);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd a = make_stream(300 + trial, 0, Law::StdNormal, 37).values;
    const Eigen::VectorXd b = make_stream(400 + trial, 0, Law::StdNormal, 37).values;
    const double ca = 2.0 * Xoshiro256pp(trial).next_unit() - 1.0;
    const double cb = 2.0 * Xoshiro256pp(trial + 1).next_unit() - 1.0;
    const Eigen::VectorXd combined = fast_matvec(op, ca * a + cb * b);
    const Eigen::VectorXd split = ca * fast_matvec(op, a) + cb * fast_matvec(op, b);
    CHECK((combined - split).lpNorm<Eigen::Infinity>() <=
          1e-9 * std::max(1.0, split.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("fast_matmat") {
  SUBCASE("identity reproduces the dense operator") {
    const ToeplitzOperator op = random_operator(17, 5, 41);
    const Eigen::MatrixXd dense = fast_matmat(op, Eigen::MatrixXd::Identity(5, 5));
    for (Eigen::Index n = 0; n < op.rows; ++n)
      for (Eigen::Index j = 0; j < op.cols; ++j)
        CHECK(dense(n, j) == doctest::Approx(op.entry(n, j)).epsilon(1e-12));
  }
  SUBCASE("single column equals fast_matvec") {
    const ToeplitzOperator op = random_operator(33, 9, 43);
    const Eigen::VectorXd a = make_stream(44, 0, Law::StdNormal, 9).values;
    const Eigen::MatrixXd one = fast_matmat(op, a);
    CHECK(one.col(0) == fast_matvec(op, a));
  }
  SUBCASE("random rectangular product matches the naive oracle per column") {
    const ToeplitzOperator op = random_operator(512, 256, 47);
    Eigen::MatrixXd a(256, 256);
    const SampleStream fill = make_stream(48, 0, Law::StdNormal, 256 * 256);
    for (Eigen::Index c = 0; c < 256; ++c) a.col(c) = fill.values.segment(256 * c, 256);
    const Eigen::MatrixXd got = fast_matmat(op, a);
    for (Eigen::Index c = 0; c < 256; c += 51) {
      const Eigen::VectorXd want = naive_matvec(op, a.col(c));
      CHECK(max_rel_error(got.col(c), want) <= 1e-10);
    }
  }
  SUBCASE("dimension mismatch") {
    const ToeplitzOperator op = random_operator(4, 3, 49);
    CHECK_THROWS_AS(fast_matmat(op, Eigen::MatrixXd::Zero(4, 2)),
                    std::invalid_argument);
  }
}

TEST_CASE("block_matmat") {
  const Eigen::Index s = 8, t = 5, blocks = 4;
  const SampleStream stream = make_stream(55, 0, Law::StdNormal, blocks * s + s - 1);
  Eigen::MatrixXd a(s, t);
  const SampleStream fill = make_stream(56, 0, Law::StdNormal, s * t);
  for (Eigen::Index c = 0; c < t; ++c) a.col(c) = fill.values.segment(s * c, s);

  SUBCASE("single block equals fast_matmat with N = s") {
    const SampleStream short_stream = make_stream(57, 0, Law::StdNormal, 2 * s - 1);
    const Eigen::MatrixXd via_block = block_matmat(short_stream, 1, s, a);
    const Eigen::MatrixXd direct =
        fast_matmat(build_operator(short_stream, s, s), a);
    CHECK(via_block == direct);
  }

  SUBCASE("agrees with the full-operator product") {
    const Eigen::MatrixXd blocked = block_matmat(stream, blocks, s, a);
    const Eigen::MatrixXd full =
        fast_matmat(build_operator(stream, blocks * s, s), a);
    CHECK((blocked - full).lpNorm<Eigen::Infinity>() <=
          1e-10 * std::max(1.0, full.lpNorm<Eigen::Infinity>()));
  }

  SUBCASE("bit-identical across worker counts") {
    const Eigen::MatrixXd w1 = block_matmat(stream, blocks, s, a, 1);
    const Eigen::MatrixXd w2 = block_matmat(stream, blocks, s, a, 2);
    const Eigen::MatrixXd w4 = block_matmat(stream, blocks, s, a, 4);
    const Eigen::MatrixXd w9 = block_matmat(stream, blocks, s, a, 9);
    CHECK(w1 == w2);
    CHECK(w1 == w4);
    CHECK(w1 == w9);
  }

  SUBCASE("per-block transform length depends on s only") {
    // the in-flight working set per block is the s x t slice plus
    // O(s)-length scratch, independent of the block count
    CHECK(circulant_length(s, s) == 16);
    for (Eigen::Index many : {2, 8, 64}) {
      const SampleStream longer =
          make_stream(58, 0, Law::StdNormal, many * s + s - 1);
      CHECK_NOTHROW(block_matmat(longer, many, s, a, 2));
    }
  }

  SUBCASE("short stream throws") {
    const SampleStream tooshort = make_stream(59, 0, Law::StdNormal, blocks * s);
    CHECK_THROWS_AS(block_matmat(tooshort, blocks, s, a), std::invalid_argument);
  }

  SUBCASE("general N with a truncated final block") {
    const Eigen::Index n = 3 * s + 3;
    const SampleStream gstream = make_stream(60, 0, Law::StdNormal, n + s - 1);
    const Eigen::MatrixXd blocked = blocked_matmat(gstream, n, s, a, 3);
    const Eigen::MatrixXd full = fast_matmat(build_operator(gstream, n, s), a);
    CHECK((blocked - full).lpNorm<Eigen::Infinity>() <=
          1e-10 * std::max(1.0, full.lpNorm<Eigen::Infinity>()));
    CHECK(blocked == blocked_matmat(gstream, n, s, a, 1));
  }
}

TEST_CASE("fast path growth stays log-linear while the naive path doubles") {
  const Eigen::Index rows = 2048;
  double naive_first = 0, naive_last = 0, fast_first = 0, fast_last = 0;
  Eigen::Index idx = 0;
  for (Eigen::Index cols : {256, 512, 1024, 2048}) {
    const ToeplitzOperator op = random_operator(rows, cols, 600 + idx);
    const Eigen::VectorXd a = make_stream(700 + idx, 0, Law::StdNormal, cols).values;
    const double tn = time_matvecs(op, a, 6, false);
    const double tf = time_matvecs(op, a, 6, true);
    if (idx == 0) {
      naive_first = tn;
      fast_first = tf;
    }
    naive_last = tn;
    fast_last = tf;
    ++idx;
  }
  // s grew by 8x: naive cost should grow at least ~4x, the fast path by less
  // than 2.5x per doubling (= 15.6x total); generous slack for timer noise
  CHECK(naive_last / naive_first > 3.0);
  CHECK(fast_last / fast_first < 15.6);
  CHECK(fast_last < naive_last);
}
