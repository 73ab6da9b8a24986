#include "tmc/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tmc/rng.hpp"
#include "tmc/toeplitz.hpp"

namespace tmc {

namespace {

// Minimax rational approximations to the standard normal quantile
// (Acklam-family coefficients, relative error ~1e-9 before refinement).
constexpr double kA[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                         -2.759285104469687e+02, 1.383577518672690e+02,
                         -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double kB[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                         -1.556989798598866e+02, 6.680131188771972e+01,
                         -1.328068155288572e+01};
constexpr double kC[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                         -2.400758277161838e+00, -2.549732539343734e+00,
                         4.374664141464968e+00,  2.938163982698783e+00};
constexpr double kD[] = {7.784695709041462e-03, 3.224671290700398e-01,
                         2.445134137142996e+00, 3.754408661907416e+00};
constexpr double kLow = 0.02425;

double tail_branch(double q) {
  return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
         ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
}

}  // namespace

double normal_inverse_cdf(double u) {
  if (!(u > 0.0 && u < 1.0))
    throw std::domain_error("normal_inverse_cdf: argument must lie in (0,1)");
  double x;
  if (u < kLow) {
    x = tail_branch(std::sqrt(-2.0 * std::log(u)));
  } else if (u > 1.0 - kLow) {
    x = -tail_branch(std::sqrt(-2.0 * std::log(1.0 - u)));
  } else {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
        (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
  }
  // One Halley step against the erfc-based CDF.
  const double err = 0.5 * std::erfc(-x / std::numbers::sqrt2) - u;
  const double step =
      err * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - step / (1.0 + 0.5 * x * step);
}

SampleStream make_stream(std::uint64_t seed, std::uint64_t stream_index, Law law,
                         Eigen::Index count) {
  if (count < 0) throw std::invalid_argument("make_stream: negative count");
  SampleStream stream{seed, stream_index, law, Eigen::VectorXd(count)};
  Xoshiro256pp gen(seed, stream_index);
  switch (law) {
    case Law::Uniform01:
      for (Eigen::Index i = 0; i < count; ++i) stream.values[i] = gen.next_unit();
      break;
    case Law::UniformSym:
      for (Eigen::Index i = 0; i < count; ++i)
        stream.values[i] = gen.next_unit() - 0.5;
      break;
    case Law::StdNormal:
      for (Eigen::Index i = 0; i < count; ++i)
        stream.values[i] = normal_inverse_cdf(gen.next_unit());
      break;
  }
  return stream;
}

TriangularFactor random_upper_factor(Eigen::Index s, std::uint64_t seed) {
  if (s < 1) throw std::invalid_argument("random_upper_factor: s must be >= 1");
  const Eigen::Index draws = s * (s + 1) / 2;
  SampleStream stream = make_stream(seed, 0, Law::StdNormal, draws);
  TriangularFactor factor{Eigen::MatrixXd::Zero(s, s)};
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = i; j < s; ++j) {
      const double v = stream.values[k++];
      factor.entries(i, j) = (i == j) ? std::abs(v) + 0.1 : v;
    }
  return factor;
}

Eigen::MatrixXd generate_mvn(Method method, const Eigen::VectorXd& mu,
                             const TriangularFactor& factor, Eigen::Index n_points,
                             std::uint64_t seed, std::uint64_t stream_index) {
  const Eigen::Index s = factor.dim();
  if (mu.size() != s)
    throw std::invalid_argument("generate_mvn: mean/factor dimension mismatch");
  if (n_points < 1) throw std::invalid_argument("generate_mvn: need n_points >= 1");

  Eigen::MatrixXd points(n_points, s);
  if (method == Method::MC) {
    SampleStream stream = make_stream(seed, stream_index, Law::StdNormal, n_points * s);
    for (Eigen::Index n = 0; n < n_points; ++n)
      points.row(n) =
          mu.transpose() + stream.values.segment(n * s, s).transpose() * factor.entries;
  } else {
    SampleStream stream =
        make_stream(seed, stream_index, Law::StdNormal, n_points + s - 1);
    ToeplitzOperator op = build_operator(stream, n_points, s);
    points = fast_matmat(op, factor.entries);
    points.rowwise() += mu.transpose();
  }
  return points;
}

}  // namespace tmc
