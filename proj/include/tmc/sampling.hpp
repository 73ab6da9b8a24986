#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace tmc {

/// Univariate sampling laws used throughout the estimators.
enum class Law {
  UniformSym,  // U(-1/2, 1/2)
  Uniform01,   // U(0, 1)
  StdNormal,   // N(0, 1), via the inverse CDF of a U(0,1) draw
};

enum class Method { MC, TMC };

/// A seeded, law-tagged sequence of i.i.d. scalar draws. (seed, stream_index,
/// law, length) determine the values bit-exactly.
struct SampleStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_index = 0;
  Law law = Law::Uniform01;
  Eigen::VectorXd values;
};

SampleStream make_stream(std::uint64_t seed, std::uint64_t stream_index, Law law,
                         Eigen::Index count);

/// Inverse standard normal CDF, accurate to well below 1e-9 absolute
/// (rational minimax approximation refined by one Halley step).
/// Throws std::domain_error unless 0 < u < 1.
double normal_inverse_cdf(double u);

/// Upper triangular s x s factor with strictly positive diagonal;
/// strict upper entries ~ N(0,1), diagonal ~ |N(0,1)| + 0.1.
struct TriangularFactor {
  Eigen::MatrixXd entries;
  Eigen::Index dim() const { return entries.rows(); }
};

TriangularFactor random_upper_factor(Eigen::Index s, std::uint64_t seed);

/// N points from N(mu, A^T A), one per row. MC draws N*s fresh normals and
/// transforms row-wise; TMC draws N+s-1 normals and applies the Toeplitz
/// window product. Every row has the exact target law under both methods.
Eigen::MatrixXd generate_mvn(Method method, const Eigen::VectorXd& mu,
                             const TriangularFactor& factor, Eigen::Index n_points,
                             std::uint64_t seed, std::uint64_t stream_index = 0);

}  // namespace tmc
