#include "tmc/estimators.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "tmc/parallel.hpp"
#include "tmc/toeplitz.hpp"

namespace tmc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

Integrand make_integrand(Eigen::Index dim, ScalarField eval) {
  if (dim < 1) throw std::invalid_argument("make_integrand: dim must be >= 1");
  Integrand f;
  f.dim = dim;
  f.eval = std::move(eval);
  return f;
}

Integrand make_linear_integrand(Eigen::MatrixXd linear, ScalarField outer) {
  if (linear.rows() < 1)
    throw std::invalid_argument("make_linear_integrand: empty linear stage");
  Integrand f;
  f.dim = linear.rows();
  f.linear = std::move(linear);
  f.outer = std::move(outer);
  f.eval = [a = f.linear, g = f.outer](Eigen::Ref<const Eigen::RowVectorXd> x) {
    return g(x * a);
  };
  return f;
}

EstimateResult mc_estimate_on(const SampleStream& stream, const Integrand& f,
                              Eigen::Index n_samples) {
  if (n_samples < 1) throw std::invalid_argument("mc_estimate: need N >= 1");
  const Eigen::Index s = f.dim;
  if (stream.values.size() < n_samples * s)
    throw std::invalid_argument("mc_estimate: stream holds fewer than N*s values");
  const auto start = Clock::now();
  double acc = 0.0;
  if (f.has_linear_stage()) {
    Eigen::RowVectorXd transformed(f.linear.cols());
    for (Eigen::Index n = 0; n < n_samples; ++n) {
      transformed.noalias() = stream.values.segment(n * s, s).transpose() * f.linear;
      acc += f.outer(transformed);
    }
  } else {
    for (Eigen::Index n = 0; n < n_samples; ++n)
      acc += f.eval(stream.values.segment(n * s, s).transpose());
  }
  return {acc / static_cast<double>(n_samples), n_samples, Method::MC,
          seconds_since(start)};
}

EstimateResult tmc_estimate_on(const SampleStream& stream, const Integrand& f,
                               Eigen::Index n_samples) {
  if (n_samples < 1) throw std::invalid_argument("tmc_estimate: need N >= 1");
  const Eigen::Index s = f.dim;
  if (stream.values.size() < n_samples + s - 1)
    throw std::invalid_argument("tmc_estimate: stream holds fewer than N+s-1 values");
  const auto start = Clock::now();
  double acc = 0.0;
  if (f.has_linear_stage()) {
    const ToeplitzOperator op = build_operator(stream, n_samples, s);
    const Eigen::MatrixXd transformed = fast_matmat(op, f.linear);
    for (Eigen::Index n = 0; n < n_samples; ++n) acc += f.outer(transformed.row(n));
  } else {
    Eigen::RowVectorXd window(s);
    for (Eigen::Index n = 0; n < n_samples; ++n) {
      for (Eigen::Index j = 0; j < s; ++j) window[j] = stream.values[n + s - 1 - j];
      acc += f.eval(window);
    }
  }
  return {acc / static_cast<double>(n_samples), n_samples, Method::TMC,
          seconds_since(start)};
}

EstimateResult mc_estimate(const Integrand& f, Law law, Eigen::Index n_samples,
                           std::uint64_t seed, std::uint64_t stream_index) {
  if (n_samples < 1) throw std::invalid_argument("mc_estimate: need N >= 1");
  const auto start = Clock::now();
  const SampleStream stream = make_stream(seed, stream_index, law, n_samples * f.dim);
  EstimateResult result = mc_estimate_on(stream, f, n_samples);
  result.wall_seconds = seconds_since(start);
  return result;
}

EstimateResult tmc_estimate(const Integrand& f, Law law, Eigen::Index n_samples,
                            std::uint64_t seed, std::uint64_t stream_index) {
  if (n_samples < 1) throw std::invalid_argument("tmc_estimate: need N >= 1");
  const auto start = Clock::now();
  const SampleStream stream =
      make_stream(seed, stream_index, law, n_samples + f.dim - 1);
  EstimateResult result = tmc_estimate_on(stream, f, n_samples);
  result.wall_seconds = seconds_since(start);
  return result;
}

EstimateResult parallel_tmc_average(const Integrand& f, Law law,
                                    Eigen::Index n_samples, Eigen::Index n_streams,
                                    std::uint64_t seed) {
  if (n_streams < 1)
    throw std::invalid_argument("parallel_tmc_average: need L >= 1");
  const auto start = Clock::now();
  double acc = 0.0;
  for (Eigen::Index l = 1; l <= n_streams; ++l)
    acc += tmc_estimate(f, law, n_samples, seed, static_cast<std::uint64_t>(l)).value;
  return {acc / static_cast<double>(n_streams), n_samples * n_streams, Method::TMC,
          seconds_since(start)};
}

ReplicationStats replicate(
    const std::function<EstimateResult(std::uint64_t, std::uint64_t)>& run,
    int replications, std::uint64_t base_seed, int workers) {
  if (replications < 2)
    throw std::invalid_argument("replicate: variance needs R >= 2");
  ReplicationStats stats;
  stats.replications = replications;
  stats.values.resize(replications);
  Eigen::VectorXd times(replications);
  parallel_for(replications, workers, [&](std::int64_t r) {
    const EstimateResult result = run(base_seed, static_cast<std::uint64_t>(r));
    stats.values[r] = result.value;
    times[r] = result.wall_seconds;
  });
  stats.grand_mean = stats.values.mean();
  stats.estimator_variance =
      (stats.values.array() - stats.grand_mean).square().sum() /
      (static_cast<double>(replications) * (replications - 1));
  stats.avg_seconds = times.mean();
  return stats;
}

double efficiency(const ReplicationStats& mc, const ReplicationStats& tmc) {
  const double denom = tmc.avg_seconds * tmc.estimator_variance;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return mc.avg_seconds * mc.estimator_variance / denom;
}

}  // namespace tmc
