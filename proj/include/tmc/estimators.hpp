#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "tmc/sampling.hpp"

namespace tmc {

using ScalarField = std::function<double(Eigen::Ref<const Eigen::RowVectorXd>)>;

/// Integrand over a product law in `dim` variables. When a linear stage is
/// present, eval(x) == outer(x * linear) exactly, and the estimators route the
/// product through the method-appropriate matrix path.
struct Integrand {
  Eigen::Index dim = 0;
  ScalarField eval;
  Eigen::MatrixXd linear;  // dim x t, empty when absent
  ScalarField outer;

  bool has_linear_stage() const { return linear.size() != 0; }
};

Integrand make_integrand(Eigen::Index dim, ScalarField eval);
Integrand make_linear_integrand(Eigen::MatrixXd linear, ScalarField outer);

struct EstimateResult {
  double value = 0.0;
  Eigen::Index samples = 0;
  Method method = Method::MC;
  double wall_seconds = 0.0;
};

/// Mean of f over N independent length-s vectors taken from `stream`
/// (consumes exactly N*s values).
EstimateResult mc_estimate_on(const SampleStream& stream, const Integrand& f,
                              Eigen::Index n_samples);

/// Mean of f over the N sliding windows of `stream` (consumes exactly N+s-1
/// values); the linear stage, when present, runs through fast_matmat.
EstimateResult tmc_estimate_on(const SampleStream& stream, const Integrand& f,
                               Eigen::Index n_samples);

EstimateResult mc_estimate(const Integrand& f, Law law, Eigen::Index n_samples,
                           std::uint64_t seed, std::uint64_t stream_index = 0);
EstimateResult tmc_estimate(const Integrand& f, Law law, Eigen::Index n_samples,
                            std::uint64_t seed, std::uint64_t stream_index = 0);

/// Mean of L independent TMC estimates (stream_index = 1..L); unbiased with
/// variance V[TMC per run] / L.
EstimateResult parallel_tmc_average(const Integrand& f, Law law,
                                    Eigen::Index n_samples, Eigen::Index n_streams,
                                    std::uint64_t seed);

struct ReplicationStats {
  int replications = 0;
  Eigen::VectorXd values;
  double grand_mean = 0.0;
  double estimator_variance = 0.0;  // (1/(R(R-1))) sum (v_r - mean)^2
  double avg_seconds = 0.0;
};

/// Runs R independent replications of `run(base_seed, r)`, r = 0..R-1.
/// Replications may execute on several workers; results are collected by
/// index, so the stats do not depend on scheduling. Throws for R < 2.
ReplicationStats replicate(
    const std::function<EstimateResult(std::uint64_t seed, std::uint64_t replication)>& run,
    int replications, std::uint64_t base_seed, int workers = 1);

/// Relative efficiency (T_MC sigma^2_MC) / (T_TMC sigma^2_TMC); +infinity when
/// the denominator vanishes.
double efficiency(const ReplicationStats& mc, const ReplicationStats& tmc);

}  // namespace tmc
