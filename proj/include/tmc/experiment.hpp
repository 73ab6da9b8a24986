#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tmc/sampling.hpp"

namespace tmc {

enum class Benchmark { Mvn, Ode1dUniform, Ode1dLogNormal, Pde2d, AnovaVerify };

std::string benchmark_name(Benchmark b);
std::string method_name(Method m);

struct Triple {
  Eigen::Index n = 0;  // N, sample count
  Eigen::Index m = 0;  // M, mesh intervals (0 where unused)
  Eigen::Index s = 0;  // s, truncation dimension
};

/// Expands a named ladder relation for the given N values. Supported names:
/// "N=M=s", "N=M^2=s", "N=2M=2s", "N=2M^2=2s", "2N=M^2=2s", "2N=M^2=s".
/// Throws when a value of N does not satisfy the relation exactly.
std::vector<Triple> parse_ladder(const std::string& relation,
                                 const std::vector<Eigen::Index>& n_values);

struct ExperimentConfig {
  Benchmark benchmark = Benchmark::Ode1dUniform;
  std::vector<Triple> ladder;
  int replications = 25;
  std::uint64_t base_seed = 20200515;
  std::vector<Method> methods = {Method::MC, Method::TMC};
  int threads = 1;  // affects wall time only, never values
};

struct ExperimentRecord {
  std::string benchmark;
  std::string method;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  Eigen::Index s = 0;
  double mean = 0.0;
  double variance = 0.0;
  double seconds = 0.0;
  bool has_efficiency = false;
  double eff = 0.0;
  bool failed = false;
  std::string note;
};

/// One record per (triple x method), in ladder order; deterministic in the
/// config seed. Solver failures are flagged on the record instead of aborting
/// the whole run.
std::vector<ExperimentRecord> run(const ExperimentConfig& config);

bool any_failed(const std::vector<ExperimentRecord>& records);

/// CSV with header benchmark,method,N,M,s,mean,variance,time_s,efficiency.
/// Mean carries 6 significant digits, variance scientific with 3, time 3
/// decimals; the efficiency column is recomputed from the rounded variance
/// and time fields so the emitted file is internally consistent.
std::string render_csv(const std::vector<ExperimentRecord>& records);

/// Writes render_csv to `path`. Throws on an empty record list or an
/// unwritable path.
void emit_csv(const std::vector<ExperimentRecord>& records, const std::string& path);

}  // namespace tmc
