#include "tmc/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "tmc/anova.hpp"
#include "tmc/estimators.hpp"
#include "tmc/fem1d.hpp"
#include "tmc/fem2d.hpp"
#include "tmc/rng.hpp"
#include "tmc/toeplitz.hpp"

namespace tmc {

namespace {

using Clock = std::chrono::steady_clock;

// Replication r draws from stream kTmcStreamBase + r (TMC) or
// kMcStreamBase + r (MC); the windows are disjoint, so the two estimators see
// independent draws.
constexpr std::uint64_t kTmcStreamBase = 1;
constexpr std::uint64_t kMcStreamBase = (1ull << 32) + 1;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::Index exact_sqrt(Eigen::Index value, const std::string& relation) {
  const auto root = static_cast<Eigen::Index>(std::llround(std::sqrt(
      static_cast<double>(value))));
  if (root * root != value)
    throw std::invalid_argument("ladder '" + relation + "': N = " +
                                std::to_string(value) +
                                " does not make M an integer");
  return root;
}

Eigen::Index exact_half(Eigen::Index value, const std::string& relation) {
  if (value % 2 != 0)
    throw std::invalid_argument("ladder '" + relation + "': N = " +
                                std::to_string(value) + " must be even");
  return value / 2;
}

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

Integrand uniform_ode_integrand(Eigen::Index m, Eigen::Index s) {
  Eigen::MatrixXd coeff = uniform_coefficient_matrix(s, m);
  auto solve = [m](Eigen::Ref<const Eigen::RowVectorXd> z) {
    const Eigen::VectorXd u = thomas_solve(assemble_uniform_from_expr(z, m));
    return u[m / 2 - 1];
  };
  return make_linear_integrand(std::move(coeff), solve);
}

Integrand lognormal_ode_integrand(Eigen::Index m, Eigen::Index s) {
  Eigen::MatrixXd coeff = lognormal_sine_matrix(s, mesh_nodes(m));
  auto solve = [m](Eigen::Ref<const Eigen::RowVectorXd> theta) {
    return solve_u_half_lognormal(theta, m);
  };
  return make_linear_integrand(std::move(coeff), solve);
}

Integrand pde2d_integrand(const std::shared_ptr<const Pde2dModel>& model) {
  const Eigen::Index center = model->center_index();
  auto solve = [model, center](Eigen::Ref<const Eigen::RowVectorXd> z) {
    const SparseSystem sys = model->assemble_from_expr(z);
    return bicgstab(sys).x[center];
  };
  Eigen::MatrixXd coeff = model->coefficients();
  return make_linear_integrand(std::move(coeff), solve);
}

ExperimentRecord base_record(const ExperimentConfig& config, const Triple& t,
                             Method method) {
  ExperimentRecord rec;
  rec.benchmark = benchmark_name(config.benchmark);
  rec.method = method_name(method);
  rec.n = t.n;
  rec.m = t.m;
  rec.s = t.s;
  return rec;
}

void attach_efficiency(std::vector<ExperimentRecord>& records,
                       const ReplicationStats& mc, const ReplicationStats& tmc) {
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->method == method_name(Method::TMC)) {
      it->has_efficiency = true;
      it->eff = efficiency(mc, tmc);
      return;
    }
  }
}

std::vector<ExperimentRecord> run_sampled_benchmark(const ExperimentConfig& config) {
  std::vector<ExperimentRecord> records;
  for (const Triple& triple : config.ladder) {
    Integrand f;
    Law law = Law::UniformSym;
    std::shared_ptr<TriangularFactor> factor;
    switch (config.benchmark) {
      case Benchmark::Mvn:
        law = Law::StdNormal;
        factor = std::make_shared<TriangularFactor>(
            random_upper_factor(triple.s, config.base_seed));
        break;
      case Benchmark::Ode1dUniform:
        f = uniform_ode_integrand(triple.m, triple.s);
        law = Law::UniformSym;
        break;
      case Benchmark::Ode1dLogNormal:
        f = lognormal_ode_integrand(triple.m, triple.s);
        law = Law::StdNormal;
        break;
      case Benchmark::Pde2d:
        f = pde2d_integrand(std::make_shared<Pde2dModel>(
            triple.m, frequency_ordering(triple.s)));
        law = Law::UniformSym;
        break;
      default:
        throw std::logic_error("run_sampled_benchmark: unexpected benchmark");
    }

    bool have_both = true;
    ReplicationStats mc_stats, tmc_stats;
    for (Method method : config.methods) {
      ExperimentRecord rec = base_record(config, triple, method);
      auto one_replication = [&](std::uint64_t seed,
                                 std::uint64_t r) -> EstimateResult {
        if (config.benchmark == Benchmark::Mvn) {
          // Point generation only; both methods share the stream index so the
          // degenerate s = 1 case produces identical points.
          const auto start = Clock::now();
          const Eigen::MatrixXd points =
              generate_mvn(method, Eigen::VectorXd::Zero(triple.s), *factor,
                           triple.n, seed, kTmcStreamBase + r);
          return {points.mean(), triple.n, method, seconds_since(start)};
        }
        const std::uint64_t index =
            (method == Method::MC ? kMcStreamBase : kTmcStreamBase) + r;
        return method == Method::MC
                   ? mc_estimate(f, law, triple.n, seed, index)
                   : tmc_estimate(f, law, triple.n, seed, index);
      };
      try {
        const ReplicationStats stats = replicate(
            one_replication, config.replications, config.base_seed, config.threads);
        rec.mean = stats.grand_mean;
        rec.variance = stats.estimator_variance;
        rec.seconds = stats.avg_seconds;
        (method == Method::MC ? mc_stats : tmc_stats) = stats;
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.note = e.what();
        rec.mean = rec.variance = std::numeric_limits<double>::quiet_NaN();
        have_both = false;
      }
      records.push_back(std::move(rec));
    }
    if (have_both && config.methods.size() == 2)
      attach_efficiency(records, mc_stats, tmc_stats);
  }
  return records;
}

// Multilinear +-1 test function with pseudorandom coefficients; its exact
// decomposition under the two-point law makes the variance formulas testable
// against brute-force enumeration.
Integrand random_multilinear(Eigen::Index dim, std::uint64_t seed) {
  const std::uint32_t n_masks = 1u << dim;
  Eigen::VectorXd coeff(n_masks);
  Xoshiro256pp gen(seed);
  for (std::uint32_t mask = 0; mask < n_masks; ++mask)
    coeff[mask] = 2.0 * gen.next_unit() - 1.0;
  return make_integrand(dim, [coeff, n_masks](Eigen::Ref<const Eigen::RowVectorXd> x) {
    double acc = 0.0;
    for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
      double term = coeff[mask];
      for (Eigen::Index j = 0; j < x.size(); ++j)
        if (mask >> j & 1u) term *= x[j];
      acc += term;
    }
    return acc;
  });
}

Integrand three_variate_reference() {
  return make_integrand(3, [](Eigen::Ref<const Eigen::RowVectorXd> v) {
    const double x = v[0], y = v[1], z = v[2];
    return x - y - z + x * y - x * z - y * z;
  });
}

std::vector<ExperimentRecord> run_anova_verify(const ExperimentConfig& config) {
  std::vector<ExperimentRecord> records;
  const UnivariateLaw two_point = two_point_law();
  const struct {
    Eigen::Index n, s;
  } cases[] = {{2, 2}, {3, 2}, {3, 3}, {4, 3}};

  for (const auto& c : cases) {
    const auto start = Clock::now();
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Integrand f = random_multilinear(c.s, config.base_seed + 977 * k);
      const AnovaDecomposition dec = anova_decompose(f, c.s, two_point);
      const EnumeratedVariance enumerated = enumerate_variance_exact(f, c.n, c.s);
      const double formula_mc = mc_variance(dec, c.n);
      const double formula_tmc = tmc_variance_theorem(dec, c.n).v_tmc;
      worst = std::max(worst, std::abs(formula_mc - enumerated.v_mc));
      worst = std::max(worst, std::abs(formula_tmc - enumerated.v_tmc));
    }
    ExperimentRecord rec;
    rec.benchmark = benchmark_name(Benchmark::AnovaVerify);
    rec.method = method_name(Method::TMC);
    rec.n = c.n;
    rec.s = c.s;
    rec.mean = worst;  // worst |formula - enumeration| over the test batch
    rec.variance = 0.0;
    rec.seconds = seconds_since(start);
    rec.failed = worst > 1e-12;
    if (rec.failed) rec.note = "variance formulas disagree with enumeration";
    records.push_back(std::move(rec));
  }

  // Reference three-variate function: exact closed-form variances.
  {
    const auto start = Clock::now();
    const Integrand f = three_variate_reference();
    const AnovaDecomposition dec = anova_decompose(f, 3, gauss_hermite_law(3));
    double worst = 0.0;
    for (Eigen::Index n : {3, 4, 16, 1000}) {
      const double nd = static_cast<double>(n);
      worst = std::max(worst, std::abs(mc_variance(dec, n) - 6.0 / nd));
      worst = std::max(worst, std::abs(tmc_variance_theorem(dec, n).v_tmc -
                                       (2.0 / nd + 6.0 / (nd * nd))));
    }
    ExperimentRecord rec;
    rec.benchmark = benchmark_name(Benchmark::AnovaVerify);
    rec.method = method_name(Method::TMC);
    rec.n = 0;
    rec.s = 3;
    rec.mean = worst;
    rec.seconds = seconds_since(start);
    rec.failed = worst > 1e-12;
    if (rec.failed) rec.note = "reference-function variances off";
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

std::string benchmark_name(Benchmark b) {
  switch (b) {
    case Benchmark::Mvn: return "mvn";
    case Benchmark::Ode1dUniform: return "ode1d-uniform";
    case Benchmark::Ode1dLogNormal: return "ode1d-lognormal";
    case Benchmark::Pde2d: return "pde2d";
    case Benchmark::AnovaVerify: return "anova-verify";
  }
  return "unknown";
}

std::string method_name(Method m) { return m == Method::MC ? "MC" : "TMC"; }

std::vector<Triple> parse_ladder(const std::string& relation,
                                 const std::vector<Eigen::Index>& n_values) {
  std::vector<Triple> ladder;
  ladder.reserve(n_values.size());
  for (Eigen::Index n : n_values) {
    if (n < 1) throw std::invalid_argument("ladder: N must be >= 1");
    Triple t;
    t.n = n;
    if (relation == "N=M=s") {
      t.m = n;
      t.s = n;
    } else if (relation == "N=M^2=s") {
      t.m = exact_sqrt(n, relation);
      t.s = n;
    } else if (relation == "N=2M=2s") {
      t.m = exact_half(n, relation);
      t.s = t.m;
    } else if (relation == "N=2M^2=2s") {
      t.s = exact_half(n, relation);
      t.m = exact_sqrt(t.s, relation);
    } else if (relation == "2N=M^2=2s") {
      t.m = exact_sqrt(2 * n, relation);
      t.s = n;
    } else if (relation == "2N=M^2=s") {
      t.m = exact_sqrt(2 * n, relation);
      t.s = 2 * n;
    } else {
      throw std::invalid_argument("unknown ladder relation '" + relation + "'");
    }
    ladder.push_back(t);
  }
  return ladder;
}

std::vector<ExperimentRecord> run(const ExperimentConfig& config) {
  if (config.benchmark == Benchmark::AnovaVerify) return run_anova_verify(config);
  if (config.replications < 2)
    throw std::invalid_argument("run: need R >= 2");
  if (config.ladder.empty())
    throw std::invalid_argument("run: empty ladder");
  if (config.methods.empty())
    throw std::invalid_argument("run: no methods selected");
  return run_sampled_benchmark(config);
}

bool any_failed(const std::vector<ExperimentRecord>& records) {
  for (const auto& r : records)
    if (r.failed) return true;
  return false;
}

std::string render_csv(const std::vector<ExperimentRecord>& records) {
  if (records.empty()) throw std::invalid_argument("render_csv: no records");
  std::ostringstream out;
  out << "benchmark,method,N,M,s,mean,variance,time_s,efficiency\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const ExperimentRecord& rec = records[i];
    const std::string variance = format("%.2e", rec.variance);
    const std::string seconds = format("%.3f", rec.seconds);
    std::string eff;
    if (rec.method == "TMC" && !rec.failed) {
      // Recompute the ratio from the rounded fields of the paired rows so the
      // emitted file is internally consistent.
      for (std::size_t k = 0; k < records.size(); ++k) {
        const ExperimentRecord& mc = records[k];
        if (mc.method == "MC" && !mc.failed && mc.benchmark == rec.benchmark &&
            mc.n == rec.n && mc.m == rec.m && mc.s == rec.s) {
          const double denom =
              std::stod(seconds) * std::stod(variance);
          const double numer = std::stod(format("%.3f", mc.seconds)) *
                               std::stod(format("%.2e", mc.variance));
          const double ratio =
              denom > 0.0 ? numer / denom : std::numeric_limits<double>::infinity();
          eff = format("%.4g", ratio);
          break;
        }
      }
    }
    out << rec.benchmark << ',' << rec.method << ',' << rec.n << ',' << rec.m
        << ',' << rec.s << ',' << format("%.6g", rec.mean) << ',' << variance
        << ',' << seconds << ',' << eff << '\n';
  }
  return out.str();
}

void emit_csv(const std::vector<ExperimentRecord>& records,
              const std::string& path) {
  const std::string body = render_csv(records);  // rejects empty record lists
  std::ofstream file(path);
  if (!file) throw std::runtime_error("emit_csv: cannot open '" + path + "'");
  file << body;
  if (!file.good()) throw std::runtime_error("emit_csv: write failed for '" + path + "'");
}

}  // namespace tmc
