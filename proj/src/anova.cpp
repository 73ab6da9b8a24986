#include "tmc/anova.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace tmc {

namespace {

// Nodes and weights of an n-point Gauss rule from the symmetric tridiagonal
// Jacobi matrix of the orthogonal-polynomial recurrence (Golub-Welsch).
UnivariateLaw golub_welsch(const Eigen::VectorXd& off_diagonal) {
  const Eigen::Index n = off_diagonal.size() + 1;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    jacobi(k, k + 1) = off_diagonal[k];
    jacobi(k + 1, k) = off_diagonal[k];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  UnivariateLaw law;
  law.nodes = solver.eigenvalues();
  law.weights = solver.eigenvectors().row(0).transpose().array().square();
  law.weights /= law.weights.sum();
  return law;
}

Eigen::Index pow_index(Eigen::Index base, Eigen::Index exp) {
  Eigen::Index p = 1;
  for (Eigen::Index i = 0; i < exp; ++i) p *= base;
  return p;
}

void check_subset_capacity(Eigen::Index dim, Eigen::Index n_nodes) {
  const Eigen::Index cap = (n_nodes == 2) ? 10 : 6;
  if (dim < 1 || dim > cap)
    throw std::invalid_argument(
        "anova_decompose: subset grid explosion, dimension unsupported");
}

}  // namespace

UnivariateLaw two_point_law() {
  UnivariateLaw law;
  law.nodes.resize(2);
  law.nodes << -1.0, 1.0;
  law.weights = Eigen::VectorXd::Constant(2, 0.5);
  return law;
}

UnivariateLaw gauss_hermite_law(int n_nodes) {
  if (n_nodes < 1) throw std::invalid_argument("gauss_hermite_law: need n >= 1");
  Eigen::VectorXd off(n_nodes - 1);
  for (int k = 1; k < n_nodes; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
  return golub_welsch(off);
}

UnivariateLaw gauss_legendre_law(int n_nodes) {
  if (n_nodes < 1) throw std::invalid_argument("gauss_legendre_law: need n >= 1");
  Eigen::VectorXd off(n_nodes - 1);
  for (int k = 1; k < n_nodes; ++k)
    off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  UnivariateLaw law = golub_welsch(off);
  law.nodes /= 2.0;  // [-1,1] with mass 1 -> U(-1/2,1/2)
  return law;
}

int gauss_nodes_for_degree(int per_axis_degree) {
  return (per_axis_degree + 2) / 2 + 2;
}

double AnovaDecomposition::total_effect_variance() const {
  return second_moments.sum() - second_moments[0];
}

AnovaDecomposition anova_decompose(const Integrand& f, Eigen::Index dim,
                                   const UnivariateLaw& law) {
  const Eigen::Index m = law.nodes.size();
  check_subset_capacity(dim, m);
  if (f.dim != dim)
    throw std::invalid_argument("anova_decompose: integrand dimension mismatch");

  const std::uint32_t n_masks = 1u << dim;
  const Eigen::Index grid = pow_index(m, dim);

  Eigen::VectorXd values(grid);
  Eigen::RowVectorXd x(dim);
  for (Eigen::Index g = 0; g < grid; ++g) {
    Eigen::Index t = g;
    for (Eigen::Index j = 0; j < dim; ++j) {
      x[j] = law.nodes[t % m];
      t /= m;
    }
    values[g] = f.eval(x);
  }

  AnovaDecomposition dec;
  dec.dim = dim;
  dec.law = law;
  dec.effects.resize(n_masks);
  dec.subset_weights.resize(n_masks);
  dec.second_moments.resize(n_masks);

  std::vector<std::vector<int>> mask_bits(n_masks);
  for (std::uint32_t mask = 0; mask < n_masks; ++mask)
    for (int j = 0; j < dim; ++j)
      if (mask >> j & 1u) mask_bits[mask].push_back(j);

  Eigen::Index digits[32];
  for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
    const auto& bits = mask_bits[mask];
    const Eigen::Index sub_size = pow_index(m, static_cast<Eigen::Index>(bits.size()));

    // Product weights on the subset grid.
    Eigen::VectorXd sub_w(sub_size);
    for (Eigen::Index t = 0; t < sub_size; ++t) {
      Eigen::Index rest = t;
      double w = 1.0;
      for (std::size_t i = 0; i < bits.size(); ++i) {
        w *= law.weights[rest % m];
        rest /= m;
      }
      sub_w[t] = w;
    }
    dec.subset_weights[mask] = sub_w;

    // Marginal of f over the complement coordinates.
    Eigen::VectorXd effect = Eigen::VectorXd::Zero(sub_size);
    for (Eigen::Index g = 0; g < grid; ++g) {
      Eigen::Index rest = g;
      Eigen::Index sub_index = 0;
      Eigen::Index mul = 1;
      double w = 1.0;
      for (Eigen::Index j = 0; j < dim; ++j) {
        const Eigen::Index d = rest % m;
        rest /= m;
        if (mask >> j & 1u) {
          sub_index += d * mul;
          mul *= m;
        } else {
          w *= law.weights[d];
        }
      }
      effect[sub_index] += w * values[g];
    }

    // Recursive subtraction of every proper subset's effect.
    if (mask != 0) {
      for (Eigen::Index t = 0; t < sub_size; ++t) {
        Eigen::Index rest = t;
        for (std::size_t i = 0; i < bits.size(); ++i) {
          digits[i] = rest % m;
          rest /= m;
        }
        double lower = 0.0;
        for (std::uint32_t v = (mask - 1) & mask;; v = (v - 1) & mask) {
          Eigen::Index sub_index = 0;
          Eigen::Index mul = 1;
          for (std::size_t i = 0; i < bits.size(); ++i) {
            if (v >> bits[i] & 1u) {
              sub_index += digits[i] * mul;
              mul *= m;
            }
          }
          lower += dec.effects[v][sub_index];
          if (v == 0) break;
        }
        effect[t] -= lower;
      }
    }

    dec.effects[mask] = effect;
    dec.second_moments[mask] = (sub_w.array() * effect.array().square()).sum();
  }
  return dec;
}

double mc_variance(const AnovaDecomposition& dec, Eigen::Index n_samples) {
  if (n_samples < 1) throw std::invalid_argument("mc_variance: need N >= 1");
  return dec.total_effect_variance() / static_cast<double>(n_samples);
}

double cross_term(const AnovaDecomposition& dec, std::uint32_t subset_mask, int lag) {
  if (subset_mask == 0)
    throw std::invalid_argument("cross_term: subset must be nonempty");
  if (lag < 1 || (subset_mask << lag) >= (1u << dec.dim))
    throw std::invalid_argument("cross_term: shifted subset leaves [1:s]");
  const Eigen::VectorXd& a = dec.effects[subset_mask];
  const Eigen::VectorXd& b = dec.effects[subset_mask << lag];
  const Eigen::VectorXd& w = dec.subset_weights[subset_mask];
  // Shifting preserves the sorted coordinate order, so both effects share the
  // same subset-grid layout and pair index-by-index.
  return (w.array() * a.array() * b.array()).sum();
}

VarianceReport tmc_variance_theorem(const AnovaDecomposition& dec,
                                    Eigen::Index n_samples) {
  if (n_samples < 2)
    throw std::invalid_argument("tmc_variance_theorem: need N >= 2");
  VarianceReport report;
  report.samples = n_samples;
  report.v_mc = mc_variance(dec, n_samples);
  report.per_lag = Eigen::VectorXd::Zero(std::max<Eigen::Index>(dec.dim - 1, 0));
  for (int lag = 1; lag < dec.dim; ++lag) {
    double sum = 0.0;
    const std::uint32_t top = 1u << (dec.dim - lag);
    for (std::uint32_t mask = 1; mask < top; ++mask)
      sum += cross_term(dec, mask, lag);
    report.per_lag[lag - 1] = sum;
  }
  const Eigen::Index max_lag = std::min<Eigen::Index>(dec.dim, n_samples) - 1;
  double cross = 0.0;
  for (Eigen::Index lag = 1; lag <= max_lag; ++lag)
    cross += static_cast<double>(n_samples - lag) * report.per_lag[lag - 1];
  report.cross_sum = cross;
  report.v_tmc = report.v_mc + 2.0 * cross /
                                   (static_cast<double>(n_samples) *
                                    static_cast<double>(n_samples));
  return report;
}

double alpha(const AnovaDecomposition& dec, int ell) {
  if (ell < 1 || ell > dec.dim)
    throw std::invalid_argument("alpha: ell must lie in [1, s]");
  double sum = 0.0;
  const std::uint32_t n_masks = 1u << dec.dim;
  for (std::uint32_t mask = 1; mask < n_masks; ++mask)
    if (std::countr_zero(mask) == ell - 1) sum += dec.second_moments[mask];
  return std::sqrt(sum);
}

double corollary_bound(const AnovaDecomposition& dec, Eigen::Index n_samples) {
  if (n_samples < 1) throw std::invalid_argument("corollary_bound: need N >= 1");
  double total = 0.0;
  for (int ell = 1; ell <= dec.dim; ++ell) total += alpha(dec, ell);
  return total * total / static_cast<double>(n_samples);
}

EnumeratedVariance enumerate_variance_exact(const Integrand& f,
                                            Eigen::Index n_samples,
                                            Eigen::Index dim) {
  if (n_samples < 1 || dim < 1)
    throw std::invalid_argument("enumerate_variance_exact: need N, s >= 1");
  const Eigen::Index draws = n_samples + dim - 1;
  if (draws > 22)
    throw std::invalid_argument(
        "enumerate_variance_exact: instance too large (N+s-1 > 22)");
  if (f.dim != dim)
    throw std::invalid_argument("enumerate_variance_exact: dimension mismatch");

  EnumeratedVariance out;
  Eigen::RowVectorXd point(dim);

  // TMC: all equiprobable +-1 streams of length N+s-1.
  {
    const std::uint64_t n_streams = 1ull << draws;
    long double sum = 0.0L, sum_sq = 0.0L;
    for (std::uint64_t bits = 0; bits < n_streams; ++bits) {
      double est = 0.0;
      for (Eigen::Index n = 0; n < n_samples; ++n) {
        for (Eigen::Index j = 0; j < dim; ++j)
          point[j] = (bits >> (n + dim - 1 - j) & 1ull) ? 1.0 : -1.0;
        est += f.eval(point);
      }
      est /= static_cast<double>(n_samples);
      sum += est;
      sum_sq += static_cast<long double>(est) * est;
    }
    const long double mean = sum / static_cast<long double>(n_streams);
    out.mean = static_cast<double>(mean);
    out.v_tmc =
        static_cast<double>(sum_sq / static_cast<long double>(n_streams) - mean * mean);
  }

  // MC: per-point enumeration gives I(f) and I(f^2) exactly.
  {
    const std::uint64_t n_points = 1ull << dim;
    long double sum = 0.0L, sum_sq = 0.0L;
    for (std::uint64_t bits = 0; bits < n_points; ++bits) {
      for (Eigen::Index j = 0; j < dim; ++j)
        point[j] = (bits >> j & 1ull) ? 1.0 : -1.0;
      const double v = f.eval(point);
      sum += v;
      sum_sq += static_cast<long double>(v) * v;
    }
    const long double mean = sum / static_cast<long double>(n_points);
    out.v_mc = static_cast<double>(
        (sum_sq / static_cast<long double>(n_points) - mean * mean) /
        static_cast<long double>(n_samples));
  }

  // Cross-check v_mc against the full MC stream enumeration when affordable.
  if (n_samples * dim <= 22) {
    const std::uint64_t n_streams = 1ull << (n_samples * dim);
    long double sum = 0.0L, sum_sq = 0.0L;
    for (std::uint64_t bits = 0; bits < n_streams; ++bits) {
      double est = 0.0;
      for (Eigen::Index n = 0; n < n_samples; ++n) {
        for (Eigen::Index j = 0; j < dim; ++j)
          point[j] = (bits >> (n * dim + j) & 1ull) ? 1.0 : -1.0;
        est += f.eval(point);
      }
      est /= static_cast<double>(n_samples);
      sum += est;
      sum_sq += static_cast<long double>(est) * est;
    }
    const long double mean = sum / static_cast<long double>(n_streams);
    const double check =
        static_cast<double>(sum_sq / static_cast<long double>(n_streams) - mean * mean);
    if (std::abs(check - out.v_mc) > 1e-12 * std::max(1.0, std::abs(out.v_mc)))
      throw std::logic_error(
          "enumerate_variance_exact: MC cross-check disagrees with the "
          "per-point enumeration");
  }
  return out;
}

}  // namespace tmc
