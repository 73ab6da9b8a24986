#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tmc/estimators.hpp"

namespace tmc {

/// Discrete representation of a univariate law: quadrature nodes/weights of a
/// Gauss rule for a continuous density, or the atoms of a two-point measure.
/// Weights always sum to 1.
struct UnivariateLaw {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Atoms {-1, +1} with probability 1/2 each.
UnivariateLaw two_point_law();

/// Gauss rule exact for polynomials up to degree 2n-1 under N(0,1).
UnivariateLaw gauss_hermite_law(int n_nodes);

/// Gauss rule exact for polynomials up to degree 2n-1 under U(-1/2,1/2).
UnivariateLaw gauss_legendre_law(int n_nodes);

/// Node count making a Gauss rule exact for products of two per-axis
/// degree-d polynomials, with margin: ceil((d+1)/2) + 2.
int gauss_nodes_for_degree(int per_axis_degree);

/// All 2^s ANOVA effects of an s-variate function on the tensor grid of a
/// univariate law, keyed by coordinate-subset bitmask (bit j <=> coordinate
/// j+1). effects[0] is the constant mean term.
struct AnovaDecomposition {
  Eigen::Index dim = 0;
  UnivariateLaw law;
  std::vector<Eigen::VectorXd> effects;         // per mask, on the subset grid
  std::vector<Eigen::VectorXd> subset_weights;  // product weights per subset grid
  Eigen::VectorXd second_moments;               // I(f_u^2) per mask

  double mean() const { return effects[0][0]; }
  double total_effect_variance() const;  // sum over nonempty subsets
};

/// Recursive-subtraction decomposition over the full tensor grid.
/// Supported sizes: s <= 6 in general, s <= 12 for two-node laws
/// (anything larger throws: grid explosion).
AnovaDecomposition anova_decompose(const Integrand& f, Eigen::Index dim,
                                   const UnivariateLaw& law);

/// Variance of the standard MC estimator: (sum of effect variances) / N.
double mc_variance(const AnovaDecomposition& dec, Eigen::Index n_samples);

/// I(f_u f_{u+lag}) with both effects evaluated on the same coordinates,
/// pairing k-th smallest indices. Requires nonempty u with u+lag inside
/// [1:s].
double cross_term(const AnovaDecomposition& dec, std::uint32_t subset_mask, int lag);

struct VarianceReport {
  Eigen::Index samples = 0;
  double v_mc = 0.0;
  double cross_sum = 0.0;  // sum_l (N-l) * per_lag[l-1]
  double v_tmc = 0.0;      // v_mc + (2/N^2) * cross_sum
  Eigen::VectorXd per_lag;  // lag l=1..s-1: sum over u of I(f_u f_{u+l})
};

/// Exact TMC estimator variance for N >= 2 from the lag expansion of the
/// window overlaps.
VarianceReport tmc_variance_theorem(const AnovaDecomposition& dec,
                                    Eigen::Index n_samples);

/// sqrt of the total effect variance over subsets whose minimum element is
/// `ell` (1-based).
double alpha(const AnovaDecomposition& dec, int ell);

/// (sum_l alpha_l)^2 / N, an upper bound for the TMC variance.
double corollary_bound(const AnovaDecomposition& dec, Eigen::Index n_samples);

struct EnumeratedVariance {
  double mean = 0.0;
  double v_mc = 0.0;
  double v_tmc = 0.0;
};

/// Independent oracle under the two-point law: exact mean and variance of
/// both estimators by enumerating all equiprobable +-1 streams (2^(N+s-1) for
/// TMC; requires N+s-1 <= 22). v_mc comes from single-point enumeration and is
/// additionally cross-checked against the full 2^(N s) MC enumeration when
/// N*s <= 22.
EnumeratedVariance enumerate_variance_exact(const Integrand& f,
                                            Eigen::Index n_samples,
                                            Eigen::Index dim);

}  // namespace tmc
