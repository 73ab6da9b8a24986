#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>
#include <stdexcept>
#include <vector>

namespace tmc {

/// First s frequency pairs (k1,k2) of N x N ordered by k1^2 + k2^2 ascending,
/// ties broken lexicographically.
struct FrequencyList {
  std::vector<std::array<int, 2>> pairs;
  Eigen::Index size() const { return static_cast<Eigen::Index>(pairs.size()); }
};

FrequencyList frequency_ordering(Eigen::Index s);

struct SparseSystem {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  Eigen::VectorXd rhs;
};

/// Integral of sin(a x) sin(b y) over the triangle with vertices
/// (x0,y0), (x0+h,y0), (x0+h,y0+h), by analytic antiderivatives.
double triangle_sine_integral_lower(double a, double b, double x0, double y0,
                                    double h);

/// Same over the triangle (x0,y0), (x0,y0+h), (x0+h,y0+h).
double triangle_sine_integral_upper(double a, double b, double x0, double y0,
                                    double h);

/// Precomputed stiffness data for one (M, frequency list) configuration on
/// the uniform right-triangle mesh with diagonals along (1,1). Unknowns are
/// the interior nodes, numbered q-major: idx(p,q) = (q-1)(M-1) + (p-1).
///
/// Per-sample entries are linear in y: entry e of B(y) equals
/// base_entries[e] + (y * coefficients())[e]. Stored couplings are the self
/// terms, then the (p,q)-(p+1,q) terms, then the (p,q)-(p,q+1) terms; the
/// (1,1)-diagonal couplings of the hexagonal supports are identically zero
/// (orthogonal gradients on both shared triangles) and are not stored.
class Pde2dModel {
 public:
  Pde2dModel(Eigen::Index m_intervals, FrequencyList freqs);

  Eigen::Index intervals() const { return m_; }
  Eigen::Index dim() const { return (m_ - 1) * (m_ - 1); }
  Eigen::Index entry_count() const { return entries_; }
  const FrequencyList& frequencies() const { return freqs_; }
  const Eigen::MatrixXd& coefficients() const { return coeff_; }
  const Eigen::VectorXd& base_entries() const { return base_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }

  Eigen::Index node_index(Eigen::Index p, Eigen::Index q) const {
    return (q - 1) * (m_ - 1) + (p - 1);
  }
  Eigen::Index center_index() const;  // node (M/2, M/2); M must be even

  SparseSystem assemble_from_expr(Eigen::Ref<const Eigen::RowVectorXd> z) const;
  SparseSystem assemble(Eigen::Ref<const Eigen::RowVectorXd> y) const;

 private:
  Eigen::Index m_ = 0;
  FrequencyList freqs_;
  Eigen::Index entries_ = 0;
  Eigen::VectorXd base_;
  Eigen::MatrixXd coeff_;
  Eigen::VectorXd rhs_;
};

SparseSystem assemble_2d(Eigen::Ref<const Eigen::RowVectorXd> y,
                         Eigen::Index m_intervals, const FrequencyList& freqs);

class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

struct BicgstabResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Unpreconditioned BiCGSTAB from the zero vector; stops when the relative
/// 2-norm of the residual drops below tol. On breakdown the iteration is
/// restarted once from a perturbed iterate before ConvergenceFailure is
/// thrown. max_iterations <= 0 selects 10 * dim.
BicgstabResult bicgstab(const SparseSystem& sys, double tol = 1e-5,
                        int max_iterations = 0);

/// u at the center node (M/2, M/2); M must be even. Propagates solver
/// failures.
double solve_center(Eigen::Ref<const Eigen::RowVectorXd> y, Eigen::Index m_intervals,
                    const FrequencyList& freqs);

}  // namespace tmc
