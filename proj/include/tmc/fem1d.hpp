#pragma once

#include <Eigen/Dense>

#include "tmc/sampling.hpp"

namespace tmc {

/// Symmetric tridiagonal stiffness system B u = g of dimension M-1.
struct TridiagonalSystem {
  Eigen::VectorXd diag;  // length M-1
  Eigen::VectorXd off;   // length M-2, sub- and super-diagonal (symmetric)
  Eigen::VectorXd rhs;   // length M-1
};

/// Coefficient matrix of the uniform-field stiffness entries: row j holds the
/// per-frequency contributions, columns [0, M-1) the diagonal entries k=1..M-1
/// and columns [M-1, 2M-3) the off-diagonal entries (k, k+1), k=1..M-2.
Eigen::MatrixXd uniform_coefficient_matrix(Eigen::Index s, Eigen::Index m_intervals);

/// Stiffness system from a precomputed expression row z = y * coefficient
/// matrix; diag = 4M + z_diag, off = -2M + z_off, rhs = 1/M.
TridiagonalSystem assemble_uniform_from_expr(Eigen::Ref<const Eigen::RowVectorXd> z,
                                             Eigen::Index m_intervals);

/// Closed-form assembly of B(y) for the uniform random field.
TridiagonalSystem assemble_uniform(Eigen::Ref<const Eigen::RowVectorXd> y,
                                   Eigen::Index m_intervals);

/// O(M) elimination; residual max-norm <= 1e-10 * max-norm(rhs).
/// Throws std::runtime_error on a vanishing pivot.
Eigen::VectorXd thomas_solve(const TridiagonalSystem& sys);

/// Nodal value u(1/2) for the uniform model; M must be even.
double solve_u_half_uniform(Eigen::Ref<const Eigen::RowVectorXd> y,
                            Eigen::Index m_intervals);

/// Mesh nodes x_0 .. x_M of the uniform grid on [0,1].
Eigen::VectorXd mesh_nodes(Eigen::Index m_intervals);

/// s x Q matrix of log-normal field coefficients sin(2 pi j x_q) / j^2
/// (argument reduced so integer x gives exactly zero).
Eigen::MatrixXd lognormal_sine_matrix(Eigen::Index s,
                                      Eigen::Ref<const Eigen::VectorXd> nodes);

/// Field exponents theta for all N samples at the given nodes: row n is the
/// n-th sliding window's coefficient sums, computed as one fast Toeplitz
/// product with the sine matrix.
Eigen::MatrixXd compute_thetas(const SampleStream& stream, Eigen::Index n_samples,
                               Eigen::Index s, Eigen::Ref<const Eigen::VectorXd> nodes);

/// Newton-Cotes assembly for the log-normal field from theta values at the
/// M+1 mesh nodes: Simpson on the diagonal, trapezoid off the diagonal.
TridiagonalSystem assemble_lognormal(Eigen::Ref<const Eigen::RowVectorXd> theta,
                                     Eigen::Index m_intervals);

/// Nodal value u(1/2) for the log-normal model; M must be even.
double solve_u_half_lognormal(Eigen::Ref<const Eigen::RowVectorXd> theta,
                              Eigen::Index m_intervals);

}  // namespace tmc
