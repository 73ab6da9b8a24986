#pragma once

#include <Eigen/Dense>

#include "tmc/sampling.hpp"

namespace tmc {

/// Implicit N x s Toeplitz matrix defined by its generating sequence
/// x_1 .. x_{N+s-1}; row n (1-indexed) is the reversed window
/// (x_{n+s-1}, ..., x_n). Never materialized densely.
struct ToeplitzOperator {
  Eigen::VectorXd generating;  // length rows + cols - 1
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  // Logical entry (0-indexed): X(n, j) = x_{n+s-j} = generating[n + cols-1 - j].
  double entry(Eigen::Index n, Eigen::Index j) const {
    return generating[n + cols - 1 - j];
  }
};

ToeplitzOperator make_toeplitz(Eigen::VectorXd generating, Eigen::Index rows,
                               Eigen::Index cols);

/// Operator over the first rows+cols-1 values of the stream.
/// Throws std::invalid_argument when the stream is too short.
ToeplitzOperator build_operator(const SampleStream& stream, Eigen::Index rows,
                                Eigen::Index cols);

/// Smallest power of two >= rows + cols - 1 (fixed circulant padding rule).
Eigen::Index circulant_length(Eigen::Index rows, Eigen::Index cols);

/// DFT of the zero-padded generating sequence; applying the operator is then a
/// cyclic convolution of this spectrum with a padded input column.
struct CirculantPlan {
  Eigen::Index length = 0;
  Eigen::VectorXcd spectrum;
};

CirculantPlan make_circulant_plan(const ToeplitzOperator& op);

/// Exact triple-loop product, the oracle for the fast path.
Eigen::VectorXd naive_matvec(const ToeplitzOperator& op,
                             Eigen::Ref<const Eigen::VectorXd> a);

/// FFT product via circulant embedding; agrees with naive_matvec to 1e-10
/// relative max-norm.
Eigen::VectorXd fast_matvec(const ToeplitzOperator& op,
                            Eigen::Ref<const Eigen::VectorXd> a);

/// X * A column by column, one circulant plan shared across all columns.
Eigen::MatrixXd fast_matmat(const ToeplitzOperator& op,
                            Eigen::Ref<const Eigen::MatrixXd> a);

/// Block-parallel product: rows L*s, computed as L independent s x s Toeplitz
/// blocks (block l uses stream values l*s .. l*s+2s-2). The result is
/// bit-identical for any worker count; each in-flight block touches only its
/// own s x t slice plus O(s)-length transform scratch.
Eigen::MatrixXd block_matmat(const SampleStream& stream, Eigen::Index n_blocks,
                             Eigen::Index cols, Eigen::Ref<const Eigen::MatrixXd> a,
                             int workers = 1);

/// Same blocking for general N: the final block is a shorter Toeplitz slice
/// when N is not a multiple of s.
Eigen::MatrixXd blocked_matmat(const SampleStream& stream, Eigen::Index rows,
                               Eigen::Index cols, Eigen::Ref<const Eigen::MatrixXd> a,
                               int workers = 1);

}  // namespace tmc
