#include "tmc/toeplitz.hpp"

#include <stdexcept>

#ifdef TMC_USE_FFTW
#define EIGEN_FFTW_DEFAULT
// not declared by this distro's fftw3.h; lives in libfftw3_threads
extern "C" void fftw_make_planner_thread_safe();
#endif
#include <unsupported/Eigen/FFT>

#include "tmc/parallel.hpp"

namespace tmc {

namespace {

bool init_fft_backend() {
#ifdef TMC_USE_FFTW
  fftw_make_planner_thread_safe();  // plan creation may run on worker threads
#endif
  return true;
}

[[maybe_unused]] const bool kFftBackendReady = init_fft_backend();

}  // namespace

ToeplitzOperator make_toeplitz(Eigen::VectorXd generating, Eigen::Index rows,
                               Eigen::Index cols) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("make_toeplitz: rows and cols must be >= 1");
  if (generating.size() != rows + cols - 1)
    throw std::invalid_argument(
        "make_toeplitz: generating sequence must have rows + cols - 1 values");
  return {std::move(generating), rows, cols};
}

ToeplitzOperator build_operator(const SampleStream& stream, Eigen::Index rows,
                                Eigen::Index cols) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("build_operator: rows and cols must be >= 1");
  const Eigen::Index needed = rows + cols - 1;
  if (stream.values.size() < needed)
    throw std::invalid_argument("build_operator: stream holds fewer than N+s-1 values");
  return {stream.values.head(needed), rows, cols};
}

Eigen::Index circulant_length(Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index needed = rows + cols - 1;
  Eigen::Index p = 1;
  while (p < needed) p *= 2;
  return p;
}

CirculantPlan make_circulant_plan(const ToeplitzOperator& op) {
  CirculantPlan plan;
  plan.length = circulant_length(op.rows, op.cols);
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(plan.length);
  padded.head(op.generating.size()) = op.generating;
  Eigen::FFT<double> fft;
  fft.fwd(plan.spectrum, padded);
  return plan;
}

Eigen::VectorXd naive_matvec(const ToeplitzOperator& op,
                             Eigen::Ref<const Eigen::VectorXd> a) {
  if (a.size() != op.cols)
    throw std::invalid_argument("naive_matvec: dimension mismatch");
  Eigen::VectorXd out(op.rows);
  for (Eigen::Index n = 0; n < op.rows; ++n) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < op.cols; ++j) acc += op.entry(n, j) * a[j];
    out[n] = acc;
  }
  return out;
}

namespace {

// The operator row n is a reversed window of the generator, so X a is a slice
// of the linear convolution of the generator with a: (X a)[n] = conv[n+s-1].
// With P >= N+s-1 the cyclic wraparound only lands on indices < s-1, which
// the slice never touches.
void apply_plan(Eigen::FFT<double>& fft, const CirculantPlan& plan,
                Eigen::Index rows, Eigen::Index cols,
                Eigen::Ref<const Eigen::VectorXd> a, Eigen::VectorXd& padded,
                Eigen::VectorXcd& hat, Eigen::VectorXd& cyclic,
                Eigen::Ref<Eigen::VectorXd> out) {
  if (padded.size() != plan.length) padded.setZero(plan.length);
  padded.head(cols) = a;  // the zero tail is never written, so it persists
  fft.fwd(hat, padded);
  hat.array() *= plan.spectrum.array();
  fft.inv(cyclic, hat);
  out = cyclic.segment(cols - 1, rows);
}

}  // namespace

Eigen::VectorXd fast_matvec(const ToeplitzOperator& op,
                            Eigen::Ref<const Eigen::VectorXd> a) {
  if (a.size() != op.cols)
    throw std::invalid_argument("fast_matvec: dimension mismatch");
  if (op.cols == 1) return op.generating.head(op.rows) * a[0];
  const CirculantPlan plan = make_circulant_plan(op);
  Eigen::FFT<double> fft;
  Eigen::VectorXd padded, cyclic, out(op.rows);
  Eigen::VectorXcd hat;
  apply_plan(fft, plan, op.rows, op.cols, a, padded, hat, cyclic, out);
  return out;
}

Eigen::MatrixXd fast_matmat(const ToeplitzOperator& op,
                            Eigen::Ref<const Eigen::MatrixXd> a) {
  if (a.rows() != op.cols)
    throw std::invalid_argument("fast_matmat: dimension mismatch");
  Eigen::MatrixXd out(op.rows, a.cols());
  if (op.cols == 1) {
    out.noalias() = op.generating.head(op.rows) * a;
    return out;
  }
  const CirculantPlan plan = make_circulant_plan(op);
  Eigen::FFT<double> fft;
  Eigen::VectorXd padded, cyclic;
  Eigen::VectorXcd hat;
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    apply_plan(fft, plan, op.rows, op.cols, a.col(c), padded, hat, cyclic,
               out.col(c));
  return out;
}

Eigen::MatrixXd blocked_matmat(const SampleStream& stream, Eigen::Index rows,
                               Eigen::Index cols, Eigen::Ref<const Eigen::MatrixXd> a,
                               int workers) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("blocked_matmat: rows and cols must be >= 1");
  if (a.rows() != cols)
    throw std::invalid_argument("blocked_matmat: dimension mismatch");
  if (stream.values.size() < rows + cols - 1)
    throw std::invalid_argument("blocked_matmat: stream too short");

  const Eigen::Index n_blocks = (rows + cols - 1) / cols;
  Eigen::MatrixXd out(rows, a.cols());
  parallel_for(n_blocks, workers, [&](std::int64_t block) {
    const Eigen::Index first = block * cols;
    const Eigen::Index height = std::min(cols, rows - first);
    const ToeplitzOperator piece{stream.values.segment(first, height + cols - 1),
                                 height, cols};
    out.middleRows(first, height) = fast_matmat(piece, a);
  });
  return out;
}

Eigen::MatrixXd block_matmat(const SampleStream& stream, Eigen::Index n_blocks,
                             Eigen::Index cols, Eigen::Ref<const Eigen::MatrixXd> a,
                             int workers) {
  if (n_blocks < 1)
    throw std::invalid_argument("block_matmat: need at least one block");
  return blocked_matmat(stream, n_blocks * cols, cols, a, workers);
}

}  // namespace tmc
