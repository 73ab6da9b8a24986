#include "tmc/fem1d.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "tmc/toeplitz.hpp"

namespace tmc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_even_mesh(Eigen::Index m) {
  if (m < 2 || m % 2 != 0)
    throw std::invalid_argument("x = 1/2 is a mesh node only for even M >= 2");
}

}  // namespace

Eigen::MatrixXd uniform_coefficient_matrix(Eigen::Index s, Eigen::Index m) {
  if (s < 1 || m < 2)
    throw std::invalid_argument("uniform_coefficient_matrix: need s >= 1, M >= 2");
  const double md = static_cast<double>(m);
  Eigen::MatrixXd coeff(s, 2 * m - 3);
  for (Eigen::Index j = 1; j <= s; ++j) {
    const double scale = md * md / (std::numbers::pi * std::pow(static_cast<double>(j), 2.5));
    const double diag_factor = scale * std::sin(kTwoPi * j / md);
    const double off_factor = -scale * std::sin(std::numbers::pi * j / md);
    for (Eigen::Index k = 1; k <= m - 1; ++k)
      coeff(j - 1, k - 1) = diag_factor * std::sin(kTwoPi * j * k / md);
    for (Eigen::Index k = 1; k <= m - 2; ++k)
      coeff(j - 1, m - 1 + k - 1) =
          off_factor * std::sin(std::numbers::pi * j * (2 * k + 1) / md);
  }
  return coeff;
}

TridiagonalSystem assemble_uniform_from_expr(Eigen::Ref<const Eigen::RowVectorXd> z,
                                             Eigen::Index m) {
  if (m < 2) throw std::invalid_argument("assemble_uniform_from_expr: need M >= 2");
  if (z.size() != 2 * m - 3)
    throw std::invalid_argument("assemble_uniform_from_expr: expression size mismatch");
  const double md = static_cast<double>(m);
  TridiagonalSystem sys;
  sys.diag = (4.0 * md + z.head(m - 1).transpose().array()).matrix();
  sys.off = (-2.0 * md + z.segment(m - 1, m - 2).transpose().array()).matrix();
  sys.rhs = Eigen::VectorXd::Constant(m - 1, 1.0 / md);
  return sys;
}

TridiagonalSystem assemble_uniform(Eigen::Ref<const Eigen::RowVectorXd> y,
                                   Eigen::Index m) {
  const Eigen::RowVectorXd z = y * uniform_coefficient_matrix(y.size(), m);
  return assemble_uniform_from_expr(z, m);
}

Eigen::VectorXd thomas_solve(const TridiagonalSystem& sys) {
  const Eigen::Index n = sys.diag.size();
  if (n < 1 || sys.off.size() != n - 1 || sys.rhs.size() != n)
    throw std::invalid_argument("thomas_solve: inconsistent system sizes");

  Eigen::VectorXd c(std::max<Eigen::Index>(n - 1, 1)), d(n);
  double denom = sys.diag[0];
  if (std::abs(denom) < std::numeric_limits<double>::min())
    throw std::runtime_error("thomas_solve: singular system (zero pivot)");
  if (n > 1) c[0] = sys.off[0] / denom;
  d[0] = sys.rhs[0] / denom;
  for (Eigen::Index i = 1; i < n; ++i) {
    denom = sys.diag[i] - sys.off[i - 1] * c[i - 1];
    if (std::abs(denom) < std::numeric_limits<double>::min())
      throw std::runtime_error("thomas_solve: singular system (zero pivot)");
    if (i < n - 1) c[i] = sys.off[i] / denom;
    d[i] = (sys.rhs[i] - sys.off[i - 1] * d[i - 1]) / denom;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) d[i] -= c[i] * d[i + 1];
  return d;
}

double solve_u_half_uniform(Eigen::Ref<const Eigen::RowVectorXd> y, Eigen::Index m) {
  require_even_mesh(m);
  const Eigen::VectorXd u = thomas_solve(assemble_uniform(y, m));
  return u[m / 2 - 1];
}

Eigen::VectorXd mesh_nodes(Eigen::Index m) {
  if (m < 1) throw std::invalid_argument("mesh_nodes: need M >= 1");
  return Eigen::VectorXd::LinSpaced(m + 1, 0.0, 1.0);
}

Eigen::MatrixXd lognormal_sine_matrix(Eigen::Index s,
                                      Eigen::Ref<const Eigen::VectorXd> nodes) {
  if (s < 1) throw std::invalid_argument("lognormal_sine_matrix: need s >= 1");
  Eigen::MatrixXd coeff(s, nodes.size());
  for (Eigen::Index j = 1; j <= s; ++j) {
    const double decay = 1.0 / (static_cast<double>(j) * static_cast<double>(j));
    for (Eigen::Index q = 0; q < nodes.size(); ++q) {
      // reduce j*x modulo 1 so integer arguments give exactly zero
      const double frac = std::fmod(static_cast<double>(j) * nodes[q], 1.0);
      coeff(j - 1, q) = decay * std::sin(kTwoPi * frac);
    }
  }
  return coeff;
}

Eigen::MatrixXd compute_thetas(const SampleStream& stream, Eigen::Index n_samples,
                               Eigen::Index s,
                               Eigen::Ref<const Eigen::VectorXd> nodes) {
  const Eigen::MatrixXd coeff = lognormal_sine_matrix(s, nodes);
  const ToeplitzOperator op = build_operator(stream, n_samples, s);
  return fast_matmat(op, coeff);
}

TridiagonalSystem assemble_lognormal(Eigen::Ref<const Eigen::RowVectorXd> theta,
                                     Eigen::Index m) {
  if (m < 2) throw std::invalid_argument("assemble_lognormal: need M >= 2");
  if (theta.size() != m + 1)
    throw std::invalid_argument("assemble_lognormal: need theta at the M+1 mesh nodes");
  const double md = static_cast<double>(m);
  const Eigen::VectorXd field = theta.transpose().array().exp();
  TridiagonalSystem sys;
  sys.diag.resize(m - 1);
  sys.off.resize(m - 2);
  for (Eigen::Index k = 1; k <= m - 1; ++k)
    sys.diag[k - 1] = md / 3.0 * (field[k - 1] + 4.0 * field[k] + field[k + 1]);
  for (Eigen::Index k = 1; k <= m - 2; ++k)
    sys.off[k - 1] = -md / 2.0 * (field[k] + field[k + 1]);
  sys.rhs = Eigen::VectorXd::Constant(m - 1, 1.0 / md);
  return sys;
}

double solve_u_half_lognormal(Eigen::Ref<const Eigen::RowVectorXd> theta,
                              Eigen::Index m) {
  require_even_mesh(m);
  const Eigen::VectorXd u = thomas_solve(assemble_lognormal(theta, m));
  return u[m / 2 - 1];
}

}  // namespace tmc
