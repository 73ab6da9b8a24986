#include "tmc/fem2d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace tmc {

FrequencyList frequency_ordering(Eigen::Index s) {
  if (s < 1) throw std::invalid_argument("frequency_ordering: need s >= 1");
  long long k_max = 2;
  std::vector<std::array<int, 2>> pairs;
  while (true) {
    pairs.clear();
    pairs.reserve(k_max * k_max);
    for (int k1 = 1; k1 <= k_max; ++k1)
      for (int k2 = 1; k2 <= k_max; ++k2) pairs.push_back({k1, k2});
    std::sort(pairs.begin(), pairs.end(),
              [](const std::array<int, 2>& a, const std::array<int, 2>& b) {
                const long long na = 1ll * a[0] * a[0] + 1ll * a[1] * a[1];
                const long long nb = 1ll * b[0] * b[0] + 1ll * b[1] * b[1];
                if (na != nb) return na < nb;
                return a < b;
              });
    if (static_cast<Eigen::Index>(pairs.size()) >= s) {
      const auto& last = pairs[s - 1];
      const long long norm = 1ll * last[0] * last[0] + 1ll * last[1] * last[1];
      // every pair outside the k_max box has norm >= (k_max+1)^2 + 1
      if (norm <= (k_max + 1) * (k_max + 1)) break;
    }
    k_max *= 2;
  }
  pairs.resize(s);
  return {std::move(pairs)};
}

namespace {

// integral of sin(c + w t) over t in [0, h]
double sine_segment(double c, double w, double h) {
  if (w == 0.0) return h * std::sin(c);
  return (std::cos(c) - std::cos(c + w * h)) / w;
}

}  // namespace

double triangle_sine_integral_lower(double a, double b, double x0, double y0,
                                    double h) {
  // integral over {0 <= t <= h, 0 <= tau <= t} of sin(a(x0+t)) sin(b(y0+tau))
  const double alpha = a * x0;
  const double beta = b * y0;
  const double a1 = sine_segment(alpha, a, h);
  const double a2 = 0.5 * (sine_segment(alpha + beta, a + b, h) +
                           sine_segment(alpha - beta, a - b, h));
  return (std::cos(beta) * a1 - a2) / b;
}

double triangle_sine_integral_upper(double a, double b, double x0, double y0,
                                    double h) {
  // swapping the roles of the two axes maps the upper triangle to a lower one
  return triangle_sine_integral_lower(b, a, y0, x0, h);
}

Pde2dModel::Pde2dModel(Eigen::Index m_intervals, FrequencyList freqs)
    : m_(m_intervals), freqs_(std::move(freqs)) {
  if (m_ < 2) throw std::invalid_argument("Pde2dModel: need M >= 2");
  const Eigen::Index s = freqs_.size();
  if (s < 1) throw std::invalid_argument("Pde2dModel: empty frequency list");

  const Eigen::Index interior = m_ - 1;
  const Eigen::Index n_nodes = interior * interior;
  const Eigen::Index n_right = (m_ - 2) * interior;
  const Eigen::Index n_up = interior * (m_ - 2);
  entries_ = n_nodes + n_right + n_up;

  base_.resize(entries_);
  base_.head(n_nodes).setConstant(4.0);
  base_.segment(n_nodes, n_right + n_up).setConstant(-1.0);

  const double h = 1.0 / static_cast<double>(m_);
  rhs_.resize(n_nodes);
  for (Eigen::Index q = 1; q <= interior; ++q)
    for (Eigen::Index p = 1; p <= interior; ++p)
      rhs_[node_index(p, q)] = 100.0 * (p * h) * h * h;

  // Per-frequency coupling coefficients: gradients are constant on each
  // triangle, so each entry is a signed combination of the sine integrals
  // over the shared triangles of the two hat supports.
  coeff_.resize(s, entries_);
  const double inv_h2 = static_cast<double>(m_) * static_cast<double>(m_);
  Eigen::MatrixXd lower(m_, m_), upper(m_, m_);
  for (Eigen::Index j = 0; j < s; ++j) {
    const int k1 = freqs_.pairs[j][0];
    const int k2 = freqs_.pairs[j][1];
    const double a = std::numbers::pi * k1;
    const double b = std::numbers::pi * k2;
    const double norm = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
    const double decay = 1.0 / (norm * norm);
    for (Eigen::Index cx = 0; cx < m_; ++cx)
      for (Eigen::Index cy = 0; cy < m_; ++cy) {
        lower(cx, cy) = decay * triangle_sine_integral_lower(a, b, cx * h, cy * h, h);
        upper(cx, cy) = decay * triangle_sine_integral_upper(a, b, cx * h, cy * h, h);
      }
    for (Eigen::Index q = 1; q <= interior; ++q)
      for (Eigen::Index p = 1; p <= interior; ++p) {
        const Eigen::Index self = node_index(p, q);
        coeff_(j, self) =
            inv_h2 * (lower(p, q) + upper(p, q) + lower(p - 1, q - 1) +
                      upper(p - 1, q - 1) + 2.0 * lower(p - 1, q) +
                      2.0 * upper(p, q - 1));
        if (p <= m_ - 2)
          coeff_(j, n_nodes + (q - 1) * (m_ - 2) + (p - 1)) =
              -inv_h2 * (lower(p, q) + upper(p, q - 1));
        if (q <= m_ - 2)
          coeff_(j, n_nodes + n_right + (q - 1) * interior + (p - 1)) =
              -inv_h2 * (upper(p, q) + lower(p - 1, q));
      }
  }
}

Eigen::Index Pde2dModel::center_index() const {
  if (m_ % 2 != 0)
    throw std::invalid_argument("center node exists only for even M");
  return node_index(m_ / 2, m_ / 2);
}

SparseSystem Pde2dModel::assemble_from_expr(
    Eigen::Ref<const Eigen::RowVectorXd> z) const {
  if (z.size() != entries_)
    throw std::invalid_argument("assemble_from_expr: expression size mismatch");
  const Eigen::Index interior = m_ - 1;
  const Eigen::Index n_nodes = interior * interior;
  const Eigen::Index n_right = (m_ - 2) * interior;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n_nodes + 4 * (entries_ - n_nodes));
  for (Eigen::Index q = 1; q <= interior; ++q)
    for (Eigen::Index p = 1; p <= interior; ++p) {
      const Eigen::Index i = node_index(p, q);
      triplets.emplace_back(i, i, base_[i] + z[i]);
      if (p <= m_ - 2) {
        const Eigen::Index e = n_nodes + (q - 1) * (m_ - 2) + (p - 1);
        const double v = base_[e] + z[e];
        const Eigen::Index nbr = node_index(p + 1, q);
        triplets.emplace_back(i, nbr, v);
        triplets.emplace_back(nbr, i, v);
      }
      if (q <= m_ - 2) {
        const Eigen::Index e = n_nodes + n_right + (q - 1) * interior + (p - 1);
        const double v = base_[e] + z[e];
        const Eigen::Index nbr = node_index(p, q + 1);
        triplets.emplace_back(i, nbr, v);
        triplets.emplace_back(nbr, i, v);
      }
    }

  SparseSystem sys;
  sys.matrix.resize(dim(), dim());
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.rhs = rhs_;
  return sys;
}

SparseSystem Pde2dModel::assemble(Eigen::Ref<const Eigen::RowVectorXd> y) const {
  if (y.size() != freqs_.size())
    throw std::invalid_argument("assemble: sample dimension mismatch");
  const Eigen::RowVectorXd z = y * coeff_;
  return assemble_from_expr(z);
}

SparseSystem assemble_2d(Eigen::Ref<const Eigen::RowVectorXd> y,
                         Eigen::Index m_intervals, const FrequencyList& freqs) {
  return Pde2dModel(m_intervals, freqs).assemble(y);
}

BicgstabResult bicgstab(const SparseSystem& sys, double tol, int max_iterations) {
  const Eigen::Index n = sys.matrix.rows();
  if (sys.matrix.cols() != n || sys.rhs.size() != n)
    throw std::invalid_argument("bicgstab: inconsistent system");
  const int max_iter = max_iterations > 0 ? max_iterations : static_cast<int>(10 * n);
  constexpr double kTiny = 1e-300;

  const Eigen::VectorXd& b = sys.rhs;
  const double norm_b = b.norm();
  if (norm_b == 0.0) return {Eigen::VectorXd::Zero(n), 0, 0.0};

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = b;
  Eigen::VectorXd r_shadow = r;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s(n), t(n);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  double res_rel = 1.0;
  bool restarted = false;

  auto restart_or_fail = [&](int iter) {
    if (restarted)
      throw ConvergenceFailure("bicgstab: breakdown after restart", res_rel, iter);
    restarted = true;
    const double scale =
        1e-8 * std::max(1.0, x.lpNorm<Eigen::Infinity>() +
                                 b.lpNorm<Eigen::Infinity>());
    for (Eigen::Index i = 0; i < n; ++i) x[i] += (i % 2 == 0 ? scale : -scale);
    r = b - sys.matrix * x;
    r_shadow = r;
    p.setZero();
    v.setZero();
    rho = alpha = omega = 1.0;
  };

  for (int iter = 1; iter <= max_iter; ++iter) {
    const double rho_new = r_shadow.dot(r);
    if (std::abs(rho_new) < kTiny || std::abs(omega) < kTiny) {
      restart_or_fail(iter);
      continue;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    p = r + beta * (p - omega * v);
    v.noalias() = sys.matrix * p;
    const double denom = r_shadow.dot(v);
    if (std::abs(denom) < kTiny) {
      restart_or_fail(iter);
      continue;
    }
    alpha = rho_new / denom;
    s = r - alpha * v;
    if (s.norm() / norm_b < tol) {
      x += alpha * p;
      res_rel = (b - sys.matrix * x).norm() / norm_b;
      if (res_rel < tol) return {std::move(x), iter, res_rel};
      r = b - sys.matrix * x;
      rho = rho_new;
      continue;
    }
    t.noalias() = sys.matrix * s;
    const double tt = t.squaredNorm();
    if (tt < kTiny) {
      restart_or_fail(iter);
      continue;
    }
    omega = t.dot(s) / tt;
    if (std::abs(omega) < kTiny) {
      restart_or_fail(iter);
      continue;
    }
    x += alpha * p + omega * s;
    r = s - omega * t;
    rho = rho_new;
    res_rel = r.norm() / norm_b;
    if (res_rel < tol) {
      const double true_rel = (b - sys.matrix * x).norm() / norm_b;
      if (true_rel < tol) return {std::move(x), iter, true_rel};
      r = b - sys.matrix * x;  // recursion residual drifted; refresh and go on
      res_rel = true_rel;
    }
  }
  throw ConvergenceFailure("bicgstab: iteration limit reached", res_rel, max_iter);
}

double solve_center(Eigen::Ref<const Eigen::RowVectorXd> y, Eigen::Index m_intervals,
                    const FrequencyList& freqs) {
  if (m_intervals % 2 != 0)
    throw std::invalid_argument("center node exists only for even M");
  const Pde2dModel model(m_intervals, freqs);
  const Eigen::Index center = model.center_index();
  const SparseSystem sys = model.assemble(y);
  const BicgstabResult sol = bicgstab(sys);
  return sol.x[center];
}

}  // namespace tmc
