#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "truncbound/censor.hpp"
#include "truncbound/error.hpp"
#include "truncbound/kernel.hpp"
#include "truncbound/tolerances.hpp"

namespace truncbound {

/// Nonnegative weights with no normalization requirement (intermediate
/// measures such as pi H).
class Measure {
 public:
  Measure() = default;
  explicit Measure(std::vector<double> w) : w_(std::move(w)) {
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (!std::isfinite(w_[i]) || w_[i] < -tol::clamp)
        fail(ErrorCode::NegativeEntry,
             "measure weight " + std::to_string(i) + " is " +
                 std::to_string(w_[i]));
      if (w_[i] < 0.0) w_[i] = 0.0;
    }
  }

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::vector<double>& weights() const noexcept { return w_; }

  double total() const {
    double s = 0.0;
    for (double v : w_) s += v;
    return s;
  }

 protected:
  std::vector<double> w_;
};

/// Probability vector over an indexed state set.
class Distribution : public Measure {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<double> w, double tol_prob = tol::prob)
      : Measure(std::move(w)) {
    const double s = total();
    if (!(std::abs(s - 1.0) <= tol_prob))
      fail(ErrorCode::NotNormalized,
           "distribution sums to " + std::to_string(s) + ", not 1");
  }

  static Distribution point_mass(std::size_t n, std::size_t at) {
    std::vector<double> w(n, 0.0);
    w.at(at) = 1.0;
    return Distribution(std::move(w));
  }

  static Distribution uniform(std::size_t n) {
    return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  bool operator==(const Distribution& other) const { return w_ == other.w_; }
};

inline double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    fail(ErrorCode::DimensionMismatch, "l1_distance: lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

/// Row vector times kernel.
inline std::vector<double> left_multiply(std::span<const double> v,
                                         const SparseKernel& k) {
  if (v.size() != k.rows())
    fail(ErrorCode::DimensionMismatch, "vector/kernel shapes differ");
  std::vector<double> out(k.cols(), 0.0);
  for (Index x = 0; x < k.rows(); ++x) {
    if (v[x] == 0.0) continue;
    for (const auto& e : k.row(x)) out[e.col] += v[x] * e.value;
  }
  return out;
}

/// ||mu P - mu||_1.
inline double stationarity_residual(const Measure& mu, const SparseKernel& p) {
  const auto mp = left_multiply(mu.weights(), p);
  return l1_distance(mp, mu.weights());
}

/// sum_x eta(x) nu_x.
inline Distribution mixture(const Distribution& eta, const NuTable& nt) {
  if (eta.size() != nt.size())
    fail(ErrorCode::DimensionMismatch,
         "mixture: eta has " + std::to_string(eta.size()) +
             " states, nu table " + std::to_string(nt.size()));
  const std::size_t n = nt.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    const double w = eta[x];
    if (w == 0.0) continue;
    for (std::size_t y = 0; y < n; ++y)
      out[y] += w * nt.nu(static_cast<Eigen::Index>(x),
                          static_cast<Eigen::Index>(y));
  }
  return Distribution(std::move(out));
}

/// Intermediate quantities of the forward construction; `eta` is the mixing
/// weight that represents pi.
struct ForwardResult {
  Measure pi1;    // pi G
  Measure pi2;    // pi H with H = P - G
  std::vector<double> g;
  Distribution eta;  // eta(x) = pi2(x) g(x)
};

/// Given a stochastic P >= G with stationary pi, produces the mixing
/// distribution eta such that pi = sum_x eta(x) nu_x.
inline ForwardResult forward_map(const SparseKernel& p, const SparseKernel& g,
                                 const Distribution& pi) {
  if (!p.square() || p.rows() != g.rows() || g.rows() != g.cols() ||
      pi.size() != p.rows())
    fail(ErrorCode::DimensionMismatch, "forward_map: shapes differ");
  require_valid(p, KernelKind::Stochastic);
  if (!dominates(p, g)) fail(ErrorCode::NotDominating, "P does not dominate G");
  const double res = stationarity_residual(pi, p);
  if (!(res <= tol::stat))
    fail(ErrorCode::NotStationary,
         "||pi P - pi||_1 = " + std::to_string(res));

  const RowMatrix n = fundamental_rows(g);
  std::vector<double> gx(g.rows(), 0.0);
  for (Index x = 0; x < g.rows(); ++x)
    gx[x] = n.row(static_cast<Eigen::Index>(x)).sum();

  std::vector<double> pi1 = left_multiply(pi.weights(), g);
  std::vector<double> pi2(p.rows(), 0.0);
  for (Index x = 0; x < p.rows(); ++x) {
    if (pi[x] == 0.0) continue;
    auto grow = g.row(x);
    auto it = grow.begin();
    for (const auto& e : p.row(x)) {
      while (it != grow.end() && it->col < e.col) ++it;
      const double gv = (it != grow.end() && it->col == e.col) ? it->value : 0.0;
      const double h = std::max(0.0, e.value - gv);
      pi2[e.col] += pi[x] * h;
    }
  }
  std::vector<double> eta(p.rows());
  for (Index x = 0; x < p.rows(); ++x) eta[x] = pi2[x] * gx[x];
  return {Measure(std::move(pi1)), Measure(std::move(pi2)), std::move(gx),
          Distribution(std::move(eta))};
}

inline ForwardResult forward_map(const SparseKernel& p, const CensoredKernel& g,
                                 const Distribution& pi) {
  return forward_map(p, g.G, pi);
}

struct BackwardResult {
  SparseKernel P;     // G + (1 - G 1) phi, stochastic, dominates G
  Distribution mu;    // sum_x gamma(x) nu_x, stationary for P
  Distribution phi;
  double c = 0.0;     // sum_x gamma(x) / g(x)
};

/// Given mixing weights gamma, builds a stochastic kernel P >= G whose
/// stationary distribution is the gamma-mixture of the nu_x rows.
inline BackwardResult backward_map(const Distribution& gamma,
                                   const SparseKernel& g, const NuTable& nt) {
  const std::size_t n = g.rows();
  if (!g.square() || gamma.size() != n || nt.size() != n)
    fail(ErrorCode::DimensionMismatch, "backward_map: shapes differ");
  double c = 0.0;
  for (std::size_t x = 0; x < n; ++x) c += gamma[x] / nt.g[x];
  std::vector<double> phi(n);
  for (std::size_t x = 0; x < n; ++x) phi[x] = gamma[x] / (c * nt.g[x]);

  const auto d = deficiency(g);
  std::vector<SparseKernel::Row> rows(n);
  for (Index x = 0; x < n; ++x) {
    const double dx = std::max(0.0, d[x]);
    std::vector<double> dense(n, 0.0);
    for (const auto& e : g.row(x)) dense[e.col] = e.value;
    if (dx > 0.0)
      for (Index y = 0; y < n; ++y) dense[y] += dx * phi[y];
    for (Index y = 0; y < n; ++y)
      if (dense[y] != 0.0) rows[x].push_back({y, dense[y]});
  }
  return {SparseKernel(n, std::move(rows), KernelKind::Stochastic),
          mixture(gamma, nt), Distribution(std::move(phi)), c};
}

inline BackwardResult backward_map(const Distribution& gamma,
                                   const CensoredKernel& g, const NuTable& nt) {
  return backward_map(gamma, g.G, nt);
}

/// Unique stationary distribution of a finite stochastic P by a dense solve.
/// Throws NotUniqueStationary when I - P has rank below n - 1.
inline Distribution stationary_oracle(const SparseKernel& p) {
  if (!p.square()) fail(ErrorCode::DimensionMismatch, "P must be square");
  require_valid(p, KernelKind::Stochastic);
  const auto n = static_cast<Eigen::Index>(p.rows());
  if (n == 0) fail(ErrorCode::ZeroMass, "empty chain");
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (Index x = 0; x < p.rows(); ++x)
    for (const auto& e : p.row(x))
      a(static_cast<Eigen::Index>(e.col), static_cast<Eigen::Index>(x)) -=
          e.value;  // a = (I - P)^T

  Eigen::FullPivLU<Eigen::MatrixXd> rank_probe(a);
  rank_probe.setThreshold(1e-10);
  if (rank_probe.rank() < n - 1)
    fail(ErrorCode::NotUniqueStationary,
         "rank(I - P) = " + std::to_string(rank_probe.rank()) + " < " +
             std::to_string(n - 1));

  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd sol = a.partialPivLu().solve(rhs);

  std::vector<double> w(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = sol(i);
    if (v < 0.0) {
      if (v < -tol::clamp)
        fail(ErrorCode::NotUniqueStationary,
             "negative stationary weight " + std::to_string(v));
      v = 0.0;
    }
    w[static_cast<std::size_t>(i)] = v;
    total += v;
  }
  for (double& v : w) v /= total;
  Distribution pi(std::move(w));
  const double res = stationarity_residual(pi, p);
  if (!(res <= 1e-10))
    fail(ErrorCode::NotStationary,
         "dense stationary solve residual " + std::to_string(res));
  return pi;
}

/// pi*(x) / pi*(S) for x in S (S sorted).
inline Distribution conditional_distribution(const Distribution& pi_star,
                                             const IndexSet& s) {
  if (s.empty()) fail(ErrorCode::ZeroMass, "conditioning on an empty set");
  double mass = 0.0;
  for (Index x : s) {
    if (x >= pi_star.size())
      fail(ErrorCode::IndexOutOfRange, "state " + std::to_string(x));
    mass += pi_star[x];
  }
  if (!(mass > tol::prob))
    fail(ErrorCode::ZeroMass, "pi*(S) = " + std::to_string(mass));
  std::vector<double> w;
  w.reserve(s.size());
  for (Index x : s) w.push_back(pi_star[x] / mass);
  return Distribution(std::move(w));
}

}  // namespace truncbound
