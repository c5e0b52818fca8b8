#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "truncbound/censor.hpp"
#include "truncbound/error.hpp"
#include "truncbound/parallel.hpp"
#include "truncbound/representation.hpp"

namespace truncbound {

/// Total variation distance sup_B |p(B) - q(B)| = (1/2) sum |p - q|.
inline double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    fail(ErrorCode::DimensionMismatch, "tv_norm: lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return std::min(1.0, 0.5 * s);
}

inline double tv_norm(const Distribution& p, const Distribution& q) {
  return tv_distance(p.weights(), q.weights());
}

inline std::span<const double> nu_row(const NuTable& nt, std::size_t x) {
  const auto n = nt.size();
  return {nt.nu.data() + x * n, n};
}

struct RewardBounds {
  double lower = 0.0;
  double upper = 0.0;
  Index argmin = 0;
  Index argmax = 0;
  /// sum_y nu_x(y) r(y) for every x.
  std::vector<double> row_values;
};

/// min_x and max_x of nu_x r. The stationary expectation of any chain
/// dominating G lies in [lower, upper]. Ties resolve to the smallest index.
inline RewardBounds reward_bounds(const NuTable& nt, std::span<const double> r) {
  const std::size_t n = nt.size();
  if (r.size() != n)
    fail(ErrorCode::DimensionMismatch,
         "reward has " + std::to_string(r.size()) + " entries, nu table " +
             std::to_string(n));
  if (n == 0) fail(ErrorCode::DimensionMismatch, "empty nu table");
  for (std::size_t y = 0; y < n; ++y)
    if (!(r[y] >= 0.0))
      fail(ErrorCode::NegativeReward,
           "r(" + std::to_string(y) + ") = " + std::to_string(r[y]));
  RewardBounds b;
  b.row_values.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    const auto row = nu_row(nt, x);
    double v = 0.0;
    for (std::size_t y = 0; y < n; ++y) v += row[y] * r[y];
    b.row_values[x] = v;
  }
  b.lower = b.upper = b.row_values[0];
  for (std::size_t x = 1; x < n; ++x) {
    if (b.row_values[x] < b.lower) b.lower = b.row_values[x], b.argmin = x;
    if (b.row_values[x] > b.upper) b.upper = b.row_values[x], b.argmax = x;
  }
  return b;
}

struct TvReport {
  double diameter = 0.0;
  Index x = 0;
  Index y = 0;
};

/// max over pairs of ||nu_x - nu_y||. The witness is the lexicographically
/// first pair attaining the maximum; a row stops scanning at distance 1.
inline TvReport tv_diameter(const NuTable& nt) {
  const std::size_t n = nt.size();
  std::vector<TvReport> per_row(n);
  parallel_for(n, [&](std::size_t x) {
    TvReport best{0.0, x, x};
    const auto rx = nu_row(nt, x);
    for (std::size_t y = x + 1; y < n; ++y) {
      const double d = tv_distance(rx, nu_row(nt, y));
      if (d > best.diameter) {
        best = {d, x, y};
        if (d >= 1.0) break;
      }
    }
    per_row[x] = best;
  });
  TvReport out;
  for (const auto& r : per_row) {
    if (r.diameter > out.diameter) out = r;
    if (out.diameter >= 1.0) break;
  }
  if (out.diameter == 0.0 && n > 0) out.x = out.y = 0;
  return out;
}

/// ||sum eta1(x) nu_x - sum eta2(y) nu_y||, never larger than the diameter.
inline double mixture_tv_gap(const Distribution& eta1, const Distribution& eta2,
                             const NuTable& nt) {
  if (eta1.size() != eta2.size())
    fail(ErrorCode::DimensionMismatch, "mixture_tv_gap: lengths differ");
  return tv_norm(mixture(eta1, nt), mixture(eta2, nt));
}

}  // namespace truncbound
