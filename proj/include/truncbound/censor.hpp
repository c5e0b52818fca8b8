#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "truncbound/error.hpp"
#include "truncbound/kernel.hpp"
#include "truncbound/mmatrix_lu.hpp"
#include "truncbound/parallel.hpp"
#include "truncbound/state_space.hpp"
#include "truncbound/tolerances.hpp"

namespace truncbound {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A finite window A and an inner set S inside it. The boundary layer is
/// A' = A \ S. Index sets refer to positions in `window`.
class TruncationSpec {
 public:
  TruncationSpec(StateSpace window, const std::vector<Label>& inner)
      : window_(std::move(window)) {
    if (inner.empty()) fail(ErrorCode::ConfigInvalid, "inner set S is empty");
    for (const auto& l : inner)
      if (!window_.contains(l))
        fail(ErrorCode::ConfigSNotInA,
             "state " + to_string(l) + " of S is outside the window A");
    inner_idx_ = window_.indices_of(inner);
    if (std::adjacent_find(inner_idx_.begin(), inner_idx_.end()) !=
        inner_idx_.end())
      fail(ErrorCode::ConfigInvalid, "duplicate state in S");
    boundary_idx_ = complement(inner_idx_, window_.size());
    std::vector<Label> labels;
    for (Index i : inner_idx_) labels.push_back(window_.label(i));
    inner_ = StateSpace(std::move(labels));
  }

  const StateSpace& window() const noexcept { return window_; }
  const StateSpace& inner() const noexcept { return inner_; }
  const IndexSet& inner_indices() const noexcept { return inner_idx_; }
  const IndexSet& boundary_indices() const noexcept { return boundary_idx_; }
  std::size_t boundary_size() const noexcept { return boundary_idx_.size(); }

 private:
  StateSpace window_;
  StateSpace inner_;
  IndexSet inner_idx_;
  IndexSet boundary_idx_;
};

struct InteriorSolveStats {
  std::size_t boundary_size = 0;
  std::size_t factor_nonzeros = 0;
  /// Smallest pivot of the I - P22 factorization (inf when A' is empty).
  double min_pivot = std::numeric_limits<double>::infinity();
};

struct CensoredKernel {
  SparseKernel G;
  TruncationSpec spec;
  InteriorSolveStats stats;
};

/// Kernel of the chain watched on S while it stays inside A:
/// G = P11 + P12 (I - P22)^{-1} P21.
inline CensoredKernel censor(const SparseKernel& window_kernel,
                             const TruncationSpec& spec) {
  if (!window_kernel.square() ||
      window_kernel.rows() != spec.window().size())
    fail(ErrorCode::DimensionMismatch,
         "window kernel has " + std::to_string(window_kernel.rows()) +
             " rows, window has " + std::to_string(spec.window().size()) +
             " states");
  require_valid(window_kernel, KernelKind::Substochastic);

  const auto& s = spec.inner_indices();
  const auto& b = spec.boundary_indices();
  SparseKernel p11 = restrict_to(window_kernel, s, s);

  InteriorSolveStats stats;
  stats.boundary_size = b.size();
  // Leak of G without cancellation: d_G = d_1 + P12 (I - P22)^{-1} d_2.
  std::vector<double> d = deficiency(window_kernel);
  for (double& v : d) v = std::max(0.0, v);
  if (b.empty()) {
    std::vector<double> d1(s.size());
    for (Index x = 0; x < s.size(); ++x) d1[x] = d[s[x]];
    return {p11.with_leak(std::move(d1)), spec, stats};
  }

  SparseKernel p12 = restrict_to(window_kernel, s, b);
  SparseKernel p21 = restrict_to(window_kernel, b, s);
  SparseKernel p22 = restrict_to(window_kernel, b, b);
  MMatrixLU interior(p22, ErrorCode::SingularInterior);
  stats.factor_nonzeros = interior.factor_nonzeros();
  stats.min_pivot = interior.min_pivot();

  std::vector<SparseKernel::Row> rows(s.size());
  std::vector<double> leak(s.size());
  parallel_for(s.size(), [&](std::size_t x) {
    std::vector<double> acc(s.size(), 0.0);
    for (const auto& e : p11.row(x)) acc[e.col] = e.value;
    double dx = d[s[x]];
    if (p12.row(x).size() != 0) {
      std::vector<double> rhs(b.size(), 0.0);
      for (const auto& e : p12.row(x)) rhs[e.col] = e.value;
      const auto z = interior.solve_left(rhs);
      for (Index j = 0; j < b.size(); ++j) {
        if (z[j] == 0.0) continue;
        dx += z[j] * d[b[j]];
        for (const auto& e : p21.row(j)) acc[e.col] += z[j] * e.value;
      }
    }
    leak[x] = dx;
    for (Index y = 0; y < s.size(); ++y)
      if (acc[y] != 0.0) rows[x].push_back({y, acc[y]});
  });
  return {SparseKernel(s.size(), std::move(rows), KernelKind::Substochastic)
              .with_leak(std::move(leak)),
          spec, stats};
}

/// Max-norm of N (I - G) - I.
inline double fundamental_residual(const RowMatrix& n, const SparseKernel& g) {
  const auto size = static_cast<std::size_t>(n.rows());
  double worst = 0.0;
  std::vector<double> acc(size);
  for (Index x = 0; x < size; ++x) {
    for (Index y = 0; y < size; ++y) acc[y] = n(x, y);
    acc[x] -= 1.0;
    for (Index y = 0; y < size; ++y) {
      const double nxy = n(x, y);
      if (nxy == 0.0) continue;
      for (const auto& e : g.row(y)) acc[e.col] -= nxy * e.value;
    }
    for (double v : acc) worst = std::max(worst, std::abs(v));
  }
  return worst;
}

struct FundamentalStats {
  double residual = 0.0;
  double min_pivot = 0.0;
};

/// N = (I - G)^{-1} = sum_n G^n, one transposed solve per row after a single
/// factorization. Throws FundamentalDiverges if sum_n G^n(x, S) is infinite
/// for some x (a pivot below tol::pivot). The residual is reported, not
/// enforced.
inline RowMatrix fundamental_rows(const SparseKernel& g,
                                  FundamentalStats* stats = nullptr) {
  if (!g.square()) fail(ErrorCode::DimensionMismatch, "G must be square");
  require_valid(g, KernelKind::Substochastic);
  MMatrixLU lu(g, ErrorCode::FundamentalDiverges);
  const auto size = g.rows();
  RowMatrix n(size, size);
  parallel_for(size, [&](std::size_t x) {
    const auto row = lu.inverse_row(x);
    for (Index y = 0; y < size; ++y) n(x, y) = row[y];
  });

  for (Eigen::Index i = 0; i < n.size(); ++i) {
    double& v = n.data()[i];
    if (!std::isfinite(v))
      fail(ErrorCode::FundamentalDiverges, "non-finite fundamental entry");
    if (v < 0.0) {
      if (v < -tol::clamp)
        fail(ErrorCode::FundamentalDiverges,
             "negative fundamental entry " + std::to_string(v));
      v = 0.0;
    }
  }
  if (stats) *stats = {fundamental_residual(n, g), lu.min_pivot()};
  return n;
}

inline RowMatrix fundamental_rows(const CensoredKernel& g,
                                  FundamentalStats* stats = nullptr) {
  return fundamental_rows(g.G, stats);
}

/// Rows nu_x of the normalized fundamental matrix and their normalizers
/// g(x) = sum_y N(x, y).
struct NuTable {
  RowMatrix nu;
  std::vector<double> g;

  std::size_t size() const noexcept { return g.size(); }
};

inline NuTable nu_table(const RowMatrix& n) {
  if (n.rows() != n.cols())
    fail(ErrorCode::DimensionMismatch, "fundamental matrix must be square");
  NuTable t;
  t.nu = n;
  t.g.resize(static_cast<std::size_t>(n.rows()));
  for (Eigen::Index x = 0; x < n.rows(); ++x) {
    double sum = 0.0;
    for (Eigen::Index y = 0; y < n.cols(); ++y) {
      if (!(n(x, y) >= 0.0) || !std::isfinite(n(x, y)))
        fail(ErrorCode::ZeroRow, "fundamental row " + std::to_string(x) +
                                     " has a negative or non-finite entry");
      sum += n(x, y);
    }
    if (!(sum > 0.0))
      fail(ErrorCode::ZeroRow, "fundamental row " + std::to_string(x) +
                                   " has zero mass");
    t.g[static_cast<std::size_t>(x)] = sum;
    t.nu.row(x) /= sum;
  }
  return t;
}

struct NeumannResult {
  RowMatrix sum;
  std::size_t terms = 0;
};

/// Partial sums of sum_k G^k, stopping once the next term's largest entry
/// falls below `tol`. Independent of the factorization route.
inline NeumannResult neumann_oracle(const SparseKernel& g, double tol,
                                    std::size_t max_terms) {
  if (!g.square()) fail(ErrorCode::DimensionMismatch, "G must be square");
  const auto size = static_cast<Eigen::Index>(g.rows());
  RowMatrix term = RowMatrix::Identity(size, size);
  NeumannResult out{RowMatrix::Zero(size, size), 0};
  RowMatrix next(size, size);
  while (term.size() > 0 && term.maxCoeff() >= tol) {
    if (out.terms == max_terms)
      fail(ErrorCode::NotConverged, "Neumann series not converged after " +
                                        std::to_string(max_terms) + " terms");
    out.sum += term;
    ++out.terms;
    next.setZero();
    for (Eigen::Index x = 0; x < size; ++x)
      for (Eigen::Index y = 0; y < size; ++y) {
        const double t = term(x, y);
        if (t == 0.0) continue;
        for (const auto& e : g.row(static_cast<Index>(y)))
          next(x, static_cast<Eigen::Index>(e.col)) += t * e.value;
      }
    term.swap(next);
  }
  return out;
}

}  // namespace truncbound
