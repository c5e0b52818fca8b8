#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "truncbound/error.hpp"
#include "truncbound/kernel.hpp"
#include "truncbound/tolerances.hpp"

namespace truncbound {

/// Sparse LU factorization of M = I - K for a square substochastic K, without
/// pivoting.
///
/// I - K is an M-matrix, so elimination in natural order keeps every
/// multiplier and off-diagonal of U nonpositive. Pivots are formed from the
/// eliminated deficiencies, u_ii = e_i + sum_{j>i} |u_ij| with e = L^{-1} d and d the
/// deficiency of K (its attached leak when present),
/// which involves no subtraction (the GTH device). A pivot below tol::pivot
/// means some state cannot leak mass, i.e. sum_n K^n diverges; the caller
/// chooses which error code that maps to.
class MMatrixLU {
 public:
  MMatrixLU(const SparseKernel& k, ErrorCode on_singular)
      : n_(k.rows()), l_rows_(n_), u_rows_(n_), pivots_(n_), eliminated_(n_) {
    if (!k.square())
      fail(ErrorCode::DimensionMismatch, "I - K needs a square kernel");
    for (Index r = 0; r < n_; ++r)
      for (const auto& e : k.row(r))
        if (e.value < 0.0)
          fail(ErrorCode::NegativeEntry,
               "kernel entry (" + std::to_string(r) + "," +
                   std::to_string(e.col) + ") is negative");
    factor(k, on_singular);
  }

  std::size_t size() const noexcept { return n_; }
  double min_pivot() const noexcept { return min_pivot_; }
  std::size_t factor_nonzeros() const noexcept { return fill_; }

  /// Solves z (I - K) = b for the row vector z. Nonnegative b gives a
  /// nonnegative z with no cancellation.
  std::vector<double> solve_left(std::span<const double> b) const {
    if (b.size() != n_)
      fail(ErrorCode::DimensionMismatch, "solve_left: rhs has wrong length");
    std::vector<double> w(b.begin(), b.end());
    // U^T w' = b, forward over columns of U^T (= rows of U).
    for (Index k = 0; k < n_; ++k) {
      const double wk = w[k] / pivots_[k];
      w[k] = wk;
      if (wk == 0.0) continue;
      for (const auto& [j, u] : u_rows_[k]) w[j] -= u * wk;
    }
    // L^T z = w', backward over rows of L.
    for (Index k = n_; k-- > 0;) {
      const double zk = w[k];
      if (zk == 0.0) continue;
      for (const auto& [j, l] : l_rows_[k]) w[j] -= l * zk;
    }
    return w;
  }

  /// Row x of (I - K)^{-1}.
  std::vector<double> inverse_row(Index x) const {
    std::vector<double> unit(n_, 0.0);
    unit.at(x) = 1.0;
    return solve_left(unit);
  }

 private:
  struct Coef {
    Index col;
    double value;
  };

  void factor(const SparseKernel& k, ErrorCode on_singular) {
    std::vector<double> work(n_, 0.0);
    std::vector<char> touched(n_, 0);
    std::vector<Index> pattern;
    std::set<Index> pending;
    const std::vector<double> leak = deficiency(k);

    for (Index i = 0; i < n_; ++i) {
      pattern.clear();
      auto touch = [&](Index j) {
        if (!touched[j]) {
          touched[j] = 1;
          pattern.push_back(j);
          if (j < i) pending.insert(j);
        }
      };
      // Off-diagonal part of row i of I - K; the diagonal is never read.
      for (const auto& e : k.row(i)) {
        if (e.col == i) continue;
        touch(e.col);
        work[e.col] -= e.value;
      }
      double excess = std::max(0.0, leak[i]);

      while (!pending.empty()) {
        const Index c = *pending.begin();
        pending.erase(pending.begin());
        const double mult = work[c] / pivots_[c];  // <= 0
        if (mult == 0.0) continue;
        l_rows_[i].push_back({c, mult});
        excess -= mult * eliminated_[c];
        for (const auto& [j, u] : u_rows_[c]) {
          if (j == i) continue;
          touch(j);
          work[j] -= mult * u;
        }
      }

      double pivot = excess;
      std::sort(pattern.begin(), pattern.end());
      for (Index j : pattern) {
        if (j > i && work[j] != 0.0) {
          u_rows_[i].push_back({j, work[j]});
          pivot -= work[j];
        }
        work[j] = 0.0;
        touched[j] = 0;
      }
      if (!(pivot >= tol::pivot))
        fail(on_singular, "pivot " + std::to_string(pivot) + " at state " +
                              std::to_string(i) +
                              " (no escape mass reachable)");
      pivots_[i] = pivot;
      eliminated_[i] = excess;
      min_pivot_ = std::min(min_pivot_, pivot);
      fill_ += l_rows_[i].size() + u_rows_[i].size() + 1;
    }
  }

  std::size_t n_;
  std::vector<std::vector<Coef>> l_rows_;  // strictly lower, unit diagonal
  std::vector<std::vector<Coef>> u_rows_;  // strictly upper
  std::vector<double> pivots_;
  std::vector<double> eliminated_;  // e = L^{-1} (1 - K1)
  double min_pivot_ = std::numeric_limits<double>::infinity();
  std::size_t fill_ = 0;
};

}  // namespace truncbound
