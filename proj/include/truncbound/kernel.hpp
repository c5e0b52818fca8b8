#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "truncbound/error.hpp"
#include "truncbound/state_space.hpp"
#include "truncbound/tolerances.hpp"

namespace truncbound {

enum class KernelKind { Stochastic, Substochastic };

struct Entry {
  Index col;
  double value;

  bool operator==(const Entry&) const = default;
};

/// Row-major (CSR) sparse nonnegative matrix. Square kernels are transition
/// kernels over an indexed state set; rectangular ones arise as blocks.
///
/// Construction sorts each row by column, rejects duplicate or out-of-range
/// columns, and drops explicit zeros. Numerical properties (nonnegativity,
/// row sums) are checked separately by validate_kernel.
class SparseKernel {
 public:
  using Row = std::vector<Entry>;

  SparseKernel() = default;

  SparseKernel(std::size_t n_rows, std::size_t n_cols, std::vector<Row> rows,
               KernelKind kind = KernelKind::Substochastic)
      : n_rows_(n_rows), n_cols_(n_cols), kind_(kind) {
    if (rows.size() != n_rows)
      fail(ErrorCode::DimensionMismatch,
           "expected " + std::to_string(n_rows) + " rows, got " +
               std::to_string(rows.size()));
    offsets_.assign(1, 0);
    offsets_.reserve(n_rows + 1);
    for (std::size_t r = 0; r < n_rows; ++r) {
      auto& row = rows[r];
      std::sort(row.begin(), row.end(),
                [](const Entry& a, const Entry& b) { return a.col < b.col; });
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (row[k].col >= n_cols)
          fail(ErrorCode::IndexOutOfRange,
               "column " + std::to_string(row[k].col) + " in row " +
                   std::to_string(r) + " exceeds " + std::to_string(n_cols));
        if (k > 0 && row[k].col == row[k - 1].col)
          fail(ErrorCode::IndexOutOfRange,
               "duplicate column " + std::to_string(row[k].col) + " in row " +
                   std::to_string(r));
        if (row[k].value != 0.0) entries_.push_back(row[k]);
      }
      offsets_.push_back(entries_.size());
    }
  }

  /// Square kernel.
  SparseKernel(std::size_t n, std::vector<Row> rows,
               KernelKind kind = KernelKind::Substochastic)
      : SparseKernel(n, n, std::move(rows), kind) {}

  static SparseKernel zero(std::size_t n_rows, std::size_t n_cols) {
    return SparseKernel(n_rows, n_cols, std::vector<Row>(n_rows));
  }

  /// Builds from a dense row-major nested list; used mostly by tests.
  static SparseKernel from_dense(const std::vector<std::vector<double>>& dense,
                                 KernelKind kind = KernelKind::Substochastic) {
    const std::size_t n_rows = dense.size();
    const std::size_t n_cols = n_rows ? dense.front().size() : 0;
    std::vector<Row> rows(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
      if (dense[r].size() != n_cols)
        fail(ErrorCode::DimensionMismatch, "ragged dense matrix");
      for (std::size_t c = 0; c < n_cols; ++c)
        if (dense[r][c] != 0.0) rows[r].push_back({c, dense[r][c]});
    }
    return SparseKernel(n_rows, n_cols, std::move(rows), kind);
  }

  std::size_t rows() const noexcept { return n_rows_; }
  std::size_t cols() const noexcept { return n_cols_; }
  bool square() const noexcept { return n_rows_ == n_cols_; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }
  KernelKind kind() const noexcept { return kind_; }

  SparseKernel with_kind(KernelKind kind) const {
    SparseKernel copy = *this;
    copy.kind_ = kind;
    return copy;
  }

  std::span<const Entry> row(Index r) const {
    return {entries_.data() + offsets_.at(r),
            entries_.data() + offsets_.at(r + 1)};
  }

  double row_sum(Index r) const {
    double s = 0.0;
    for (const auto& e : row(r)) s += e.value;
    return s;
  }

  double at(Index r, Index c) const {
    auto rr = row(r);
    auto it = std::lower_bound(
        rr.begin(), rr.end(), c,
        [](const Entry& e, Index col) { return e.col < col; });
    return (it != rr.end() && it->col == c) ? it->value : 0.0;
  }

  std::vector<std::vector<double>> to_dense() const {
    std::vector<std::vector<double>> out(n_rows_,
                                         std::vector<double>(n_cols_, 0.0));
    for (Index r = 0; r < n_rows_; ++r)
      for (const auto& e : row(r)) out[r][e.col] = e.value;
    return out;
  }

  /// Attaches row deficiencies known more accurately than 1 - row sum, e.g.
  /// the summed mass of transitions that leave a window. Values must be
  /// nonnegative; they are carried through restrict_to and censor.
  SparseKernel with_leak(std::vector<double> leak) const {
    if (leak.size() != n_rows_)
      fail(ErrorCode::DimensionMismatch, "leak vector has wrong length");
    for (double v : leak)
      if (!(v >= 0.0) || !std::isfinite(v))
        fail(ErrorCode::NegativeEntry, "leak must be finite and nonnegative");
    SparseKernel copy = *this;
    copy.leak_ = std::move(leak);
    return copy;
  }

  bool has_leak() const noexcept { return !leak_.empty(); }
  const std::vector<double>& leak() const noexcept { return leak_; }

  /// Structural and numerical equality; the kind flag and leak are ignored.
  bool same_entries(const SparseKernel& other) const {
    return n_rows_ == other.n_rows_ && n_cols_ == other.n_cols_ &&
           offsets_ == other.offsets_ && entries_ == other.entries_;
  }

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  KernelKind kind_ = KernelKind::Substochastic;
  std::vector<std::size_t> offsets_{0};
  std::vector<Entry> entries_;
  std::vector<double> leak_;
};

struct ValidationFailure {
  ErrorCode code;
  Index row;
  double value;  // offending entry or row sum
};

struct ValidationReport {
  std::vector<double> row_sums;
  /// Largest amount by which any row sum leaves its admissible interval
  /// (0 when every row is admissible).
  double max_violation = 0.0;
  std::optional<ValidationFailure> failure;

  bool passed() const noexcept { return !failure.has_value(); }
};

/// Checks nonnegativity and the row-sum condition for `kind`. The first
/// offending row (in index order) is reported; negative entries take
/// precedence over row sums within a row.
inline ValidationReport validate_kernel(const SparseKernel& k, KernelKind kind,
                                        double tol_row = tol::row) {
  ValidationReport rep;
  rep.row_sums.resize(k.rows());
  for (Index r = 0; r < k.rows(); ++r) {
    double s = 0.0;
    for (const auto& e : k.row(r)) {
      if (e.value < 0.0 && !rep.failure)
        rep.failure = ValidationFailure{ErrorCode::NegativeEntry, r, e.value};
      s += e.value;
    }
    rep.row_sums[r] = s;
    double violation = 0.0;
    if (kind == KernelKind::Stochastic)
      violation = std::abs(s - 1.0);
    else
      violation = std::max(0.0, s - 1.0);
    rep.max_violation = std::max(rep.max_violation, violation);
    if (violation > tol_row && !rep.failure)
      rep.failure = ValidationFailure{kind == KernelKind::Stochastic
                                          ? ErrorCode::RowSumNotOne
                                          : ErrorCode::RowSumExceedsOne,
                                      r, s};
  }
  return rep;
}

/// validate_kernel, throwing on the first failure.
inline void require_valid(const SparseKernel& k, KernelKind kind,
                          double tol_row = tol::row) {
  auto rep = validate_kernel(k, kind, tol_row);
  if (!rep.passed()) {
    const auto& f = *rep.failure;
    fail(f.code, "row " + std::to_string(f.row) + " (value " +
                     std::to_string(f.value) + ")");
  }
}

/// Entrywise domination P >= G (up to tol_entry). On a discrete space this is
/// equivalent to P(x, B) >= G(x, B) for every subset B.
inline bool dominates(const SparseKernel& p, const SparseKernel& g,
                      double tol_entry = tol::entry) {
  if (p.rows() != g.rows() || p.cols() != g.cols())
    fail(ErrorCode::DimensionMismatch, "dominates: shapes differ");
  for (Index r = 0; r < g.rows(); ++r) {
    auto pr = p.row(r);
    auto it = pr.begin();
    for (const auto& e : g.row(r)) {
      while (it != pr.end() && it->col < e.col) ++it;
      const double pv = (it != pr.end() && it->col == e.col) ? it->value : 0.0;
      if (pv < e.value - tol_entry) return false;
    }
  }
  return true;
}

/// Mass deficit 1 - G(x, S) per row.
/// 1 - G1, or the attached leak when there is one.
inline std::vector<double> deficiency(const SparseKernel& g) {
  if (g.has_leak()) return g.leak();
  std::vector<double> d(g.rows());
  for (Index r = 0; r < g.rows(); ++r) d[r] = 1.0 - g.row_sum(r);
  return d;
}

/// Submatrix on (rows x cols) in the order given. Both index sets must be
/// sorted and within range.
inline SparseKernel restrict_to(const SparseKernel& k, const IndexSet& rows,
                                const IndexSet& cols) {
  auto check = [](const IndexSet& set, std::size_t bound, const char* what) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set[i] >= bound)
        fail(ErrorCode::IndexOutOfRange,
             std::string(what) + " index " + std::to_string(set[i]) +
                 " out of range " + std::to_string(bound));
      if (i > 0 && set[i] <= set[i - 1])
        fail(ErrorCode::IndexOutOfRange,
             std::string(what) + " index set not strictly increasing");
    }
  };
  check(rows, k.rows(), "row");
  check(cols, k.cols(), "column");

  constexpr Index absent = static_cast<Index>(-1);
  std::vector<Index> col_map(k.cols(), absent);
  for (Index j = 0; j < cols.size(); ++j) col_map[cols[j]] = j;

  const bool leaky = k.has_leak() && rows == cols;
  std::vector<double> leak(leaky ? rows.size() : 0);
  std::vector<SparseKernel::Row> out(rows.size());
  for (Index i = 0; i < rows.size(); ++i) {
    if (leaky) leak[i] = k.leak()[rows[i]];
    for (const auto& e : k.row(rows[i])) {
      if (col_map[e.col] != absent)
        out[i].push_back({col_map[e.col], e.value});
      else if (leaky)
        leak[i] += e.value;
    }
  }
  SparseKernel r(rows.size(), cols.size(), std::move(out), KernelKind::Substochastic);
  return leaky ? r.with_leak(std::move(leak)) : r;
}

/// Complement of a sorted index set in [0, n).
inline IndexSet complement(const IndexSet& set, std::size_t n) {
  IndexSet out;
  out.reserve(n - std::min(n, set.size()));
  std::size_t k = 0;
  for (Index i = 0; i < n; ++i) {
    if (k < set.size() && set[k] == i)
      ++k;
    else
      out.push_back(i);
  }
  return out;
}

}  // namespace truncbound
