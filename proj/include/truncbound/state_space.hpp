#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "truncbound/error.hpp"

namespace truncbound {

/// A state label: an integer tuple of fixed arity.
using Label = std::vector<std::int64_t>;
using Index = std::size_t;
using IndexSet = std::vector<Index>;

inline std::string to_string(const Label& label) {
  std::string out = "(";
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(label[i]);
  }
  return out + ")";
}

/// Largest coordinate of a label. Windows of "radius r" hold the labels with
/// level < r.
inline std::int64_t level(const Label& label) {
  std::int64_t m = 0;
  for (auto v : label) m = std::max(m, v < 0 ? -v : v);
  return m;
}

/// Ordered set of labels with a dense index. Labels are kept in lexicographic
/// order so that the index assignment depends only on the set of labels.
class StateSpace {
 public:
  StateSpace() = default;

  explicit StateSpace(std::vector<Label> labels) : labels_(std::move(labels)) {
    std::sort(labels_.begin(), labels_.end());
    if (std::adjacent_find(labels_.begin(), labels_.end()) != labels_.end())
      fail(ErrorCode::InvalidState, "duplicate state label");
    if (!labels_.empty()) {
      arity_ = labels_.front().size();
      for (const auto& l : labels_)
        if (l.size() != arity_)
          fail(ErrorCode::InvalidState,
               "label " + to_string(l) + " has arity " +
                   std::to_string(l.size()) + ", expected " +
                   std::to_string(arity_));
    }
    for (Index i = 0; i < labels_.size(); ++i) index_.emplace(labels_[i], i);
  }

  /// Integer labels 0..n-1 of arity one.
  static StateSpace range(std::size_t n) {
    std::vector<Label> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      labels.push_back({static_cast<std::int64_t>(i)});
    return StateSpace(std::move(labels));
  }

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t arity() const noexcept { return arity_; }

  const Label& label(Index i) const { return labels_.at(i); }
  const std::vector<Label>& labels() const noexcept { return labels_; }

  std::optional<Index> find(const Label& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const Label& label) const { return index_.count(label) != 0; }

  Index index_of(const Label& label) const {
    auto it = index_.find(label);
    if (it == index_.end())
      fail(ErrorCode::InvalidState, "unknown state " + to_string(label));
    return it->second;
  }

  /// Sorted indices of `subset` inside this space.
  IndexSet indices_of(std::span<const Label> subset) const {
    IndexSet out;
    out.reserve(subset.size());
    for (const auto& l : subset) out.push_back(index_of(l));
    std::sort(out.begin(), out.end());
    return out;
  }

  bool operator==(const StateSpace& other) const {
    return labels_ == other.labels_;
  }

 private:
  std::vector<Label> labels_;
  std::size_t arity_ = 0;
  std::map<Label, Index> index_;
};

}  // namespace truncbound
