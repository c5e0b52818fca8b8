#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "truncbound/error.hpp"
#include "truncbound/kernel.hpp"
#include "truncbound/representation.hpp"
#include "truncbound/state_space.hpp"

namespace truncbound {

enum class ModelFamily { BirthDeath, Tandem2d, NcdBlocks, RandomDense };

inline std::string family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::BirthDeath: return "birth_death";
    case ModelFamily::Tandem2d: return "tandem_2d";
    case ModelFamily::NcdBlocks: return "ncd_blocks";
    case ModelFamily::RandomDense: return "random_dense";
  }
  return "unknown";
}

inline ModelFamily parse_family(const std::string& name) {
  if (name == "birth_death") return ModelFamily::BirthDeath;
  if (name == "tandem_2d") return ModelFamily::Tandem2d;
  if (name == "ncd_blocks") return ModelFamily::NcdBlocks;
  if (name == "random_dense") return ModelFamily::RandomDense;
  fail(ErrorCode::InvalidModel, "unknown model family '" + name + "'");
}

/// A parameterized chain over a countable state space.
///
///   birth_death  {p}          states n >= 0; up w.p. p, down (stay at 0) w.p. 1-p
///   tandem_2d    {a, d1, d2}  states (q1, q2) >= 0; arrival to queue 1 w.p. a,
///                             transfer 1 -> 2 w.p. d1, departure from 2 w.p. d2
///   ncd_blocks   {k, b, eps}  k blocks of b states; (1-eps) spread uniformly
///                             inside the block, eps uniformly over other blocks
///   random_dense {n}          dense chain on n states with integer weights
///                             drawn from `seed`
struct ModelSpec {
  ModelFamily family = ModelFamily::BirthDeath;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;

  double param(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end())
      fail(ErrorCode::InvalidModel,
           family_name(family) + " requires parameter '" + key + "'");
    return it->second;
  }

  static ModelSpec birth_death(double p) {
    return {ModelFamily::BirthDeath, {{"p", p}}, 0};
  }
  static ModelSpec tandem_2d(double a, double d1, double d2) {
    return {ModelFamily::Tandem2d, {{"a", a}, {"d1", d1}, {"d2", d2}}, 0};
  }
  static ModelSpec ncd_blocks(int k, int b, double eps) {
    return {ModelFamily::NcdBlocks,
            {{"k", static_cast<double>(k)}, {"b", static_cast<double>(b)},
             {"eps", eps}},
            0};
  }
  static ModelSpec random_dense(int n, std::uint64_t seed) {
    return {ModelFamily::RandomDense, {{"n", static_cast<double>(n)}}, seed};
  }
};

namespace detail {

inline void require_probability(double v, const std::string& what) {
  if (!(v >= 0.0 && v <= 1.0))
    fail(ErrorCode::InvalidModel, what + " = " + std::to_string(v) +
                                      " is not a probability");
}

inline std::int64_t require_count(double v, const std::string& what,
                                  std::int64_t min) {
  if (!(v >= static_cast<double>(min)) || std::floor(v) != v || v > 1e7)
    fail(ErrorCode::InvalidModel,
         what + " must be an integer >= " + std::to_string(min));
  return static_cast<std::int64_t>(v);
}

}  // namespace detail

inline void validate_model(const ModelSpec& m) {
  switch (m.family) {
    case ModelFamily::BirthDeath:
      detail::require_probability(m.param("p"), "p");
      break;
    case ModelFamily::Tandem2d: {
      const double a = m.param("a"), d1 = m.param("d1"), d2 = m.param("d2");
      detail::require_probability(a, "a");
      detail::require_probability(d1, "d1");
      detail::require_probability(d2, "d2");
      if (a + d1 + d2 > 1.0)
        fail(ErrorCode::InvalidModel, "tandem_2d needs a + d1 + d2 <= 1");
      break;
    }
    case ModelFamily::NcdBlocks: {
      detail::require_count(m.param("k"), "k", 2);
      detail::require_count(m.param("b"), "b", 1);
      const double eps = m.param("eps");
      if (!(eps > 0.0 && eps < 1.0))
        fail(ErrorCode::InvalidModel, "ncd_blocks coupling eps must be in (0, 1)");
      break;
    }
    case ModelFamily::RandomDense:
      detail::require_count(m.param("n"), "n", 1);
      break;
  }
}

/// Number of states for finite families, nullopt for countably infinite ones.
inline std::optional<std::size_t> finite_size(const ModelSpec& m) {
  switch (m.family) {
    case ModelFamily::NcdBlocks:
      return static_cast<std::size_t>(m.param("k") * m.param("b"));
    case ModelFamily::RandomDense:
      return static_cast<std::size_t>(m.param("n"));
    default:
      return std::nullopt;
  }
}

inline bool is_valid_state(const ModelSpec& m, const Label& x) {
  if (m.family == ModelFamily::Tandem2d)
    return x.size() == 2 && x[0] >= 0 && x[1] >= 0;
  if (x.size() != 1 || x[0] < 0) return false;
  if (auto n = finite_size(m)) return static_cast<std::size_t>(x[0]) < *n;
  return true;
}

using TransitionRow = std::vector<std::pair<Label, double>>;

/// Row of weights for random_dense: one mt19937_64 stream per (seed, row).
inline std::vector<double> random_dense_row(std::uint64_t seed, std::size_t n,
                                            std::size_t row) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(row)};
  std::mt19937_64 rng(seq);
  std::vector<std::uint64_t> w(n);
  std::uint64_t total = 0;
  for (auto& v : w) {
    v = rng() % 1000 + 1;
    total += v;
  }
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = static_cast<double>(w[j]) / static_cast<double>(total);
  return out;
}

/// One-step transition probabilities out of x, sorted by label, with zero
/// entries omitted.
inline TransitionRow transition_row(const ModelSpec& m, const Label& x) {
  validate_model(m);
  if (!is_valid_state(m, x))
    fail(ErrorCode::InvalidState,
         to_string(x) + " is not a state of " + family_name(m.family));
  std::map<Label, double> row;
  auto add = [&](Label y, double v) {
    if (v != 0.0) row[std::move(y)] += v;
  };
  switch (m.family) {
    case ModelFamily::BirthDeath: {
      const double p = m.param("p");
      add({x[0] == 0 ? 0 : x[0] - 1}, 1.0 - p);
      add({x[0] + 1}, p);
      break;
    }
    case ModelFamily::Tandem2d: {
      const double a = m.param("a"), d1 = m.param("d1"), d2 = m.param("d2");
      double moved = a;
      add({x[0] + 1, x[1]}, a);
      if (x[0] > 0) {
        add({x[0] - 1, x[1] + 1}, d1);
        moved += d1;
      }
      if (x[1] > 0) {
        add({x[0], x[1] - 1}, d2);
        moved += d2;
      }
      add(x, 1.0 - moved);
      break;
    }
    case ModelFamily::NcdBlocks: {
      const auto k = static_cast<std::int64_t>(m.param("k"));
      const auto b = static_cast<std::int64_t>(m.param("b"));
      const double eps = m.param("eps");
      const std::int64_t block = x[0] / b;
      const double inside = (1.0 - eps) / static_cast<double>(b);
      const double across = eps / static_cast<double>((k - 1) * b);
      for (std::int64_t y = 0; y < k * b; ++y)
        add({y}, y / b == block ? inside : across);
      break;
    }
    case ModelFamily::RandomDense: {
      const auto n = static_cast<std::size_t>(m.param("n"));
      const auto w = random_dense_row(m.seed, n, static_cast<std::size_t>(x[0]));
      for (std::size_t y = 0; y < n; ++y)
        add({static_cast<std::int64_t>(y)}, w[y]);
      break;
    }
  }
  return {row.begin(), row.end()};
}

/// Substochastic kernel of within-window transitions. Mass leaving the
/// window is dropped from the rows and summed into the kernel's leak.
inline SparseKernel window_kernel(const ModelSpec& m, const StateSpace& window) {
  std::vector<SparseKernel::Row> rows(window.size());
  std::vector<double> leak(window.size(), 0.0);
  for (Index i = 0; i < window.size(); ++i)
    for (const auto& [y, v] : transition_row(m, window.label(i))) {
      if (auto j = window.find(y))
        rows[i].push_back({*j, v});
      else
        leak[i] += v;
    }
  return SparseKernel(window.size(), std::move(rows), KernelKind::Substochastic)
      .with_leak(std::move(leak));
}

/// States with level < radius (the box [0, radius)^d, clipped to finite
/// families).
inline StateSpace radius_states(const ModelSpec& m, std::int64_t radius) {
  validate_model(m);
  if (radius < 1) fail(ErrorCode::ConfigInvalid, "radius must be >= 1");
  std::vector<Label> labels;
  if (m.family == ModelFamily::Tandem2d) {
    for (std::int64_t i = 0; i < radius; ++i)
      for (std::int64_t j = 0; j < radius; ++j) labels.push_back({i, j});
  } else {
    std::int64_t hi = radius;
    if (auto n = finite_size(m)) hi = std::min<std::int64_t>(hi, static_cast<std::int64_t>(*n));
    for (std::int64_t i = 0; i < hi; ++i) labels.push_back({i});
  }
  return StateSpace(std::move(labels));
}

struct Window {
  StateSpace states;
  SparseKernel kernel;
};

inline Window window(const ModelSpec& m, std::int64_t radius) {
  StateSpace states = radius_states(m, radius);
  SparseKernel kernel = window_kernel(m, states);
  return {std::move(states), std::move(kernel)};
}

/// Union of `states` and their one-step successors.
inline StateSpace expand_one_hop(const ModelSpec& m, const StateSpace& states) {
  std::vector<Label> labels = states.labels();
  std::map<Label, bool> seen;
  for (const auto& l : labels) seen[l] = true;
  for (const auto& l : states.labels())
    for (const auto& [y, v] : transition_row(m, l))
      if (!seen[y]) {
        seen[y] = true;
        labels.push_back(y);
      }
  return StateSpace(std::move(labels));
}

/// Detailed-balance solution pi(n) proportional to (p / (1 - p))^n,
/// renormalized over `support`. Only birth_death has one.
inline Distribution closed_form_stationary(const ModelSpec& m,
                                           const std::vector<Label>& support) {
  validate_model(m);
  if (m.family != ModelFamily::BirthDeath)
    fail(ErrorCode::Unavailable,
         "no closed-form stationary distribution for " + family_name(m.family));
  const double p = m.param("p");
  if (!(p < 1.0 - p))
    fail(ErrorCode::Unstable, "birth_death with p >= 1/2 has no stationary law");
  if (support.empty()) fail(ErrorCode::ZeroMass, "empty support");
  const double ratio = p / (1.0 - p);
  std::vector<double> w;
  w.reserve(support.size());
  double total = 0.0;
  for (const auto& l : support) {
    if (!is_valid_state(m, l))
      fail(ErrorCode::InvalidState, to_string(l) + " is not a birth_death state");
    w.push_back(std::pow(ratio, static_cast<double>(l[0])));
    total += w.back();
  }
  if (!(total > 0.0)) fail(ErrorCode::ZeroMass, "support has zero mass");
  for (double& v : w) v /= total;
  return Distribution(std::move(w));
}

}  // namespace truncbound
