#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "truncbound/bounds.hpp"
#include "truncbound/censor.hpp"
#include "truncbound/error.hpp"
#include "truncbound/models.hpp"

namespace truncbound {

enum class GrowthPolicy {
  /// A <- A plus every state reachable from A in one transition.
  OneHop,
};

struct AdaptStep {
  std::size_t window_size = 0;
  std::size_t boundary_size = 0;
  TvReport tv;
};

struct AdaptReport {
  std::vector<AdaptStep> trajectory;
  TruncationSpec final_spec;
  bool converged = false;
};

/// Full pipeline for one window: censor, fundamental rows, nu table.
inline NuTable nu_table_for_window(const ModelSpec& m, const TruncationSpec& spec,
                                   CensoredKernel* censored = nullptr) {
  CensoredKernel ck = censor(window_kernel(m, spec.window()), spec);
  NuTable nt = nu_table(fundamental_rows(ck));
  if (censored) *censored = std::move(ck);
  return nt;
}

/// Grows the boundary layer around S until the nu-diameter drops to `eps` or
/// the window would exceed `budget` states. The starting window defaults to
/// S itself. SingularInterior and FundamentalDiverges propagate.
inline AdaptReport adapt_boundary(const ModelSpec& m,
                                  const std::vector<Label>& inner, double eps,
                                  GrowthPolicy policy, std::size_t budget,
                                  std::optional<StateSpace> initial = {}) {
  if (!(eps > 0.0 && eps <= 1.0))
    fail(ErrorCode::ConfigInvalid, "eps must lie in (0, 1]");
  validate_model(m);
  for (const auto& l : inner)
    if (!is_valid_state(m, l))
      fail(ErrorCode::InvalidState, to_string(l) + " is not a model state");
  StateSpace window = initial ? *initial : StateSpace(inner);
  AdaptReport report{{}, TruncationSpec(window, inner), false};
  if (window.size() > budget) return report;

  while (true) {
    TruncationSpec spec(window, inner);
    const TvReport tv = tv_diameter(nu_table_for_window(m, spec));
    report.trajectory.push_back({window.size(), spec.boundary_size(), tv});
    report.final_spec = spec;
    if (tv.diameter <= eps) {
      report.converged = true;
      return report;
    }
    StateSpace next = window;
    switch (policy) {
      case GrowthPolicy::OneHop:
        next = expand_one_hop(m, window);
        break;
    }
    if (next.size() <= window.size() || next.size() > budget) return report;
    window = std::move(next);
  }
}

}  // namespace truncbound
