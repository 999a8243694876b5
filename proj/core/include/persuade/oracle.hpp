#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "persuade/model.hpp"
#include "persuade/policy.hpp"

namespace persuade {

/// Offset of the extra sample placed just left of every interior cut, so
/// the step's left limit is represented on the grid.
inline constexpr double kLeftLimitOffset = 1e-12;

struct BeliefGrid {
  std::vector<double> points;  ///< sorted, contains 0, 1 and every cut
  double max_gap = 0.0;
};

/// Uniform fill with spacing <= max_gap between the anchors {0, 1, cuts,
/// cut - kLeftLimitOffset, extra}.
BeliefGrid make_belief_grid(const ProblemSpec& spec, double max_gap,
                            std::span<const double> extra = {});

struct OracleResult {
  BeliefGrid grid;
  std::vector<double> values;
  double delta = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> residual_history;

  /// Linear interpolation of the grid values.
  double value_at(double p) const;
};

/// Discrete-time value v_Delta on the grid. Each period the belief drifts,
/// the sender picks any Bayes-plausible split of the drifted belief over grid
/// posteriors (upper concave envelope), and the payoff accrues at the
/// posterior. Starts from the minimum level; stops once the sup-norm change
/// is <= tol * (1 - exp(-r delta)). `converged` is false on hitting max_iter.
OracleResult value_iteration(const ProblemSpec& spec, double delta, const BeliefGrid& grid,
                             double tol, std::size_t max_iter);

/// Discounted payoff w_Delta(., policy) of a fixed stationary policy on the
/// grid, with the same event order as value_iteration.
OracleResult evaluate_policy_discrete(const ProblemSpec& spec, const MarkovPolicy& policy,
                                      double delta, const BeliefGrid& grid, double tol,
                                      std::size_t max_iter);

/// Maximizes the current period's expected payoff: split onto the supporting
/// edge of cav u wherever cav u > u, slide elsewhere.
MarkovPolicy myopic_policy(const ProblemSpec& spec);

struct DpAction {
  bool split = false;
  double low = 0.0;
  double high = 0.0;
};

/// Greedy action of the value-iteration fixed point at every grid point.
/// A drifted belief strictly inside a hull edge wider than `min_span` is a
/// split onto the edge's endpoints; anything else is a slide.
std::vector<DpAction> dp_actions(const ProblemSpec& spec, const OracleResult& result,
                                 double min_span);

}  // namespace persuade
