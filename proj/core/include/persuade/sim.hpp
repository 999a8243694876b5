#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "persuade/model.hpp"
#include "persuade/policy.hpp"

namespace persuade {

struct SimConfig {
  double delta = 0.01;
  std::size_t horizon = 3000;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 0;
  double initial_belief = 0.5;
  std::size_t calibration_bins = 32;
  /// HorizonTooShort when the discounted tail bound exceeds this.
  double tail_cap = std::numeric_limits<double>::infinity();
  /// Worker threads; 0 means PERSUADE_THREADS or hardware concurrency.
  unsigned threads = 0;
  /// Paths recorded period by period in SimResult::trace.
  std::size_t trace_paths = 0;
};

/// Default period length 0.01 / (lambda0 + lambda1 + r).
double default_delta(const ProblemSpec& spec);

struct CalibrationBin {
  double lo;
  double hi;
  std::uint64_t count = 0;
  std::uint64_t state_one = 0;

  double center() const { return 0.5 * (lo + hi); }
  double frequency() const;
  /// Binomial standard error of the frequency under state-1 probability = center.
  double std_error() const;
  /// |frequency - center| <= 3 SE + half-width. Bins with fewer than
  /// `min_count` samples pass vacuously.
  bool passes(std::uint64_t min_count = 1000) const;
};

struct TraceRow {
  std::size_t path;
  std::size_t period;
  int state;
  double belief;
  int message;  ///< -1 no message, 0 low, 1 high
  double payoff;
};

struct SimResult {
  double mean_discounted_payoff = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  double tail_bound = 0.0;
  std::vector<CalibrationBin> calibration;
  /// Largest |mixture of posteriors - pre-message belief| over signal draws.
  double martingale_identity_error = 0.0;
  /// Mean and standard error of (posterior - pre-message belief) over all messages.
  double martingale_gap_mean = 0.0;
  double martingale_gap_se = 0.0;
  std::uint64_t messages = 0;
  SimConfig config;
  std::vector<TraceRow> trace;

  bool calibrated(std::uint64_t min_count = 1000) const;
};

std::size_t resolve_threads(unsigned requested);

SimResult simulate(const ProblemSpec& spec, const MarkovPolicy& policy, const SimConfig& cfg);

struct NamedPolicy {
  std::string name;
  MarkovPolicy policy;
};

struct ComparisonOptions {
  double grid_gap = 1e-3;
  double tol = 1e-6;
  std::size_t max_iter = 10'000'000;
  /// Slack for discretization when flagging a mean above the optimum.
  double allowance = 0.01;
};

struct ComparisonRow {
  std::string policy;
  double belief;
  double sim_mean;
  double sim_se;
  double dp_value;
  double solver_value;
  bool flagged;
};

std::vector<ComparisonRow> compare_policies(const ProblemSpec& spec,
                                            const std::vector<NamedPolicy>& policies,
                                            const SimConfig& cfg,
                                            const std::vector<double>& eval_points,
                                            const ComparisonOptions& options = {});

}  // namespace persuade
