#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace persuade {

/// Beliefs closer than this to a cut are treated as lying on it.
inline constexpr double kCutTolerance = 1e-12;

struct MarkovRates {
  double lambda0 = 1.0;  ///< intensity of 0 -> 1
  double lambda1 = 1.0;  ///< intensity of 1 -> 0

  double total() const noexcept { return lambda0 + lambda1; }
  double stationary() const noexcept { return lambda0 / (lambda0 + lambda1); }
  friend bool operator==(const MarkovRates&, const MarkovRates&) = default;
};

struct Discounting {
  double r = 1.0;
  friend bool operator==(const Discounting&, const Discounting&) = default;
};

class ProblemSpec;
ProblemSpec validate_problem(MarkovRates rates, Discounting discount, std::vector<double> raw_cuts,
                             std::vector<double> raw_levels);

/// Increasing step payoff u with a strictly concave envelope through its
/// jump points. Cuts are stored in ascending order; `pivot_index()` is the
/// cut p_0 with p* in [p_0, p_1). Offsets relative to the pivot follow the
/// -m..m' labelling.
class StepPayoff {
 public:
  StepPayoff() = default;

  std::span<const double> cuts() const noexcept { return cuts_; }
  std::span<const double> levels() const noexcept { return levels_; }
  std::size_t pivot_index() const noexcept { return pivot_; }

  /// Number of continuity intervals below the pivot (m).
  int below_count() const noexcept { return static_cast<int>(pivot_); }
  /// Number of continuity intervals from the pivot upward (m').
  int above_count() const noexcept { return static_cast<int>(levels_.size() - pivot_); }

  /// p_i for i in [-m, m'].
  double cut_at(int offset) const;
  /// h_i for i in [-m, m'-1].
  double level_at(int offset) const;

  double min_level() const noexcept { return levels_.front(); }
  double max_level() const noexcept { return levels_.back(); }

  /// Index k of the continuity interval [cuts[k], cuts[k+1]) holding p;
  /// p = 1 maps to the last interval.
  std::size_t interval_of(double p) const;

  /// u(p) with the closed-left / open-right convention, closed at 1.
  double operator()(double p) const;

  friend bool operator==(const StepPayoff&, const StepPayoff&) = default;

 private:
  friend ProblemSpec validate_problem(MarkovRates, Discounting, std::vector<double>,
                                      std::vector<double>);

  std::vector<double> cuts_;
  std::vector<double> levels_;
  std::size_t pivot_ = 0;
};

/// A validated instance of the persuasion game.
class ProblemSpec {
 public:
  const MarkovRates& rates() const noexcept { return rates_; }
  const Discounting& discount() const noexcept { return discount_; }
  const StepPayoff& payoff() const noexcept { return payoff_; }

  /// Stationary belief; snapped onto p_0 when within kCutTolerance of it.
  double p_star() const noexcept { return p_star_; }
  /// r / (lambda0 + lambda1).
  double mu() const noexcept { return mu_; }
  /// True in the p* = p_0 regime.
  bool stationary_on_cut() const noexcept { return on_cut_; }

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;

 private:
  friend ProblemSpec validate_problem(MarkovRates, Discounting, std::vector<double>,
                                      std::vector<double>);
  MarkovRates rates_;
  Discounting discount_;
  StepPayoff payoff_;
  double p_star_ = 0.5;
  double mu_ = 1.0;
  bool on_cut_ = false;
};

/// Checks rates, support, monotonicity and the envelope condition, then
/// locates the pivot. Throws Error on the first violation.
ProblemSpec validate_problem(MarkovRates rates, Discounting discount, std::vector<double> raw_cuts,
                             std::vector<double> raw_levels);

/// Same instance with a different step payoff (re-validated).
ProblemSpec with_levels(const ProblemSpec& spec, std::vector<double> levels);

double u_eval(const StepPayoff& payoff, double p);

/// Piecewise-linear function through sorted knots, constant beyond them.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> xs, std::vector<double> ys);

  double operator()(double x) const;
  std::span<const double> knots() const noexcept { return xs_; }
  std::span<const double> values() const noexcept { return ys_; }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// Upper concave envelope of u: the polyline through (p_i, h_i), flat on the
/// top interval.
PiecewiseLinear cav_u(const StepPayoff& payoff);

/// Continuous approximation of u from above: linear ramps of width delta
/// ending at every interior cut.
class DeltaApprox {
 public:
  DeltaApprox(double delta, StepPayoff base);

  double delta() const noexcept { return delta_; }
  const StepPayoff& base() const noexcept { return base_; }
  double operator()(double p) const;

 private:
  double delta_;
  StepPayoff base_;
};

double build_u_delta(const DeltaApprox& approx, double p);

using BeliefFunction = std::function<double(double)>;

/// mu * (payoff(p) - value(p)) / (p - p*). At extreme points of the value's
/// hypograph this equals the value's derivative.
double g_eval(const ProblemSpec& spec, const BeliefFunction& value_fn,
              const BeliefFunction& payoff_fn, double p);

}  // namespace persuade
