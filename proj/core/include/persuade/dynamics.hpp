#pragma once

#include "persuade/model.hpp"

namespace persuade {

/// Belief after `t` time units without information:
/// p* + (p - p*) exp(-(lambda0 + lambda1) t).
double drift_continuous(const MarkovRates& rates, double p, double t);

/// One-period transition probabilities of the state chain sampled every
/// `delta` time units.
struct SwitchProbabilities {
  double zero_to_one;
  double one_to_zero;
};
SwitchProbabilities switch_probabilities(const MarkovRates& rates, double delta);

/// Posterior after one period of length `delta` with no message.
double drift_discrete(const MarkovRates& rates, double p, double delta);

/// Binary Bayes-plausible split of prior q into {low, high}, together with
/// the state-conditional message probabilities that implement it.
struct SplitSignal {
  double prior;
  double low_target;
  double high_target;
  double prob_high;
  double beta1;  ///< P(high | state 1)
  double beta0;  ///< P(high | state 0)

  double posterior_after_high() const;
  double posterior_after_low() const;
};

SplitSignal make_split_signal(double q, double a, double b);

struct SplitTiming {
  double from;
  double to;
  double intensity;  ///< Lambda for repeated splitting; 0 for sliding
  double discounted_time;  ///< Y = 1 - E[exp(-r tau)]
  double slide_duration;   ///< deterministic tau for sliding; 0 for splitting
};

/// Repeatedly splitting between p_from and p_to until the belief sits at p_to.
SplitTiming discounted_time_split(const ProblemSpec& spec, double p_from, double p_to);

/// Letting the belief drift from p_from until it reaches p_to.
SplitTiming discounted_time_slide(const ProblemSpec& spec, double p_from, double p_to);

/// Value at p of splitting forever between p_lo <= p* <= p_hi, collecting
/// u_lo at p_lo and u_hi at p_hi. Linear in p.
double split_value_linear(const ProblemSpec& spec, double p, double p_lo, double p_hi, double u_lo,
                          double u_hi);

}  // namespace persuade
