#include "persuade/dynamics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "persuade/error.hpp"

namespace persuade {

namespace {

constexpr double kSlack = 1e-12;

std::string bracket_text(double a, double b) {
  std::ostringstream os;
  os << "(" << a << ", " << b << ")";
  return os.str();
}

}  // namespace

double drift_continuous(const MarkovRates& rates, double p, double t) {
  const double ps = rates.stationary();
  return ps + (p - ps) * std::exp(-rates.total() * t);
}

SwitchProbabilities switch_probabilities(const MarkovRates& rates, double delta) {
  const double mix = -std::expm1(-rates.total() * delta);
  const double ps = rates.stationary();
  return {ps * mix, (1.0 - ps) * mix};
}

double drift_discrete(const MarkovRates& rates, double p, double delta) {
  const auto sw = switch_probabilities(rates, delta);
  return p * (1.0 - sw.one_to_zero) + (1.0 - p) * sw.zero_to_one;
}

double SplitSignal::posterior_after_high() const {
  const double num = prior * beta1;
  const double den = num + (1.0 - prior) * beta0;
  return den > 0.0 ? num / den : high_target;
}

double SplitSignal::posterior_after_low() const {
  // 1 - beta1 and 1 - beta0 in closed form; subtracting from 1 loses digits
  // when the high message is nearly certain.
  const double gap = high_target - low_target;
  const double num = low_target * (high_target - prior) / gap;
  const double den = num + (1.0 - low_target) * (high_target - prior) / gap;
  return den > 0.0 ? num / den : low_target;
}

SplitSignal make_split_signal(double q, double a, double b) {
  if (!(b > a)) throw Error(ErrorKind::DegenerateBracket, bracket_text(a, b));
  if (q < a || q > b) {
    std::ostringstream os;
    os << "prior " << q << " outside " << bracket_text(a, b);
    throw Error(ErrorKind::PriorOutsideBracket, os.str());
  }
  SplitSignal s{q, a, b, (q - a) / (b - a), 0.0, 0.0};
  // At q = 0 (q = 1) the conditional for the impossible state is irrelevant;
  // pin it so the unconditional probability identity still holds.
  s.beta1 = q > 0.0 ? b * (q - a) / (q * (b - a)) : s.prob_high;
  s.beta0 = q < 1.0 ? (1.0 - b) * (q - a) / ((1.0 - q) * (b - a)) : s.prob_high;
  return s;
}

SplitTiming discounted_time_split(const ProblemSpec& spec, double p_from, double p_to) {
  const double ps = spec.p_star();
  // the drift at p_from has to point at p_to; p_to may lie past p*
  const bool below = p_from < p_to && p_from < ps;
  const bool above = p_from > p_to && p_from > ps;
  if (p_from == p_to) {
    return {p_from, p_to, std::numeric_limits<double>::infinity(), 0.0, 0.0};
  }
  if (!below && !above) {
    throw Error(ErrorKind::WrongSideOfStationary,
                "split " + bracket_text(p_from, p_to) + " does not move toward p*");
  }
  const auto& rates = spec.rates();
  const double gap = p_to - p_from;
  const double intensity = (rates.lambda0 - p_from * rates.total()) / gap;
  const double mu = spec.mu();
  const double y = mu * gap / (ps - p_from + mu * gap);
  return {p_from, p_to, intensity, y, 0.0};
}

SplitTiming discounted_time_slide(const ProblemSpec& spec, double p_from, double p_to) {
  const double ps = spec.p_star();
  if (p_from == p_to) return {p_from, p_to, 0.0, 0.0, 0.0};
  const bool below = p_from < p_to && p_to < ps;
  const bool above = p_from > p_to && p_to > ps;
  if (!below && !above) {
    throw Error(ErrorKind::Unreachable,
                "sliding from " + bracket_text(p_from, p_to) + " never reaches the target");
  }
  const double ratio = (ps - p_to) / (ps - p_from);
  const double tau = -std::log(ratio) / spec.rates().total();
  return {p_from, p_to, 0.0, 1.0 - std::pow(ratio, spec.mu()), tau};
}

double split_value_linear(const ProblemSpec& spec, double p, double p_lo, double p_hi, double u_lo,
                          double u_hi) {
  const double ps = spec.p_star();
  if (!(p_hi > p_lo)) throw Error(ErrorKind::DegenerateBracket, bracket_text(p_lo, p_hi));
  if (ps < p_lo - kSlack || ps > p_hi + kSlack) {
    throw Error(ErrorKind::BracketDoesNotStraddle, bracket_text(p_lo, p_hi));
  }
  if (p < p_lo - kSlack || p > p_hi + kSlack) {
    throw Error(ErrorKind::OutOfRange, "belief outside split bracket " + bracket_text(p_lo, p_hi));
  }
  const double mu = spec.mu();
  const double den = (p_hi - p_lo) * (mu + 1.0);
  return u_lo * (p_hi * (mu + 1.0) - ps) / den + u_hi * (ps - p_lo * (mu + 1.0)) / den +
         p * mu * (u_hi - u_lo) / den;
}

}  // namespace persuade
