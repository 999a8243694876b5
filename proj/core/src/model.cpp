#include "persuade/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "persuade/error.hpp"

namespace persuade {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::BadRates: return "BadRates";
    case ErrorKind::BadSupport: return "BadSupport";
    case ErrorKind::NonMonotoneLevels: return "NonMonotoneLevels";
    case ErrorKind::EnvelopeViolation: return "EnvelopeViolation";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DeltaTooLarge: return "DeltaTooLarge";
    case ErrorKind::AtStationaryBelief: return "AtStationaryBelief";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::PriorOutsideBracket: return "PriorOutsideBracket";
    case ErrorKind::DegenerateBracket: return "DegenerateBracket";
    case ErrorKind::WrongSideOfStationary: return "WrongSideOfStationary";
    case ErrorKind::Unreachable: return "Unreachable";
    case ErrorKind::BracketDoesNotStraddle: return "BracketDoesNotStraddle";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::MultiRoot: return "MultiRoot";
    case ErrorKind::BadBoundary: return "BadBoundary";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::PolicyGap: return "PolicyGap";
    case ErrorKind::BracketViolation: return "BracketViolation";
    case ErrorKind::HorizonTooShort: return "HorizonTooShort";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

namespace {

void require_belief(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << what << " belief " << p << " outside [0,1]";
    throw Error(ErrorKind::OutOfRange, os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// StepPayoff

double StepPayoff::cut_at(int offset) const {
  const long idx = static_cast<long>(pivot_) + offset;
  if (idx < 0 || idx >= static_cast<long>(cuts_.size())) {
    throw Error(ErrorKind::OutOfRange, "cut offset " + std::to_string(offset));
  }
  return cuts_[static_cast<std::size_t>(idx)];
}

double StepPayoff::level_at(int offset) const {
  const long idx = static_cast<long>(pivot_) + offset;
  if (idx < 0 || idx >= static_cast<long>(levels_.size())) {
    throw Error(ErrorKind::OutOfRange, "level offset " + std::to_string(offset));
  }
  return levels_[static_cast<std::size_t>(idx)];
}

std::size_t StepPayoff::interval_of(double p) const {
  const auto it = std::upper_bound(cuts_.begin(), cuts_.end(), p);
  const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cuts_.begin() - 1, 0));
  return std::min(k, levels_.size() - 1);
}

double StepPayoff::operator()(double p) const { return levels_[interval_of(p)]; }

double u_eval(const StepPayoff& payoff, double p) {
  require_belief(p, "payoff");
  return payoff(p);
}

// ---------------------------------------------------------------------------
// validation

ProblemSpec validate_problem(MarkovRates rates, Discounting discount, std::vector<double> cuts,
                             std::vector<double> levels) {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(rates.lambda0) || !positive(rates.lambda1)) {
    throw Error(ErrorKind::BadRates, "transition intensities must be positive and finite");
  }
  if (!positive(discount.r)) {
    throw Error(ErrorKind::BadRates, "discount rate must be positive and finite");
  }

  if (cuts.size() < 2) throw Error(ErrorKind::BadSupport, "need at least the cuts 0 and 1");
  if (cuts.front() != 0.0 || cuts.back() != 1.0) {
    throw Error(ErrorKind::BadSupport, "cuts must start at exactly 0 and end at exactly 1");
  }
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    if (!std::isfinite(cuts[i]) || cuts[i] - cuts[i - 1] <= kCutTolerance) {
      std::ostringstream os;
      os << "cuts not strictly increasing at index " << i << " (" << cuts[i - 1] << ", "
         << cuts[i] << ")";
      throw Error(ErrorKind::BadSupport, os.str());
    }
  }
  if (levels.size() + 1 != cuts.size()) {
    throw Error(ErrorKind::BadSupport, "expected exactly one level per continuity interval");
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!std::isfinite(levels[i])) throw Error(ErrorKind::NonMonotoneLevels, "non-finite level");
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      std::ostringstream os;
      os << "levels not strictly increasing at index " << i;
      throw Error(ErrorKind::NonMonotoneLevels, os.str());
    }
  }
  // Each (p_i, h_i) must sit strictly above the chord of its neighbours.
  for (std::size_t i = 1; i + 1 < levels.size(); ++i) {
    const double t = (cuts[i] - cuts[i - 1]) / (cuts[i + 1] - cuts[i - 1]);
    const double chord = levels[i - 1] + t * (levels[i + 1] - levels[i - 1]);
    if (!(levels[i] - chord > kCutTolerance)) {
      std::ostringstream os;
      os << "triple (" << cuts[i - 1] << ", " << cuts[i] << ", " << cuts[i + 1]
         << "): chord value " << chord << " at " << cuts[i] << " is not below level "
         << levels[i];
      throw Error(ErrorKind::EnvelopeViolation, os.str());
    }
  }

  ProblemSpec spec;
  spec.rates_ = rates;
  spec.discount_ = discount;
  spec.mu_ = discount.r / rates.total();

  double p_star = rates.stationary();
  std::size_t pivot = 0;
  bool on_cut = false;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (std::abs(p_star - cuts[k]) <= kCutTolerance) {
      pivot = k;
      on_cut = true;
      p_star = cuts[k];
      break;
    }
    if (cuts[k] < p_star && p_star < cuts[k + 1]) {
      pivot = k;
      // the next cut may still be within tolerance
      if (k + 1 < levels.size() && std::abs(p_star - cuts[k + 1]) <= kCutTolerance) {
        pivot = k + 1;
        on_cut = true;
        p_star = cuts[k + 1];
      }
      break;
    }
  }
  spec.p_star_ = p_star;
  spec.on_cut_ = on_cut;
  spec.payoff_.cuts_ = std::move(cuts);
  spec.payoff_.levels_ = std::move(levels);
  spec.payoff_.pivot_ = pivot;
  return spec;
}

ProblemSpec with_levels(const ProblemSpec& spec, std::vector<double> levels) {
  const auto cuts = spec.payoff().cuts();
  return validate_problem(spec.rates(), spec.discount(), {cuts.begin(), cuts.end()},
                          std::move(levels));
}

// ---------------------------------------------------------------------------
// envelopes

PiecewiseLinear::PiecewiseLinear(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.empty() || xs_.size() != ys_.size()) {
    throw Error(ErrorKind::BadSupport, "piecewise-linear knots and values must match");
  }
}

double PiecewiseLinear::operator()(double x) const {
  if (x <= xs_.front()) return ys_.front();
  if (x >= xs_.back()) return ys_.back();
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  const auto hi = static_cast<std::size_t>(it - xs_.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
  return ys_[lo] + t * (ys_[hi] - ys_[lo]);
}

PiecewiseLinear cav_u(const StepPayoff& payoff) {
  const auto cuts = payoff.cuts();
  const auto levels = payoff.levels();
  std::vector<double> xs(cuts.begin(), cuts.end() - 1);
  std::vector<double> ys(levels.begin(), levels.end());
  xs.push_back(1.0);
  ys.push_back(levels.back());
  return {std::move(xs), std::move(ys)};
}

DeltaApprox::DeltaApprox(double delta, StepPayoff base) : delta_(delta), base_(std::move(base)) {
  const auto cuts = base_.cuts();
  double min_gap = 1.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) min_gap = std::min(min_gap, cuts[i] - cuts[i - 1]);
  if (!(delta_ > 0.0) || !(delta_ < min_gap)) {
    std::ostringstream os;
    os << "ramp width " << delta_ << " must lie in (0, " << min_gap << ")";
    throw Error(ErrorKind::DeltaTooLarge, os.str());
  }
}

double DeltaApprox::operator()(double p) const {
  const auto cuts = base_.cuts();
  const auto levels = base_.levels();
  const std::size_t k = base_.interval_of(p);
  if (k + 1 == levels.size()) return levels[k];
  const double ramp_start = cuts[k + 1] - delta_;
  if (p < ramp_start) return levels[k];
  return levels[k + 1] + (levels[k + 1] - levels[k]) / delta_ * (p - cuts[k + 1]);
}

double build_u_delta(const DeltaApprox& approx, double p) {
  require_belief(p, "payoff");
  return approx(p);
}

double g_eval(const ProblemSpec& spec, const BeliefFunction& value_fn,
              const BeliefFunction& payoff_fn, double p) {
  require_belief(p, "g");
  const double gap = p - spec.p_star();
  if (std::abs(gap) <= kCutTolerance) {
    throw Error(ErrorKind::AtStationaryBelief, "g is undefined at the stationary belief");
  }
  return spec.mu() * (payoff_fn(p) - value_fn(p)) / gap;
}

}  // namespace persuade
