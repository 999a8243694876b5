#include "persuade/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "persuade/dynamics.hpp"
#include "persuade/error.hpp"

namespace persuade {

namespace {

constexpr double kBracketInset = 1e-10;
constexpr int kMaxBisections = 200;
constexpr int kSignScan = 256;

}  // namespace

// ---------------------------------------------------------------------------
// segments

ValueSegment ValueSegment::linear_through(double lo, double hi, double v_lo, double v_hi) {
  const double slope = (v_hi - v_lo) / (hi - lo);
  return {lo, hi, LinearPiece{v_lo - slope * lo, slope}};
}

double ValueSegment::value(double p) const {
  if (const auto* line = std::get_if<LinearPiece>(&shape)) return line->intercept + line->slope * p;
  const auto& arc = std::get<SlideArc>(shape);
  return arc.level + arc.coeff * std::pow(p - arc.center, arc.exponent);
}

double ValueSegment::slope(double p) const {
  if (const auto* line = std::get_if<LinearPiece>(&shape)) return line->slope;
  const auto& arc = std::get<SlideArc>(shape);
  return arc.coeff * arc.exponent * std::pow(p - arc.center, arc.exponent - 1.0);
}

PiecewiseValue::PiecewiseValue(std::vector<ValueSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty() || segments_.front().lo != 0.0 || segments_.back().hi != 1.0) {
    throw Error(ErrorKind::BadSupport, "value segments must span [0,1]");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (!(segments_[i].lo < segments_[i].hi) ||
        (i > 0 && segments_[i].lo != segments_[i - 1].hi)) {
      std::ostringstream os;
      os << "value segments not contiguous at index " << i;
      throw Error(ErrorKind::BadSupport, os.str());
    }
  }
}

std::size_t PiecewiseValue::segment_index(double p, Side side) const {
  if (!(p >= 0.0 && p <= 1.0) || (side == Side::Left && p == 0.0)) {
    std::ostringstream os;
    os << "belief " << p << " outside the value's domain";
    throw Error(ErrorKind::OutOfRange, os.str());
  }
  const auto it = std::upper_bound(segments_.begin(), segments_.end(), p,
                                   [](double x, const ValueSegment& s) { return x < s.lo; });
  auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - segments_.begin() - 1, 0));
  if (side == Side::Left && p == segments_[idx].lo && idx > 0) --idx;
  return idx;
}

double PiecewiseValue::value(double p) const {
  return segments_[segment_index(p, Side::Right)].value(p);
}

double PiecewiseValue::derivative(double p, Side side) const {
  if (side == Side::Right && p == 1.0) {
    throw Error(ErrorKind::OutOfRange, "no right derivative at belief 1");
  }
  return segments_[segment_index(p, side)].slope(p);
}

// ---------------------------------------------------------------------------
// construction

CenterSolution solve_center(const ProblemSpec& spec) {
  const auto& u = spec.payoff();
  const double p0 = u.cut_at(0);
  const double h0 = u.level_at(0);

  if (u.above_count() == 1) {
    // u is flat at its top level on [p_0, 1] and sliding never leaves it
    return {ValueSegment{p0, 1.0, LinearPiece{h0, 0.0}},
            {PolicyRegion{p0, 1.0, true, true, Slide{}}},
            h0,
            h0};
  }

  const double p1 = u.cut_at(1);
  const double h1 = u.level_at(1);
  const double v0 = spec.stationary_on_cut() ? h0 : split_value_linear(spec, p0, p0, p1, h0, h1);
  const double v1 = split_value_linear(spec, p1, p0, p1, h0, h1);
  CenterSolution out{ValueSegment::linear_through(p0, p1, v0, v1), {}, v0, v1};
  if (spec.stationary_on_cut()) {
    out.regions.push_back(PolicyRegion{p0, p0, true, true, Slide{}});
    out.regions.push_back(PolicyRegion{p0, p1, false, false, Split{p0, p1}});
  } else {
    out.regions.push_back(PolicyRegion{p0, p1, true, false, Split{p0, p1}});
  }
  return out;
}

BelowSolution solve_below(const ProblemSpec& spec, double v_at_p0) {
  const auto& u = spec.payoff();
  const double ps = spec.p_star();
  const double mu = spec.mu();
  BelowSolution out;
  double v_upper = v_at_p0;
  for (int j = 0; j < u.below_count(); ++j) {
    const double upper = u.cut_at(-j);
    const double lower = u.cut_at(-j - 1);
    const double reach = mu * (upper - lower);
    const double den = ps - lower + reach;
    const double v_lower = (reach * u.level_at(-j - 1) + (ps - lower) * v_upper) / den;
    out.segments.push_back(ValueSegment::linear_through(lower, upper, v_lower, v_upper));
    out.regions.push_back(PolicyRegion{lower, upper, true, false, Split{lower, upper}});
    v_upper = v_lower;
  }
  std::reverse(out.segments.begin(), out.segments.end());
  std::reverse(out.regions.begin(), out.regions.end());
  return out;
}

namespace {

SlideArc arc_through(const ProblemSpec& spec, double level, double p, double v_at_p) {
  const double mu = spec.mu();
  const double ps = spec.p_star();
  return {level, (v_at_p - level) * std::pow(p - ps, mu), ps, -mu};
}

struct IntervalFrame {
  double lo;
  double hi;
  double level;
};

IntervalFrame frame_of(const ProblemSpec& spec, int j, double v_at_pj) {
  const auto& u = spec.payoff();
  if (j < 1 || j >= u.above_count()) {
    throw Error(ErrorKind::OutOfRange, "interval index " + std::to_string(j) + " is not above p_1");
  }
  IntervalFrame f{u.cut_at(j), u.cut_at(j + 1), u.level_at(j)};
  if (!(v_at_pj < f.level)) {
    std::ostringstream os;
    os << "value " << v_at_pj << " at p_" << j << " = " << f.lo << " is not below the level "
       << f.level;
    throw Error(ErrorKind::BadBoundary, os.str());
  }
  return f;
}

double residual(const ProblemSpec& spec, const ValueSegment& arc, double next_cut,
                double next_level, double q) {
  const double v = arc.value(q);
  const double s = arc.slope(q);
  return v + s * (next_cut - q) - next_level + s * (next_cut - spec.p_star()) / spec.mu();
}

}  // namespace

double smooth_pasting_residual(const ProblemSpec& spec, int j, double v_at_pj, double q) {
  const auto f = frame_of(spec, j, v_at_pj);
  const auto& u = spec.payoff();
  if (j + 1 >= u.above_count()) {
    throw Error(ErrorKind::OutOfRange, "the top interval has no cutoff");
  }
  const ValueSegment arc{f.lo, f.hi, arc_through(spec, f.level, f.lo, v_at_pj)};
  return residual(spec, arc, f.hi, u.level_at(j + 1), q);
}

IntervalSolution solve_above_interval(const ProblemSpec& spec, int j, double v_at_pj) {
  const auto f = frame_of(spec, j, v_at_pj);
  const auto& u = spec.payoff();
  const SlideArc shape = arc_through(spec, f.level, f.lo, v_at_pj);

  IntervalSolution out;
  if (j + 1 == u.above_count()) {
    const ValueSegment arc{f.lo, 1.0, shape};
    out.segments.push_back(arc);
    out.regions.push_back(PolicyRegion{f.lo, 1.0, true, true, Slide{}});
    out.value_at_next = arc.value(1.0);
    return out;
  }

  const double next_level = u.level_at(j + 1);
  const ValueSegment probe{f.lo, f.hi, shape};
  auto F = [&](double q) { return residual(spec, probe, f.hi, next_level, q); };

  double lo = f.lo + kBracketInset;
  double hi = f.hi - kBracketInset;
  int sign_changes = 0;
  double prev = F(lo);
  for (int k = 1; k <= kSignScan; ++k) {
    const double q = lo + (hi - lo) * k / kSignScan;
    const double cur = F(q);
    if ((prev > 0.0) != (cur > 0.0)) ++sign_changes;
    prev = cur;
  }
  if (sign_changes > 1) {
    std::ostringstream os;
    os << "smooth-pasting residual changes sign " << sign_changes << " times on interval " << j;
    throw Error(ErrorKind::MultiRoot, os.str());
  }
  if (!(F(lo) > 0.0 && F(hi) <= 0.0) || sign_changes == 0) {
    std::ostringstream os;
    os << "smooth-pasting residual has no sign change on interval " << j << " ["
       << f.lo << ", " << f.hi << "]: F(lo)=" << F(lo) << ", F(hi)=" << F(hi);
    throw Error(ErrorKind::NoRoot, os.str());
  }
  // bisect until the bracket no longer splits (well below 1e-12)
  for (int it = 0; it < kMaxBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (F(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double q = 0.5 * (lo + hi);

  const double s = probe.slope(q);
  const double vq = probe.value(q);
  out.segments.push_back(ValueSegment{f.lo, q, shape});
  out.segments.push_back(ValueSegment{q, f.hi, LinearPiece{vq - s * q, s}});
  out.regions.push_back(PolicyRegion{f.lo, q, true, true, Slide{}});
  out.regions.push_back(PolicyRegion{q, f.hi, false, false, Split{q, f.hi}});
  out.cutoff = q;
  out.value_at_next = out.segments.back().value(f.hi);
  return out;
}

Solution solve(const ProblemSpec& spec) {
  const auto& u = spec.payoff();
  auto center = solve_center(spec);
  auto below = solve_below(spec, center.value_at_p0);

  std::vector<ValueSegment> segments = std::move(below.segments);
  std::vector<PolicyRegion> regions = std::move(below.regions);
  std::vector<Cutoff> cutoffs;
  segments.push_back(center.segment);
  regions.insert(regions.end(), center.regions.begin(), center.regions.end());

  double v = center.value_at_p1;
  for (int j = 1; j < u.above_count(); ++j) {
    auto piece = solve_above_interval(spec, j, v);
    segments.insert(segments.end(), piece.segments.begin(), piece.segments.end());
    regions.insert(regions.end(), piece.regions.begin(), piece.regions.end());
    if (piece.cutoff) cutoffs.push_back(Cutoff{*piece.cutoff, j});
    v = piece.value_at_next;
  }
  return {PiecewiseValue(std::move(segments)), MarkovPolicy(std::move(regions), std::move(cutoffs))};
}

}  // namespace persuade
