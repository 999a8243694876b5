#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "persuade/model.hpp"
#include "persuade/policy.hpp"

namespace persuade {

/// intercept + slope * p
struct LinearPiece {
  double intercept;
  double slope;
  friend bool operator==(const LinearPiece&, const LinearPiece&) = default;
};

/// level + coeff * (p - center)^exponent; the closed-form value along a
/// slide toward `center` while the payoff stays at `level`.
struct SlideArc {
  double level;
  double coeff;
  double center;
  double exponent;
  friend bool operator==(const SlideArc&, const SlideArc&) = default;
};

struct ValueSegment {
  double lo;
  double hi;
  std::variant<LinearPiece, SlideArc> shape;

  static ValueSegment linear_through(double lo, double hi, double v_lo, double v_hi);

  double value(double p) const;
  double slope(double p) const;
  bool is_linear() const noexcept { return std::holds_alternative<LinearPiece>(shape); }

  friend bool operator==(const ValueSegment&, const ValueSegment&) = default;
};

enum class Side { Left, Right };

/// Value function stored as consecutive segments covering [0,1].
class PiecewiseValue {
 public:
  PiecewiseValue() = default;
  /// Throws BadSupport unless the segments tile [0,1] in order.
  explicit PiecewiseValue(std::vector<ValueSegment> segments);

  std::span<const ValueSegment> segments() const noexcept { return segments_; }

  double value(double p) const;
  /// One-sided derivative; Left is undefined at 0 and Right at 1.
  double derivative(double p, Side side) const;

  friend bool operator==(const PiecewiseValue&, const PiecewiseValue&) = default;

 private:
  std::size_t segment_index(double p, Side side) const;
  std::vector<ValueSegment> segments_;
};

struct CenterSolution {
  ValueSegment segment;
  std::vector<PolicyRegion> regions;
  double value_at_p0;
  double value_at_p1;
};

/// Central continuity interval [p_0, p_1] (or [p_0, 1] when nothing lies
/// above it).
CenterSolution solve_center(const ProblemSpec& spec);

struct BelowSolution {
  std::vector<ValueSegment> segments;  ///< ascending
  std::vector<PolicyRegion> regions;   ///< ascending
};

/// Intervals left of p_0, split between consecutive cuts.
BelowSolution solve_below(const ProblemSpec& spec, double v_at_p0);

struct IntervalSolution {
  std::vector<ValueSegment> segments;
  std::vector<PolicyRegion> regions;
  std::optional<double> cutoff;
  double value_at_next;  ///< value at p_{j+1} (at 1 for the top interval)
};

/// Smooth-pasting residual on interval j for a candidate cutoff q.
double smooth_pasting_residual(const ProblemSpec& spec, int j, double v_at_pj, double q);

/// Interval [p_j, p_{j+1}] for j >= 1: slide arc, then (except on the top
/// interval) a split segment pasted smoothly at the cutoff.
IntervalSolution solve_above_interval(const ProblemSpec& spec, int j, double v_at_pj);

struct Solution {
  PiecewiseValue value;
  MarkovPolicy policy;
};

Solution solve(const ProblemSpec& spec);

// ---------------------------------------------------------------------------
// verification

enum class Condition {
  G1,
  G2,
  G3,
  Continuity,
  Concavity,
  Monotonicity,
  StrictBelowLevel,
};

std::string_view to_string(Condition c) noexcept;

struct Violation {
  Condition condition;
  double belief;
  double magnitude;
  std::string detail;
};

struct VerifyOptions {
  std::size_t grid_points = 10000;
  double g2_tol = 1e-8;
  double g3_tol = 1e-8;
  double concavity_tol = 1e-8;
  double monotone_tol = 1e-10;
  double continuity_tol = 1e-10;
};

struct VerificationReport {
  std::vector<Violation> violations;
  std::size_t points_checked = 0;
  bool ok() const noexcept { return violations.empty(); }
};

/// Checks the characterization conditions, concavity, monotonicity and
/// v(p_j) < h_j on a dense grid plus every segment junction. Never throws
/// for a well-formed value; problems are reported as violations.
VerificationReport verify_solution(const ProblemSpec& spec, const PiecewiseValue& v,
                                   const VerifyOptions& options = {});

}  // namespace persuade
