#include <algorithm>
#include <cmath>
#include <sstream>

#include "persuade/error.hpp"
#include "persuade/solver.hpp"

namespace persuade {

std::string_view to_string(Condition c) noexcept {
  switch (c) {
    case Condition::G1: return "G1";
    case Condition::G2: return "G2";
    case Condition::G3: return "G3";
    case Condition::Continuity: return "Continuity";
    case Condition::Concavity: return "Concavity";
    case Condition::Monotonicity: return "Monotonicity";
    case Condition::StrictBelowLevel: return "StrictBelowLevel";
  }
  return "Unknown";
}

namespace {

constexpr double kCollinear = 1e-9;

class Checker {
 public:
  Checker(const ProblemSpec& spec, const PiecewiseValue& v, const VerifyOptions& opt)
      : spec_(spec), v_(v), opt_(opt) {}

  VerificationReport run() {
    check_junctions();
    check_grid();
    check_levels();
    return std::move(report_);
  }

 private:
  // right derivative everywhere except at 1
  double slope_at(double p) const { return v_.derivative(p, p < 1.0 ? Side::Right : Side::Left); }

  double characteristic(double p) const {
    return slope_at(p) * (p - spec_.p_star()) + spec_.mu() * (v_.value(p) - spec_.payoff()(p));
  }

  void flag(Condition c, double p, double magnitude, const std::string& detail) {
    report_.violations.push_back({c, p, magnitude, detail});
  }

  bool near_p_star(double p) const { return std::abs(p - spec_.p_star()) <= kCutTolerance; }

  void check_g3(double p, const char* where) {
    if (near_p_star(p)) return;
    const double c = characteristic(p);
    if (std::abs(c) > opt_.g3_tol) {
      std::ostringstream os;
      os << "extreme point at " << where << " has residual " << c;
      flag(Condition::G3, p, std::abs(c), os.str());
    }
  }

  void check_junctions() {
    const auto segs = v_.segments();
    check_g3(0.0, "p=0");
    check_g3(1.0, "p=1");
    for (std::size_t i = 1; i < segs.size(); ++i) {
      const auto& left = segs[i - 1];
      const auto& right = segs[i];
      const double p = right.lo;
      ++report_.points_checked;
      const double gap = std::abs(left.value(p) - right.value(p));
      if (gap > opt_.continuity_tol) {
        std::ostringstream os;
        os << "jump of " << gap << " between segments " << i - 1 << " and " << i;
        flag(Condition::Continuity, p, gap, os.str());
      }
      const double dl = left.slope(p);
      const double dr = right.slope(p);
      if (dr > dl + opt_.concavity_tol) {
        std::ostringstream os;
        os << "convex kink: left slope " << dl << " < right slope " << dr;
        flag(Condition::Concavity, p, dr - dl, os.str());
      }
      const bool affine_through = left.is_linear() && right.is_linear() && gap <= kCollinear &&
                                  std::abs(dl - dr) <= kCollinear;
      if (!affine_through) check_g3(p, "segment junction");
    }
  }

  void check_grid() {
    const std::size_t n = std::max<std::size_t>(opt_.grid_points, 2);
    const double ps = spec_.p_star();
    double prev_slope = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double p = static_cast<double>(k) / static_cast<double>(n - 1);
      ++report_.points_checked;
      const double d = slope_at(p);
      if (d < -opt_.monotone_tol) {
        flag(Condition::Monotonicity, p, -d, "negative slope");
      }
      if (k > 0 && d > prev_slope + opt_.concavity_tol) {
        flag(Condition::Concavity, p, d - prev_slope, "slope increases between grid points");
      }
      prev_slope = d;

      if (near_p_star(p)) continue;
      const double c = characteristic(p);
      if (c < -opt_.g2_tol) {
        std::ostringstream os;
        os << "v'(p)(p-p*) + mu(v-u) = " << c;
        flag(Condition::G2, p, -c, os.str());
      }
      // points on a slide arc are extreme points of the hypograph
      const auto segs = v_.segments();
      const auto it = std::find_if(segs.begin(), segs.end(),
                                   [p](const ValueSegment& s) { return p >= s.lo && p <= s.hi; });
      if (it != segs.end() && !it->is_linear() && p < 1.0) check_g3(p, "slide arc");
    }

    const double at_star = v_.value(ps);
    const double u_star = spec_.payoff()(ps);
    if (at_star < u_star - opt_.g2_tol) {
      flag(Condition::G1, ps, u_star - at_star, "value below payoff at p*");
    } else if (is_extreme(ps) && std::abs(at_star - u_star) > opt_.g3_tol) {
      flag(Condition::G1, ps, at_star - u_star, "p* is an extreme point but v(p*) != u(p*)");
    }
  }

  bool is_extreme(double p) const {
    if (p <= 0.0 || p >= 1.0) return true;
    for (const auto& s : v_.segments()) {
      if (p > s.lo && p < s.hi) return !s.is_linear();
    }
    for (std::size_t i = 1; i < v_.segments().size(); ++i) {
      const auto& left = v_.segments()[i - 1];
      const auto& right = v_.segments()[i];
      if (right.lo == p) {
        return !(left.is_linear() && right.is_linear() &&
                 std::abs(left.slope(p) - right.slope(p)) <= kCollinear);
      }
    }
    return false;
  }

  void check_levels() {
    const auto& u = spec_.payoff();
    for (int j = 1; j < u.above_count(); ++j) {
      const double p = u.cut_at(j);
      const double gap = u.level_at(j) - v_.value(p);
      ++report_.points_checked;
      if (!(gap > 0.0)) {
        std::ostringstream os;
        os << "v(p_" << j << ") = " << v_.value(p) << " is not below h_" << j << " = "
           << u.level_at(j);
        flag(Condition::StrictBelowLevel, p, -gap, os.str());
      }
    }
  }

  const ProblemSpec& spec_;
  const PiecewiseValue& v_;
  const VerifyOptions& opt_;
  VerificationReport report_;
};

}  // namespace

VerificationReport verify_solution(const ProblemSpec& spec, const PiecewiseValue& v,
                                   const VerifyOptions& options) {
  return Checker(spec, v, options).run();
}

}  // namespace persuade
