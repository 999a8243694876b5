#include "persuade/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "persuade/dynamics.hpp"
#include "persuade/error.hpp"

namespace persuade {

namespace {

constexpr double kDedup = 1e-14;
constexpr double kBracketSlack = 1e-12;

struct Hull {
  std::vector<double> x;
  std::vector<double> y;

  /// Upper hull of points already sorted by x (monotone chain).
  void build(std::span<const double> xs, std::span<const double> ys) {
    x.clear();
    y.clear();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      while (x.size() >= 2) {
        const std::size_t n = x.size();
        const double cross = (x[n - 1] - x[n - 2]) * (ys[i] - y[n - 2]) -
                             (y[n - 1] - y[n - 2]) * (xs[i] - x[n - 2]);
        if (cross < 0.0) break;
        x.pop_back();
        y.pop_back();
      }
      x.push_back(xs[i]);
      y.push_back(ys[i]);
    }
  }

  /// Index of the edge [x[k], x[k+1]] holding q, advancing from `hint`.
  std::size_t edge(double q, std::size_t hint) const {
    std::size_t k = std::min(hint, x.size() - 2);
    while (k + 2 < x.size() && q > x[k + 1]) ++k;
    while (k > 0 && q < x[k]) --k;
    return k;
  }

  double eval(double q, std::size_t k) const {
    const double t = (q - x[k]) / (x[k + 1] - x[k]);
    return y[k] + t * (y[k + 1] - y[k]);
  }
};

struct Interp {
  std::size_t idx;
  double frac;
};

Interp locate(const std::vector<double>& pts, double p) {
  if (p <= pts.front()) return {0, 0.0};
  if (p >= pts.back()) return {pts.size() - 2, 1.0};
  const auto it = std::upper_bound(pts.begin(), pts.end(), p);
  const auto hi = static_cast<std::size_t>(it - pts.begin());
  const std::size_t lo = hi - 1;
  return {lo, (p - pts[lo]) / (pts[hi] - pts[lo])};
}

void check_grid(const ProblemSpec& spec, const BeliefGrid& grid) {
  const auto& pts = grid.points;
  if (pts.size() < 3 || pts.front() != 0.0 || pts.back() != 1.0) {
    throw Error(ErrorKind::GridTooCoarse, "grid must contain 0 and 1 and at least 3 points");
  }
  const auto cuts = spec.payoff().cuts();
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const auto lo = std::lower_bound(pts.begin(), pts.end(), cuts[k]);
    const auto hi = std::lower_bound(pts.begin(), pts.end(), cuts[k + 1]);
    if (lo == pts.end() || *lo != cuts[k] || hi - lo < 3) {
      std::ostringstream os;
      os << "payoff interval [" << cuts[k] << ", " << cuts[k + 1] << ") holds fewer than 3 points";
      throw Error(ErrorKind::GridTooCoarse, os.str());
    }
  }
}

double discount_factor(const ProblemSpec& spec, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorKind::BadConfig, "period length must be positive");
  }
  return std::exp(-spec.discount().r * delta);
}

}  // namespace

BeliefGrid make_belief_grid(const ProblemSpec& spec, double max_gap, std::span<const double> extra) {
  if (!(max_gap > 0.0)) throw Error(ErrorKind::BadConfig, "grid gap must be positive");
  const auto cuts = spec.payoff().cuts();
  std::vector<double> anchors(cuts.begin(), cuts.end());
  for (std::size_t i = 1; i + 1 < cuts.size(); ++i) anchors.push_back(cuts[i] - kLeftLimitOffset);
  for (double e : extra) {
    if (e > 0.0 && e < 1.0) anchors.push_back(e);
  }
  std::sort(anchors.begin(), anchors.end());
  std::vector<double> uniq;
  for (double a : anchors) {
    if (uniq.empty() || a - uniq.back() > kDedup) {
      uniq.push_back(a);
    } else if (std::find(cuts.begin(), cuts.end(), a) != cuts.end()) {
      uniq.back() = a;  // keep the exact cut
    }
  }

  BeliefGrid grid;
  grid.max_gap = max_gap;
  grid.points.push_back(uniq.front());
  for (std::size_t i = 1; i < uniq.size(); ++i) {
    const double lo = uniq[i - 1];
    const double hi = uniq[i];
    const auto pieces = static_cast<std::size_t>(std::ceil((hi - lo) / max_gap - 1e-9));
    for (std::size_t k = 1; k < pieces; ++k) {
      grid.points.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(pieces));
    }
    grid.points.push_back(hi);
  }
  return grid;
}

double OracleResult::value_at(double p) const {
  const auto loc = locate(grid.points, p);
  return values[loc.idx] + loc.frac * (values[loc.idx + 1] - values[loc.idx]);
}

OracleResult value_iteration(const ProblemSpec& spec, double delta, const BeliefGrid& grid,
                             double tol, std::size_t max_iter) {
  check_grid(spec, grid);
  const double beta = discount_factor(spec, delta);
  const double flow = -std::expm1(-spec.discount().r * delta);
  const auto& pts = grid.points;
  const std::size_t n = pts.size();

  std::vector<double> payoff(n);
  std::vector<double> drifted(n);
  for (std::size_t i = 0; i < n; ++i) {
    payoff[i] = spec.payoff()(pts[i]);
    drifted[i] = std::clamp(drift_discrete(spec.rates(), pts[i], delta), 0.0, 1.0);
  }

  OracleResult out;
  out.grid = grid;
  out.delta = delta;
  out.values.assign(n, spec.payoff().min_level());
  std::vector<double> h(n);
  std::vector<double> next(n);
  Hull hull;
  for (std::size_t it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) h[i] = flow * payoff[i] + beta * out.values[i];
    hull.build(pts, h);
    double res = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      k = hull.edge(drifted[i], k);
      next[i] = hull.eval(drifted[i], k);
      res = std::max(res, std::abs(next[i] - out.values[i]));
    }
    out.values.swap(next);
    out.iterations = it + 1;
    out.residual = res;
    out.residual_history.push_back(res);
    if (res <= tol * flow) {
      out.converged = true;
      break;
    }
  }
  return out;
}

OracleResult evaluate_policy_discrete(const ProblemSpec& spec, const MarkovPolicy& policy,
                                      double delta, const BeliefGrid& grid, double tol,
                                      std::size_t max_iter) {
  check_grid(spec, grid);
  const double beta = discount_factor(spec, delta);
  const double flow = -std::expm1(-spec.discount().r * delta);
  const auto& pts = grid.points;
  const std::size_t n = pts.size();

  // Each grid point moves to at most two posteriors per period.
  struct Branch {
    Interp at;
    double weight;
  };
  std::vector<double> immediate(n, 0.0);
  std::vector<Branch> branches(2 * n, Branch{{0, 0.0}, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::clamp(drift_discrete(spec.rates(), pts[i], delta), 0.0, 1.0);
    const auto& action = policy.action_at(x);
    if (const auto* split = std::get_if<Split>(&action)) {
      if (x < split->low - kBracketSlack || x > split->high + kBracketSlack) {
        std::ostringstream os;
        os << "drifted belief " << x << " left split bracket {" << split->low << ", "
           << split->high << "}";
        throw Error(ErrorKind::BracketViolation, os.str());
      }
      const auto sig = make_split_signal(std::clamp(x, split->low, split->high), split->low,
                                         split->high);
      const double lo_w = 1.0 - sig.prob_high;
      immediate[i] = flow * (lo_w * spec.payoff()(split->low) +
                             sig.prob_high * spec.payoff()(split->high));
      branches[2 * i] = {locate(pts, split->low), lo_w};
      branches[2 * i + 1] = {locate(pts, split->high), sig.prob_high};
    } else {
      immediate[i] = flow * spec.payoff()(x);
      branches[2 * i] = {locate(pts, x), 1.0};
    }
  }

  OracleResult out;
  out.grid = grid;
  out.delta = delta;
  out.values.assign(n, spec.payoff().min_level());
  std::vector<double> next(n);
  auto at = [&](const Interp& loc) {
    const auto& w = out.values;
    return w[loc.idx] + loc.frac * (w[loc.idx + 1] - w[loc.idx]);
  };
  for (std::size_t it = 0; it < max_iter; ++it) {
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& b0 = branches[2 * i];
      const auto& b1 = branches[2 * i + 1];
      double cont = b0.weight * at(b0.at);
      if (b1.weight != 0.0) cont += b1.weight * at(b1.at);
      next[i] = immediate[i] + beta * cont;
      res = std::max(res, std::abs(next[i] - out.values[i]));
    }
    out.values.swap(next);
    out.iterations = it + 1;
    out.residual = res;
    out.residual_history.push_back(res);
    if (res <= tol * flow) {
      out.converged = true;
      break;
    }
  }
  return out;
}

MarkovPolicy myopic_policy(const ProblemSpec& spec) {
  const auto env = cav_u(spec.payoff());
  const auto xs = env.knots();
  const auto ys = env.values();
  std::vector<PolicyRegion> regions;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const bool last = k + 2 == xs.size();
    // cav u exceeds u strictly inside an edge exactly when the edge rises
    const Action action = ys[k + 1] > ys[k] ? Action{Split{xs[k], xs[k + 1]}} : Action{Slide{}};
    regions.push_back(PolicyRegion{xs[k], xs[k + 1], true, last, action});
  }
  // merge neighbouring slide regions
  std::vector<PolicyRegion> merged;
  for (const auto& r : regions) {
    if (!merged.empty() && std::holds_alternative<Slide>(merged.back().action) &&
        std::holds_alternative<Slide>(r.action)) {
      merged.back().hi = r.hi;
      merged.back().hi_closed = r.hi_closed;
    } else {
      merged.push_back(r);
    }
  }
  return MarkovPolicy(std::move(merged));
}

std::vector<DpAction> dp_actions(const ProblemSpec& spec, const OracleResult& result,
                                 double min_span) {
  const double beta = discount_factor(spec, result.delta);
  const double flow = -std::expm1(-spec.discount().r * result.delta);
  const auto& pts = result.grid.points;
  std::vector<double> h(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    h[i] = flow * spec.payoff()(pts[i]) + beta * result.values[i];
  }
  Hull hull;
  hull.build(pts, h);
  std::vector<DpAction> actions(pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double x = std::clamp(drift_discrete(spec.rates(), pts[i], result.delta), 0.0, 1.0);
    k = hull.edge(x, k);
    const double a = hull.x[k];
    const double b = hull.x[k + 1];
    if (x > a && x < b && b - a > min_span) actions[i] = {true, a, b};
  }
  return actions;
}

}  // namespace persuade
