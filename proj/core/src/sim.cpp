#include "persuade/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <random>
#include <sstream>
#include <thread>

#include "persuade/dynamics.hpp"
#include "persuade/error.hpp"
#include "persuade/oracle.hpp"
#include "persuade/solver.hpp"

namespace persuade {

namespace {

constexpr double kBracketSlack = 1e-12;

// Neumaier compensated sum, fed in a fixed order.
struct Accumulator {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double total() const { return sum + comp; }
};

struct PathOutcome {
  double payoff = 0.0;
  double gap_sum = 0.0;
  double gap_sq = 0.0;
  std::uint64_t messages = 0;
  double identity_error = 0.0;
};

class Uniform {
 public:
  Uniform(std::uint64_t master, std::uint64_t path) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    gen_.seed(seq);
  }
  double operator()() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

struct Worker {
  const ProblemSpec& spec;
  const MarkovPolicy& policy;
  const SimConfig& cfg;
  SwitchProbabilities sw;
  const std::vector<double>& weights;  // (1 - beta) beta^n

  void run(std::size_t path, PathOutcome& out, std::vector<CalibrationBin>& bins,
           std::vector<TraceRow>* trace) const {
    Uniform draw(cfg.seed, path);
    int state = draw() < cfg.initial_belief ? 1 : 0;
    double belief = cfg.initial_belief;
    const std::size_t nbins = bins.size();
    Accumulator payoff;
    for (std::size_t n = 0; n < cfg.horizon; ++n) {
      const double flip = draw();
      if (state == 1) {
        if (flip < sw.one_to_zero) state = 0;
      } else if (flip < sw.zero_to_one) {
        state = 1;
      }
      belief = belief * (1.0 - sw.one_to_zero) + (1.0 - belief) * sw.zero_to_one;

      int message = -1;
      const auto& action = policy.action_at(belief);
      if (const auto* split = std::get_if<Split>(&action)) {
        if (belief < split->low - kBracketSlack || belief > split->high + kBracketSlack) {
          std::ostringstream os;
          os << "belief " << belief << " left split bracket {" << split->low << ", "
             << split->high << "} on path " << path << " at period " << n;
          throw Error(ErrorKind::BracketViolation, os.str());
        }
        const double prior = std::clamp(belief, split->low, split->high);
        const auto sig = make_split_signal(prior, split->low, split->high);
        const double mix = (1.0 - sig.prob_high) * split->low + sig.prob_high * split->high;
        double err = std::abs(mix - prior);
        if (sig.prob_high > 0.0) err = std::max(err, std::abs(sig.posterior_after_high() - split->high));
        if (sig.prob_high < 1.0) err = std::max(err, std::abs(sig.posterior_after_low() - split->low));
        out.identity_error = std::max(out.identity_error, err);

        const double p_high = state == 1 ? sig.beta1 : sig.beta0;
        message = draw() < p_high ? 1 : 0;
        const double post = message == 1 ? split->high : split->low;
        const double gap = post - prior;
        out.gap_sum += gap;
        out.gap_sq += gap * gap;
        ++out.messages;
        belief = post;
      }

      const double gain = weights[n] * spec.payoff()(belief);
      payoff.add(gain);
      auto bin = static_cast<std::size_t>(belief * static_cast<double>(nbins));
      bin = std::min(bin, nbins - 1);
      ++bins[bin].count;
      bins[bin].state_one += static_cast<std::uint64_t>(state);
      if (trace) trace->push_back({path, n, state, belief, message, gain});
    }
    out.payoff = payoff.total();
  }
};

}  // namespace

double default_delta(const ProblemSpec& spec) {
  return 0.01 / (spec.rates().total() + spec.discount().r);
}

double CalibrationBin::frequency() const {
  return count == 0 ? 0.0 : static_cast<double>(state_one) / static_cast<double>(count);
}

double CalibrationBin::std_error() const {
  if (count == 0) return 0.0;
  const double c = center();
  return std::sqrt(c * (1.0 - c) / static_cast<double>(count));
}

bool CalibrationBin::passes(std::uint64_t min_count) const {
  if (count < min_count) return true;
  return std::abs(frequency() - center()) <= 3.0 * std_error() + 0.5 * (hi - lo);
}

bool SimResult::calibrated(std::uint64_t min_count) const {
  return std::all_of(calibration.begin(), calibration.end(),
                     [&](const CalibrationBin& b) { return b.passes(min_count); });
}

std::size_t resolve_threads(unsigned requested) {
  std::size_t n = requested;
  if (n == 0) {
    n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PERSUADE_THREADS")) {
      const long cap = std::strtol(env, nullptr, 10);
      if (cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
    }
  }
  return std::max<std::size_t>(n, 1);
}

SimResult simulate(const ProblemSpec& spec, const MarkovPolicy& policy, const SimConfig& cfg) {
  if (cfg.n_paths < 1) throw Error(ErrorKind::BadConfig, "n_paths must be at least 1");
  if (!(cfg.delta > 0.0) || !std::isfinite(cfg.delta)) {
    throw Error(ErrorKind::BadConfig, "period length must be positive");
  }
  if (!(cfg.initial_belief >= 0.0 && cfg.initial_belief <= 1.0)) {
    throw Error(ErrorKind::OutOfRange, "initial belief must lie in [0,1]");
  }
  if (cfg.calibration_bins < 1) throw Error(ErrorKind::BadConfig, "need at least one calibration bin");

  const double beta = std::exp(-spec.discount().r * cfg.delta);
  const double flow = -std::expm1(-spec.discount().r * cfg.delta);
  const auto& u = spec.payoff();

  SimResult result;
  result.config = cfg;
  result.n_paths = cfg.n_paths;
  result.tail_bound = std::pow(beta, static_cast<double>(cfg.horizon)) *
                      (std::abs(u.min_level()) + std::abs(u.max_level()));
  if (result.tail_bound > cfg.tail_cap) {
    std::ostringstream os;
    os << "tail bound " << result.tail_bound << " exceeds cap " << cfg.tail_cap << " at horizon "
       << cfg.horizon;
    throw Error(ErrorKind::HorizonTooShort, os.str());
  }

  std::vector<double> weights(cfg.horizon);
  double disc = 1.0;
  for (std::size_t n = 0; n < cfg.horizon; ++n) {
    weights[n] = flow * disc;
    disc *= beta;
  }

  const Worker worker{spec, policy, cfg, switch_probabilities(spec.rates(), cfg.delta), weights};
  const std::size_t nbins = cfg.calibration_bins;
  auto empty_bins = [&] {
    std::vector<CalibrationBin> bins(nbins);
    for (std::size_t b = 0; b < nbins; ++b) {
      bins[b].lo = static_cast<double>(b) / static_cast<double>(nbins);
      bins[b].hi = static_cast<double>(b + 1) / static_cast<double>(nbins);
    }
    return bins;
  };

  std::vector<PathOutcome> outcomes(cfg.n_paths);
  const std::size_t traced = std::min(cfg.trace_paths, cfg.n_paths);
  std::vector<std::vector<TraceRow>> traces(traced);
  const std::size_t nthreads = std::min(resolve_threads(cfg.threads), cfg.n_paths);
  std::vector<std::vector<CalibrationBin>> bins(nthreads, empty_bins());
  std::vector<std::exception_ptr> failures(nthreads);

  auto job = [&](std::size_t t) {
    try {
      const std::size_t begin = cfg.n_paths * t / nthreads;
      const std::size_t end = cfg.n_paths * (t + 1) / nthreads;
      for (std::size_t path = begin; path < end; ++path) {
        worker.run(path, outcomes[path], bins[t], path < traced ? &traces[path] : nullptr);
      }
    } catch (...) {
      failures[t] = std::current_exception();
    }
  };
  if (nthreads == 1) {
    job(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(job, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  // Deviations from the first path keep identical paths exactly identical.
  const double anchor = outcomes.front().payoff;
  Accumulator shift;
  for (const auto& o : outcomes) shift.add(o.payoff - anchor);
  const double n = static_cast<double>(cfg.n_paths);
  const double mean_shift = shift.total() / n;
  Accumulator sq;
  for (const auto& o : outcomes) {
    const double d = (o.payoff - anchor) - mean_shift;
    sq.add(d * d);
  }
  result.mean_discounted_payoff = anchor + mean_shift;
  result.std_error = cfg.n_paths > 1 ? std::sqrt(sq.total() / (n - 1.0) / n) : 0.0;

  Accumulator gap;
  Accumulator gap_sq;
  for (const auto& o : outcomes) {
    gap.add(o.gap_sum);
    gap_sq.add(o.gap_sq);
    result.messages += o.messages;
    result.martingale_identity_error = std::max(result.martingale_identity_error, o.identity_error);
  }
  if (result.messages > 0) {
    const double m = static_cast<double>(result.messages);
    result.martingale_gap_mean = gap.total() / m;
    const double var = std::max(0.0, gap_sq.total() / m - result.martingale_gap_mean * result.martingale_gap_mean);
    result.martingale_gap_se = result.messages > 1 ? std::sqrt(var / (m - 1.0)) : 0.0;
  }

  result.calibration = empty_bins();
  for (const auto& per_thread : bins) {
    for (std::size_t b = 0; b < nbins; ++b) {
      result.calibration[b].count += per_thread[b].count;
      result.calibration[b].state_one += per_thread[b].state_one;
    }
  }
  for (auto& t : traces) {
    result.trace.insert(result.trace.end(), t.begin(), t.end());
  }
  return result;
}

std::vector<ComparisonRow> compare_policies(const ProblemSpec& spec,
                                            const std::vector<NamedPolicy>& policies,
                                            const SimConfig& cfg,
                                            const std::vector<double>& eval_points,
                                            const ComparisonOptions& options) {
  std::vector<ComparisonRow> rows;
  if (policies.empty() || eval_points.empty()) return rows;
  const auto solution = solve(spec);
  std::vector<double> extra = eval_points;
  for (const auto& c : solution.policy.cutoffs()) extra.push_back(c.belief);
  const auto grid = make_belief_grid(spec, options.grid_gap, extra);

  for (const auto& named : policies) {
    const auto dp = evaluate_policy_discrete(spec, named.policy, cfg.delta, grid, options.tol,
                                             options.max_iter);
    for (double p : eval_points) {
      SimConfig local = cfg;
      local.initial_belief = p;
      const auto sim = simulate(spec, named.policy, local);
      const double v = solution.value.value(p);
      const bool flagged = sim.mean_discounted_payoff >
                           v + 3.0 * sim.std_error + options.allowance + sim.tail_bound;
      rows.push_back({named.name, p, sim.mean_discounted_payoff, sim.std_error, dp.value_at(p), v,
                      flagged});
    }
  }
  return rows;
}

}  // namespace persuade
