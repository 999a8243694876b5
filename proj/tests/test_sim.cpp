#include <doctest.h>

#include <cmath>
#include <cstring>

#include "persuade/error.hpp"
#include "persuade/oracle.hpp"
#include "persuade/sim.hpp"
#include "persuade/solver.hpp"
#include "test_support.hpp"

using namespace persuade;
using persuade::testing::canon;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::BadConfig;
}

SimConfig canon_config(double p0, std::size_t paths, std::uint64_t seed = 11) {
  SimConfig c;
  c.delta = 0.01;
  c.horizon = 3000;
  c.n_paths = paths;
  c.seed = seed;
  c.initial_belief = p0;
  return c;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("flat payoff gives the deterministic discounted sum") {
  const auto spec = testing::flat(2.0);
  SimConfig c;
  c.delta = 0.05;
  c.horizon = 400;
  c.n_paths = 64;
  const auto r = simulate(spec, full_disclosure_policy(), c);
  const double beta = std::exp(-spec.discount().r * c.delta);
  CHECK(r.mean_discounted_payoff == doctest::Approx(2.0 * (1 - std::pow(beta, 400.0))).epsilon(1e-13));
  CHECK(r.std_error == 0.0);
  const auto s = simulate(spec, slide_only_policy(), c);
  CHECK(same_bits(s.mean_discounted_payoff, r.mean_discounted_payoff));
}

TEST_CASE("tail bound covers the truncated payoffs") {
  const auto spec = canon();
  auto c = canon_config(0.5, 10);
  c.horizon = 500;
  const auto r = simulate(spec, slide_only_policy(), c);
  const double beta = std::exp(-spec.discount().r * c.delta);
  CHECK(std::pow(beta, 500.0) * (1.0 - 0.0) <= r.tail_bound);
  c.tail_cap = 1e-3;
  CHECK(kind_of([&] { simulate(spec, slide_only_policy(), c); }) == ErrorKind::HorizonTooShort);
}

TEST_CASE("bad configurations") {
  const auto spec = canon();
  auto c = canon_config(0.5, 0);
  CHECK(kind_of([&] { simulate(spec, slide_only_policy(), c); }) == ErrorKind::BadConfig);
  c = canon_config(1.5, 10);
  CHECK(kind_of([&] { simulate(spec, slide_only_policy(), c); }) == ErrorKind::OutOfRange);
  c = canon_config(0.5, 10);
  c.delta = -1;
  CHECK(kind_of([&] { simulate(spec, slide_only_policy(), c); }) == ErrorKind::BadConfig);
}

TEST_CASE("identical configs give bit-identical results across thread counts") {
  const auto spec = canon();
  const auto pol = solve(spec).policy;
  auto c = canon_config(0.62, 500);
  c.horizon = 800;
  c.threads = 1;
  const auto a = simulate(spec, pol, c);
  const auto b = simulate(spec, pol, c);
  c.threads = 3;
  const auto d = simulate(spec, pol, c);
  for (const auto* x : {&b, &d}) {
    CHECK(same_bits(a.mean_discounted_payoff, x->mean_discounted_payoff));
    CHECK(same_bits(a.std_error, x->std_error));
    CHECK(same_bits(a.martingale_gap_mean, x->martingale_gap_mean));
    for (std::size_t i = 0; i < a.calibration.size(); ++i) {
      CHECK(a.calibration[i].count == x->calibration[i].count);
      CHECK(a.calibration[i].state_one == x->calibration[i].state_one);
    }
  }
  c.seed = 12;
  CHECK_FALSE(same_bits(simulate(spec, pol, c).mean_discounted_payoff, a.mean_discounted_payoff));
}

TEST_CASE("calibration bins partition the unit interval") {
  auto c = canon_config(0.3, 20);
  c.horizon = 100;
  c.calibration_bins = 7;
  const auto r = simulate(canon(), myopic_policy(canon()), c);
  REQUIRE(r.calibration.size() == 7);
  CHECK(r.calibration.front().lo == 0.0);
  CHECK(r.calibration.back().hi == 1.0);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < r.calibration.size(); ++i) {
    if (i) CHECK(r.calibration[i].lo == r.calibration[i - 1].hi);
    total += r.calibration[i].count;
  }
  CHECK(total == 20u * 100u);
}

TEST_CASE("optimal policy on canon: mean, calibration, martingale") {
  const auto spec = canon();
  const auto sol = solve(spec);
  const auto r = simulate(spec, sol.policy, canon_config(0.5, 20000));
  CHECK(r.tail_bound <= 1e-13);
  CHECK(std::abs(r.mean_discounted_payoff - 0.875) <= 3 * r.std_error + r.tail_bound);
  CHECK(r.calibrated());
  CHECK(r.martingale_identity_error <= 1e-12);
  CHECK(r.messages > 0);
  CHECK(std::abs(r.martingale_gap_mean) <= 3 * r.martingale_gap_se);
}

TEST_CASE("myopic policy falls short above the center") {
  const auto spec = canon();
  const auto sol = solve(spec);
  const auto r = simulate(spec, myopic_policy(spec), canon_config(0.62, 20000));
  CHECK(r.mean_discounted_payoff < sol.value.value(0.62) - 3 * r.std_error - r.tail_bound);
}

TEST_CASE("simulation agrees with DP policy evaluation") {
  const auto spec = canon();
  const auto sol = solve(spec);
  std::vector<double> extra;
  for (const auto& c : sol.policy.cutoffs()) extra.push_back(c.belief);
  const auto grid = make_belief_grid(spec, 5e-4, extra);
  for (const auto& pol : {sol.policy, myopic_policy(spec), slide_only_policy()}) {
    const auto w = evaluate_policy_discrete(spec, pol, 0.01, grid, 1e-8, 10'000'000);
    for (double p : {0.1, 0.7}) {
      auto c = canon_config(p, 4000, 5);
      c.horizon = 2000;
      const auto r = simulate(spec, pol, c);
      CHECK(std::abs(r.mean_discounted_payoff - w.value_at(p)) <= 3 * r.std_error + r.tail_bound + 1e-3);
    }
  }
}

TEST_CASE("trace rows") {
  auto c = canon_config(0.5, 5);
  c.horizon = 30;
  c.trace_paths = 2;
  const auto r = simulate(canon(), solve(canon()).policy, c);
  REQUIRE(r.trace.size() == 60);
  CHECK(r.trace.front().path == 0);
  CHECK(r.trace.front().period == 0);
  CHECK(r.trace.back().path == 1);
  CHECK(r.trace.back().period == 29);
  for (const auto& row : r.trace) {
    CHECK((row.state == 0 || row.state == 1));
    CHECK((row.message >= -1 && row.message <= 1));
  }
  // the first period at 0.5 always splits
  CHECK(r.trace.front().message != -1);
}

TEST_CASE("policy comparison") {
  const auto spec = canon();
  auto c = canon_config(0.3, 3000, 8);
  c.horizon = 2000;
  CHECK(compare_policies(spec, {}, c, {0.3}).empty());

  ComparisonOptions opt;
  opt.grid_gap = 2e-3;
  const auto star = compare_policies(spec, {{"sigma_star", solve(spec).policy}}, c, {0.3, 0.7});
  REQUIRE(star.size() == 2);
  for (const auto& row : star) CHECK_FALSE(row.flagged);

  const auto both = compare_policies(spec, {{"sigma_star", solve(spec).policy}, {"slide_only", slide_only_policy()}},
                                     c, {0.3}, opt);
  REQUIRE(both.size() == 2);
  const auto& s = both[0];
  const auto& l = both[1];
  CHECK(l.policy == "slide_only");
  CHECK(l.sim_mean < s.sim_mean - 3 * std::hypot(s.sim_se, l.sim_se));
  CHECK(s.solver_value == doctest::Approx(solve(spec).value.value(0.3)));
}

TEST_CASE("thread count honours the environment cap") {
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}
