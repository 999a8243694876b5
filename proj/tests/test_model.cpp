#include <doctest.h>

#include <cmath>
#include <random>

#include "persuade/error.hpp"
#include "persuade/model.hpp"
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

}  // namespace

TEST_CASE("canon validates with the expected pivot") {
  const auto spec = canon();
  CHECK(spec.p_star() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(spec.mu() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(spec.payoff().pivot_index() == 2);
  CHECK(spec.payoff().cut_at(0) == 0.4);
  CHECK(spec.payoff().cut_at(1) == 0.6);
  CHECK(spec.payoff().below_count() == 2);
  CHECK(spec.payoff().above_count() == 3);
  CHECK(spec.payoff().cut_at(-2) == 0.0);
  CHECK(spec.payoff().cut_at(3) == 1.0);
  CHECK(spec.payoff().level_at(-2) == 0.0);
  CHECK(spec.payoff().level_at(2) == 1.0);
  CHECK_FALSE(spec.stationary_on_cut());
}

TEST_CASE("single level payoff is valid") {
  const auto spec = validate_problem({1, 1}, {1}, {0, 1}, {1});
  CHECK(spec.payoff()(0.0) == 1.0);
  CHECK(spec.payoff()(0.37) == 1.0);
  CHECK(spec.payoff()(1.0) == 1.0);
  CHECK(spec.payoff().above_count() == 1);
  CHECK(spec.payoff().below_count() == 0);
}

TEST_CASE("envelope violation names the triple") {
  try {
    validate_problem({1, 1}, {1}, {0, 0.3, 0.6, 1}, {0, 0.1, 1.0});
    FAIL("accepted a payoff below its envelope");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EnvelopeViolation);
    const std::string msg = e.what();
    CHECK(msg.find("0.3") != std::string::npos);
    CHECK(msg.find("0.6") != std::string::npos);
  }
}

TEST_CASE("collinear triple is rejected") {
  CHECK(kind_of([] { validate_problem({1, 1}, {1}, {0, 0.25, 0.5, 1}, {0, 0.25, 0.5}); }) ==
        ErrorKind::EnvelopeViolation);
}

TEST_CASE("validation error kinds") {
  const std::vector<double> cuts{0, 0.5, 1};
  const std::vector<double> lv{0, 1};
  CHECK(kind_of([&] { validate_problem({0, 1}, {1}, cuts, lv); }) == ErrorKind::BadRates);
  CHECK(kind_of([&] { validate_problem({1, -1}, {1}, cuts, lv); }) == ErrorKind::BadRates);
  CHECK(kind_of([&] { validate_problem({1, 1}, {0}, cuts, lv); }) == ErrorKind::BadRates);
  CHECK(kind_of([&] { validate_problem({1, 1}, {1}, {0.1, 0.5, 1}, lv); }) == ErrorKind::BadSupport);
  CHECK(kind_of([&] { validate_problem({1, 1}, {1}, {0, 0.5, 0.9}, lv); }) == ErrorKind::BadSupport);
  CHECK(kind_of([&] { validate_problem({1, 1}, {1}, {0, 0.5, 0.5 + 1e-13, 1}, {0, 1, 1.5}); }) ==
        ErrorKind::BadSupport);
  CHECK(kind_of([&] { validate_problem({1, 1}, {1}, cuts, {0, 1, 2}); }) == ErrorKind::BadSupport);
  CHECK(kind_of([&] { validate_problem({1, 1}, {1}, cuts, {1, 1}); }) == ErrorKind::NonMonotoneLevels);
  CHECK(kind_of([&] { validate_problem({1, 1}, {1}, cuts, {1, 0}); }) == ErrorKind::NonMonotoneLevels);
}

TEST_CASE("stationary belief within 1e-12 of a cut snaps onto it") {
  const auto spec = testing::canon_on_cut();
  CHECK(spec.stationary_on_cut());
  CHECK(spec.p_star() == 0.4);
  CHECK(spec.payoff().cut_at(0) == 0.4);

  // 0.4 + 1e-9 stays interior
  const double l0 = 0.4 + 1e-9;
  const auto off = validate_problem({l0, 1.0 - l0}, {1}, {0, 0.2, 0.4, 0.6, 0.8, 1},
                                    {0, 0.5, 0.8, 0.95, 1});
  CHECK_FALSE(off.stationary_on_cut());
}

TEST_CASE("u uses the closed-left convention and closes at 1") {
  const auto spec = canon();
  const auto& u = spec.payoff();
  CHECK(u(0.4) == 0.8);
  CHECK(u(std::nextafter(0.6, 0.0)) == 0.8);
  CHECK(u(0.6) == 0.95);
  CHECK(u(1.0) == 1.0);
  CHECK(u_eval(u, 0.0) == 0.0);
  CHECK(kind_of([&] { u_eval(u, -0.1); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([&] { u_eval(u, 1.0 + 1e-9); }) == ErrorKind::OutOfRange);
}

TEST_CASE("cav u on canon") {
  const auto env = cav_u(canon().payoff());
  CHECK(env(0.5) == doctest::Approx(0.875).epsilon(1e-15));
  CHECK(env(0.9) == 1.0);
  CHECK(env(0.2) == 0.5);
}

TEST_CASE("ramped approximation") {
  const DeltaApprox a(0.05, canon().payoff());
  CHECK(build_u_delta(a, 0.575) == doctest::Approx(0.875).epsilon(1e-14));
  CHECK(build_u_delta(a, 0.5) == 0.8);
  CHECK(build_u_delta(a, 0.6) == 0.95);
  CHECK(kind_of([] { DeltaApprox(0.2, canon().payoff()); }) == ErrorKind::DeltaTooLarge);
  CHECK(kind_of([] { DeltaApprox(0.0, canon().payoff()); }) == ErrorKind::DeltaTooLarge);
}

TEST_CASE("g is zero when value equals payoff") {
  const auto spec = canon();
  const BeliefFunction u = [&](double p) { return spec.payoff()(p); };
  for (double p : {0.0, 0.1, 0.45, 0.55, 0.8, 1.0}) CHECK(g_eval(spec, u, u, p) == 0.0);
  CHECK(kind_of([&] { g_eval(spec, u, u, 0.5); }) == ErrorKind::AtStationaryBelief);
}

TEST_CASE("g at the corners matches the one-sided slopes of the solved value") {
  const auto spec = canon();
  const auto v = solve(spec).value;
  const BeliefFunction vf = [&](double p) { return v.value(p); };
  const BeliefFunction u = [&](double p) { return spec.payoff()(p); };
  const double h = 1e-6;
  const double fd1 = (v.value(1.0) - v.value(1.0 - h)) / h;
  const double fd0 = (v.value(h) - v.value(0.0)) / h;
  CHECK(g_eval(spec, vf, u, 1.0) == doctest::Approx(v.derivative(1.0, Side::Left)).epsilon(1e-9));
  CHECK(g_eval(spec, vf, u, 1.0) == doctest::Approx(fd1).epsilon(1e-4));
  CHECK(g_eval(spec, vf, u, 0.0) == doctest::Approx(v.derivative(0.0, Side::Right)).epsilon(1e-9));
  CHECK(g_eval(spec, vf, u, 0.0) == doctest::Approx(fd0).epsilon(1e-6));
  // desk values: g(1) = 0.05622669926883379, g(0) = 0.63541666...
  CHECK(g_eval(spec, vf, u, 1.0) == doctest::Approx(0.05622669926883379).epsilon(1e-12));
  CHECK(g_eval(spec, vf, u, 0.0) == doctest::Approx(0.6354166666666667).epsilon(1e-12));
}

TEST_CASE("envelope and ramp properties on random instances") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto spec = testing::random_spec(rng);
    const auto& u = spec.payoff();
    const auto env = cav_u(u);
    for (std::size_t i = 0; i + 1 < u.cuts().size(); ++i) CHECK(env(u.cuts()[i]) == doctest::Approx(u.levels()[i]).epsilon(1e-14));

    double min_gap = 1.0;
    for (std::size_t i = 0; i + 1 < u.cuts().size(); ++i) min_gap = std::min(min_gap, u.cuts()[i + 1] - u.cuts()[i]);
    const DeltaApprox wide(0.9 * min_gap, u);
    const DeltaApprox narrow(0.3 * min_gap, u);
    for (int k = 0; k < 50; ++k) {
      const double p = unit(rng);
      CHECK(u(p) <= env(p) + 1e-12);
      CHECK(u(p) <= narrow(p));
      CHECK(narrow(p) <= wide(p));
      // concavity of the envelope
      const double a = unit(rng);
      const double b = unit(rng);
      const double t = unit(rng);
      const double m = t * a + (1 - t) * b;
      CHECK(env(m) >= t * env(a) + (1 - t) * env(b) - 1e-12);
    }
  }
}

TEST_CASE("revalidating a spec is idempotent") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto spec = testing::random_spec(rng);
    const auto& u = spec.payoff();
    const auto again = validate_problem(spec.rates(), spec.discount(),
                                        {u.cuts().begin(), u.cuts().end()},
                                        {u.levels().begin(), u.levels().end()});
    CHECK(again == spec);
  }
  const auto on_cut = testing::canon_on_cut();
  CHECK(with_levels(on_cut, {0, 0.5, 0.8, 0.95, 1}) == on_cut);
}
