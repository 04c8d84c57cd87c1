#include "helpers.hpp"

#include "shadow/assimilate.hpp"
#include "shadow/experiments.hpp"

#include <cmath>

using namespace shadow;

namespace {

AssimilationProblem lorenz_problem(const System& sys, const Twin& tw, std::size_t k, std::size_t n) {
  AssimilationProblem pr;
  pr.observable = "z";
  pr.observed = tw.observed;
  pr.background = tw.background;
  pr.parameters = sys.default_parameters();
  pr.parameter = "s";
  pr.spinup_steps = k;
  pr.window_steps = n;
  pr.descent_steps = 5;
  pr.shadow.estimate_condition = false;
  return pr;
}

}  // namespace

TEST_CASE("twin generation") {
  auto sys = test::lorenz();
  const Vec p = sys->default_parameters();
  const Vec u = test::attractor_state(*sys, 1, 20.0);
  SUBCASE("zero variance reproduces the reference") {
    const Twin tw = generate_twin(*sys, u, p, 100, "z", 0.0, {}, 3);
    CHECK(tw.background == u);
    CHECK(tw.reference.size() == 101);
    CHECK(tw.observed.size() == 101);
    for (std::size_t i = 0; i <= 100; ++i) CHECK(tw.observed[i] == tw.reference[i](2));
  }
  SUBCASE("mask limits the perturbation") {
    const Twin tw = generate_twin(*sys, u, p, 10, "z", 0.1, {0, 0, 1}, 3);
    CHECK(tw.background(0) == u(0));
    CHECK(tw.background(1) == u(1));
    CHECK(tw.background(2) != u(2));
  }
  SUBCASE("seeded noise is reproducible") {
    const Twin a = generate_twin(*sys, u, p, 10, "z", 0.1, {}, 8);
    const Twin b = generate_twin(*sys, u, p, 10, "z", 0.1, {}, 8);
    CHECK(a.background == b.background);
  }
  CHECK_THROWS_AS(generate_twin(*sys, u, p, 10, "z", -1.0, {}, 1), InputError);
  CHECK_THROWS_AS(generate_twin(*sys, u, p, 10, "z", 0.1, {1, 0}, 1), InputError);
}

TEST_CASE("zero-noise twin is a fixed point of the descent") {
  auto sys = test::lorenz();
  const Vec u = test::attractor_state(*sys, 2, 20.0);
  const std::size_t k = 200, n = 1000;
  const Twin tw = generate_twin(*sys, u, sys->default_parameters(), k + n, "z", 0.0, {}, 1);
  const auto r = assimilate(*sys, lorenz_problem(*sys, tw, k, n));
  REQUIRE(!r.objective.empty());
  CHECK(r.objective.front() < 1e-20);
  CHECK(r.objective.back() <= r.objective.front() + 1e-10);
  CHECK(std::abs(r.parameter - 28.0) <= 1e-8);
  CHECK((r.analysis_state - tw.reference[k]).norm() <= 1e-8);
  CHECK(r.mean_error < 1e-8);
}

TEST_CASE("assimilation is deterministic") {
  auto sys = test::lorenz();
  const Vec u = test::attractor_state(*sys, 3, 20.0);
  const Twin tw = generate_twin(*sys, u, sys->default_parameters(), 600, "z", 0.1, {0, 0, 1}, 5);
  const auto a = assimilate(*sys, lorenz_problem(*sys, tw, 200, 400));
  const auto b = assimilate(*sys, lorenz_problem(*sys, tw, 200, 400));
  CHECK(a.objective == b.objective);
  CHECK(a.analysis_state == b.analysis_state);
  CHECK(a.relative_error.size() == 401);
}

TEST_CASE("relative errors clamp small denominators") {
  const std::vector<double> obs = {1.0, -2.0, 1e-9, 4.0};
  const std::vector<double> pred = {1.5, -2.0, 0.0, 3.0};
  std::vector<bool> clamped;
  const auto e = relative_errors(obs, pred, &clamped);
  CHECK(e[0] == doctest::Approx(0.5));
  CHECK(e[1] == 0.0);
  CHECK(e[3] == doctest::Approx(0.25));
  CHECK(clamped == std::vector<bool>{false, false, true, false});
  // Floor is 0.1 x median |obs| = 0.1 x 1.5.
  CHECK(e[2] == doctest::Approx(1e-9 / 0.15));
}

TEST_CASE("twin suite merges by index") {
  auto sys = test::lorenz();
  TwinSuiteConfig cfg;
  cfg.observable = "z";
  cfg.parameter = "s";
  cfg.experiments = 3;
  cfg.window_time = 1.0;
  cfg.spinup_time = 0.5;
  cfg.mask = {0, 0, 1};
  cfg.descent_steps = 2;
  cfg.runup_time = 10.0;
  cfg.shadow.estimate_condition = false;
  const auto serial = twin_suite(*sys, sys->default_parameters(), cfg, 4);
  cfg.workers = 3;
  const auto threaded = twin_suite(*sys, sys->default_parameters(), cfg, 4);
  REQUIRE(serial.runs.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) CHECK(serial.runs[e].objective == threaded.runs[e].objective);
  CHECK(serial.mean_error == threaded.mean_error);
}
