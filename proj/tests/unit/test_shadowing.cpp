#include "helpers.hpp"

#include "shadow/parallel.hpp"
#include "shadow/shadowing.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace shadow;

namespace {

std::vector<Vec> lorenz_orbit(const System& sys, std::uint64_t seed, double time) {
  const Vec u = test::attractor_state(sys, seed, 50.0);
  return orbit(sys, u, sys.default_parameters(), steps_for(time, sys.dt()) + 1);
}

}  // namespace

TEST_CASE("n-loop on identity dynamics") {
  const std::size_t n = 8;
  const MatrixPropagator prop(std::vector<Mat>(n, Mat::Identity(3, 3)), std::vector<Vec>(n + 1, Vec::Zero(3)));
  const auto seq = n_loop(prop, Case::Tangent, false, Mat::Identity(3, 2));
  for (std::size_t i = 0; i <= n; ++i) {
    CHECK(seq.v[i].norm() == 0.0);
    CHECK(seq.pi[i].norm() == 0.0);
    CHECK((seq.r[i] - Mat::Identity(2, 2)).norm() < 1e-15);
  }
}

TEST_CASE("n-loop on a diagonal map") {
  Mat a = Mat::Zero(3, 3);
  a.diagonal() << 2.0, 0.5, 0.3;
  const std::size_t n = 6;
  const MatrixPropagator prop(std::vector<Mat>(n, a), std::vector<Vec>(n + 1, Vec::Zero(3)));
  const auto seq = n_loop(prop, Case::Tangent, false, Mat(Vec::Unit(3, 0)));
  for (std::size_t i = 1; i <= n; ++i) {
    CHECK(seq.r[i](0, 0) == doctest::Approx(2.0));
    CHECK(std::abs(std::abs(seq.q[i](0, 0)) - 1.0) < 1e-15);
  }
  CHECK(seq.exponents(1.0)(0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("shadowing constraints and recursion on lorenz63") {
  auto sys = test::lorenz();
  const Vec p = sys->default_parameters();
  const auto orb = lorenz_orbit(*sys, 1, 10.0);
  const std::size_t n = orb.size() - 2;
  const Objective z = observable_objective(*sys, 2, p);
  const DerivativeProvider d(*sys);

  for (Case kind : {Case::Tangent, Case::Adjoint}) {
    for (bool center : {false, true}) {
      CAPTURE(to_string(kind));
      CAPTURE(center);
      ShadowingOptions o;
      o.kind = kind;
      o.center = center;
      o.seed = 3;
      const auto sol = shadow_window(*sys, orb, p, 0, {z}, o);
      CHECK(sol.constraint_residual <= 1e-8);
      CHECK(sol.lsq_residual <= 1e-8);
      CHECK(sol.max_v_shadow <= 50.0 * sol.median_v_shadow);
      if (center) continue;
      // v^sh solves the inhomogeneous recursion.
      double worst = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        Vec expect;
        if (kind == Case::Tangent) {
          expect = d.jvp(orb[k - 1], p, sol.v_shadow[k - 1], Vec::Ones(1));
        } else {
          const std::size_t m = n + 2 - k;
          expect = d.vjp(orb[m], p, sol.v_shadow[k - 1]).first + z.gradient(m, orb[m]);
        }
        worst = std::max(worst, (sol.v_shadow[k] - expect).norm() / std::max(1.0, expect.norm()));
      }
      CHECK(worst <= 1e-8);
    }
  }
}

TEST_CASE("direct, automatic-differentiation and matrix n-loops agree") {
  auto sys = test::lorenz();
  const Vec p = sys->default_parameters();
  const auto orb = lorenz_orbit(*sys, 2, 10.0);
  const Objective z = observable_objective(*sys, 2, p);
  for (Case kind : {Case::Tangent, Case::Adjoint}) {
    CAPTURE(to_string(kind));
    ShadowingOptions o;
    o.kind = kind;
    o.seed = 5;
    o.loop = LoopMode::Matrix;
    const Vec ref = shadow_window(*sys, orb, p, 0, {z}, o).sensitivity;
    o.loop = LoopMode::Direct;
    CHECK(test::rel_err(shadow_window(*sys, orb, p, 0, {z}, o).sensitivity, ref) <= 1e-8);
    o.derivatives = DerivativeMode::ADForward;
    CHECK(test::rel_err(shadow_window(*sys, orb, p, 0, {z}, o).sensitivity, ref) <= 1e-8);
    o.derivatives = DerivativeMode::ADReverse;
    CHECK(test::rel_err(shadow_window(*sys, orb, p, 0, {z}, o).sensitivity, ref) <= 1e-8);
  }
}

TEST_CASE("zero objective gradient gives zero sensitivity") {
  auto sys = test::lorenz();
  const Vec p = sys->default_parameters();
  const auto orb = lorenz_orbit(*sys, 3, 5.0);
  Objective flat{"flat", [](std::size_t, const Vec&) { return 3.0; },
                 [](std::size_t, const Vec& u) { return Vec(Vec::Zero(u.size())); }};
  for (Case kind : {Case::Tangent, Case::Adjoint}) {
    ShadowingOptions o;
    o.kind = kind;
    CHECK(shadow_window(*sys, orb, p, 0, {flat}, o).sensitivity.norm() == 0.0);
  }
}

TEST_CASE("contracting linear map has the analytic sensitivity") {
  // u_{n+1} = A u_n + s c with A = diag(0.5, 0.3): <u_0> = s / (1 - 0.5).
  Mat a = Mat::Zero(2, 2);
  a.diagonal() << 0.5, 0.3;
  LinearMapSystem sys(a, Vec::Unit(2, 0));
  const Vec p = Vec::Constant(1, 1.0);
  const auto orb = orbit(sys, Vec::Zero(2), p, 201);
  const Objective u0 = observable_objective(sys, 0, p);
  for (Case kind : {Case::Tangent, Case::Adjoint}) {
    CAPTURE(to_string(kind));
    ShadowingOptions o;
    o.kind = kind;
    o.du = 1;
    o.center = false;
    const auto sol = shadow_window(sys, orb, p, 0, {u0}, o);
    CHECK(sol.sensitivity(0) == doctest::Approx(2.0).epsilon(0.01));
  }
}

TEST_CASE("ensemble driver") {
  auto sys = test::lorenz();
  const Vec p = sys->default_parameters();
  const Vec u = test::attractor_state(*sys, 4, 50.0);

  SUBCASE("one window equals a single solution") {
    SensitivityConfig cfg;
    cfg.samples = 1;
    cfg.window_time = 5.0;
    cfg.parameter = "s";
    cfg.observables = {"z"};
    cfg.shadow.seed = 9;
    const auto run = shadowing_sensitivity(*sys, u, p, cfg);
    ShadowingOptions o = cfg.shadow;
    o.seed = derive_seed(9, 0);
    const auto orb = orbit(*sys, u, p, steps_for(5.0, sys->dt()) + 1);
    const auto sol = shadow_window(*sys, orb, p, 0, {observable_objective(*sys, 2, p)}, o);
    CHECK(run.mean(0) == sol.sensitivity(0));
    CHECK(run.cumulative(0, 0) == sol.sensitivity(0));
  }
  SUBCASE("results do not depend on the worker count") {
    SensitivityConfig cfg;
    cfg.samples = 4;
    cfg.window_time = 3.0;
    cfg.parameter = "s";
    cfg.workers = 1;
    const auto serial = shadowing_sensitivity(*sys, u, p, cfg);
    cfg.workers = 3;
    const auto threaded = shadowing_sensitivity(*sys, u, p, cfg);
    CHECK(serial.samples == threaded.samples);
  }
  SUBCASE("adjoint takes exactly one observable") {
    SensitivityConfig cfg;
    cfg.shadow.kind = Case::Adjoint;
    cfg.observables = {"y", "z"};
    CHECK_THROWS_AS(shadowing_sensitivity(*sys, u, p, cfg), InputError);
  }
}

TEST_CASE("rijke runs cover several observables or parameters at once") {
  auto sys = test::rijke();
  const Vec p = (Vec(2) << 6.9, 0.2).finished();
  const Vec u = spin_up(*sys, models::initial_state(*sys, 1), p, 300.0);
  SensitivityConfig cfg;
  cfg.samples = 1;
  cfg.window_time = 20.0;
  cfg.shadow.du = 3;
  cfg.parameter = "beta";
  cfg.observables = {"J_ac", "J_ray"};
  const auto tan = shadowing_sensitivity(*sys, u, p, cfg);
  CHECK(tan.labels == std::vector<std::string>{"d<J_ac>/dbeta", "d<J_ray>/dbeta"});
  CHECK(tan.mean.allFinite());
  cfg.shadow.kind = Case::Adjoint;
  cfg.observables = {"J_ac"};
  const auto adj = shadowing_sensitivity(*sys, u, p, cfg);
  CHECK(adj.labels == std::vector<std::string>{"d<J_ac>/dbeta", "d<J_ac>/dtau"});
  CHECK(adj.mean.allFinite());

  // Shadowing keeps v^sh bounded where the naive tangent solution explodes.
  // The naive solution starts from zero and grows at roughly lambda_1, so a
  // 1e3 gap over the shadowing solution takes about 60 units.
  const auto orb = orbit(*sys, u, p, steps_for(60.0, sys->dt()) + 1);
  ShadowingOptions o;
  o.du = 3;
  const auto sol = shadow_window(*sys, orb, p, 0, {observable_objective(*sys, 0, p)}, o);
  const DerivativeProvider d(*sys);
  Vec naive = Vec::Zero(30);
  const Vec dp = (Vec(2) << 1.0, 0.0).finished();
  const std::size_t half = orb.size() / 2;
  double naive_half = 0.0;
  for (std::size_t k = 0; k + 2 < orb.size(); ++k) {
    naive = d.jvp(orb[k], p, naive, dp);
    if (k + 1 == half) naive_half = naive.norm();
  }
  CHECK(std::log(naive.norm() / naive_half) / (30.0) > 0.1);
  CHECK(sol.max_v_shadow <= 50.0 * sol.median_v_shadow);
  CHECK(naive.norm() / sol.median_v_shadow > 1e3);
}

TEST_CASE("shadowing gradient against a long-run finite-difference oracle") {
  auto sys = test::lorenz();
  const Vec p = sys->default_parameters();
  const double h = 1.0;
  const double time = 10000.0;
  // Central difference of <z> with batch-means error bars.
  double fd = 0.0;
  double fd_var = 0.0;
  for (double sign : {1.0, -1.0}) {
    Vec ps = p;
    ps(0) += sign * h;
    const Vec u = spin_up(*sys, models::initial_state(*sys, 1), ps, 50.0);
    const auto r = evolve(*sys, u, ps, steps_for(time, sys->dt()), {false, {"z"}, 50});
    fd += sign * r.averages[0].value / (2.0 * h);
    fd_var += std::pow(r.averages[0].standard_error / (2.0 * h), 2);
  }
  SensitivityConfig cfg;
  cfg.samples = 40;
  cfg.window_time = 15.0;
  cfg.parameter = "s";
  cfg.observables = {"z"};
  cfg.shadow.seed = 1;
  const auto run = shadowing_sensitivity(*sys, test::attractor_state(*sys, 2, 50.0), p, cfg);
  const double bar = 3.0 * std::sqrt(fd_var + run.standard_error(0) * run.standard_error(0));
  MESSAGE("shadowing " << run.mean(0) << " +- " << run.standard_error(0) << ", finite difference " << fd << " +- "
                       << std::sqrt(fd_var));
  CHECK(std::abs(run.mean(0) - fd) <= bar);
}
