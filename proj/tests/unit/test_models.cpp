#include "helpers.hpp"

#include "shadow/derivatives.hpp"
#include "shadow/models/chebyshev.hpp"

#include <cmath>

using namespace shadow;
using shadow::models::heat_release;

TEST_CASE("lorenz63 vector field at sample points") {
  auto sys = test::lorenz();
  const Vec p = sys->default_parameters();
  CHECK(sys->vector_field(Vec::Zero(3), p).norm() == 0.0);
  const Vec f = sys->vector_field(Vec::Ones(3), p);
  CHECK(f(0) == doctest::Approx(0.0));
  CHECK(f(1) == doctest::Approx(26.0));
  CHECK(f(2) == doctest::Approx(-5.0 / 3.0));
  const double r = std::sqrt(72.0);
  CHECK(sys->vector_field((Vec(3) << r, r, 27.0).finished(), p).norm() < 1e-12);
}

TEST_CASE("king's law branches") {
  CHECK(heat_release(0.0) == 0.0);
  CHECK(heat_release(3.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(heat_release(-1.0) == -1.0);
  // Both branches meet exactly at the band edges u = -0.99 and u = -1.01.
  for (double w : {0.01, -0.01}) {
    const double poly = -1.0 + 1750.0 * w * w - 7.5e6 * w * w * w * w;
    const double root = std::sqrt(std::abs(w)) - 1.0;
    CHECK(poly == doctest::Approx(-0.9).epsilon(1e-14));
    CHECK(root == doctest::Approx(-0.9).epsilon(1e-14));
    CHECK(heat_release(w - 1.0) == doctest::Approx(-0.9).epsilon(1e-14));
  }
  // Continuous slope across each edge.
  for (double edge : {-0.99, -1.01}) {
    const double h = 1e-9;
    CHECK(models::heat_release_derivative(edge - h) ==
          doctest::Approx(models::heat_release_derivative(edge + h)).epsilon(1e-5));
    CHECK(std::abs(heat_release(edge + h) - heat_release(edge - h)) < 1e-6);
  }
}

TEST_CASE("chebyshev differentiation matrix") {
  const auto g2 = models::cheb(2);
  CHECK(g2.points(0) == 1.0);
  CHECK(g2.points(1) == -1.0);
  Mat expect(2, 2);
  expect << 0.5, -0.5, 0.5, -0.5;
  CHECK((g2.diff - expect).norm() < 1e-15);
  for (std::size_t n : {4u, 6u, 11u, 17u}) {
    const auto g = models::cheb(n);
    const auto m = static_cast<Eigen::Index>(n);
    CHECK((g.diff * Vec::Ones(m)).norm() < 1e-12);
    CHECK((g.diff * g.points - Vec::Ones(m)).norm() < 1e-12);
    // Exact on polynomials up to degree n - 1.
    const Vec y3 = g.points.array().cube();
    const Vec dy3 = 3.0 * g.points.array().square();
    CHECK((g.diff * y3 - dy3).norm() < 1e-10);
  }
  CHECK_THROWS_AS(models::cheb(1), InputError);
}

TEST_CASE("rijke damping and energy observables") {
  auto sys = test::rijke();
  const auto* rk = dynamic_cast<const OdeSystem<models::Rijke>*>(sys.get());
  REQUIRE(rk != nullptr);
  CHECK(rk->model().damping(1) == doctest::Approx(0.07).epsilon(1e-12));
  CHECK(rk->model().damping(2) == doctest::Approx(0.254142).epsilon(1e-6));
  CHECK(sys->dim() == 30);

  const Vec p = sys->default_parameters();
  const std::size_t jac = sys->observable_index("J_ac");
  const std::size_t jray = sys->observable_index("J_ray");
  Vec u = Vec::Zero(30);
  CHECK(sys->observe(jac, u, p) == 0.0);
  CHECK(sys->observe(jray, u, p) == 0.0);
  u(0) = 2.0;
  CHECK(sys->observe(jac, u, p) == doctest::Approx(1.0));
  u(0) = 1.0;
  u(10) = 1.0;
  CHECK(sys->observe(jac, u, p) == doctest::Approx(0.5));
  u.setZero();
  u(10) = 1.0;
  CHECK(sys->observe(jray, u, p) == doctest::Approx(0.035));
  u.setZero();
  u(11) = 1.0;
  CHECK(sys->observe(jray, u, p) == doctest::Approx(0.127071).epsilon(1e-6));
}

TEST_CASE("rijke zero state is an equilibrium") {
  auto sys = test::rijke();
  const Vec p = sys->default_parameters();
  const Vec zero = Vec::Zero(30);
  CHECK(sys->vector_field(zero, p).norm() == 0.0);
  CHECK(step(*sys, zero, p).norm() == 0.0);
}

TEST_CASE("rijke rejects invalid delays") {
  auto sys = test::rijke();
  Vec p = sys->default_parameters();
  p(1) = 0.0;
  CHECK_THROWS_AS(sys->validate_parameters(p), ParameterError);
  p(1) = -0.2;
  CHECK_THROWS_AS(sys->validate_parameters(p), ParameterError);
  p(1) = 0.01;  // advection leaves the stability region at dt = 0.01
  CHECK_THROWS_AS(sys->validate_parameters(p), ParameterError);
}

TEST_CASE("advection delays the inflow signal by tau") {
  // Frozen sinusoidal inflow; node y = +1 must carry the inflow delayed by tau.
  const std::size_t nc = 10;
  const auto g = models::cheb(nc + 1);
  const auto m = static_cast<Eigen::Index>(nc);
  const double tau = 0.2;
  const double omega = 2.0 * 3.141592653589793;
  const double dt = 1e-3;
  auto rhs = [&](const Vec& v, double t) -> Vec {
    return -(2.0 / tau) * (g.diff.topLeftCorner(m, m) * v + g.diff.col(m).head(m) * std::sin(omega * t));
  };
  Vec v = Vec::Zero(m);
  double t = 0.0;
  double err = 0.0;
  for (int i = 0; i < 4000; ++i) {
    const Vec k1 = rhs(v, t);
    const Vec k2 = rhs(v + 0.5 * dt * k1, t + 0.5 * dt);
    const Vec k3 = rhs(v + 0.5 * dt * k2, t + 0.5 * dt);
    const Vec k4 = rhs(v + dt * k3, t + dt);
    v += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += dt;
    if (t > 2.0) err = std::max(err, std::abs(v(0) - std::sin(omega * (t - tau))));
  }
  CHECK(err < 1e-3);
}

TEST_CASE("rijke long-run acoustic energy balance") {
  // The mean acoustic source balances the mean damping.
  auto sys = test::rijke();
  const Vec p = sys->default_parameters();
  const Vec u = test::attractor_state(*sys, 3, 500.0);
  EvolveOptions eo;
  eo.store_states = false;
  eo.observables = {"J_ray", "rayleigh_source"};
  const auto r = evolve(*sys, u, p, steps_for(1000.0, sys->dt()), eo);
  const double damping = r.averages[0].value;
  const double source = r.averages[1].value;
  CHECK(std::abs(source - damping) / damping < 0.05);
}

TEST_CASE("rijke step is differentiable in tau") {
  auto sys = test::rijke();
  const Vec p = sys->default_parameters();
  const Vec u = test::attractor_state(*sys, 1, 100.0);
  const DerivativeProvider ad(*sys, DerivativeMode::ADForward);
  const Vec dp = (Vec(2) << 0.0, 1.0).finished();
  const Vec jvp = ad.jvp(u, p, Vec::Zero(30), dp);
  const double h = 1e-5;
  Vec pp = p, pm = p;
  pp(1) += h;
  pm(1) -= h;
  const Vec fd = (step(*sys, u, pp) - step(*sys, u, pm)) / (2.0 * h);
  CHECK(jvp.allFinite());
  CHECK(test::rel_err(jvp, fd) < 1e-3);
}

TEST_CASE("model registry") {
  CHECK_THROWS_AS(models::make_model({"pendulum"}), InputError);
  auto lz = test::lorenz();
  CHECK(lz->dt() == 0.005);
  CHECK(test::rijke()->dt() == 0.01);
  CHECK(lz->parameter_index("s") == 0);
  CHECK_THROWS((void)lz->parameter_index("beta"));
  CHECK_THROWS((void)lz->observable_index("J_ac"));
}
