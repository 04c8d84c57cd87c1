#include "helpers.hpp"

#include "shadow/derivatives.hpp"
#include "shadow/perturbation.hpp"

#include <cmath>
#include <random>

using namespace shadow;

namespace {

LinearMapSystem diag_map() {
  Mat a = Mat::Zero(2, 2);
  a.diagonal() << 2.0, 0.5;
  return LinearMapSystem(a, Vec::Zero(2));
}

const DerivativeMode kModes[] = {DerivativeMode::Analytic, DerivativeMode::ADForward, DerivativeMode::ADReverse,
                                 DerivativeMode::FD};

}  // namespace

TEST_CASE("jvp examples") {
  auto lz = test::lorenz();
  const Vec p = lz->default_parameters();
  for (auto mode : kModes) {
    CAPTURE(to_string(mode));
    const DerivativeProvider d(*lz, mode);
    CHECK(d.jvp(Vec::Ones(3), p, Vec::Zero(3), Vec::Zero(1)).norm() == 0.0);
    const Vec w = d.jvp(Vec::Ones(3), p, Vec::Unit(3, 0), Vec::Zero(1));
    CHECK(w(0) == doctest::Approx(0.95).epsilon(1e-8));
    CHECK(w(1) == doctest::Approx(0.135).epsilon(1e-8));
    CHECK(w(2) == doctest::Approx(0.005).epsilon(1e-8));

    const auto lin = diag_map();
    const DerivativeProvider dl(lin, mode);
    const Vec e = dl.jvp(Vec::Ones(2), Vec::Zero(1), Vec::Unit(2, 0), Vec::Zero(1));
    CHECK(e(0) == doctest::Approx(2.0));
    CHECK(std::abs(e(1)) < 1e-9);
  }
}

TEST_CASE("vjp examples") {
  const auto lin = diag_map();
  for (auto mode : kModes) {
    CAPTURE(to_string(mode));
    const DerivativeProvider d(lin, mode);
    const auto [zu0, zp0] = d.vjp(Vec::Ones(2), Vec::Zero(1), Vec::Zero(2));
    CHECK(zu0.norm() == 0.0);
    CHECK(zp0.norm() == 0.0);
    const auto [zu, zp] = d.vjp(Vec::Ones(2), Vec::Zero(1), Vec::Unit(2, 1));
    CHECK(std::abs(zu(0)) < 1e-9);
    CHECK(zu(1) == doctest::Approx(0.5));
  }
}

TEST_CASE("jvp and vjp are dual on the rijke step") {
  auto sys = test::rijke();
  const Vec p = sys->default_parameters();
  const Vec u = test::attractor_state(*sys, 5, 100.0);
  std::mt19937_64 rng(11);
  const Vec w = random_unit(30, rng);
  const Vec z = random_unit(30, rng);
  const Vec dp = (Vec(2) << 0.7, -0.3).finished();
  for (auto mode : {DerivativeMode::Analytic, DerivativeMode::ADForward, DerivativeMode::ADReverse}) {
    CAPTURE(to_string(mode));
    const DerivativeProvider d(*sys, mode);
    const double lhs = z.dot(d.jvp(u, p, w, dp));
    const auto [zu, zp] = d.vjp(u, p, z);
    const double rhs = zu.dot(w) + zp.dot(dp);
    CHECK(test::rel_err(lhs, rhs) <= 1e-10);
  }
}

TEST_CASE("derivative providers agree") {
  for (auto sys : {test::lorenz(), test::rijke()}) {
    const Vec p = sys->default_parameters();
    const Vec u = test::attractor_state(*sys, 9, 20.0);
    const auto d = static_cast<Eigen::Index>(sys->dim());
    std::mt19937_64 rng(3);
    const Vec w = random_unit(d, rng);
    const Vec dp = Vec::Ones(p.size());
    const DerivativeProvider ref(*sys, DerivativeMode::Analytic);
    const Vec j = ref.jvp(u, p, w, dp);
    CHECK(test::rel_err(DerivativeProvider(*sys, DerivativeMode::ADForward).jvp(u, p, w, dp), j) < 1e-12);
    CHECK(test::rel_err(DerivativeProvider(*sys, DerivativeMode::ADReverse).jvp(u, p, w, dp), j) < 1e-12);
    CHECK(test::rel_err(DerivativeProvider(*sys, DerivativeMode::FD).jvp(u, p, w, dp), j) < 1e-4);
    const Mat jac = ref.jacobian(u, p);
    CHECK(test::rel_err(Vec(jac * w), Vec(ref.jvp(u, p, w, Vec::Zero(p.size())))) < 1e-12);
  }
}

TEST_CASE("recursions match automatic differentiation after 100 steps") {
  auto sys = test::lorenz();
  const Vec p = sys->default_parameters();
  const Vec u0 = test::attractor_state(*sys, 2, 10.0);
  const auto g = perturbation_growth(*sys, u0, p, 100, 1e-4, 17);
  CHECK(test::rel_err(g.ad_forward.back(), g.tangent.back()) <= 1e-12);
  CHECK(test::rel_err(g.ad_reverse.back(), g.adjoint.back()) <= 1e-12);
}

TEST_CASE("perturbation norms of a diagonal map grow geometrically") {
  const auto lin = diag_map();
  const auto g = perturbation_growth(lin, Vec::Zero(2), Vec::Zero(1), 20, 1e-4, 1);
  // Random unit q0 is dominated by e_1 after a few steps; compare growth ratios.
  for (std::size_t n = 10; n < 20; ++n) {
    CHECK(g.tangent[n + 1] / g.tangent[n] == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(g.adjoint[n + 1] / g.adjoint[n] == doctest::Approx(2.0).epsilon(1e-5));
  }
  CHECK_THROWS_AS(perturbation_growth(lin, Vec::Zero(2), Vec::Zero(1), 5, 0.0, 1), InputError);
}

TEST_CASE("finite-time sensitivities") {
  auto sys = test::lorenz();
  const Vec p = sys->default_parameters();
  const Vec u0 = test::attractor_state(*sys, 1, 50.0);
  const DerivativeProvider dp(*sys, DerivativeMode::Analytic);
  const std::size_t z = 2;

  SUBCASE("tangent and adjoint agree on the same orbit") {
    const double t = finite_time_sensitivity(dp, u0, p, z, 0, 1000, Case::Tangent);
    const double a = finite_time_sensitivity(dp, u0, p, z, 0, 1000, Case::Adjoint);
    CHECK(test::rel_err(a, t) <= 1e-8);
  }
  SUBCASE("short horizon matches central differences") {
    const std::size_t n = 200;
    const double t = finite_time_sensitivity(dp, u0, p, z, 0, n, Case::Tangent);
    const double h = 1e-4;
    Vec pp = p, pm = p;
    pp(0) += h;
    pm(0) -= h;
    const double fd = (evolve(*sys, u0, pp, n).averages[z].value - evolve(*sys, u0, pm, n).averages[z].value) / (2 * h);
    CHECK(test::rel_err(t, fd) < 1e-3);
  }
  SUBCASE("long horizon diverges") {
    CHECK(std::abs(finite_time_sensitivity(dp, u0, p, z, 0, 6000, Case::Tangent)) > 1e3);
  }
  SUBCASE("state-independent observable has zero sensitivity") {
    LinearMapSystem lin(Mat::Identity(2, 2) * 0.5, Vec::Unit(2, 0));
    const DerivativeProvider dl(lin, DerivativeMode::Analytic);
    // u1 never sees the parameter, so its sensitivity vanishes.
    CHECK(finite_time_sensitivity(dl, Vec::Zero(2), Vec::Zero(1), 1, 0, 50, Case::Tangent) == 0.0);
    CHECK(finite_time_sensitivity(dl, Vec::Zero(2), Vec::Zero(1), 1, 0, 50, Case::Adjoint) == 0.0);
  }
}
