#include "helpers.hpp"

#include "shadow/lyapunov.hpp"

#include <cmath>

using namespace shadow;

TEST_CASE("positive-diagonal QR") {
  {
    const auto [q, r] = qr_positive(Mat::Identity(3, 3));
    CHECK((q - Mat::Identity(3, 3)).norm() < 1e-15);
    CHECK((r - Mat::Identity(3, 3)).norm() < 1e-15);
  }
  {
    Mat m = Mat::Zero(2, 2);
    m.diagonal() << 2.0, 0.5;
    const auto [q, r] = qr_positive(m);
    CHECK((q - Mat::Identity(2, 2)).norm() < 1e-15);
    CHECK((r - m).norm() < 1e-15);
  }
  {
    Mat m(2, 2);
    m << 1.0, 0.0, 1.0, 1.0;
    const auto [q, r] = qr_positive(m);
    CHECK(r(0, 0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(r(1, 1) > 0.0);
    CHECK((q * r - m).norm() < 1e-14);
    CHECK((q.transpose() * q - Mat::Identity(2, 2)).norm() < 1e-14);
  }
  {
    Mat m(3, 2);
    m << 1.0, 2.0, 2.0, 4.0, 3.0, 6.0;  // rank one
    CHECK_THROWS_AS(qr_positive(m), DegenerateBasis);
  }
}

TEST_CASE("exponents of a diagonal map") {
  Mat a = Mat::Zero(2, 2);
  a.diagonal() << 2.0, 0.5;
  LinearMapSystem sys(a, Vec::Zero(2), 0.1);
  const auto le = lyapunov_spectrum(sys, Vec::Zero(2), Vec::Zero(1), 2, 400, 1);
  CHECK(le.exponents(0) == doctest::Approx(std::log(2.0) / 0.1).epsilon(1e-2));
  CHECK(le.exponents(1) == doctest::Approx(std::log(0.5) / 0.1).epsilon(1e-2));
}

TEST_CASE("lorenz63 spectrum") {
  auto sys = test::lorenz();
  const Vec p = sys->default_parameters();
  const Vec u = test::attractor_state(*sys, 1, 50.0);
  const auto le = lyapunov_spectrum(*sys, u, p, 3, steps_for(500.0, sys->dt()), 1);
  CHECK(le.exponents(0) == doctest::Approx(0.9).epsilon(0.1 / 0.9));
  CHECK(std::abs(le.exponents(1)) < 0.05);
  CHECK(le.exponents(2) == doctest::Approx(-14.6).epsilon(0.5 / 14.6));
  // Sum rule: the trace of the Jacobian is constant.
  CHECK(le.exponents.sum() == doctest::Approx(-(10.0 + 1.0 + 8.0 / 3.0)).epsilon(0.2 / 13.667));

  SUBCASE("independent of the initial basis") {
    const auto other = lyapunov_spectrum(*sys, u, p, 3, steps_for(500.0, sys->dt()), 99);
    CHECK((other.exponents - le.exponents).cwiseAbs().maxCoeff() < 0.05);
  }
  SUBCASE("running averages are recorded") {
    const auto r = lyapunov_spectrum(*sys, u, p, 2, 1000, 1, DerivativeMode::Analytic, 100);
    CHECK(r.time.size() == 10);
    CHECK(r.running.rows() == 10);
    CHECK(r.running.row(9).transpose().isApprox(r.exponents));
  }
}

TEST_CASE("regime classification thresholds") {
  auto cls = [](std::initializer_list<double> l) {
    Vec v(static_cast<Eigen::Index>(l.size()));
    Eigen::Index i = 0;
    for (double x : l) v(i++) = x;
    return classify_regime(v);
  };
  CHECK(cls({0.19, 0.01, -0.07}) == Regime::Chaotic);
  CHECK(cls({0.005, -0.1, -0.2}) == Regime::Periodic);
  CHECK(cls({0.01, -0.015, -0.2}) == Regime::Quasiperiodic);
  CHECK(cls({-0.03, -0.1, -0.2}) == Regime::FixedPoint);
  CHECK(to_string(Regime::Chaotic) == "chaotic");
}

TEST_CASE("covariant vectors of a diagonal map are the axes") {
  Mat a = Mat::Zero(3, 3);
  a.diagonal() << 2.0, 0.9, 0.5;
  LinearMapSystem sys(a, Vec::Zero(3));
  const std::vector<Vec> orb(102, Vec::Zero(3));
  ClvOptions o;
  o.k = 3;
  o.steps = 21;
  o.spin_steps = 40;  // gap ratio 0.5/0.9 decays below 1e-10
  o.seed = 4;
  for (Case c : {Case::Tangent, Case::Adjoint}) {
    const ClvSet s = clv_ginelli(sys, orb, Vec::Zero(1), c, o);
    REQUIRE(s.vectors.size() == o.steps);
    for (const Mat& v : s.vectors) CHECK((v.cwiseAbs() - Mat::Identity(3, 3)).norm() < 1e-6);
  }
}

TEST_CASE("covariant vector angles on lorenz63") {
  auto sys = test::lorenz();
  const Vec p = sys->default_parameters();
  const Vec u = test::attractor_state(*sys, 1, 50.0);
  ClvOptions o;
  o.k = 3;
  o.steps = steps_for(20.0, sys->dt());
  o.spin_steps = steps_for(10.0, sys->dt());
  const auto orb = orbit(*sys, u, p, o.steps + 2 * o.spin_steps);
  const ClvSet tan = clv_ginelli(*sys, orb, p, Case::Tangent, o);
  const ClvSet adj = clv_ginelli(*sys, orb, p, Case::Adjoint, o);

  const Mat self = clv_angle_statistics(tan, tan);
  CHECK(self.diagonal().cwiseAbs().maxCoeff() < 1e-6);
  const Mat cross = clv_angle_statistics(tan, adj);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      if (i != j) CHECK(std::abs(cross(i, j) - 90.0) < 2.0);

  // The first vector grows at the leading rate under the tangent map.
  const DerivativeProvider d(*sys);
  double logsum = 0.0;
  for (std::size_t s = 0; s + 1 < tan.vectors.size(); ++s) {
    const std::size_t n = tan.first_step + s;
    const Vec img = d.jvp(orb[n], p, tan.vectors[s].col(0), Vec::Zero(1));
    logsum += std::log(img.norm());
    CHECK(std::abs(std::abs(img.normalized().dot(tan.vectors[s + 1].col(0))) - 1.0) < 1e-6);
  }
  const double span = static_cast<double>(tan.vectors.size() - 1) * sys->dt();
  const double rate = logsum / span;
  // Leading QR exponent over the same segment, from cumulative log growth.
  const std::size_t last = tan.first_step + tan.vectors.size() - 1;
  const auto le = lyapunov_spectrum(*sys, orb[0], p, 1, last, 1, DerivativeMode::Analytic, 1);
  auto cumulative = [&](std::size_t n) { return le.running(static_cast<Eigen::Index>(n - 1), 0) * le.time[n - 1]; };
  const double qr_rate = (cumulative(last) - cumulative(tan.first_step)) / span;
  CHECK(std::abs(rate - qr_rate) < 0.02);
}

TEST_CASE("vector angle") {
  CHECK(vector_angle_deg(Vec::Unit(2, 0), Vec::Unit(2, 1)) == doctest::Approx(90.0));
  CHECK(vector_angle_deg(Vec::Unit(2, 0), -Vec::Unit(2, 0)) == doctest::Approx(0.0));
  CHECK(vector_angle_deg((Vec(2) << 1, 1).finished(), Vec::Unit(2, 0)) == doctest::Approx(45.0));
}
