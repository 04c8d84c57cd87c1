#include "shadow/integrators.hpp"

#include "shadow/errors.hpp"

namespace shadow {

std::complex<double> ButcherTableau::stability(std::complex<double> z) const {
  const auto s = static_cast<Eigen::Index>(stages);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(s, s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j) m(i, j) -= z * coeff(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  const Eigen::VectorXcd y = m.partialPivLu().solve(Eigen::VectorXcd::Ones(s));
  std::complex<double> r = 1.0;
  for (Eigen::Index i = 0; i < s; ++i) r += z * b[static_cast<std::size_t>(i)] * y(i);
  return r;
}

ButcherTableau forward_euler() { return {"euler", 1, 1, {0.0}, {1.0}, {0.0}}; }

ButcherTableau classic_rk4() {
  ButcherTableau t{"rk4", 4, 4, std::vector<double>(16, 0.0), {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6}, {0, 0.5, 0.5, 1}};
  t.a[1 * 4 + 0] = 0.5;
  t.a[2 * 4 + 1] = 0.5;
  t.a[3 * 4 + 2] = 1.0;
  return t;
}

ButcherTableau dormand_prince5() {
  // The seventh (FSAL) stage only feeds the embedded error estimate, which a
  // fixed-step scheme never uses.
  constexpr std::size_t s = 6;
  ButcherTableau t{"dopri5", 5, s, std::vector<double>(s * s, 0.0), {}, {}};
  auto set = [&](std::size_t i, std::size_t j, double v) { t.a[i * s + j] = v; };
  set(1, 0, 1.0 / 5);
  set(2, 0, 3.0 / 40);
  set(2, 1, 9.0 / 40);
  set(3, 0, 44.0 / 45);
  set(3, 1, -56.0 / 15);
  set(3, 2, 32.0 / 9);
  set(4, 0, 19372.0 / 6561);
  set(4, 1, -25360.0 / 2187);
  set(4, 2, 64448.0 / 6561);
  set(4, 3, -212.0 / 729);
  set(5, 0, 9017.0 / 3168);
  set(5, 1, -355.0 / 33);
  set(5, 2, 46732.0 / 5247);
  set(5, 3, 49.0 / 176);
  set(5, 4, -5103.0 / 18656);
  t.b = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84};
  t.c = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0};
  return t;
}

ButcherTableau tableau_by_name(const std::string& name) {
  if (name == "euler") return forward_euler();
  if (name == "rk4") return classic_rk4();
  if (name == "dopri5") return dormand_prince5();
  throw InputError("unknown integrator '" + name + "' (expected euler, rk4 or dopri5)");
}

}  // namespace shadow
