/**
 * @file integrators.hpp
 * @brief Fixed-step explicit Runge-Kutta schemes over a generic scalar type,
 *        plus their hand-derived tangent and adjoint linearizations.
 */
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace shadow {

/// Explicit Butcher tableau. a is strictly lower triangular, row-major s x s.
struct ButcherTableau {
  std::string name;
  int order = 1;
  std::size_t stages = 1;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;

  [[nodiscard]] double coeff(std::size_t i, std::size_t j) const { return a[i * stages + j]; }

  /// R(z) = 1 + z b^T (I - zA)^{-1} 1, the linear stability function.
  [[nodiscard]] std::complex<double> stability(std::complex<double> z) const;
};

ButcherTableau forward_euler();
ButcherTableau classic_rk4();
/// Dormand-Prince 5(4), advanced with the fifth-order weights.
ButcherTableau dormand_prince5();

ButcherTableau tableau_by_name(const std::string& name);

template <class T>
struct RkWorkspace {
  std::vector<T> stage_state;  // d
  std::vector<T> k;            // stages * d

  void resize(std::size_t stages, std::size_t d) {
    stage_state.resize(d);
    k.resize(stages * d);
  }
};

/// out = u + dt * sum_i b_i F(U_i). `rhs(std::span<const T>, std::span<T>)`.
template <class T, class Rhs>
void rk_step(const ButcherTableau& tab, Rhs&& rhs, std::span<const T> u, double dt, std::span<T> out,
             RkWorkspace<T>& ws) {
  const std::size_t d = u.size();
  const std::size_t s = tab.stages;
  ws.resize(s, d);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t m = 0; m < d; ++m) ws.stage_state[m] = u[m];
    for (std::size_t j = 0; j < i; ++j) {
      const double aij = tab.coeff(i, j);
      if (aij == 0.0) continue;
      const T* kj = ws.k.data() + j * d;
      for (std::size_t m = 0; m < d; ++m) ws.stage_state[m] += (dt * aij) * kj[m];
    }
    rhs(std::span<const T>(ws.stage_state), std::span<T>(ws.k.data() + i * d, d));
  }
  for (std::size_t m = 0; m < d; ++m) out[m] = u[m];
  for (std::size_t i = 0; i < s; ++i) {
    if (tab.b[i] == 0.0) continue;
    const T* ki = ws.k.data() + i * d;
    for (std::size_t m = 0; m < d; ++m) out[m] += (dt * tab.b[i]) * ki[m];
  }
}

/// Stage points U_i of one explicit RK step, as columns of a d x s matrix.
template <class Rhs>
Eigen::MatrixXd rk_stage_points(const ButcherTableau& tab, Rhs&& rhs, const Eigen::VectorXd& u, double dt) {
  const std::size_t d = static_cast<std::size_t>(u.size());
  const std::size_t s = tab.stages;
  Eigen::MatrixXd stage_points(u.size(), static_cast<Eigen::Index>(s));
  Eigen::MatrixXd k(u.size(), static_cast<Eigen::Index>(s));
  for (std::size_t i = 0; i < s; ++i) {
    Eigen::VectorXd ui = u;
    for (std::size_t j = 0; j < i; ++j) ui += dt * tab.coeff(i, j) * k.col(static_cast<Eigen::Index>(j));
    stage_points.col(static_cast<Eigen::Index>(i)) = ui;
    Eigen::VectorXd ki(u.size());
    rhs(std::span<const double>(ui.data(), d), std::span<double>(ki.data(), d));
    k.col(static_cast<Eigen::Index>(i)) = ki;
  }
  return stage_points;
}

}  // namespace shadow
