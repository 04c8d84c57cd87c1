/**
 * @file rijke.hpp
 * @brief Time-delayed thermoacoustic model of a horizontal Rijke tube.
 *
 * Galerkin acoustic modes (velocity eta_j, pressure theta_j) are forced by a
 * heat release that responds to the flame-base velocity u_f after a delay
 * tau. The delay is represented by a linear advection field v(y, t) on
 * [-1, 1], discretized on Chebyshev points, so the extended system is a
 * memory-less ODE that stays differentiable in tau.
 *
 * State layout (d = 2 d_g + d_c):
 *   [eta_1 .. eta_dg, theta_1 .. theta_dg, v(y_0) .. v(y_{dc-1})]
 * where y_j = cos(j pi / d_c). The grid has d_c + 1 points; the inflow node
 * y_{dc} = -1 carries the boundary value u_f(t) and is substituted from the
 * Galerkin modes instead of being stored. v(y_0 = +1) is the delayed u_f.
 */
#pragma once

#include "shadow/models/chebyshev.hpp"
#include "shadow/system.hpp"

#include <cmath>
#include <numbers>

namespace shadow::models {

/// Modified King's law, sqrt|1 + u| - 1, with a quartic replacing it on
/// [-1.01, -0.99] so the law is continuously differentiable.
template <class T>
T heat_release(const T& u) {
  const double x = ad::value_of(u) + 1.0;
  const T w = u + 1.0;
  if (x >= -0.01 && x <= 0.01) {
    const T w2 = w * w;
    return -1.0 + 1750.0 * w2 - 7.5e6 * (w2 * w2);
  }
  using std::abs;
  using std::sqrt;
  using ad::abs;
  using ad::sqrt;
  return sqrt(abs(w)) - 1.0;
}

/// d/du of heat_release.
double heat_release_derivative(double u);

struct RijkeConfig {
  double c1 = 0.06;
  double c2 = 0.01;
  double flame_position = 0.225;
  std::size_t galerkin_modes = 10;
  std::size_t chebyshev_points = 10;
};

class Rijke {
 public:
  explicit Rijke(RijkeConfig cfg = {});

  [[nodiscard]] std::string_view name() const { return "rijke"; }
  [[nodiscard]] std::size_t dim() const { return 2 * ng_ + nc_; }
  [[nodiscard]] std::vector<std::string> parameter_names() const { return {"beta", "tau"}; }
  [[nodiscard]] Vec default_parameters() const { return (Vec(2) << 7.0, 0.2).finished(); }
  [[nodiscard]] std::vector<std::string> observable_names() const {
    return {"J_ac", "J_ray", "u_f", "heat_release", "rayleigh_source"};
  }
  [[nodiscard]] const RijkeConfig& config() const { return cfg_; }
  [[nodiscard]] double damping(std::size_t j) const { return zeta_(static_cast<Eigen::Index>(j - 1)); }

  template <class T>
  void rhs(std::span<const T> u, std::span<const T> p, std::span<T> du) const {
    const T& beta = p[0];
    const T& tau = p[1];
    const std::size_t ng = ng_;
    const std::size_t nc = nc_;
    T uf = T(0.0);
    for (std::size_t k = 0; k < ng; ++k) uf += cos_[k] * u[k];
    const T q = heat_release(u[2 * ng]);
    const T forcing = 2.0 * beta * q;
    for (std::size_t j = 0; j < ng; ++j) {
      const T& eta = u[j];
      const T& theta = u[ng + j];
      du[j] = jpi_[j] * theta;
      du[ng + j] = -jpi_[j] * eta - zeta_[j] * theta - forcing * sin_[j];
    }
    const T speed = -2.0 / tau;
    for (std::size_t i = 0; i < nc; ++i) {
      T acc = diff_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nc)) * uf;
      for (std::size_t m = 0; m < nc; ++m)
        acc += diff_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) * u[2 * ng + m];
      du[2 * ng + i] = speed * acc;
    }
  }

  void rhs_jacobian(const Vec& u, const Vec& p, Mat& j) const;
  void rhs_param_jacobian(const Vec& u, const Vec& p, Mat& jp) const;

  template <class T>
  T observable(std::size_t k, std::span<const T> u, std::span<const T> p) const {
    const std::size_t ng = ng_;
    switch (k) {
      case 0: {  // J_ac
        T acc = T(0.0);
        for (std::size_t j = 0; j < 2 * ng; ++j) acc += u[j] * u[j];
        return 0.25 * acc;
      }
      case 1: {  // J_ray, dissipation form
        T acc = T(0.0);
        for (std::size_t j = 0; j < ng; ++j) acc += zeta_[j] * (u[ng + j] * u[ng + j]);
        return 0.5 * acc;
      }
      case 2: {
        T acc = T(0.0);
        for (std::size_t j = 0; j < ng; ++j) acc += cos_[j] * u[j];
        return acc;
      }
      case 3:
        return heat_release(u[2 * ng]);
      case 4: {  // acoustic source; its average balances J_ray
        T pf = T(0.0);
        for (std::size_t j = 0; j < ng; ++j) pf += sin_[j] * u[ng + j];
        return -(p[0] * heat_release(u[2 * ng]) * pf);
      }
      default:
        throw InputError("rijke: observable index out of range");
    }
  }

  /// Throws ParameterError for tau <= 0 or when the advection operator at this
  /// tau leaves the integrator's stability region at timestep dt.
  void validate(const Vec& p, double dt, const ButcherTableau& tableau) const;

  /// Largest |R(dt * lambda)| over eigenvalues lambda of the advection block.
  [[nodiscard]] double advection_amplification(double tau, double dt, const ButcherTableau& tableau) const;

 private:
  RijkeConfig cfg_;
  std::size_t ng_;
  std::size_t nc_;
  Vec jpi_;
  Vec zeta_;
  Vec sin_;
  Vec cos_;
  Mat diff_;  // (nc + 1) x (nc + 1); last node is the inflow boundary
};

/// DOPRI5 at dt = 0.01 (= tau / (2 d_c) at the defaults) unless overridden.
std::shared_ptr<const OdeSystem<Rijke>> make_rijke(RijkeConfig cfg = {}, double dt = 0.01,
                                                   const std::string& integrator = "dopri5");

}  // namespace shadow::models
