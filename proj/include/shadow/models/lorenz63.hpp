#pragma once

#include "shadow/system.hpp"

#include <cmath>

namespace shadow::models {

/// Lorenz'63 convection model with the Rayleigh-like parameter s.
struct Lorenz63 {
  static constexpr double kSigma = 10.0;
  static constexpr double kBeta = 8.0 / 3.0;

  [[nodiscard]] std::string_view name() const { return "lorenz63"; }
  [[nodiscard]] std::size_t dim() const { return 3; }
  [[nodiscard]] std::vector<std::string> parameter_names() const { return {"s"}; }
  [[nodiscard]] Vec default_parameters() const { return Vec::Constant(1, 28.0); }
  [[nodiscard]] std::vector<std::string> observable_names() const { return {"x", "y", "z"}; }

  template <class T>
  void rhs(std::span<const T> u, std::span<const T> p, std::span<T> du) const {
    const T& x = u[0];
    const T& y = u[1];
    const T& z = u[2];
    du[0] = kSigma * (y - x);
    du[1] = x * (p[0] - z) - y;
    du[2] = x * y - kBeta * z;
  }

  void rhs_jacobian(const Vec& u, const Vec& p, Mat& j) const {
    j << -kSigma, kSigma, 0.0,  //
        p(0) - u(2), -1.0, -u(0),  //
        u(1), u(0), -kBeta;
  }

  void rhs_param_jacobian(const Vec& u, const Vec&, Mat& jp) const { jp << 0.0, u(0), 0.0; }

  template <class T>
  T observable(std::size_t k, std::span<const T> u, std::span<const T>) const {
    return u[k];
  }

  void validate(const Vec& p, double, const ButcherTableau&) const {
    if (!std::isfinite(p(0))) throw ParameterError("lorenz63: s must be finite");
  }
};

/// Forward Euler at dt = 0.005 unless overridden.
std::shared_ptr<const OdeSystem<Lorenz63>> make_lorenz63(double dt = 0.005, const std::string& integrator = "euler");

}  // namespace shadow::models
