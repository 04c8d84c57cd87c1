/**
 * @file derivatives.hpp
 * @brief Jacobian-vector and vector-Jacobian products of a step map.
 *
 * Four interchangeable routes to the same linearization:
 *   Analytic   hand-derived tangent/adjoint of the integrator
 *   ADForward  step map evaluated over ad::Dual
 *   ADReverse  step map recorded on an ad::Tape and swept backwards
 *   FD         central differences
 * Products a mode has no native route for go through the assembled Jacobian.
 */
#pragma once

#include "shadow/system.hpp"

#include <string>
#include <utility>

namespace shadow {

enum class DerivativeMode { Analytic, ADForward, ADReverse, FD };

DerivativeMode derivative_mode_from_string(const std::string& s);
std::string to_string(DerivativeMode m);

class DerivativeProvider {
 public:
  explicit DerivativeProvider(const System& sys, DerivativeMode mode = DerivativeMode::Analytic, double fd_h = 1e-6);

  [[nodiscard]] DerivativeMode mode() const { return mode_; }
  [[nodiscard]] const System& system() const { return *sys_; }

  /// (D_u f) w + (D_p f) dp at (u, p).
  [[nodiscard]] Vec jvp(const Vec& u, const Vec& p, const Vec& w, const Vec& dp) const;
  /// Column-wise jvp; dp has one column per column of w.
  [[nodiscard]] Mat jvp_block(const Vec& u, const Vec& p, const Mat& w, const Mat& dp) const;

  /// ((D_u f)^T z, (D_p f)^T z) at (u, p).
  [[nodiscard]] std::pair<Vec, Vec> vjp(const Vec& u, const Vec& p, const Vec& z) const;
  /// Column-wise vjp; returns (d x k, n_p x k).
  [[nodiscard]] std::pair<Mat, Mat> vjp_block(const Vec& u, const Vec& p, const Mat& z) const;

  /// D_u f, d x d.
  [[nodiscard]] Mat jacobian(const Vec& u, const Vec& p) const;
  /// D_p f, d x n_p.
  [[nodiscard]] Mat param_jacobian(const Vec& u, const Vec& p) const;

 private:
  [[nodiscard]] Mat fd_jvp_block(const Vec& u, const Vec& p, const Mat& w, const Mat& dp) const;
  [[nodiscard]] Mat dual_jvp_block(const Vec& u, const Vec& p, const Mat& w, const Mat& dp) const;
  [[nodiscard]] std::pair<Mat, Mat> tape_vjp_block(const Vec& u, const Vec& p, const Mat& z) const;
  /// [D_u f, D_p f] assembled in this mode's native direction.
  [[nodiscard]] Mat full_jacobian(const Vec& u, const Vec& p) const;

  const System* sys_;
  DerivativeMode mode_;
  double fd_h_;
};

}  // namespace shadow
