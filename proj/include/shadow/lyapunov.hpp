/**
 * @file lyapunov.hpp
 * @brief Lyapunov exponents by repeated QR, covariant Lyapunov vectors by
 *        Ginelli's forward/backward sweep, and angle statistics.
 */
#pragma once

#include "shadow/derivatives.hpp"
#include "shadow/perturbation.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace shadow {

/// Threshold on the diagonal of R below which a basis counts as degenerate.
inline constexpr double kDegenerateDiagonal = 1e-13;

/// Thin QR with diag(R) > 0. Throws DegenerateBasis when a diagonal entry of
/// R falls below kDegenerateDiagonal; `step` is reported in the error.
std::pair<Mat, Mat> qr_positive(const Mat& m, std::size_t step = 0);

struct LyapunovResult {
  Vec exponents;            ///< per unit time, descending by construction of the QR order
  std::vector<double> time; ///< sample times of the running averages
  Mat running;              ///< rows: samples, cols: exponents
};

/// k exponents from N steps starting at u0 (assumed on the attractor).
/// `record_every` sets the running-average sampling stride (0 disables it).
LyapunovResult lyapunov_spectrum(const System& sys, const Vec& u0, const Vec& p, std::size_t k, std::size_t n,
                                 std::uint64_t seed, DerivativeMode mode = DerivativeMode::Analytic,
                                 std::size_t record_every = 0);

enum class Regime { FixedPoint, Periodic, Quasiperiodic, Chaotic };

std::string to_string(Regime r);

/// Classification by the leading exponent and the number of near-zero ones.
Regime classify_regime(const Vec& exponents, double tol = 0.02);

struct ClvSet {
  Case variant = Case::Tangent;
  std::size_t first_step = 0;  ///< orbit index of vectors[0]
  std::vector<Mat> vectors;    ///< d x k per step, unit columns
  std::vector<std::size_t> ill_conditioned_steps;
};

struct ClvOptions {
  std::size_t k = 2;
  std::size_t steps = 0;        ///< steps kept in the output
  std::size_t spin_steps = 0;   ///< discarded at each end
  std::uint64_t seed = 0;
  DerivativeMode mode = DerivativeMode::Analytic;
};

/// CLVs along the orbit u_0 .. u_{2 spin + steps}. Output covers orbit indices
/// [spin, spin + steps). The adjoint variant runs the same sweep on the
/// transposed Jacobians in reversed time.
ClvSet clv_ginelli(const System& sys, const std::vector<Vec>& orbit, const Vec& p, Case variant,
                   const ClvOptions& opts);

/// Angle in degrees between two vectors, in [0, 90] (sign-free).
double vector_angle_deg(const Vec& a, const Vec& b);

/// Mean over common steps of the angle between column i of a and column j of b.
Mat clv_angle_statistics(const ClvSet& a, const ClvSet& b);

/// Minimum over steps and pairs i != j of the angle between CLVs of one set.
double min_pairwise_angle(const ClvSet& s);

}  // namespace shadow
