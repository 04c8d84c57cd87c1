/**
 * @file shadowing.hpp
 * @brief Discrete tangent/adjoint non-intrusive least squares shadowing.
 *
 * The n-loop propagates a d x d_u orthonormal basis Q_n and one inhomogeneous
 * solution v_n, keeping v_n orthogonal to Q_n:
 *
 *   Q_n R_n = A_{n-1} Q_{n-1}           (QR, positive diagonal)
 *   v_n     = A_{n-1} v_{n-1} + b_n,   pi_n = Q_n^T v_n,   v_n -= Q_n pi_n
 *
 * The shadowing perturbation v^sh_n = v_n + Q_n a_n uses the minimum-norm
 * coefficients satisfying a_n = R_n a_{n-1} + pi_n.
 *
 * Tangent case: A_n = D_u f(u_n), b_n = d f / d p (u_{n-1}); v_n lives at u_n.
 * Adjoint case: A_{n-1} = D_u f(u_m)^T, b_n = DJ(u_m) with m = N + 2 - n, so
 * the n-loop runs backwards along the orbit u_0..u_{N+1}.
 *
 * Center handling. Tangent: Q and v are projected orthogonal to the vector
 * field F before orthonormalization; the removed components feed a time
 * dilation term of the sensitivity. Adjoint: one extra constraint row
 * sum_n F_n . v^sh_n = 0.
 */
#pragma once

#include "shadow/derivatives.hpp"
#include "shadow/least_squares.hpp"
#include "shadow/perturbation.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace shadow {

/// Supplies the linear recursion to the n-loop.
class Propagator {
 public:
  virtual ~Propagator() = default;
  [[nodiscard]] virtual std::size_t steps() const = 0;
  [[nodiscard]] virtual std::size_t dim() const = 0;
  /// (A_{n-1} Q, A_{n-1} v + b_n) for n = 1..N.
  virtual void advance(std::size_t n, const Mat& q, const Vec& v, Mat& aq, Vec& av) const = 0;
  /// Center direction associated with v_n; n = 0..N (tangent) or 1..N (adjoint).
  [[nodiscard]] virtual Vec center(std::size_t n) const;
};

/// Explicit A_0..A_{N-1}, b_1..b_N (b[0] unused) and optional F_0..F_N.
class MatrixPropagator final : public Propagator {
 public:
  MatrixPropagator(std::vector<Mat> a, std::vector<Vec> b, std::vector<Vec> f = {});
  [[nodiscard]] std::size_t steps() const override { return a_.size(); }
  [[nodiscard]] std::size_t dim() const override { return static_cast<std::size_t>(a_.front().rows()); }
  void advance(std::size_t n, const Mat& q, const Vec& v, Mat& aq, Vec& av) const override;
  [[nodiscard]] Vec center(std::size_t n) const override;

 private:
  std::vector<Mat> a_;
  std::vector<Vec> b_;
  std::vector<Vec> f_;
};

struct PerturbationSequence {
  Case kind = Case::Tangent;
  bool center = false;
  std::vector<Mat> q;   ///< 0..N
  std::vector<Mat> r;   ///< 0..N, r[0] = I
  std::vector<Vec> v;   ///< 0..N
  std::vector<Vec> pi;  ///< 0..N, pi[0] = 0
  // Tangent, center on: F-components removed at step n.
  std::vector<double> center_v;  ///< v_n . F_n / |F_n|^2 before projection
  std::vector<Vec> center_q;     ///< (A_{n-1} Q_{n-1})^T F_n / |F_n|^2
  // Adjoint, center on: data of the extra row.
  std::vector<double> v_dot_f;  ///< v_n . F_n
  std::vector<Vec> qt_f;        ///< Q_n^T F_n

  [[nodiscard]] std::size_t steps() const { return v.size() - 1; }
  /// Per-step exponents (1/(N dt)) sum log R_n(i,i).
  [[nodiscard]] Vec exponents(double dt) const;
};

/// Runs the n-loop. q0 is d x d_u (orthonormalized internally).
PerturbationSequence n_loop(const Propagator& prop, Case kind, bool center, const Mat& q0);

/// Coefficients a_n for a sequence, adding the center row in the adjoint case.
CoefficientSolution solve_coefficients(const PerturbationSequence& seq, bool dense = false,
                                       bool estimate_condition = true);

/// max_n |a_n - R_n a_{n-1} - pi_n|.
double constraint_residual(const PerturbationSequence& seq, const std::vector<Vec>& a);

/// v_n + Q_n a_n.
std::vector<Vec> shadowing_perturbation(const PerturbationSequence& seq, const std::vector<Vec>& a);

/// Time-dilation increments xi_n = c_n + g_n . a_{n-1} (tangent, center on).
std::vector<double> time_dilation(const PerturbationSequence& seq, const std::vector<Vec>& a);

/// Time-indexed scalar objective J_n(u) with its state gradient.
struct Objective {
  std::string name;
  std::function<double(std::size_t n, const Vec& u)> value;
  std::function<Vec(std::size_t n, const Vec& u)> gradient;
};

Objective observable_objective(const System& sys, std::size_t k, const Vec& p);

/// Matrix: A_n and b_n are assembled first. Direct: the n-loop calls the
/// derivative provider's products on Q and v.
enum class LoopMode { Matrix, Direct };

LoopMode loop_mode_from_string(const std::string& s);

struct ShadowingOptions {
  Case kind = Case::Tangent;
  std::size_t du = 2;
  bool center = true;
  DerivativeMode derivatives = DerivativeMode::Analytic;
  LoopMode loop = LoopMode::Direct;
  /// Leading part of the window left out of the sensitivity sums, in time
  /// units. Negative: ceil(1 / lambda_1) from the window's own R diagonals,
  /// capped at kMaxExclusionFraction of the window.
  double exclude_time = -1.0;
  bool estimate_condition = true;
  std::uint64_t seed = 0;
};

inline constexpr double kMaxExclusionFraction = 0.3;
inline constexpr double kIllConditioned = 1e12;

struct ShadowingSolution {
  Case kind = Case::Tangent;
  PerturbationSequence sequence;
  std::vector<Vec> a;
  std::vector<Vec> v_shadow;  ///< n-loop index; tangent: orbit index
  std::vector<double> xi;     ///< tangent center-on only
  Vec sensitivity;            ///< tangent: per objective; adjoint: per parameter
  std::size_t excluded_steps = 0;
  double constraint_residual = 0.0;
  double lsq_residual = 0.0;
  double condition = 0.0;
  double max_v_shadow = 0.0;
  double median_v_shadow = 0.0;
  Vec exponents;
  std::vector<std::string> warnings;
};

/// One shadowing window on orbit u_0..u_{N+1}. Tangent: one parameter, any
/// number of objectives. Adjoint: exactly one objective, every parameter.
ShadowingSolution shadow_window(const System& sys, const std::vector<Vec>& orbit, const Vec& p, std::size_t parameter,
                                const std::vector<Objective>& objectives, const ShadowingOptions& opts);

struct SensitivityConfig {
  ShadowingOptions shadow;
  double window_time = 20.0;
  std::size_t samples = 10;
  double runup_time = 0.0;
  std::string parameter;                 ///< tangent
  std::vector<std::string> observables;  ///< tangent: empty selects all; adjoint: exactly one
  std::size_t workers = 1;
};

struct SensitivityRun {
  Case kind = Case::Tangent;
  std::vector<std::string> labels;  ///< "d<J>/dp" per column
  Mat samples;                      ///< M x L
  Mat cumulative;                   ///< running means, M x L
  Vec mean;
  Vec standard_error;
  std::vector<std::size_t> excluded_steps;
  std::vector<double> max_v_shadow;
  std::vector<double> condition;
  std::vector<std::string> warnings;
};

/// M windows along one orbit from u_start (after runup_time). Windows are
/// consecutive orbit segments; each gets its own seeded Q_0.
SensitivityRun shadowing_sensitivity(const System& sys, const Vec& u_start, const Vec& p,
                                     const SensitivityConfig& cfg);

}  // namespace shadow
