/**
 * @file assimilate.hpp
 * @brief Combined state/parameter estimation driven by tangent shadowing.
 *
 * The pseudo-orbit is u_0..u_{K+N+1}: K spin-up steps from the background
 * state followed by the assimilation window. Each descent step
 *   1. shadows the squared observation misfit (first K steps excluded),
 *   2. moves the parameter by ds = -gamma * d<J>/ds,
 *   3. moves the window start u_K by ds * v^sh_K,
 * then re-integrates from u_K. A step that raises the misfit or diverges is
 * retried at half length; the frozen spin-up prefix keeps the Q basis
 * converged at the window start.
 */
#pragma once

#include "shadow/shadowing.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace shadow {

struct Twin {
  std::vector<Vec> reference;    ///< reference orbit, steps 0..n
  std::vector<double> observed;  ///< observable along the reference orbit
  Vec background;                ///< reference[0] + masked noise
};

/// Reference orbit of n steps from u_ref, exact observations of `observable`
/// and a background state perturbed by N(0, variance) on components where
/// mask is nonzero (empty mask: all components).
Twin generate_twin(const System& sys, const Vec& u_ref, const Vec& p_ref, std::size_t n, const std::string& observable,
                   double variance, const std::vector<int>& mask, std::uint64_t seed);

inline ShadowingOptions assimilation_shadow_options() {
  ShadowingOptions o;
  o.center = false;
  o.estimate_condition = false;
  return o;
}

struct AssimilationProblem {
  std::string observable;
  std::vector<double> observed;  ///< one value per orbit index 0..K+N
  Vec background;                ///< state at orbit index 0
  Vec parameters;                ///< starting parameter vector
  std::string parameter;
  std::size_t spinup_steps = 0;  ///< K
  std::size_t window_steps = 0;  ///< N
  double gamma = 0.1;
  std::size_t descent_steps = 200;
  double tolerance = 1e-14;
  std::size_t max_increases = 10;  ///< step halvings allowed per descent step
  /// Center handling off: the misfit compares states at fixed times, so the
  /// gradient must not carry a time-dilation term the state update lacks.
  ShadowingOptions shadow = assimilation_shadow_options();
};

/// Denominators below this fraction of the window median |g_obs| are clamped.
inline constexpr double kDenominatorFloor = 0.1;

struct AnalysisResult {
  Vec analysis_state;  ///< state at the window start (orbit index K)
  double parameter = 0.0;
  std::vector<double> relative_error;  ///< fresh run from the analysis state
  std::vector<double> baseline_error;  ///< unassimilated background run
  std::vector<bool> clamped;
  double max_error = 0.0;
  double mean_error = 0.0;
  double baseline_mean_error = 0.0;
  std::vector<double> objective;   ///< misfit per descent step
  std::vector<double> parameters;  ///< parameter per descent step
  std::string stop_reason;
};

/// Relative error |g_obs - g| / max(|g_obs|, floor) over the window.
std::vector<double> relative_errors(const std::vector<double>& observed, const std::vector<double>& predicted,
                                    std::vector<bool>* clamped = nullptr);

AnalysisResult assimilate(const System& sys, const AssimilationProblem& problem);

}  // namespace shadow
