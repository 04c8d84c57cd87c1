/**
 * @file optimize.hpp
 * @brief Fixed-step steepest descent of a long-time average over one parameter.
 *
 * Each iterate spins up a fresh orbit at the current parameter, measures the
 * objective on a long primal run and estimates its gradient with tangent
 * shadowing. The update is p_{n+1} = p_n - gamma * g_n, no line search.
 */
#pragma once

#include "shadow/lyapunov.hpp"
#include "shadow/shadowing.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace shadow {

struct DescentConfig {
  std::string parameter = "beta";
  std::string observable = "J_ac";
  double gamma = 0.1;
  /// Stop once <J>(p_n) < epsilon * <J>(p_0).
  double epsilon = 0.01;
  std::size_t windows = 50;
  double window_time = 20.0;
  std::size_t max_iterations = 100;
  /// Spin-up before each iterate's measurements; negative selects the model default.
  double runup_time = -1.0;
  double objective_time = 200.0;
  /// Time used for the regime label; zero skips the classification.
  double regime_time = 100.0;
  ShadowingOptions shadow;
  std::size_t workers = 1;
};

/// Gradient spread above this multiple of |mean| attaches a warning.
inline constexpr double kNoisyGradientRatio = 10.0;

struct DescentIterate {
  std::size_t index = 0;
  double parameter = 0.0;
  double objective = 0.0;
  double objective_stderr = 0.0;
  double gradient = 0.0;  ///< NaN on the terminal iterate
  double gradient_stderr = 0.0;
  std::string regime;
  std::vector<std::string> warnings;
};

enum class Termination { Converged, MaxIterations, Blowup };

std::string to_string(Termination t);

struct DescentPath {
  std::vector<DescentIterate> iterates;
  Termination termination = Termination::MaxIterations;
  std::string message;
  /// Indices where the 3-iterate moving average of the objective rises.
  std::vector<std::size_t> trend_breaks;
};

/// Minimizes the configured observable's average over cfg.parameter starting
/// from p0. Iterate n draws its initial state from derive_seed(seed, n).
DescentPath minimize(const System& sys, const Vec& p0, const DescentConfig& cfg, std::uint64_t seed);

}  // namespace shadow
