/**
 * @file dynamics.hpp
 * @brief Time stepping with divergence checks, trajectories and finite-time
 *        averages of observables.
 */
#pragma once

#include "shadow/system.hpp"

#include <span>
#include <string>
#include <vector>

namespace shadow {

/// Any component beyond this magnitude counts as divergence.
inline constexpr double kBlowupThreshold = 1e8;

/// Throws NumericalBlowup when u has a non-finite or oversized component.
void check_finite(std::span<const double> u, std::size_t step_index);

struct Trajectory {
  std::vector<Vec> states;  ///< u_0..u_N; empty when only observables were recorded
  double dt = 0.0;
  Vec parameters;
  std::vector<std::string> observable_names;
  Mat observables;  ///< (N + 1) x k, row n holds J(u_n)
};

struct TimeAverage {
  std::string observable;
  std::size_t window = 0;  ///< N
  double value = 0.0;      ///< (1/N) sum_{n<N} J(u_n)
  double standard_error = 0.0;
};

struct EvolveOptions {
  bool store_states = true;
  std::vector<std::string> observables;  ///< empty selects every observable
  std::size_t batches = 20;              ///< batch count of the standard-error estimate
};

struct EvolveResult {
  Trajectory trajectory;
  std::vector<TimeAverage> averages;
  Vec final_state;
};

/// One checked application of the step map.
Vec step(const System& sys, const Vec& u, const Vec& p, std::size_t step_index = 0);

/// N >= 1 steps from u0.
EvolveResult evolve(const System& sys, const Vec& u0, const Vec& p, std::size_t n, const EvolveOptions& opts = {});

/// Runs for round(t_runup / dt) steps and returns the end state.
Vec spin_up(const System& sys, const Vec& u0, const Vec& p, double t_runup);

/// States u_0..u_n without observables.
std::vector<Vec> orbit(const System& sys, const Vec& u0, const Vec& p, std::size_t n);

/// Mean of x (length >= 1).
double mean(std::span<const double> x);

/// Standard error of the mean of a correlated series by non-overlapping batch
/// means. Returns 0 when fewer than two batches fit.
double batch_means_stderr(std::span<const double> x, std::size_t batches);

std::size_t steps_for(double time, double dt);

}  // namespace shadow
