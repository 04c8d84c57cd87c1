/**
 * @file experiments.hpp
 * @brief Batched experiments over independent units: parameter scans and
 *        suites of twin assimilation experiments. Units run on a worker pool
 *        and results are stored by index, so output does not depend on the
 *        worker count.
 */
#pragma once

#include "shadow/assimilate.hpp"
#include "shadow/lyapunov.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace shadow {

struct ScanConfig {
  std::string parameter = "beta";
  std::vector<double> values;
  double runup_time = 1000.0;
  double lyapunov_time = 100.0;
  std::size_t k = 4;
  double sample_time = 100.0;    ///< window for the peak record
  std::string observable = "u_f";
  double regime_tolerance = 0.02;
  std::size_t workers = 1;
};

struct ScanPoint {
  double value = 0.0;
  Vec exponents;
  std::string regime;          ///< empty when the point failed
  std::vector<double> peaks;   ///< local maxima of the observable
  std::vector<double> means;   ///< time average of every observable, in model order
  std::string error;           ///< error message of a failed point
};

/// Point i starts from initial_state(derive_seed(seed, i)).
std::vector<ScanPoint> bifurcation_scan(const System& sys, const Vec& p0, const ScanConfig& cfg, std::uint64_t seed);

std::vector<double> scan_grid(double lo, double hi, double step);

struct TwinSuiteConfig {
  std::string observable;
  std::string parameter;
  std::size_t experiments = 20;
  double window_time = 10.0;
  double spinup_time = 1.0;      ///< K steps ahead of the window, about 1 / lambda_1
  double variance = 0.1;
  std::vector<int> mask;         ///< perturbed components; empty perturbs all
  double runup_time = -1.0;      ///< negative selects the model default
  double separation_time = 10.0; ///< spacing between successive reference states
  double gamma = 0.1;
  std::size_t descent_steps = 200;
  double tolerance = 1e-14;
  ShadowingOptions shadow = assimilation_shadow_options();
  std::size_t workers = 1;
};

struct TwinSuiteResult {
  std::vector<AnalysisResult> runs;
  double mean_error = 0.0;           ///< mean over runs of the per-run mean error
  double baseline_mean_error = 0.0;
};

/// Reference states are drawn sequentially along one long orbit; experiment e
/// perturbs its background with derive_seed(seed, e).
TwinSuiteResult twin_suite(const System& sys, const Vec& p_ref, const TwinSuiteConfig& cfg, std::uint64_t seed);

}  // namespace shadow
