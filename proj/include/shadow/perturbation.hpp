/**
 * @file perturbation.hpp
 * @brief Naive finite-time sensitivities and the growth of tangent/adjoint
 *        perturbations along an orbit.
 */
#pragma once

#include "shadow/derivatives.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace shadow {

enum class Case { Tangent, Adjoint };

Case case_from_string(const std::string& s);
std::string to_string(Case c);

/// Unit vector with i.i.d. normal components.
Vec random_unit(Eigen::Index d, std::mt19937_64& rng);
/// d x k matrix with i.i.d. normal entries.
Mat random_matrix(Eigen::Index d, Eigen::Index k, std::mt19937_64& rng);

/// d/dp_k of (1/N) sum_{n<N} J(u_n) along the orbit from u0, by the tangent
/// recursion or the adjoint recursion. Both give the same number up to
/// rounding; for chaotic orbits it grows exponentially with N.
double finite_time_sensitivity(const DerivativeProvider& dp, const Vec& u0, const Vec& p, std::size_t observable,
                               std::size_t parameter, std::size_t n, Case kind);

/// l2 norms of homogeneous perturbations, one entry per step 0..N.
/// Adjoint-type series are indexed by steps before the horizon.
struct GrowthSeries {
  std::vector<double> time;
  std::vector<double> tangent;
  std::vector<double> adjoint;
  std::vector<double> finite_difference;  ///< |f^n(u0 + eps q0) - f^n(u0)| / eps
  std::vector<double> ad_forward;
  std::vector<double> ad_reverse;
};

GrowthSeries perturbation_growth(const System& sys, const Vec& u0, const Vec& p, std::size_t n, double eps,
                                 std::uint64_t seed);

/// Least-squares slope of log(series) against time over [t0, t1].
double log_slope(const std::vector<double>& time, const std::vector<double>& series, double t0, double t1);

}  // namespace shadow
