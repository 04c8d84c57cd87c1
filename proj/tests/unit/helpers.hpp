#pragma once

#include "shadow/dynamics.hpp"
#include "shadow/models/registry.hpp"

#include <doctest.h>

namespace shadow::test {

inline SystemPtr lorenz() { return models::make_model({"lorenz63"}); }

inline SystemPtr rijke() {
  models::ModelSpec spec;
  spec.name = "rijke";
  return models::make_model(spec);
}

inline double rel_err(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// A state on the attractor.
inline Vec attractor_state(const System& sys, std::uint64_t seed, double runup) {
  return spin_up(sys, models::initial_state(sys, seed), sys.default_parameters(), runup);
}

}  // namespace shadow::test
