#pragma once

#include "shadow/models/lorenz63.hpp"
#include "shadow/models/rijke.hpp"

#include <cstdint>
#include <string>

namespace shadow::models {

struct ModelSpec {
  std::string name = "lorenz63";
  double dt = 0.0;         ///< 0 selects the model default
  std::string integrator;  ///< empty selects the model default
  RijkeConfig rijke;
};

SystemPtr make_model(const ModelSpec& spec);

/// Random off-equilibrium starting state (not on the attractor; spin up first).
Vec initial_state(const System& sys, std::uint64_t seed);

/// Default run-up time in time units.
double default_runup(const System& sys);

}  // namespace shadow::models
