#include "shadow/models/registry.hpp"

#include "shadow/perturbation.hpp"

#include <random>

namespace shadow::models {

SystemPtr make_model(const ModelSpec& spec) {
  if (spec.name == "lorenz63") {
    return make_lorenz63(spec.dt > 0.0 ? spec.dt : 0.005, spec.integrator.empty() ? "euler" : spec.integrator);
  }
  if (spec.name == "rijke") {
    return make_rijke(spec.rijke, spec.dt > 0.0 ? spec.dt : 0.01, spec.integrator.empty() ? "dopri5" : spec.integrator);
  }
  throw InputError("unknown model '" + spec.name + "' (expected lorenz63 or rijke)");
}

Vec initial_state(const System& sys, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto d = static_cast<Eigen::Index>(sys.dim());
  const Mat noise = random_matrix(d, 1, rng);
  if (sys.name() == "lorenz63") return Vec::Constant(3, 1.0) + noise.col(0);
  if (sys.name() == "rijke") {
    const auto* rk = dynamic_cast<const OdeSystem<Rijke>*>(&sys);
    const auto ng = static_cast<Eigen::Index>(rk->model().config().galerkin_modes);
    Vec u = Vec::Zero(d);
    u.head(2 * ng) = 0.1 * noise.col(0).head(2 * ng);
    return u;
  }
  return 0.1 * noise.col(0);
}

double default_runup(const System& sys) {
  if (sys.name() == "lorenz63") return 50.0;
  if (sys.name() == "rijke") return 10000.0;
  return 0.0;
}

}  // namespace shadow::models
