#include "shadow/models/lorenz63.hpp"

namespace shadow::models {

std::shared_ptr<const OdeSystem<Lorenz63>> make_lorenz63(double dt, const std::string& integrator) {
  return std::make_shared<const OdeSystem<Lorenz63>>(Lorenz63{}, tableau_by_name(integrator), dt);
}

}  // namespace shadow::models
