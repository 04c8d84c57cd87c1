#include "shadow/models/rijke.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <sstream>

namespace shadow::models {

double heat_release_derivative(double u) {
  const double w = u + 1.0;
  if (w >= -0.01 && w <= 0.01) return 3500.0 * w - 3.0e7 * w * w * w;
  const double s = std::sqrt(std::abs(w));
  return (w > 0.0 ? 0.5 : -0.5) / s;
}

Rijke::Rijke(RijkeConfig cfg) : cfg_(cfg), ng_(cfg.galerkin_modes), nc_(cfg.chebyshev_points) {
  if (ng_ < 2 || nc_ < 2) throw ParameterError("rijke: need at least 2 Galerkin modes and 2 Chebyshev points");
  if (!(cfg_.flame_position > 0.0 && cfg_.flame_position < 1.0)) {
    throw ParameterError("rijke: flame position must lie in (0, 1)");
  }
  const auto ng = static_cast<Eigen::Index>(ng_);
  jpi_.resize(ng);
  zeta_.resize(ng);
  sin_.resize(ng);
  cos_.resize(ng);
  for (Eigen::Index j = 0; j < ng; ++j) {
    const double mode = static_cast<double>(j + 1);
    jpi_(j) = mode * std::numbers::pi;
    zeta_(j) = cfg_.c1 * mode * mode + cfg_.c2 * std::sqrt(mode);
    sin_(j) = std::sin(jpi_(j) * cfg_.flame_position);
    cos_(j) = std::cos(jpi_(j) * cfg_.flame_position);
  }
  diff_ = cheb(nc_ + 1).diff;
}

void Rijke::rhs_jacobian(const Vec& u, const Vec& p, Mat& j) const {
  const auto ng = static_cast<Eigen::Index>(ng_);
  const auto nc = static_cast<Eigen::Index>(nc_);
  const double beta = p(0);
  const double tau = p(1);
  j.setZero();
  const double dq = heat_release_derivative(u(2 * ng));
  for (Eigen::Index m = 0; m < ng; ++m) {
    j(m, ng + m) = jpi_(m);
    j(ng + m, m) = -jpi_(m);
    j(ng + m, ng + m) = -zeta_(m);
    j(ng + m, 2 * ng) = -2.0 * beta * dq * sin_(m);
  }
  const double speed = -2.0 / tau;
  for (Eigen::Index i = 0; i < nc; ++i) {
    for (Eigen::Index m = 0; m < nc; ++m) j(2 * ng + i, 2 * ng + m) = speed * diff_(i, m);
    for (Eigen::Index k = 0; k < ng; ++k) j(2 * ng + i, k) = speed * diff_(i, nc) * cos_(k);
  }
}

void Rijke::rhs_param_jacobian(const Vec& u, const Vec& p, Mat& jp) const {
  const auto ng = static_cast<Eigen::Index>(ng_);
  const auto nc = static_cast<Eigen::Index>(nc_);
  const double tau = p(1);
  jp.setZero();
  const double q = heat_release(u(2 * ng));
  for (Eigen::Index m = 0; m < ng; ++m) jp(ng + m, 0) = -2.0 * q * sin_(m);
  const double uf = cos_.dot(u.head(ng));
  for (Eigen::Index i = 0; i < nc; ++i) {
    const double dv = diff_.row(i).head(nc).dot(u.segment(2 * ng, nc)) + diff_(i, nc) * uf;
    jp(2 * ng + i, 1) = 2.0 / (tau * tau) * dv;
  }
}

double Rijke::advection_amplification(double tau, double dt, const ButcherTableau& tableau) const {
  const auto nc = static_cast<Eigen::Index>(nc_);
  const Mat block = (-2.0 / tau) * diff_.topLeftCorner(nc, nc);
  const Eigen::VectorXcd eig = block.eigenvalues();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < eig.size(); ++i) worst = std::max(worst, std::abs(tableau.stability(dt * eig(i))));
  return worst;
}

void Rijke::validate(const Vec& p, double dt, const ButcherTableau& tableau) const {
  if (p.size() != 2 || !std::isfinite(p(0)) || !std::isfinite(p(1))) {
    throw ParameterError("rijke: parameters (beta, tau) must be finite");
  }
  if (!(p(1) > 0.0)) throw ParameterError("rijke: time delay tau must be positive");
  const double amp = advection_amplification(p(1), dt, tableau);
  if (amp > 1.0) {
    std::ostringstream os;
    os << "rijke: advection block unstable at tau=" << p(1) << ", dt=" << dt << " (max |R(dt*lambda)| = " << amp
       << ")";
    throw ParameterError(os.str());
  }
}

std::shared_ptr<const OdeSystem<Rijke>> make_rijke(RijkeConfig cfg, double dt, const std::string& integrator) {
  auto sys = std::make_shared<const OdeSystem<Rijke>>(Rijke(cfg), tableau_by_name(integrator), dt);
  sys->validate_parameters(sys->default_parameters());
  return sys;
}

}  // namespace shadow::models
