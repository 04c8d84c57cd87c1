#include "shadow/derivatives.hpp"

#include <algorithm>
#include <vector>

namespace shadow {

DerivativeMode derivative_mode_from_string(const std::string& s) {
  if (s == "analytic") return DerivativeMode::Analytic;
  if (s == "ad-forward") return DerivativeMode::ADForward;
  if (s == "ad-reverse") return DerivativeMode::ADReverse;
  if (s == "fd") return DerivativeMode::FD;
  throw InputError("unknown derivative mode '" + s + "' (expected analytic, ad-forward, ad-reverse or fd)");
}

std::string to_string(DerivativeMode m) {
  switch (m) {
    case DerivativeMode::Analytic:
      return "analytic";
    case DerivativeMode::ADForward:
      return "ad-forward";
    case DerivativeMode::ADReverse:
      return "ad-reverse";
    case DerivativeMode::FD:
      return "fd";
  }
  return "analytic";
}

DerivativeProvider::DerivativeProvider(const System& sys, DerivativeMode mode, double fd_h)
    : sys_(&sys), mode_(mode), fd_h_(fd_h) {
  if (mode_ == DerivativeMode::FD && !(fd_h_ > 0.0)) throw InputError("finite-difference step must be positive");
}

Mat DerivativeProvider::fd_jvp_block(const Vec& u, const Vec& p, const Mat& w, const Mat& dp) const {
  const auto d = u.size();
  Mat out(d, w.cols());
  Vec up(d);
  Vec um(d);
  Vec fp(d);
  Vec fm(d);
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    const double scale = std::max(w.col(c).norm(), dp.col(c).norm());
    if (scale == 0.0) {
      out.col(c).setZero();
      continue;
    }
    const double h = fd_h_ * std::max(1.0, u.norm()) / scale;
    up = u + h * w.col(c);
    um = u - h * w.col(c);
    const Vec pp = p + h * dp.col(c);
    const Vec pm = p - h * dp.col(c);
    sys_->step(as_span(up), as_span(pp), as_span(fp));
    sys_->step(as_span(um), as_span(pm), as_span(fm));
    out.col(c) = (fp - fm) / (2.0 * h);
  }
  return out;
}

Mat DerivativeProvider::dual_jvp_block(const Vec& u, const Vec& p, const Mat& w, const Mat& dp) const {
  const auto d = static_cast<std::size_t>(u.size());
  const auto np = static_cast<std::size_t>(p.size());
  std::vector<ad::Dual> ud(d);
  std::vector<ad::Dual> pd(np);
  std::vector<ad::Dual> out(d);
  Mat res(u.size(), w.cols());
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    for (std::size_t i = 0; i < d; ++i) ud[i] = {u(static_cast<Eigen::Index>(i)), w(static_cast<Eigen::Index>(i), c)};
    for (std::size_t i = 0; i < np; ++i) pd[i] = {p(static_cast<Eigen::Index>(i)), dp(static_cast<Eigen::Index>(i), c)};
    sys_->step(std::span<const ad::Dual>(ud), std::span<const ad::Dual>(pd), std::span<ad::Dual>(out));
    for (std::size_t i = 0; i < d; ++i) res(static_cast<Eigen::Index>(i), c) = out[i].d;
  }
  return res;
}

std::pair<Mat, Mat> DerivativeProvider::tape_vjp_block(const Vec& u, const Vec& p, const Mat& z) const {
  const auto d = static_cast<std::size_t>(u.size());
  const auto np = static_cast<std::size_t>(p.size());
  ad::Tape tape;
  std::vector<ad::Var> uv(d);
  std::vector<ad::Var> pv(np);
  for (std::size_t i = 0; i < d; ++i) uv[i] = tape.variable(u(static_cast<Eigen::Index>(i)));
  for (std::size_t i = 0; i < np; ++i) pv[i] = tape.variable(p(static_cast<Eigen::Index>(i)));
  std::vector<ad::Var> out(d);
  sys_->step(std::span<const ad::Var>(uv), std::span<const ad::Var>(pv), std::span<ad::Var>(out));
  Mat gu(u.size(), z.cols());
  Mat gp(p.size(), z.cols());
  std::vector<double> seed(d);
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    for (std::size_t i = 0; i < d; ++i) seed[i] = z(static_cast<Eigen::Index>(i), c);
    const auto adj = tape.gradient(std::span<const ad::Var>(out), std::span<const double>(seed));
    for (std::size_t i = 0; i < d; ++i) gu(static_cast<Eigen::Index>(i), c) = adj[static_cast<std::size_t>(uv[i].id)];
    for (std::size_t i = 0; i < np; ++i) gp(static_cast<Eigen::Index>(i), c) = adj[static_cast<std::size_t>(pv[i].id)];
  }
  return {gu, gp};
}

Mat DerivativeProvider::full_jacobian(const Vec& u, const Vec& p) const {
  const auto d = u.size();
  const auto np = p.size();
  if (mode_ == DerivativeMode::ADReverse) {
    auto [gu, gp] = tape_vjp_block(u, p, Mat::Identity(d, d));
    Mat j(d, d + np);
    j << gu.transpose(), gp.transpose();
    return j;
  }
  Mat w = Mat::Zero(d, d + np);
  Mat dp = Mat::Zero(np, d + np);
  w.leftCols(d).setIdentity();
  dp.rightCols(np).setIdentity();
  return jvp_block(u, p, w, dp);
}

Mat DerivativeProvider::jvp_block(const Vec& u, const Vec& p, const Mat& w, const Mat& dp) const {
  switch (mode_) {
    case DerivativeMode::Analytic: {
      Mat out;
      sys_->step_tangent_block(u, p, w, dp, out);
      return out;
    }
    case DerivativeMode::ADForward:
      return dual_jvp_block(u, p, w, dp);
    case DerivativeMode::FD:
      return fd_jvp_block(u, p, w, dp);
    case DerivativeMode::ADReverse: {
      const Mat j = full_jacobian(u, p);
      return j.leftCols(u.size()) * w + j.rightCols(p.size()) * dp;
    }
  }
  return {};
}

Vec DerivativeProvider::jvp(const Vec& u, const Vec& p, const Vec& w, const Vec& dp) const {
  return jvp_block(u, p, w, dp).col(0);
}

std::pair<Mat, Mat> DerivativeProvider::vjp_block(const Vec& u, const Vec& p, const Mat& z) const {
  switch (mode_) {
    case DerivativeMode::Analytic: {
      Mat gu;
      Mat gp;
      sys_->step_adjoint_block(u, p, z, gu, gp);
      return {gu, gp};
    }
    case DerivativeMode::ADReverse:
      return tape_vjp_block(u, p, z);
    case DerivativeMode::ADForward:
    case DerivativeMode::FD: {
      const Mat jt = full_jacobian(u, p).transpose();
      return {jt.topRows(u.size()) * z, jt.bottomRows(p.size()) * z};
    }
  }
  return {};
}

std::pair<Vec, Vec> DerivativeProvider::vjp(const Vec& u, const Vec& p, const Vec& z) const {
  auto [gu, gp] = vjp_block(u, p, z);
  return {gu.col(0), gp.col(0)};
}

Mat DerivativeProvider::jacobian(const Vec& u, const Vec& p) const {
  if (mode_ == DerivativeMode::ADReverse) return full_jacobian(u, p).leftCols(u.size());
  return jvp_block(u, p, Mat::Identity(u.size(), u.size()), Mat::Zero(p.size(), u.size()));
}

Mat DerivativeProvider::param_jacobian(const Vec& u, const Vec& p) const {
  if (mode_ == DerivativeMode::ADReverse) return full_jacobian(u, p).rightCols(p.size());
  return jvp_block(u, p, Mat::Zero(u.size(), p.size()), Mat::Identity(p.size(), p.size()));
}

}  // namespace shadow
