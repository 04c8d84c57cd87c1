#include "shadow/system.hpp"

#include <string>

namespace shadow {

void System::vector_field(std::span<const double>, std::span<const double>, std::span<double>) const {
  throw InputError(std::string(name()) + " has no continuous-time vector field");
}

Vec System::step(const Vec& u, const Vec& p) const {
  if (static_cast<std::size_t>(u.size()) != dim()) {
    throw InputError("state has length " + std::to_string(u.size()) + ", expected " + std::to_string(dim()));
  }
  if (static_cast<std::size_t>(p.size()) != num_parameters()) {
    throw InputError("parameter vector has length " + std::to_string(p.size()) + ", expected " +
                     std::to_string(num_parameters()));
  }
  Vec out(u.size());
  step(as_span(u), as_span(p), as_span(out));
  return out;
}

Vec System::vector_field(const Vec& u, const Vec& p) const {
  Vec out(u.size());
  vector_field(as_span(u), as_span(p), as_span(out));
  return out;
}

Vec System::observe_gradient(std::size_t k, const Vec& u, const Vec& p) const {
  Vec out(u.size());
  observe_gradient(k, as_span(u), as_span(p), as_span(out));
  return out;
}

void System::step_tangent_block(const Vec& u, const Vec& p, const Mat& w, const Mat& dp, Mat& out) const {
  out.resize(w.rows(), w.cols());
  Vec col(w.rows());
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    const Vec wc = w.col(c);
    const Vec pc = dp.col(c);
    step_tangent(as_span(u), as_span(p), as_span(wc), as_span(pc), as_span(col));
    out.col(c) = col;
  }
}

void System::step_adjoint_block(const Vec& u, const Vec& p, const Mat& z, Mat& out_u, Mat& out_p) const {
  out_u.resize(z.rows(), z.cols());
  out_p.resize(p.size(), z.cols());
  Vec cu(z.rows());
  Vec cp(p.size());
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const Vec zc = z.col(c);
    step_adjoint(as_span(u), as_span(p), as_span(zc), as_span(cu), as_span(cp));
    out_u.col(c) = cu;
    out_p.col(c) = cp;
  }
}

std::size_t System::parameter_index(std::string_view n) const {
  const auto& names = parameter_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == n) return i;
  throw InputError("unknown parameter '" + std::string(n) + "' for system " + std::string(name()));
}

std::size_t System::observable_index(std::string_view n) const {
  const auto& names = observable_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == n) return i;
  throw InputError("unknown observable '" + std::string(n) + "' for system " + std::string(name()));
}

LinearMapSystem::LinearMapSystem(Mat a, Vec c, double dt) : a_(std::move(a)), c_(std::move(c)), dt_(dt) {
  if (a_.rows() != a_.cols() || a_.rows() != c_.size()) throw InputError("linear map: A must be square and match c");
  for (Eigen::Index i = 0; i < a_.rows(); ++i) observable_names_.push_back("u" + std::to_string(i));
}

void LinearMapSystem::step_tangent(std::span<const double>, std::span<const double>, std::span<const double> w,
                                   std::span<const double> dp, std::span<double> out) const {
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::Map<Vec>(out.data(), d) = a_ * Eigen::Map<const Vec>(w.data(), d) + dp[0] * c_;
}

void LinearMapSystem::step_adjoint(std::span<const double>, std::span<const double>, std::span<const double> z,
                                   std::span<double> out_u, std::span<double> out_p) const {
  const auto d = static_cast<Eigen::Index>(dim());
  const Eigen::Map<const Vec> zv(z.data(), d);
  Eigen::Map<Vec>(out_u.data(), d) = a_.transpose() * zv;
  out_p[0] = c_.dot(zv);
}

double LinearMapSystem::observe(std::size_t k, std::span<const double> u, std::span<const double>) const {
  return u[k];
}

void LinearMapSystem::observe_gradient(std::size_t k, std::span<const double> u, std::span<const double>,
                                       std::span<double> out) const {
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = i == k ? 1.0 : 0.0;
}

}  // namespace shadow
