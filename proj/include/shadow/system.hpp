/**
 * @file system.hpp
 * @brief The dynamical-system abstraction: a parameterized time-one map with
 *        named observables and (for ODE-backed systems) a vector field.
 *
 * Every system exposes its step map over three scalar types (double, forward
 * dual, reverse tape variable) so derivatives can be taken by operator-level
 * chain rule. The hand-derived linearization (step_tangent / step_adjoint)
 * is an independent route to the same derivatives.
 */
#pragma once

#include "shadow/ad.hpp"
#include "shadow/errors.hpp"
#include "shadow/integrators.hpp"

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shadow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline std::span<const double> as_span(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<double> as_span(Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

class System {
 public:
  virtual ~System() = default;

  [[nodiscard]] virtual std::string_view name() const = 0;
  [[nodiscard]] virtual std::size_t dim() const = 0;
  /// Time units per application of the step map.
  [[nodiscard]] virtual double dt() const = 0;
  [[nodiscard]] virtual const std::vector<std::string>& parameter_names() const = 0;
  [[nodiscard]] virtual const std::vector<std::string>& observable_names() const = 0;
  [[nodiscard]] virtual Vec default_parameters() const = 0;

  /// Throws ParameterError when p is outside the model's valid region.
  virtual void validate_parameters(const Vec& p) const { (void)p; }

  virtual void step(std::span<const double> u, std::span<const double> p, std::span<double> out) const = 0;
  virtual void step(std::span<const ad::Dual> u, std::span<const ad::Dual> p, std::span<ad::Dual> out) const = 0;
  virtual void step(std::span<const ad::Var> u, std::span<const ad::Var> p, std::span<ad::Var> out) const = 0;

  [[nodiscard]] virtual bool has_vector_field() const = 0;
  virtual void vector_field(std::span<const double> u, std::span<const double> p, std::span<double> out) const;

  /// Hand-derived tangent of the step map: (D_u f) w + (D_p f) dp.
  virtual void step_tangent(std::span<const double> u, std::span<const double> p, std::span<const double> w,
                            std::span<const double> dp, std::span<double> out) const = 0;
  /// Hand-derived adjoint of the step map: ((D_u f)^T z, (D_p f)^T z).
  virtual void step_adjoint(std::span<const double> u, std::span<const double> p, std::span<const double> z,
                            std::span<double> out_u, std::span<double> out_p) const = 0;

  /// Block forms; each column of w (dp) or z is an independent direction.
  virtual void step_tangent_block(const Vec& u, const Vec& p, const Mat& w, const Mat& dp, Mat& out) const;
  virtual void step_adjoint_block(const Vec& u, const Vec& p, const Mat& z, Mat& out_u, Mat& out_p) const;

  [[nodiscard]] virtual double observe(std::size_t k, std::span<const double> u, std::span<const double> p) const = 0;
  virtual void observe_gradient(std::size_t k, std::span<const double> u, std::span<const double> p,
                                std::span<double> out) const = 0;

  // Convenience wrappers over Eigen vectors.
  [[nodiscard]] Vec step(const Vec& u, const Vec& p) const;
  [[nodiscard]] Vec vector_field(const Vec& u, const Vec& p) const;
  [[nodiscard]] double observe(std::size_t k, const Vec& u, const Vec& p) const { return observe(k, as_span(u), as_span(p)); }
  [[nodiscard]] Vec observe_gradient(std::size_t k, const Vec& u, const Vec& p) const;

  [[nodiscard]] std::size_t num_parameters() const { return parameter_names().size(); }
  [[nodiscard]] std::size_t parameter_index(std::string_view name) const;
  [[nodiscard]] std::size_t observable_index(std::string_view name) const;
};

using SystemPtr = std::shared_ptr<const System>;

/// Adapts a model (vector field + observables written as templates over the
/// scalar type) and an explicit RK tableau into a System.
///
/// Model requirements:
///   name(), dim(), parameter_names(), default_parameters(), observable_names(),
///   template <class T> rhs(span<const T> u, span<const T> p, span<T> du),
///   rhs_jacobian(u, p, Mat& J), rhs_param_jacobian(u, p, Mat& Jp),
///   template <class T> T observable(k, span<const T> u, span<const T> p),
///   validate(const Vec& p, double dt).
template <class Model>
class OdeSystem final : public System {
 public:
  OdeSystem(Model model, ButcherTableau tableau, double dt)
      : model_(std::move(model)),
        tableau_(std::move(tableau)),
        dt_(dt),
        parameter_names_(model_.parameter_names()),
        observable_names_(model_.observable_names()) {
    if (!(dt_ > 0.0)) throw ParameterError("timestep must be positive");
  }

  [[nodiscard]] const Model& model() const { return model_; }
  [[nodiscard]] const ButcherTableau& tableau() const { return tableau_; }

  [[nodiscard]] std::string_view name() const override { return model_.name(); }
  [[nodiscard]] std::size_t dim() const override { return model_.dim(); }
  [[nodiscard]] double dt() const override { return dt_; }
  [[nodiscard]] const std::vector<std::string>& parameter_names() const override { return parameter_names_; }
  [[nodiscard]] const std::vector<std::string>& observable_names() const override { return observable_names_; }
  [[nodiscard]] Vec default_parameters() const override { return model_.default_parameters(); }
  void validate_parameters(const Vec& p) const override { model_.validate(p, dt_, tableau_); }

  void step(std::span<const double> u, std::span<const double> p, std::span<double> out) const override {
    step_impl(u, p, out);
  }
  void step(std::span<const ad::Dual> u, std::span<const ad::Dual> p, std::span<ad::Dual> out) const override {
    step_impl(u, p, out);
  }
  void step(std::span<const ad::Var> u, std::span<const ad::Var> p, std::span<ad::Var> out) const override {
    step_impl(u, p, out);
  }

  [[nodiscard]] bool has_vector_field() const override { return true; }
  void vector_field(std::span<const double> u, std::span<const double> p, std::span<double> out) const override {
    model_.rhs(u, p, out);
  }

  void step_tangent(std::span<const double> u, std::span<const double> p, std::span<const double> w,
                    std::span<const double> dp, std::span<double> out) const override {
    const auto d = static_cast<Eigen::Index>(dim());
    const auto np = static_cast<Eigen::Index>(p.size());
    Mat o(d, 1);
    step_tangent_block(Eigen::Map<const Vec>(u.data(), d), Eigen::Map<const Vec>(p.data(), np),
                       Eigen::Map<const Mat>(w.data(), d, 1), Eigen::Map<const Mat>(dp.data(), np, 1), o);
    Eigen::Map<Vec>(out.data(), d) = o.col(0);
  }

  void step_adjoint(std::span<const double> u, std::span<const double> p, std::span<const double> z,
                    std::span<double> out_u, std::span<double> out_p) const override {
    const auto d = static_cast<Eigen::Index>(dim());
    const auto np = static_cast<Eigen::Index>(p.size());
    Mat ou(d, 1);
    Mat op(np, 1);
    step_adjoint_block(Eigen::Map<const Vec>(u.data(), d), Eigen::Map<const Vec>(p.data(), np),
                       Eigen::Map<const Mat>(z.data(), d, 1), ou, op);
    Eigen::Map<Vec>(out_u.data(), d) = ou.col(0);
    Eigen::Map<Vec>(out_p.data(), np) = op.col(0);
  }

  // Linearization of the RK step: stage derivatives dK_i = J(U_i) dU_i + J_p(U_i) dp.
  void step_tangent_block(const Vec& u, const Vec& p, const Mat& w, const Mat& dp, Mat& out) const override {
    const auto d = static_cast<Eigen::Index>(dim());
    const std::size_t s = tableau_.stages;
    const Mat stage_points = rk_stage_points(tableau_, rhs_of(as_span(p)), u, dt_);
    std::vector<Mat> dk(s);
    Mat jac(d, d);
    Mat jac_p(d, p.size());
    for (std::size_t i = 0; i < s; ++i) {
      Mat du = w;
      for (std::size_t j = 0; j < i; ++j) {
        const double aij = tableau_.coeff(i, j);
        if (aij != 0.0) du += (dt_ * aij) * dk[j];
      }
      const Vec ui = stage_points.col(static_cast<Eigen::Index>(i));
      model_.rhs_jacobian(ui, p, jac);
      model_.rhs_param_jacobian(ui, p, jac_p);
      dk[i].noalias() = jac * du;
      dk[i].noalias() += jac_p * dp;
    }
    out = w;
    for (std::size_t i = 0; i < s; ++i)
      if (tableau_.b[i] != 0.0) out += (dt_ * tableau_.b[i]) * dk[i];
  }

  // Reverse sweep over the stages, from the last to the first.
  void step_adjoint_block(const Vec& u, const Vec& p, const Mat& z, Mat& out_u, Mat& out_p) const override {
    const auto d = static_cast<Eigen::Index>(dim());
    const std::size_t s = tableau_.stages;
    const Mat stage_points = rk_stage_points(tableau_, rhs_of(as_span(p)), u, dt_);
    std::vector<Mat> ubar(s);
    Mat jac(d, d);
    Mat jac_p(d, p.size());
    out_p = Mat::Zero(p.size(), z.cols());
    out_u = z;
    for (std::size_t i = s; i-- > 0;) {
      Mat kbar = (dt_ * tableau_.b[i]) * z;
      for (std::size_t l = i + 1; l < s; ++l) {
        const double ali = tableau_.coeff(l, i);
        if (ali != 0.0) kbar += (dt_ * ali) * ubar[l];
      }
      const Vec ui = stage_points.col(static_cast<Eigen::Index>(i));
      model_.rhs_jacobian(ui, p, jac);
      model_.rhs_param_jacobian(ui, p, jac_p);
      ubar[i].noalias() = jac.transpose() * kbar;
      out_p.noalias() += jac_p.transpose() * kbar;
      out_u += ubar[i];
    }
  }

  [[nodiscard]] double observe(std::size_t k, std::span<const double> u, std::span<const double> p) const override {
    return model_.template observable<double>(k, u, p);
  }

  void observe_gradient(std::size_t k, std::span<const double> u, std::span<const double> p,
                        std::span<double> out) const override {
    ad::Tape tape;
    std::vector<ad::Var> uv(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) uv[i] = tape.variable(u[i]);
    std::vector<ad::Var> pv(p.begin(), p.end());
    const ad::Var j = model_.template observable<ad::Var>(k, std::span<const ad::Var>(uv), std::span<const ad::Var>(pv));
    const double seed = 1.0;
    const auto adj = tape.gradient(std::span<const ad::Var>(&j, 1), std::span<const double>(&seed, 1));
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = adj[static_cast<std::size_t>(uv[i].id)];
  }

 private:
  auto rhs_of(std::span<const double> p) const {
    return [this, p](std::span<const double> x, std::span<double> dx) { model_.rhs(x, p, dx); };
  }

  template <class T>
  void step_impl(std::span<const T> u, std::span<const T> p, std::span<T> out) const {
    thread_local RkWorkspace<T> ws;
    auto rhs = [this, p](std::span<const T> x, std::span<T> dx) { model_.rhs(x, p, dx); };
    rk_step<T>(tableau_, rhs, u, dt_, out, ws);
  }

  Model model_;
  ButcherTableau tableau_;
  double dt_;
  std::vector<std::string> parameter_names_;
  std::vector<std::string> observable_names_;
};

/// f(u, s) = A u + s c. Used as an analytically tractable test system.
/// Observables are the coordinates, named u0, u1, ...
class LinearMapSystem final : public System {
 public:
  LinearMapSystem(Mat a, Vec c, double dt = 1.0);

  [[nodiscard]] std::string_view name() const override { return "linear-map"; }
  [[nodiscard]] std::size_t dim() const override { return static_cast<std::size_t>(a_.rows()); }
  [[nodiscard]] double dt() const override { return dt_; }
  [[nodiscard]] const std::vector<std::string>& parameter_names() const override { return parameter_names_; }
  [[nodiscard]] const std::vector<std::string>& observable_names() const override { return observable_names_; }
  [[nodiscard]] Vec default_parameters() const override { return Vec::Zero(1); }

  void step(std::span<const double> u, std::span<const double> p, std::span<double> out) const override {
    step_impl(u, p, out);
  }
  void step(std::span<const ad::Dual> u, std::span<const ad::Dual> p, std::span<ad::Dual> out) const override {
    step_impl(u, p, out);
  }
  void step(std::span<const ad::Var> u, std::span<const ad::Var> p, std::span<ad::Var> out) const override {
    step_impl(u, p, out);
  }

  [[nodiscard]] bool has_vector_field() const override { return false; }

  void step_tangent(std::span<const double> u, std::span<const double> p, std::span<const double> w,
                    std::span<const double> dp, std::span<double> out) const override;
  void step_adjoint(std::span<const double> u, std::span<const double> p, std::span<const double> z,
                    std::span<double> out_u, std::span<double> out_p) const override;

  [[nodiscard]] double observe(std::size_t k, std::span<const double> u, std::span<const double> p) const override;
  void observe_gradient(std::size_t k, std::span<const double> u, std::span<const double> p,
                        std::span<double> out) const override;

 private:
  template <class T>
  void step_impl(std::span<const T> u, std::span<const T> p, std::span<T> out) const {
    const std::size_t d = dim();
    for (std::size_t i = 0; i < d; ++i) {
      T acc = p[0] * c_(static_cast<Eigen::Index>(i));
      for (std::size_t j = 0; j < d; ++j) {
        const double aij = a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (aij != 0.0) acc = acc + aij * u[j];
      }
      out[i] = acc;
    }
  }

  Mat a_;
  Vec c_;
  double dt_;
  std::vector<std::string> parameter_names_{"s"};
  std::vector<std::string> observable_names_;
};

}  // namespace shadow
