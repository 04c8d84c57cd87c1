#include "shadow/shadowing.hpp"

#include "shadow/dynamics.hpp"
#include "shadow/lyapunov.hpp"
#include "shadow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace shadow {

Vec Propagator::center(std::size_t) const { throw InputError("center handling needs a vector field"); }

MatrixPropagator::MatrixPropagator(std::vector<Mat> a, std::vector<Vec> b, std::vector<Vec> f)
    : a_(std::move(a)), b_(std::move(b)), f_(std::move(f)) {
  if (a_.empty()) throw InputError("matrix propagator: no steps");
  if (b_.size() != a_.size() + 1) throw InputError("matrix propagator: need b_0..b_N");
  if (!f_.empty() && f_.size() != a_.size() + 1) throw InputError("matrix propagator: need F_0..F_N");
}

void MatrixPropagator::advance(std::size_t n, const Mat& q, const Vec& v, Mat& aq, Vec& av) const {
  aq.noalias() = a_[n - 1] * q;
  av.noalias() = a_[n - 1] * v;
  av += b_[n];
}

Vec MatrixPropagator::center(std::size_t n) const {
  if (f_.empty()) return Propagator::center(n);
  return f_[n];
}

Vec PerturbationSequence::exponents(double dt) const {
  const Eigen::Index du = q.front().cols();
  Vec s = Vec::Zero(du);
  for (std::size_t n = 1; n < r.size(); ++n)
    for (Eigen::Index i = 0; i < du; ++i) s(i) += std::log(r[n](i, i));
  return s / (static_cast<double>(steps()) * dt);
}

PerturbationSequence n_loop(const Propagator& prop, Case kind, bool center, const Mat& q0) {
  const std::size_t n_steps = prop.steps();
  const auto d = static_cast<Eigen::Index>(prop.dim());
  const Eigen::Index du = q0.cols();
  if (q0.rows() != d || du < 1 || du > d) throw InputError("n-loop: Q_0 must be d x d_u with 1 <= d_u <= d");
  const bool tangent_center = center && kind == Case::Tangent;
  const bool adjoint_center = center && kind == Case::Adjoint;

  PerturbationSequence seq;
  seq.kind = kind;
  seq.center = center;
  seq.q.resize(n_steps + 1);
  seq.r.resize(n_steps + 1);
  seq.v.resize(n_steps + 1);
  seq.pi.resize(n_steps + 1);
  if (tangent_center) {
    seq.center_v.assign(n_steps + 1, 0.0);
    seq.center_q.assign(n_steps + 1, Vec::Zero(du));
  }
  if (adjoint_center) {
    seq.v_dot_f.assign(n_steps + 1, 0.0);
    seq.qt_f.assign(n_steps + 1, Vec::Zero(du));
  }

  Mat q = q0;
  if (tangent_center) {
    const Vec f = prop.center(0);
    q -= f * (f.transpose() * q) / f.squaredNorm();
  }
  seq.q[0] = qr_positive(q, 0).first;
  seq.r[0] = Mat::Identity(du, du);
  seq.v[0] = Vec::Zero(d);
  seq.pi[0] = Vec::Zero(du);

  Mat aq(d, du);
  Vec av(d);
  for (std::size_t n = 1; n <= n_steps; ++n) {
    prop.advance(n, seq.q[n - 1], seq.v[n - 1], aq, av);
    if (!aq.allFinite() || !av.allFinite()) {
      throw NumericalBlowup("n-loop: non-finite perturbation at step " + std::to_string(n), n);
    }
    if (tangent_center) {
      const Vec f = prop.center(n);
      const double f2 = f.squaredNorm();
      const Vec g = aq.transpose() * f / f2;
      const double c = av.dot(f) / f2;
      aq -= f * g.transpose();
      av -= c * f;
      seq.center_q[n] = g;
      seq.center_v[n] = c;
    }
    auto [qn, rn] = qr_positive(aq, n);
    Vec pi = qn.transpose() * av;
    av -= qn * pi;
    if (adjoint_center) {
      const Vec f = prop.center(n);
      seq.v_dot_f[n] = av.dot(f);
      seq.qt_f[n] = qn.transpose() * f;
    }
    seq.q[n] = std::move(qn);
    seq.r[n] = std::move(rn);
    seq.pi[n] = std::move(pi);
    seq.v[n] = av;
  }
  return seq;
}

CoefficientSolution solve_coefficients(const PerturbationSequence& seq, bool dense, bool estimate_condition) {
  ExtraRow row;
  const ExtraRow* row_ptr = nullptr;
  if (seq.kind == Case::Adjoint && seq.center) {
    row.w = seq.qt_f;
    row.rhs = 0.0;
    for (std::size_t n = 1; n < seq.v_dot_f.size(); ++n) row.rhs -= seq.v_dot_f[n];
    row_ptr = &row;
  }
  return dense ? solve_min_norm_dense(seq.r, seq.pi, row_ptr)
               : solve_min_norm(seq.r, seq.pi, row_ptr, estimate_condition);
}

double constraint_residual(const PerturbationSequence& seq, const std::vector<Vec>& a) {
  double worst = 0.0;
  for (std::size_t n = 1; n < a.size(); ++n)
    worst = std::max(worst, (a[n] - seq.r[n] * a[n - 1] - seq.pi[n]).norm());
  return worst;
}

std::vector<Vec> shadowing_perturbation(const PerturbationSequence& seq, const std::vector<Vec>& a) {
  std::vector<Vec> vsh(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) vsh[n] = seq.v[n] + seq.q[n] * a[n];
  return vsh;
}

std::vector<double> time_dilation(const PerturbationSequence& seq, const std::vector<Vec>& a) {
  std::vector<double> xi(a.size(), 0.0);
  if (seq.center_v.empty()) return xi;
  for (std::size_t n = 1; n < a.size(); ++n) xi[n] = seq.center_v[n] + seq.center_q[n].dot(a[n - 1]);
  return xi;
}

Objective observable_objective(const System& sys, std::size_t k, const Vec& p) {
  Objective o;
  o.name = sys.observable_names().at(k);
  const System* s = &sys;
  o.value = [s, k, p](std::size_t, const Vec& u) { return s->observe(k, u, p); };
  o.gradient = [s, k, p](std::size_t, const Vec& u) { return s->observe_gradient(k, u, p); };
  return o;
}

LoopMode loop_mode_from_string(const std::string& s) {
  if (s == "matrix") return LoopMode::Matrix;
  if (s == "direct" || s == "ad") return LoopMode::Direct;
  throw InputError("unknown n-loop mode '" + s + "' (expected matrix or direct)");
}

namespace {

// Neutral direction of the discrete map at orbit index n: the central
// difference of the orbit, which matches the map's own time-shift direction to
// O(dt^2) where F(u_n) is only O(dt) accurate. One-sided at the ends.
Vec orbit_center(const std::vector<Vec>& orbit, std::size_t n, double dt) {
  if (n == 0) return (orbit[1] - orbit[0]) / dt;
  if (n + 1 == orbit.size()) return (orbit[n] - orbit[n - 1]) / dt;
  return (orbit[n + 1] - orbit[n - 1]) / (2.0 * dt);
}

class TangentPropagator final : public Propagator {
 public:
  TangentPropagator(const DerivativeProvider& dp, const std::vector<Vec>& orbit, const Vec& p, std::size_t parameter,
                    std::size_t n)
      : dp_(dp), orbit_(orbit), p_(p), parameter_(parameter), n_(n) {}
  [[nodiscard]] std::size_t steps() const override { return n_; }
  [[nodiscard]] std::size_t dim() const override { return dp_.system().dim(); }
  void advance(std::size_t n, const Mat& q, const Vec& v, Mat& aq, Vec& av) const override {
    const Eigen::Index du = q.cols();
    Mat w(q.rows(), du + 1);
    w << q, v;
    Mat dpm = Mat::Zero(p_.size(), du + 1);
    dpm(static_cast<Eigen::Index>(parameter_), du) = 1.0;
    const Mat out = dp_.jvp_block(orbit_[n - 1], p_, w, dpm);
    aq = out.leftCols(du);
    av = out.col(du);
  }
  [[nodiscard]] Vec center(std::size_t n) const override { return orbit_center(orbit_, n, dp_.system().dt()); }

 private:
  const DerivativeProvider& dp_;
  const std::vector<Vec>& orbit_;
  const Vec& p_;
  std::size_t parameter_;
  std::size_t n_;
};

class AdjointPropagator final : public Propagator {
 public:
  AdjointPropagator(const DerivativeProvider& dp, const std::vector<Vec>& orbit, const Vec& p, const Objective& obj,
                    std::size_t n)
      : dp_(dp), orbit_(orbit), p_(p), obj_(obj), n_(n) {}
  [[nodiscard]] std::size_t steps() const override { return n_; }
  [[nodiscard]] std::size_t dim() const override { return dp_.system().dim(); }
  void advance(std::size_t n, const Mat& q, const Vec& v, Mat& aq, Vec& av) const override {
    const std::size_t m = n_ + 2 - n;
    const Eigen::Index du = q.cols();
    Mat z(q.rows(), du + 1);
    z << q, v;
    const Mat gu = dp_.vjp_block(orbit_[m], p_, z).first;
    aq = gu.leftCols(du);
    av = gu.col(du) + obj_.gradient(m, orbit_[m]);
  }
  [[nodiscard]] Vec center(std::size_t n) const override {
    return orbit_center(orbit_, n_ + 2 - n, dp_.system().dt());
  }

 private:
  const DerivativeProvider& dp_;
  const std::vector<Vec>& orbit_;
  const Vec& p_;
  const Objective& obj_;
  std::size_t n_;
};

double median(std::vector<double> x) {
  const auto mid = x.begin() + static_cast<std::ptrdiff_t>(x.size() / 2);
  std::nth_element(x.begin(), mid, x.end());
  return *mid;
}

}  // namespace

ShadowingSolution shadow_window(const System& sys, const std::vector<Vec>& orbit, const Vec& p, std::size_t parameter,
                                const std::vector<Objective>& objectives, const ShadowingOptions& opts) {
  if (orbit.size() < 4) throw InputError("shadowing: orbit must hold u_0..u_{N+1} with N >= 2");
  const std::size_t n_steps = orbit.size() - 2;
  const auto d = static_cast<Eigen::Index>(sys.dim());
  const auto du = static_cast<Eigen::Index>(opts.du);
  const double dt = sys.dt();
  if (opts.kind == Case::Tangent && parameter >= sys.num_parameters()) throw InputError("shadowing: bad parameter");
  if (opts.kind == Case::Adjoint && objectives.size() != 1) {
    throw InputError("adjoint shadowing takes exactly one objective");
  }
  if (objectives.empty()) throw InputError("shadowing: no objective");

  const DerivativeProvider dp(sys, opts.derivatives);
  std::mt19937_64 rng(opts.seed);
  const Mat q0 = random_matrix(d, du, rng);

  ShadowingSolution sol;
  sol.kind = opts.kind;
  if (opts.loop == LoopMode::Direct) {
    if (opts.kind == Case::Tangent) {
      const TangentPropagator prop(dp, orbit, p, parameter, n_steps);
      sol.sequence = n_loop(prop, opts.kind, opts.center, q0);
    } else {
      const AdjointPropagator prop(dp, orbit, p, objectives.front(), n_steps);
      sol.sequence = n_loop(prop, opts.kind, opts.center, q0);
    }
  } else {
    std::vector<Mat> a(n_steps);
    std::vector<Vec> b(n_steps + 1, Vec::Zero(d));
    std::vector<Vec> f;
    if (opts.kind == Case::Tangent) {
      for (std::size_t i = 0; i < n_steps; ++i) a[i] = dp.jacobian(orbit[i], p);
      for (std::size_t n = 1; n <= n_steps; ++n)
        b[n] = dp.param_jacobian(orbit[n - 1], p).col(static_cast<Eigen::Index>(parameter));
      if (opts.center) {
        f.resize(n_steps + 1);
        for (std::size_t n = 0; n <= n_steps; ++n) f[n] = orbit_center(orbit, n, dt);
      }
    } else {
      for (std::size_t i = 0; i < n_steps; ++i) a[i] = dp.jacobian(orbit[n_steps + 1 - i], p).transpose();
      for (std::size_t n = 1; n <= n_steps; ++n) {
        const std::size_t m = n_steps + 2 - n;
        b[n] = objectives.front().gradient(m, orbit[m]);
      }
      if (opts.center) {
        f.assign(n_steps + 1, Vec::Zero(d));
        for (std::size_t n = 1; n <= n_steps; ++n) f[n] = orbit_center(orbit, n_steps + 2 - n, dt);
      }
    }
    const MatrixPropagator prop(std::move(a), std::move(b), std::move(f));
    sol.sequence = n_loop(prop, opts.kind, opts.center, q0);
  }
  const PerturbationSequence& seq = sol.sequence;

  const CoefficientSolution coeff = solve_coefficients(seq, false, opts.estimate_condition);
  sol.a = coeff.a;
  sol.lsq_residual = coeff.residual;
  sol.condition = coeff.condition;
  sol.constraint_residual = constraint_residual(seq, sol.a);
  sol.v_shadow = shadowing_perturbation(seq, sol.a);
  sol.exponents = seq.exponents(dt);
  if (sol.condition > kIllConditioned) {
    std::ostringstream os;
    os << "ill-conditioned least-squares system (cond ~ " << sol.condition << ")";
    sol.warnings.push_back(os.str());
  }

  std::vector<double> norms(n_steps + 1);
  for (std::size_t n = 0; n <= n_steps; ++n) norms[n] = sol.v_shadow[n].norm();
  sol.max_v_shadow = *std::max_element(norms.begin(), norms.end());
  sol.median_v_shadow = median(norms);

  // Spin-up exclusion.
  const double window = static_cast<double>(n_steps) * dt;
  double excl = opts.exclude_time;
  if (excl < 0.0) {
    const double lambda1 = sol.exponents.maxCoeff();
    excl = lambda1 > 0.0 ? std::ceil(1.0 / lambda1) : window;
    excl = std::min(excl, kMaxExclusionFraction * window);
  }
  sol.excluded_steps = std::min(steps_for(excl, dt), n_steps - 1);
  const std::size_t first = sol.excluded_steps + 1;
  const double count = static_cast<double>(n_steps + 1 - first);

  if (opts.kind == Case::Tangent) {
    if (opts.center) sol.xi = time_dilation(seq, sol.a);
    sol.sensitivity = Vec::Zero(static_cast<Eigen::Index>(objectives.size()));
    for (std::size_t j = 0; j < objectives.size(); ++j) {
      const Objective& obj = objectives[j];
      double s = 0.0;
      std::vector<double> jv(n_steps + 1, 0.0);
      for (std::size_t n = first; n <= n_steps; ++n) {
        s += obj.gradient(n, orbit[n]).dot(sol.v_shadow[n]);
        if (opts.center) jv[n] = obj.value(n, orbit[n]);
      }
      s /= count;
      if (opts.center) {
        double jbar = 0.0;
        for (std::size_t n = first; n <= n_steps; ++n) jbar += jv[n];
        jbar /= count;
        double dil = 0.0;
        for (std::size_t n = first; n <= n_steps; ++n) dil += sol.xi[n] * (jv[n] - jbar);
        s -= dil / (count * dt);
      }
      sol.sensitivity(static_cast<Eigen::Index>(j)) = s;
    }
  } else {
    sol.sensitivity = Vec::Zero(p.size());
    for (std::size_t n = first; n <= n_steps; ++n) {
      const Vec& at = orbit[n_steps + 1 - n];
      if (opts.loop == LoopMode::Matrix) {
        sol.sensitivity += dp.param_jacobian(at, p).transpose() * sol.v_shadow[n];
      } else {
        sol.sensitivity += dp.vjp(at, p, sol.v_shadow[n]).second;
      }
    }
    sol.sensitivity /= count;
  }
  return sol;
}

SensitivityRun shadowing_sensitivity(const System& sys, const Vec& u_start, const Vec& p,
                                     const SensitivityConfig& cfg) {
  if (cfg.samples < 1) throw InputError("sensitivity: need at least one window");
  const std::size_t n_steps = steps_for(cfg.window_time, sys.dt());
  if (n_steps < 2) throw InputError("sensitivity: window shorter than two steps");

  SensitivityRun run;
  run.kind = cfg.shadow.kind;
  std::vector<std::size_t> obs;
  if (cfg.shadow.kind == Case::Tangent) {
    if (cfg.observables.empty()) {
      for (std::size_t k = 0; k < sys.observable_names().size(); ++k) obs.push_back(k);
    } else {
      for (const auto& name : cfg.observables) obs.push_back(sys.observable_index(name));
    }
  } else {
    if (cfg.observables.size() != 1) throw InputError("adjoint sensitivity takes exactly one observable");
    obs.push_back(sys.observable_index(cfg.observables.front()));
  }
  const std::size_t parameter =
      cfg.shadow.kind == Case::Tangent ? sys.parameter_index(cfg.parameter) : std::size_t{0};
  std::vector<Objective> objectives;
  for (std::size_t k : obs) objectives.push_back(observable_objective(sys, k, p));
  if (cfg.shadow.kind == Case::Tangent) {
    for (std::size_t k : obs) run.labels.push_back("d<" + sys.observable_names()[k] + ">/d" + cfg.parameter);
  } else {
    for (const auto& pn : sys.parameter_names())
      run.labels.push_back("d<" + sys.observable_names()[obs.front()] + ">/d" + pn);
  }

  std::vector<Vec> starts(cfg.samples);
  starts[0] = spin_up(sys, u_start, p, cfg.runup_time);
  for (std::size_t i = 1; i < cfg.samples; ++i) {
    Vec u = starts[i - 1];
    Vec next(u.size());
    for (std::size_t s = 0; s < n_steps; ++s) {
      sys.step(as_span(u), as_span(p), as_span(next));
      check_finite(as_span(next), s + 1);
      u.swap(next);
    }
    starts[i] = u;
  }

  const auto labels = static_cast<Eigen::Index>(run.labels.size());
  run.samples.resize(static_cast<Eigen::Index>(cfg.samples), labels);
  run.excluded_steps.resize(cfg.samples);
  run.max_v_shadow.resize(cfg.samples);
  run.condition.resize(cfg.samples);
  std::vector<std::vector<std::string>> warnings(cfg.samples);
  parallel_for(cfg.samples, cfg.workers, [&](std::size_t i) {
    const std::vector<Vec> u = orbit(sys, starts[i], p, n_steps + 1);
    ShadowingOptions opts = cfg.shadow;
    opts.seed = derive_seed(cfg.shadow.seed, i);
    const ShadowingSolution sol = shadow_window(sys, u, p, parameter, objectives, opts);
    run.samples.row(static_cast<Eigen::Index>(i)) = sol.sensitivity.transpose();
    run.excluded_steps[i] = sol.excluded_steps;
    run.max_v_shadow[i] = sol.max_v_shadow;
    run.condition[i] = sol.condition;
    for (const auto& w : sol.warnings) warnings[i].push_back("window " + std::to_string(i) + ": " + w);
  });
  for (auto& w : warnings) run.warnings.insert(run.warnings.end(), w.begin(), w.end());

  const auto m = static_cast<Eigen::Index>(cfg.samples);
  run.cumulative.resize(m, labels);
  Vec acc = Vec::Zero(labels);
  for (Eigen::Index i = 0; i < m; ++i) {
    acc += run.samples.row(i).transpose();
    run.cumulative.row(i) = (acc / static_cast<double>(i + 1)).transpose();
  }
  run.mean = run.samples.colwise().mean().transpose();
  run.standard_error = Vec::Zero(labels);
  if (m > 1) {
    for (Eigen::Index j = 0; j < labels; ++j) {
      const double var = (run.samples.col(j).array() - run.mean(j)).square().sum() / static_cast<double>(m - 1);
      run.standard_error(j) = std::sqrt(var / static_cast<double>(m));
    }
  }
  return run;
}

}  // namespace shadow
