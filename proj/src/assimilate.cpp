#include "shadow/assimilate.hpp"

#include "shadow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace shadow {

Twin generate_twin(const System& sys, const Vec& u_ref, const Vec& p_ref, std::size_t n, const std::string& observable,
                   double variance, const std::vector<int>& mask, std::uint64_t seed) {
  if (!(variance >= 0.0)) throw InputError("twin: noise variance must be non-negative");
  if (!mask.empty() && mask.size() != sys.dim()) throw InputError("twin: mask length must equal the state dimension");
  const std::size_t k = sys.observable_index(observable);
  Twin t;
  t.reference = orbit(sys, u_ref, p_ref, n);
  t.observed.reserve(t.reference.size());
  for (const Vec& u : t.reference) t.observed.push_back(sys.observe(k, u, p_ref));
  t.background = u_ref;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  for (Eigen::Index i = 0; i < u_ref.size(); ++i) {
    const double e = normal(rng);
    if (mask.empty() || mask[static_cast<std::size_t>(i)] != 0) t.background(i) += e;
  }
  return t;
}

std::vector<double> relative_errors(const std::vector<double>& observed, const std::vector<double>& predicted,
                                    std::vector<bool>* clamped) {
  if (observed.size() != predicted.size()) throw InputError("relative error: length mismatch");
  std::vector<double> mag(observed.size());
  for (std::size_t i = 0; i < observed.size(); ++i) mag[i] = std::abs(observed[i]);
  std::vector<double> sorted = mag;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double floor = kDenominatorFloor * sorted[sorted.size() / 2];
  std::vector<double> err(observed.size());
  if (clamped) clamped->assign(observed.size(), false);
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double den = mag[i];
    if (den < floor || den == 0.0) {
      den = floor > 0.0 ? floor : 1.0;
      if (clamped) (*clamped)[i] = true;
    }
    err[i] = std::abs(observed[i] - predicted[i]) / den;
  }
  return err;
}

namespace {

struct Misfit {
  std::vector<Vec> orbit;
  double value = 0.0;
};

std::vector<double> observe_window(const System& sys, std::size_t k, const std::vector<Vec>& u, const Vec& p,
                                   std::size_t first, std::size_t count) {
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = sys.observe(k, u[first + i], p);
  return g;
}

}  // namespace

AnalysisResult assimilate(const System& sys, const AssimilationProblem& pr) {
  const std::size_t k_obs = sys.observable_index(pr.observable);
  const std::size_t idx = sys.parameter_index(pr.parameter);
  const std::size_t kk = pr.spinup_steps;
  const std::size_t nn = pr.window_steps;
  if (nn < 2) throw InputError("assimilate: window needs at least two steps");
  if (pr.observed.size() < kk + nn + 1) throw InputError("assimilate: observations must cover every orbit index");
  if (!(pr.gamma > 0.0)) throw InputError("assimilate: gamma must be positive");

  Vec p = pr.parameters;
  const auto pi = static_cast<Eigen::Index>(idx);
  std::vector<Vec> prefix = orbit(sys, pr.background, p, kk);  // u_0..u_K
  Vec start = prefix.back();
  prefix.pop_back();

  const std::vector<double>& obs = pr.observed;
  Objective misfit;
  misfit.name = "misfit";
  misfit.value = [&](std::size_t n, const Vec& u) {
    const double r = obs[n] - sys.observe(k_obs, u, p);
    return r * r;
  };
  misfit.gradient = [&](std::size_t n, const Vec& u) {
    const double r = obs[n] - sys.observe(k_obs, u, p);
    return Vec(-2.0 * r * sys.observe_gradient(k_obs, u, p));
  };

  ShadowingOptions opts = pr.shadow;
  opts.kind = Case::Tangent;
  opts.exclude_time = static_cast<double>(kk) * sys.dt();

  auto pseudo_orbit = [&](const Vec& u_k) {
    std::vector<Vec> full = prefix;
    std::vector<Vec> tail = orbit(sys, u_k, p, nn + 1);
    full.insert(full.end(), tail.begin(), tail.end());
    return full;
  };
  auto window_misfit = [&](const std::vector<Vec>& u) {
    double acc = 0.0;
    for (std::size_t n = kk; n <= kk + nn; ++n) acc += misfit.value(n, u[n]);
    return acc / static_cast<double>(nn + 1);
  };

  AnalysisResult res;
  res.stop_reason = "step budget";
  // Backtracking: the step -gamma * scale * dJ/ds is accepted only if the
  // misfit does not rise; each rejection halves scale, each acceptance doubles
  // it back toward 1. The frozen prefix keeps the spin-up basis fixed.
  auto try_misfit = [&](const Vec& u_k, std::vector<Vec>& u) {
    try {
      u = pseudo_orbit(u_k);
    } catch (const NumericalBlowup&) {
      return std::numeric_limits<double>::infinity();
    }
    const double j = window_misfit(u);
    return std::isfinite(j) ? j : std::numeric_limits<double>::infinity();
  };
  std::vector<Vec> u;
  double j = try_misfit(start, u);
  if (!std::isfinite(j)) throw NumericalBlowup("assimilate: background orbit diverged", 0);
  double scale = 1.0;
  for (std::size_t step = 0; step < pr.descent_steps; ++step) {
    res.objective.push_back(j);
    res.parameters.push_back(p(pi));
    if (j < pr.tolerance) {
      res.stop_reason = "objective below tolerance";
      break;
    }
    opts.seed = step;
    const ShadowingSolution sol = shadow_window(sys, u, p, idx, {misfit}, opts);
    const double grad = sol.sensitivity(0);
    const Vec dir = sol.v_shadow[kk];
    const Vec start0 = start;
    const double p0 = p(pi);
    bool accepted = false;
    for (std::size_t halvings = 0; halvings < pr.max_increases; ++halvings, scale *= 0.5) {
      const double ds = -pr.gamma * scale * grad;
      p(pi) = p0 + ds;
      start = start0 + ds * dir;
      std::vector<Vec> cand;
      const double jc = try_misfit(start, cand);
      if (jc <= j) {
        u = std::move(cand);
        j = jc;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      start = start0;
      p(pi) = p0;
      res.stop_reason = "no descent after " + std::to_string(pr.max_increases) + " step halvings";
      break;
    }
    scale = std::min(1.0, 2.0 * scale);
  }

  res.analysis_state = start;
  res.parameter = p(pi);
  const std::vector<double> window_obs(obs.begin() + static_cast<std::ptrdiff_t>(kk),
                                       obs.begin() + static_cast<std::ptrdiff_t>(kk + nn + 1));
  const std::vector<Vec> fresh = orbit(sys, start, p, nn);
  res.relative_error = relative_errors(window_obs, observe_window(sys, k_obs, fresh, p, 0, nn + 1), &res.clamped);
  const std::vector<Vec> bg = orbit(sys, pr.background, pr.parameters, kk + nn);
  res.baseline_error = relative_errors(window_obs, observe_window(sys, k_obs, bg, pr.parameters, kk, nn + 1));
  res.max_error = *std::max_element(res.relative_error.begin(), res.relative_error.end());
  res.mean_error = mean(res.relative_error);
  res.baseline_mean_error = mean(res.baseline_error);
  return res;
}

}  // namespace shadow
