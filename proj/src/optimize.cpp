#include "shadow/optimize.hpp"

#include "shadow/dynamics.hpp"
#include "shadow/models/registry.hpp"
#include "shadow/parallel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace shadow {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Converged:
      return "converged";
    case Termination::MaxIterations:
      return "max-iterations";
    case Termination::Blowup:
      return "blowup";
  }
  return "unknown";
}

namespace {

std::vector<std::size_t> trend_breaks(const std::vector<DescentIterate>& it) {
  std::vector<std::size_t> out;
  if (it.size() < 4) return out;
  auto avg = [&](std::size_t i) { return (it[i - 2].objective + it[i - 1].objective + it[i].objective) / 3.0; };
  for (std::size_t i = 3; i < it.size(); ++i)
    if (avg(i) > avg(i - 1)) out.push_back(i);
  return out;
}

}  // namespace

DescentPath minimize(const System& sys, const Vec& p0, const DescentConfig& cfg, std::uint64_t seed) {
  if (!(cfg.gamma > 0.0)) throw InputError("optimize: gamma must be positive");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw InputError("optimize: epsilon must lie in (0, 1)");
  if (cfg.windows < 1) throw InputError("optimize: need at least one sensitivity window");
  const std::size_t idx = sys.parameter_index(cfg.parameter);
  const std::size_t obs = sys.observable_index(cfg.observable);
  const double runup = cfg.runup_time < 0.0 ? models::default_runup(sys) : cfg.runup_time;

  DescentPath path;
  Vec p = p0;
  double initial = 0.0;
  for (std::size_t n = 0;; ++n) {
    DescentIterate it;
    it.index = n;
    it.parameter = p(static_cast<Eigen::Index>(idx));
    it.gradient = std::numeric_limits<double>::quiet_NaN();
    const std::uint64_t s = derive_seed(seed, n);
    Vec u;
    try {
      sys.validate_parameters(p);
      u = spin_up(sys, models::initial_state(sys, s), p, runup);
      const EvolveResult ev = evolve(sys, u, p, steps_for(cfg.objective_time, sys.dt()),
                                     {false, {sys.observable_names()[obs]}});
      it.objective = ev.averages.front().value;
      it.objective_stderr = ev.averages.front().standard_error;
      if (cfg.regime_time > 0.0) {
        const auto ly = lyapunov_spectrum(sys, ev.final_state, p, std::min<std::size_t>(4, sys.dim()),
                                          steps_for(cfg.regime_time, sys.dt()), s);
        it.regime = to_string(classify_regime(ly.exponents));
      }
    } catch (const Error& e) {
      path.iterates.push_back(it);
      path.termination = Termination::Blowup;
      path.message = e.what();
      break;
    }
    if (n == 0) initial = it.objective;
    if (n > 0 && std::abs(it.objective) < cfg.epsilon * std::abs(initial)) {
      path.iterates.push_back(it);
      path.termination = Termination::Converged;
      break;
    }
    if (n == cfg.max_iterations) {
      path.iterates.push_back(it);
      path.termination = Termination::MaxIterations;
      break;
    }

    SensitivityConfig sc;
    sc.shadow = cfg.shadow;
    sc.shadow.kind = Case::Tangent;
    sc.shadow.seed = s;
    sc.window_time = cfg.window_time;
    sc.samples = cfg.windows;
    sc.parameter = cfg.parameter;
    sc.observables = {sys.observable_names()[obs]};
    sc.workers = cfg.workers;
    try {
      const SensitivityRun run = shadowing_sensitivity(sys, u, p, sc);
      it.gradient = run.mean(0);
      it.gradient_stderr = run.standard_error(0);
      const double spread = run.standard_error(0) * std::sqrt(static_cast<double>(cfg.windows));
      if (spread > kNoisyGradientRatio * std::abs(it.gradient)) {
        std::ostringstream os;
        os << "gradient spread " << spread << " exceeds " << kNoisyGradientRatio << "x |mean| " << std::abs(it.gradient);
        it.warnings.push_back(os.str());
      }
      for (const auto& w : run.warnings) it.warnings.push_back(w);
    } catch (const Error& e) {
      path.iterates.push_back(it);
      path.termination = Termination::Blowup;
      path.message = e.what();
      break;
    }
    path.iterates.push_back(it);
    p(static_cast<Eigen::Index>(idx)) = it.parameter - cfg.gamma * it.gradient;
  }
  path.trend_breaks = trend_breaks(path.iterates);
  return path;
}

}  // namespace shadow
