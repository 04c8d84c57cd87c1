#include "shadow/experiments.hpp"

#include "shadow/dynamics.hpp"
#include "shadow/models/registry.hpp"
#include "shadow/parallel.hpp"

#include <cmath>

namespace shadow {

std::vector<double> scan_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw InputError("scan_grid: need step > 0 and hi >= lo");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  // Multiplying avoids accumulated rounding in the grid values.
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

std::vector<ScanPoint> bifurcation_scan(const System& sys, const Vec& p0, const ScanConfig& cfg, std::uint64_t seed) {
  const std::size_t pi = sys.parameter_index(cfg.parameter);
  const auto obs = static_cast<Eigen::Index>(sys.observable_index(cfg.observable));
  std::vector<ScanPoint> out(cfg.values.size());
  parallel_for(cfg.values.size(), cfg.workers, [&](std::size_t i) {
    ScanPoint& pt = out[i];
    pt.value = cfg.values[i];
    Vec p = p0;
    p(static_cast<Eigen::Index>(pi)) = pt.value;
    try {
      sys.validate_parameters(p);
      const std::uint64_t s = derive_seed(seed, i);
      Vec u = spin_up(sys, models::initial_state(sys, s), p, cfg.runup_time);
      const auto le = lyapunov_spectrum(sys, u, p, cfg.k, steps_for(cfg.lyapunov_time, sys.dt()), s);
      pt.exponents = le.exponents;
      pt.regime = to_string(classify_regime(le.exponents, cfg.regime_tolerance));
      EvolveOptions eo;
      eo.store_states = false;
      const auto run = evolve(sys, u, p, steps_for(cfg.sample_time, sys.dt()), eo);
      const Mat& x = run.trajectory.observables;
      for (const auto& a : run.averages) pt.means.push_back(a.value);
      for (Eigen::Index n = 1; n + 1 < x.rows(); ++n)
        if (x(n, obs) > x(n - 1, obs) && x(n, obs) >= x(n + 1, obs)) pt.peaks.push_back(x(n, obs));
    } catch (const Error& e) {
      pt.error = e.what();
      pt.regime.clear();
    }
  });
  return out;
}

TwinSuiteResult twin_suite(const System& sys, const Vec& p_ref, const TwinSuiteConfig& cfg, std::uint64_t seed) {
  if (cfg.experiments == 0) throw InputError("twin_suite: need at least one experiment");
  const double runup = cfg.runup_time >= 0.0 ? cfg.runup_time : models::default_runup(sys);
  const std::size_t k = steps_for(cfg.spinup_time, sys.dt());
  const std::size_t n = steps_for(cfg.window_time, sys.dt());

  std::vector<Vec> refs(cfg.experiments);
  Vec u = spin_up(sys, models::initial_state(sys, seed), p_ref, runup);
  for (auto& r : refs) {
    u = spin_up(sys, u, p_ref, cfg.separation_time);
    r = u;
  }

  TwinSuiteResult out;
  out.runs.resize(cfg.experiments);
  parallel_for(cfg.experiments, cfg.workers, [&](std::size_t e) {
    const Twin tw = generate_twin(sys, refs[e], p_ref, k + n, cfg.observable, cfg.variance, cfg.mask,
                                  derive_seed(seed, e));
    AssimilationProblem pr;
    pr.observable = cfg.observable;
    pr.observed = tw.observed;
    pr.background = tw.background;
    pr.parameters = p_ref;
    pr.parameter = cfg.parameter;
    pr.spinup_steps = k;
    pr.window_steps = n;
    pr.gamma = cfg.gamma;
    pr.descent_steps = cfg.descent_steps;
    pr.tolerance = cfg.tolerance;
    pr.shadow = cfg.shadow;
    out.runs[e] = assimilate(sys, pr);
  });
  for (const auto& r : out.runs) {
    out.mean_error += r.mean_error;
    out.baseline_mean_error += r.baseline_mean_error;
  }
  out.mean_error /= static_cast<double>(cfg.experiments);
  out.baseline_mean_error /= static_cast<double>(cfg.experiments);
  return out;
}

}  // namespace shadow
