#include "shadow/dynamics.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace shadow {

void check_finite(std::span<const double> u, std::size_t step_index) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || std::abs(u[i]) > kBlowupThreshold) {
      throw NumericalBlowup("state component " + std::to_string(i) + " diverged (" + std::to_string(u[i]) +
                                ") at step " + std::to_string(step_index),
                            step_index);
    }
  }
}

Vec step(const System& sys, const Vec& u, const Vec& p, std::size_t step_index) {
  Vec out = sys.step(u, p);
  check_finite(as_span(out), step_index);
  return out;
}

EvolveResult evolve(const System& sys, const Vec& u0, const Vec& p, std::size_t n, const EvolveOptions& opts) {
  if (n < 1) throw InputError("evolve: need at least one step");
  if (static_cast<std::size_t>(u0.size()) != sys.dim()) throw InputError("evolve: initial state has wrong length");
  if (static_cast<std::size_t>(p.size()) != sys.num_parameters()) throw InputError("evolve: wrong parameter count");

  std::vector<std::size_t> obs;
  std::vector<std::string> names;
  if (opts.observables.empty()) {
    names = sys.observable_names();
    for (std::size_t k = 0; k < names.size(); ++k) obs.push_back(k);
  } else {
    for (const auto& name : opts.observables) {
      obs.push_back(sys.observable_index(name));
      names.push_back(name);
    }
  }

  EvolveResult res;
  Trajectory& tr = res.trajectory;
  tr.dt = sys.dt();
  tr.parameters = p;
  tr.observable_names = names;
  tr.observables.resize(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(obs.size()));
  if (opts.store_states) tr.states.reserve(n + 1);

  Vec u = u0;
  Vec next(u.size());
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t k = 0; k < obs.size(); ++k)
      tr.observables(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = sys.observe(obs[k], u, p);
    if (opts.store_states) tr.states.push_back(u);
    if (i == n) break;
    sys.step(as_span(u), as_span(p), as_span(next));
    check_finite(as_span(next), i + 1);
    u.swap(next);
  }
  res.final_state = u;

  for (std::size_t k = 0; k < obs.size(); ++k) {
    const Vec col = tr.observables.col(static_cast<Eigen::Index>(k)).head(static_cast<Eigen::Index>(n));
    const std::span<const double> x(col.data(), n);
    res.averages.push_back({names[k], n, mean(x), batch_means_stderr(x, opts.batches)});
  }
  return res;
}

std::size_t steps_for(double time, double dt) {
  if (time < 0.0) throw InputError("negative duration");
  return static_cast<std::size_t>(std::llround(time / dt));
}

Vec spin_up(const System& sys, const Vec& u0, const Vec& p, double t_runup) {
  const std::size_t n = steps_for(t_runup, sys.dt());
  Vec u = u0;
  Vec next(u.size());
  for (std::size_t i = 0; i < n; ++i) {
    sys.step(as_span(u), as_span(p), as_span(next));
    check_finite(as_span(next), i + 1);
    u.swap(next);
  }
  return u;
}

std::vector<Vec> orbit(const System& sys, const Vec& u0, const Vec& p, std::size_t n) {
  std::vector<Vec> states;
  states.reserve(n + 1);
  states.push_back(u0);
  Vec next(u0.size());
  for (std::size_t i = 0; i < n; ++i) {
    sys.step(as_span(states.back()), as_span(p), as_span(next));
    check_finite(as_span(next), i + 1);
    states.push_back(next);
  }
  return states;
}

double mean(std::span<const double> x) {
  if (x.empty()) throw InputError("mean of an empty series");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double batch_means_stderr(std::span<const double> x, std::size_t batches) {
  if (batches < 2 || x.size() < batches) return 0.0;
  const std::size_t len = x.size() / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) means[b] = mean(x.subspan(b * len, len));
  const double m = mean(means);
  double var = 0.0;
  for (double v : means) var += (v - m) * (v - m);
  var /= static_cast<double>(batches - 1);
  return std::sqrt(var / static_cast<double>(batches));
}

}  // namespace shadow
