// shadowctl: batch driver. Each subcommand reads [model], [run] and its own
// section from an optional config file, applies command-line overrides, and
// writes <out>/<subcommand>*.csv plus a JSON sidecar <out>/<subcommand>.json.
// Failures print a JSON error report on stderr and exit nonzero.

#include "shadow/config.hpp"
#include "shadow/dynamics.hpp"
#include "shadow/experiments.hpp"
#include "shadow/models/registry.hpp"
#include "shadow/optimize.hpp"
#include "shadow/perturbation.hpp"
#include "shadow/shadowing.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace shadow;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kNumerical = 3 };

const std::vector<std::string> kSubcommands = {"simulate",  "perturbation-growth", "lyapunov", "clv-angles",
                                               "bifurcation", "sensitivity",        "optimize", "assimilate"};

ConfigSchema make_schema() {
  using T = ValueType;
  const KeySpec real{T::Real, "", {}};
  const KeySpec count{T::Unsigned, "", {}};
  const KeySpec text{T::String, "", {}};
  const KeySpec list{T::List, "", {}};
  const KeySpec flag{T::Boolean, "", {}};
  const KeySpec derivs{T::String, "", {"analytic", "ad-forward", "ad-reverse", "fd"}};
  ConfigSchema s;
  s["model"] = {{"name", {T::String, "", {"lorenz63", "rijke"}}},
                {"dt", real},
                {"integrator", {T::String, "", {"euler", "rk4", "dopri5"}}},
                {"beta", real},
                {"tau", real},
                {"s", real},
                {"c1", real},
                {"c2", real},
                {"flame_position", real},
                {"galerkin_modes", count},
                {"chebyshev_points", count},
                {"runup", real}};
  s["run"] = {{"seed", count}, {"out", text}, {"workers", count}};
  s["simulate"] = {{"time", real}, {"observables", list}, {"states", flag}, {"batches", count}};
  s["perturbation-growth"] = {{"time", real}, {"eps", real}, {"fit_start", real}, {"fit_end", real}};
  s["lyapunov"] = {{"k", count}, {"time", real}, {"record_every", count}, {"derivatives", derivs}};
  s["clv-angles"] = {{"k", count}, {"time", real}, {"spin_time", real}, {"derivatives", derivs}};
  s["bifurcation"] = {{"param", text},      {"min", real}, {"max", real},        {"step", real},
                      {"lyap_time", real},  {"k", count},  {"sample_time", real}, {"observable", text},
                      {"tolerance", real}};
  s["sensitivity"] = {{"case", {T::String, "", {"tangent", "adjoint"}}},
                      {"param", text},
                      {"observables", list},
                      {"du", count},
                      {"windows", count},
                      {"window_time", real},
                      {"center", flag},
                      {"loop", {T::String, "", {"matrix", "direct"}}},
                      {"derivatives", derivs},
                      {"exclude_time", real}};
  s["optimize"] = {{"param", text},         {"observable", text},  {"start", real},      {"gamma", real},
                   {"epsilon", real},       {"windows", count},    {"window_time", real}, {"max_iterations", count},
                   {"objective_time", real}, {"regime_time", real}, {"du", count}};
  s["assimilate"] = {{"experiments", count}, {"observable", text},  {"param", text},     {"window_time", real},
                     {"spinup_time", real},  {"variance", real},    {"mask", list},      {"steps", count},
                     {"gamma", real},        {"tolerance", real},   {"separation_time", real}, {"center", flag}};
  return s;
}

std::string cli_name(const std::string& key) {
  std::string out = key;
  for (char& c : out)
    if (c == '_') c = '-';
  return out;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw InputError("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

struct Context {
  std::string subcommand;
  IniDocument doc;
  ConfigView view;
  SystemPtr sys;
  Vec p;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  fs::path out;
  double runup = 0.0;
  std::vector<std::string> files;
  json summary = json::object();
  std::vector<std::string> warnings;

  explicit Context(IniDocument d) : doc(std::move(d)), view(doc) {}

  [[nodiscard]] bool lorenz() const { return sys->name() == "lorenz63"; }
  [[nodiscard]] const std::string& sec() const { return subcommand; }

  CsvWriter csv(const std::string& suffix, const std::vector<std::string>& header) {
    const std::string name = subcommand + suffix + ".csv";
    files.push_back(name);
    return CsvWriter(out / name, header);
  }

  // Spin up from the seeded initial state; every experiment starts here.
  [[nodiscard]] Vec start_state() const {
    return spin_up(*sys, models::initial_state(*sys, seed), p, runup);
  }
};

void build_model(Context& c) {
  const ConfigView& v = c.view;
  models::ModelSpec spec;
  spec.name = v.str("model", "name", "lorenz63");
  spec.dt = v.real("model", "dt", 0.0);
  spec.integrator = v.str("model", "integrator", "");
  spec.rijke.c1 = v.real("model", "c1", spec.rijke.c1);
  spec.rijke.c2 = v.real("model", "c2", spec.rijke.c2);
  spec.rijke.flame_position = v.real("model", "flame_position", spec.rijke.flame_position);
  spec.rijke.galerkin_modes = v.count("model", "galerkin_modes", spec.rijke.galerkin_modes);
  spec.rijke.chebyshev_points = v.count("model", "chebyshev_points", spec.rijke.chebyshev_points);
  const bool rijke = spec.name == "rijke";
  std::vector<std::string> misplaced;
  for (const char* k : {"c1", "c2", "flame_position", "galerkin_modes", "chebyshev_points", "beta", "tau"})
    if (!rijke && v.has("model", k)) misplaced.push_back(std::string("model.") + k + ": not a lorenz63 key");
  if (rijke && v.has("model", "s")) misplaced.push_back("model.s: not a rijke key");
  if (!misplaced.empty()) throw ConfigError("config: keys do not apply to model " + spec.name, misplaced);

  c.sys = models::make_model(spec);
  c.p = c.sys->default_parameters();
  for (const auto& name : c.sys->parameter_names()) {
    const auto i = static_cast<Eigen::Index>(c.sys->parameter_index(name));
    c.p(i) = v.real("model", name, c.p(i));
  }
  c.sys->validate_parameters(c.p);
  c.runup = v.real("model", "runup", models::default_runup(*c.sys));
}

std::string pick(const Context& c, const std::string& key, const std::string& lorenz, const std::string& rijke) {
  return c.view.str(c.sec(), key, c.lorenz() ? lorenz : rijke);
}

// ---------------------------------------------------------------- subcommands

void run_simulate(Context& c) {
  const auto& v = c.view;
  EvolveOptions eo;
  eo.store_states = v.boolean(c.sec(), "states", false);
  eo.observables = v.list(c.sec(), "observables", {});
  eo.batches = v.count(c.sec(), "batches", 20);
  const std::size_t n = steps_for(v.real(c.sec(), "time", c.lorenz() ? 100.0 : 200.0), c.sys->dt());
  const auto res = evolve(*c.sys, c.start_state(), c.p, n, eo);
  const auto& tr = res.trajectory;
  std::vector<std::string> header = {"step", "time"};
  for (const auto& o : tr.observable_names) header.push_back(o);
  if (eo.store_states)
    for (std::size_t i = 0; i < c.sys->dim(); ++i) header.push_back("u" + std::to_string(i));
  auto w = c.csv("", header);
  for (Eigen::Index r = 0; r < tr.observables.rows(); ++r) {
    std::vector<std::string> row = {std::to_string(r), fmt(static_cast<double>(r) * tr.dt)};
    for (Eigen::Index k = 0; k < tr.observables.cols(); ++k) row.push_back(fmt(tr.observables(r, k)));
    if (eo.store_states)
      for (Eigen::Index i = 0; i < tr.states[static_cast<std::size_t>(r)].size(); ++i)
        row.push_back(fmt(tr.states[static_cast<std::size_t>(r)](i)));
    w.row(row);
  }
  json avg = json::object();
  for (const auto& a : res.averages) avg[a.observable] = {{"mean", jnum(a.value)}, {"stderr", jnum(a.standard_error)}};
  c.summary["averages"] = avg;
}

void run_growth(Context& c) {
  const auto& v = c.view;
  const double time = v.real(c.sec(), "time", c.lorenz() ? 20.0 : 80.0);
  const double eps = v.real(c.sec(), "eps", 1e-4);
  const double t0 = v.real(c.sec(), "fit_start", c.lorenz() ? 1.0 : 5.0);
  const double t1 = v.real(c.sec(), "fit_end", c.lorenz() ? 8.0 : 30.0);
  const auto g = perturbation_growth(*c.sys, c.start_state(), c.p, steps_for(time, c.sys->dt()), eps, c.seed);
  auto w = c.csv("", {"time", "tangent", "adjoint", "finite_difference", "ad_forward", "ad_reverse"});
  for (std::size_t i = 0; i < g.time.size(); ++i)
    w.row({fmt(g.time[i]), fmt(g.tangent[i]), fmt(g.adjoint[i]), fmt(g.finite_difference[i]), fmt(g.ad_forward[i]),
           fmt(g.ad_reverse[i])});
  json slopes = json::object();
  slopes["tangent"] = jnum(log_slope(g.time, g.tangent, t0, t1));
  slopes["adjoint"] = jnum(log_slope(g.time, g.adjoint, t0, t1));
  slopes["ad_forward"] = jnum(log_slope(g.time, g.ad_forward, t0, t1));
  slopes["ad_reverse"] = jnum(log_slope(g.time, g.ad_reverse, t0, t1));
  slopes["finite_difference"] = jnum(log_slope(g.time, g.finite_difference, t0, t1));
  c.summary["log_slope"] = slopes;
  c.summary["fit_window"] = {t0, t1};
  c.summary["finite_difference_max"] =
      jnum(*std::max_element(g.finite_difference.begin(), g.finite_difference.end()));
}

void run_lyapunov(Context& c) {
  const auto& v = c.view;
  const std::size_t k = v.count(c.sec(), "k", c.lorenz() ? 3 : 20);
  const double time = v.real(c.sec(), "time", c.lorenz() ? 500.0 : 200.0);
  const std::size_t every = v.count(c.sec(), "record_every", c.lorenz() ? 200 : 100);
  const auto mode = derivative_mode_from_string(v.str(c.sec(), "derivatives", "analytic"));
  const auto le = lyapunov_spectrum(*c.sys, c.start_state(), c.p, k, steps_for(time, c.sys->dt()), c.seed, mode, every);
  {
    auto w = c.csv("", {"index", "exponent"});
    for (Eigen::Index i = 0; i < le.exponents.size(); ++i) w.row({std::to_string(i + 1), fmt(le.exponents(i))});
  }
  std::vector<std::string> header = {"time"};
  for (std::size_t i = 1; i <= k; ++i) header.push_back("lambda_" + std::to_string(i));
  auto w = c.csv("_running", header);
  for (std::size_t r = 0; r < le.time.size(); ++r) {
    std::vector<std::string> row = {fmt(le.time[r])};
    for (Eigen::Index i = 0; i < le.running.cols(); ++i) row.push_back(fmt(le.running(static_cast<Eigen::Index>(r), i)));
    w.row(row);
  }
  std::vector<double> ex(le.exponents.data(), le.exponents.data() + le.exponents.size());
  c.summary["exponents"] = ex;
  c.summary["regime"] = to_string(classify_regime(le.exponents));
}

void run_clv(Context& c) {
  const auto& v = c.view;
  ClvOptions o;
  o.k = v.count(c.sec(), "k", c.lorenz() ? 3 : 4);
  o.steps = steps_for(v.real(c.sec(), "time", 100.0), c.sys->dt());
  o.spin_steps = steps_for(v.real(c.sec(), "spin_time", c.lorenz() ? 10.0 : 30.0), c.sys->dt());
  o.seed = c.seed;
  o.mode = derivative_mode_from_string(v.str(c.sec(), "derivatives", "analytic"));
  const auto orb = orbit(*c.sys, c.start_state(), c.p, o.steps + 2 * o.spin_steps);
  const ClvSet tan = clv_ginelli(*c.sys, orb, c.p, Case::Tangent, o);
  const ClvSet adj = clv_ginelli(*c.sys, orb, c.p, Case::Adjoint, o);
  const auto k = static_cast<Eigen::Index>(o.k);
  {
    std::vector<std::string> header = {"time"};
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = i + 1; j < k; ++j) header.push_back("theta_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
    auto w = c.csv("", header);
    for (std::size_t s = 0; s < tan.vectors.size(); ++s) {
      std::vector<std::string> row = {fmt(static_cast<double>(tan.first_step + s) * c.sys->dt())};
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i + 1; j < k; ++j) row.push_back(fmt(vector_angle_deg(tan.vectors[s].col(i), tan.vectors[s].col(j))));
      w.row(row);
    }
  }
  const Mat cross = clv_angle_statistics(tan, adj);
  auto w = c.csv("_cross", {"tangent_index", "adjoint_index", "mean_angle_deg"});
  double worst = 0.0;
  for (Eigen::Index i = 0; i < cross.rows(); ++i)
    for (Eigen::Index j = 0; j < cross.cols(); ++j) {
      w.row({std::to_string(i + 1), std::to_string(j + 1), fmt(cross(i, j))});
      if (i != j) worst = std::max(worst, std::abs(cross(i, j) - 90.0));
    }
  c.summary["min_pairwise_tangent_angle_deg"] = jnum(min_pairwise_angle(tan));
  c.summary["min_pairwise_adjoint_angle_deg"] = jnum(min_pairwise_angle(adj));
  c.summary["max_offdiagonal_deviation_from_90_deg"] = jnum(worst);
  c.summary["ill_conditioned_steps"] = tan.ill_conditioned_steps.size() + adj.ill_conditioned_steps.size();
}

void run_bifurcation(Context& c) {
  const auto& v = c.view;
  ScanConfig sc;
  sc.parameter = pick(c, "param", "s", "beta");
  const double lo = v.real(c.sec(), "min", c.lorenz() ? 20.0 : 0.1);
  const double hi = v.real(c.sec(), "max", c.lorenz() ? 35.0 : 8.0);
  sc.values = scan_grid(lo, hi, v.real(c.sec(), "step", c.lorenz() ? 0.5 : 0.1));
  sc.runup_time = v.real("model", "runup", c.lorenz() ? 50.0 : 1000.0);
  sc.lyapunov_time = v.real(c.sec(), "lyap_time", c.lorenz() ? 100.0 : 200.0);
  sc.k = v.count(c.sec(), "k", c.lorenz() ? 3 : 4);
  sc.sample_time = v.real(c.sec(), "sample_time", 100.0);
  sc.observable = pick(c, "observable", "z", "u_f");
  sc.regime_tolerance = v.real(c.sec(), "tolerance", 0.02);
  sc.workers = c.workers;
  const auto pts = bifurcation_scan(*c.sys, c.p, sc, c.seed);
  std::vector<std::string> header = {sc.parameter, "regime"};
  for (std::size_t i = 1; i <= sc.k; ++i) header.push_back("lambda_" + std::to_string(i));
  for (const auto& o : c.sys->observable_names()) header.push_back("mean_" + o);
  header.push_back("peaks");
  {
    auto w = c.csv("", header);
    for (const auto& pt : pts) {
      std::vector<std::string> row = {fmt(pt.value), pt.error.empty() ? pt.regime : "error"};
      for (std::size_t i = 0; i < sc.k; ++i)
        row.push_back(pt.error.empty() ? fmt(pt.exponents(static_cast<Eigen::Index>(i))) : "nan");
      for (std::size_t i = 0; i < c.sys->observable_names().size(); ++i)
        row.push_back(pt.error.empty() ? fmt(pt.means[i]) : "nan");
      row.push_back(std::to_string(pt.peaks.size()));
      w.row(row);
    }
  }
  auto w = c.csv("_peaks", {sc.parameter, "peak_" + sc.observable});
  json failed = json::array();
  for (const auto& pt : pts) {
    for (double x : pt.peaks) w.row({fmt(pt.value), fmt(x)});
    if (!pt.error.empty()) failed.push_back({{"value", pt.value}, {"error", pt.error}});
  }
  c.summary["failed_points"] = failed;
}

void run_sensitivity(Context& c) {
  const auto& v = c.view;
  SensitivityConfig sc;
  sc.shadow.kind = case_from_string(v.str(c.sec(), "case", "tangent"));
  sc.shadow.du = v.count(c.sec(), "du", c.lorenz() ? 2 : 3);
  sc.shadow.center = v.boolean(c.sec(), "center", true);
  sc.shadow.loop = loop_mode_from_string(v.str(c.sec(), "loop", "direct"));
  sc.shadow.derivatives = derivative_mode_from_string(v.str(c.sec(), "derivatives", "analytic"));
  sc.shadow.exclude_time = v.real(c.sec(), "exclude_time", -1.0);
  sc.shadow.seed = c.seed;
  sc.samples = v.count(c.sec(), "windows", c.lorenz() ? 100 : 200);
  sc.window_time = v.real(c.sec(), "window_time", c.lorenz() ? 15.0 : 20.0);
  sc.parameter = pick(c, "param", "s", "beta");
  const std::vector<std::string> fallback =
      sc.shadow.kind == Case::Adjoint ? std::vector<std::string>{c.lorenz() ? "z" : "J_ac"} : std::vector<std::string>{};
  sc.observables = v.list(c.sec(), "observables", fallback);
  sc.workers = c.workers;
  const auto run = shadowing_sensitivity(*c.sys, c.start_state(), c.p, sc);
  std::vector<std::string> header = {"window"};
  header.insert(header.end(), run.labels.begin(), run.labels.end());
  {
    auto w = c.csv("", header);
    for (Eigen::Index r = 0; r < run.cumulative.rows(); ++r) {
      std::vector<std::string> row = {std::to_string(r + 1)};
      for (Eigen::Index j = 0; j < run.cumulative.cols(); ++j) row.push_back(fmt(run.cumulative(r, j)));
      w.row(row);
    }
  }
  header.insert(header.end(), {"excluded_steps", "max_v_shadow", "condition"});
  auto w = c.csv("_samples", header);
  for (Eigen::Index r = 0; r < run.samples.rows(); ++r) {
    const auto i = static_cast<std::size_t>(r);
    std::vector<std::string> row = {std::to_string(r + 1)};
    for (Eigen::Index j = 0; j < run.samples.cols(); ++j) row.push_back(fmt(run.samples(r, j)));
    row.insert(row.end(), {std::to_string(run.excluded_steps[i]), fmt(run.max_v_shadow[i]), fmt(run.condition[i])});
    w.row(row);
  }
  json est = json::object();
  for (std::size_t j = 0; j < run.labels.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    est[run.labels[j]] = {{"mean", jnum(run.mean(jj))}, {"stderr", jnum(run.standard_error(jj))}};
  }
  c.summary["case"] = to_string(sc.shadow.kind);
  c.summary["estimates"] = est;
  c.warnings.insert(c.warnings.end(), run.warnings.begin(), run.warnings.end());
}

void run_optimize(Context& c) {
  const auto& v = c.view;
  DescentConfig dc;
  dc.parameter = pick(c, "param", "s", "beta");
  dc.observable = pick(c, "observable", "z", "J_ac");
  dc.gamma = v.real(c.sec(), "gamma", 0.1);
  dc.epsilon = v.real(c.sec(), "epsilon", 0.01);
  dc.windows = v.count(c.sec(), "windows", 10);
  dc.window_time = v.real(c.sec(), "window_time", c.lorenz() ? 15.0 : 20.0);
  dc.max_iterations = v.count(c.sec(), "max_iterations", 100);
  dc.objective_time = v.real(c.sec(), "objective_time", 200.0);
  dc.regime_time = v.real(c.sec(), "regime_time", c.lorenz() ? 100.0 : 50.0);
  dc.runup_time = c.view.has("model", "runup") ? c.runup : (c.lorenz() ? 50.0 : 300.0);
  dc.shadow.du = v.count(c.sec(), "du", c.lorenz() ? 2 : 3);
  dc.workers = c.workers;
  Vec p0 = c.p;
  const auto pi = static_cast<Eigen::Index>(c.sys->parameter_index(dc.parameter));
  p0(pi) = v.real(c.sec(), "start", c.lorenz() ? 28.0 : 6.5);
  const auto path = minimize(*c.sys, p0, dc, c.seed);
  auto w = c.csv("", {"iterate", dc.parameter, "objective", "objective_stderr", "gradient", "gradient_stderr", "regime",
                      "warnings"});
  for (const auto& it : path.iterates) {
    w.row({std::to_string(it.index), fmt(it.parameter), fmt(it.objective), fmt(it.objective_stderr), fmt(it.gradient),
           fmt(it.gradient_stderr), it.regime, std::to_string(it.warnings.size())});
    for (const auto& msg : it.warnings) c.warnings.push_back("iterate " + std::to_string(it.index) + ": " + msg);
  }
  c.summary["termination"] = to_string(path.termination);
  c.summary["message"] = path.message;
  c.summary["trend_breaks"] = path.trend_breaks;
  if (!path.iterates.empty()) {
    c.summary["initial_objective"] = jnum(path.iterates.front().objective);
    c.summary["final_objective"] = jnum(path.iterates.back().objective);
  }
}

void run_assimilate(Context& c) {
  const auto& v = c.view;
  TwinSuiteConfig tc;
  tc.observable = pick(c, "observable", "z", "J_ac");
  tc.parameter = pick(c, "param", "s", "beta");
  tc.experiments = v.count(c.sec(), "experiments", 20);
  tc.window_time = v.real(c.sec(), "window_time", c.lorenz() ? 10.0 : 20.0);
  tc.spinup_time = v.real(c.sec(), "spinup_time", c.lorenz() ? 1.1 : 5.3);
  tc.variance = v.real(c.sec(), "variance", 0.1);
  tc.descent_steps = v.count(c.sec(), "steps", 200);
  tc.gamma = v.real(c.sec(), "gamma", 0.1);
  tc.tolerance = v.real(c.sec(), "tolerance", 1e-14);
  tc.separation_time = v.real(c.sec(), "separation_time", 10.0);
  tc.runup_time = c.view.has("model", "runup") ? c.runup : (c.lorenz() ? 50.0 : 1000.0);
  tc.shadow.center = v.boolean(c.sec(), "center", false);
  tc.shadow.du = c.lorenz() ? 2 : 3;
  tc.workers = c.workers;
  const auto mask = v.list(c.sec(), "mask", c.lorenz() ? std::vector<std::string>{"2"} : std::vector<std::string>{});
  if (!mask.empty()) {
    tc.mask.assign(c.sys->dim(), 0);
    for (const auto& m : mask) {
      std::size_t i = 0;
      try {
        i = std::stoul(m);
      } catch (const std::exception&) {
        throw ConfigError("config: mask entries must be component indices", {"assimilate.mask"});
      }
      if (i >= c.sys->dim()) throw ConfigError("config: mask index out of range", {"assimilate.mask"});
      tc.mask[i] = 1;
    }
  }
  const auto suite = twin_suite(*c.sys, c.p, tc, c.seed);
  const double dt = c.sys->dt();
  {
    auto w = c.csv("", {"experiment", tc.parameter, "mean_error", "max_error", "baseline_mean_error",
                        "initial_objective", "final_objective", "descent_steps", "stop_reason"});
    for (std::size_t e = 0; e < suite.runs.size(); ++e) {
      const auto& r = suite.runs[e];
      w.row({std::to_string(e), fmt(r.parameter), fmt(r.mean_error), fmt(r.max_error), fmt(r.baseline_mean_error),
             fmt(r.objective.empty() ? NAN : r.objective.front()), fmt(r.objective.empty() ? NAN : r.objective.back()),
             std::to_string(r.objective.size()), r.stop_reason});
    }
  }
  {
    auto w = c.csv("_errors", {"experiment", "time", "relative_error", "baseline_error", "clamped"});
    for (std::size_t e = 0; e < suite.runs.size(); ++e) {
      const auto& r = suite.runs[e];
      for (std::size_t i = 0; i < r.relative_error.size(); ++i)
        w.row({std::to_string(e), fmt(static_cast<double>(i) * dt), fmt(r.relative_error[i]),
               fmt(i < r.baseline_error.size() ? r.baseline_error[i] : NAN), r.clamped[i] ? "1" : "0"});
    }
  }
  auto w = c.csv("_objective", {"experiment", "step", "objective", tc.parameter});
  for (std::size_t e = 0; e < suite.runs.size(); ++e) {
    const auto& r = suite.runs[e];
    for (std::size_t i = 0; i < r.objective.size(); ++i)
      w.row({std::to_string(e), std::to_string(i), fmt(r.objective[i]), fmt(r.parameters[i])});
  }
  c.summary["mean_error"] = jnum(suite.mean_error);
  c.summary["baseline_mean_error"] = jnum(suite.baseline_mean_error);
}

const std::map<std::string, std::function<void(Context&)>> kRunners = {
    {"simulate", run_simulate},       {"perturbation-growth", run_growth}, {"lyapunov", run_lyapunov},
    {"clv-angles", run_clv},          {"bifurcation", run_bifurcation},    {"sensitivity", run_sensitivity},
    {"optimize", run_optimize},       {"assimilate", run_assimilate}};

// ---------------------------------------------------------------- driver

int report_error(const std::string& kind, const std::string& message, const std::vector<std::string>& keys, int code) {
  json j = {{"status", "error"}, {"kind", kind}, {"message", message}};
  if (!keys.empty()) j["keys"] = keys;
  std::cerr << j.dump(2) << '\n';
  return code;
}

IniDocument load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str());
}

// Output location and worker count do not change results.
IniDocument result_relevant(IniDocument doc) {
  if (auto it = doc.find("run"); it != doc.end()) {
    it->second.erase("out");
    it->second.erase("workers");
  }
  return doc;
}

int execute(const std::string& sub, IniDocument doc, const ConfigSchema& schema) {
  validate(doc, schema);
  // Only the selected subcommand's section is meaningful; others are kept out
  // of the hash so sharing one file across subcommands does not change it.
  for (auto it = doc.begin(); it != doc.end();) {
    const bool foreign = it->first != sub && it->first != "model" && it->first != "run" && it->first != "config";
    it = foreign ? doc.erase(it) : std::next(it);
  }
  Context c(doc);
  c.subcommand = sub;
  c.seed = c.view.u64("run", "seed", 0);
  c.workers = std::max<std::size_t>(1, c.view.count("run", "workers", 1));
  c.out = c.view.str("run", "out", "out");
  build_model(c);
  fs::create_directories(c.out);

  const auto t0 = std::chrono::steady_clock::now();
  kRunners.at(sub)(c);
  const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json side = {{"subcommand", sub},
               {"model", std::string(c.sys->name())},
               {"seed", c.seed},
               {"workers", c.workers},
               {"config_hash", config_hash(result_relevant(c.doc))},
               {"config", to_ini(c.doc)},
               {"runtime_seconds", runtime},
               {"files", c.files},
               {"summary", c.summary},
               {"warnings", c.warnings}};
  std::ofstream(c.out / (sub + ".json")) << side.dump(2) << '\n';
  std::cout << side["summary"].dump() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  const ConfigSchema schema = make_schema();
  CLI::App app{"shadowctl: shadowing sensitivities, optimization and assimilation for chaotic models"};
  app.require_subcommand(1);

  // section -> key -> (option, value); filled by CLI11 and applied over the file.
  struct Override {
    CLI::Option* opt = nullptr;
    std::string value;
  };
  std::map<std::string, std::map<std::string, std::map<std::string, Override>>> overrides;
  std::map<std::string, std::string> config_path;
  std::map<std::string, std::vector<std::string>> sets;

  for (const auto& sub : kSubcommands) {
    CLI::App* cmd = app.add_subcommand(sub);
    cmd->add_option("--config", config_path[sub], "INI config file");
    cmd->add_option("--set", sets[sub], "Override as section.key=value (repeatable)");
    auto& ov = overrides[sub];
    auto bind = [&](const std::string& section, const std::string& key, const std::string& flag) {
      Override& o = ov[section][key];
      o.opt = cmd->add_option(flag, o.value, section + "." + key);
    };
    bind("model", "name", "--model");
    bind("run", "seed", "--seed");
    bind("run", "out", "--out");
    bind("run", "workers", "--workers");
    for (const auto& [key, spec] : schema.at("model"))
      if (key != "name") bind("model", key, "--model-" + cli_name(key));
    for (const auto& [key, spec] : schema.at(sub)) bind(sub, key, "--" + cli_name(key));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), {}, kUsage);
  }

  std::string sub;
  for (const auto& name : kSubcommands)
    if (app.got_subcommand(name)) sub = name;

  try {
    IniDocument doc = load_config(config_path[sub]);
    std::vector<std::string> bad;
    for (const auto& s : sets[sub]) {
      const auto eq = s.find('=');
      const auto dot = s.find('.');
      if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        bad.push_back(s + ": expected section.key=value");
        continue;
      }
      doc[s.substr(0, dot)][s.substr(dot + 1, eq - dot - 1)] = s.substr(eq + 1);
    }
    if (!bad.empty()) throw ConfigError("config: malformed --set", bad);
    for (const auto& [section, keys] : overrides[sub])
      for (const auto& [key, o] : keys)
        if (o.opt->count() > 0) doc[section][key] = o.value;
    return execute(sub, doc, schema);
  } catch (const ConfigError& e) {
    return report_error(e.kind(), e.what(), e.keys(), kUsage);
  } catch (const InputError& e) {
    return report_error(e.kind(), e.what(), {}, kUsage);
  } catch (const ParameterError& e) {
    return report_error(e.kind(), e.what(), {}, kUsage);
  } catch (const Error& e) {
    return report_error(e.kind(), e.what(), {}, kNumerical);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), {}, kFailure);
  }
}
