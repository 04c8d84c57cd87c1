#include "shadow/perturbation.hpp"

#include "shadow/dynamics.hpp"

#include <cmath>

namespace shadow {

Case case_from_string(const std::string& s) {
  if (s == "tangent") return Case::Tangent;
  if (s == "adjoint") return Case::Adjoint;
  throw InputError("unknown case '" + s + "' (expected tangent or adjoint)");
}

std::string to_string(Case c) { return c == Case::Tangent ? "tangent" : "adjoint"; }

Mat random_matrix(Eigen::Index d, Eigen::Index k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat m(d, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < d; ++i) m(i, j) = normal(rng);
  return m;
}

Vec random_unit(Eigen::Index d, std::mt19937_64& rng) {
  Vec v = random_matrix(d, 1, rng).col(0);
  return v / v.norm();
}

double finite_time_sensitivity(const DerivativeProvider& dp, const Vec& u0, const Vec& p, std::size_t observable,
                               std::size_t parameter, std::size_t n, Case kind) {
  if (n < 1) throw InputError("finite-time sensitivity needs N >= 1");
  const System& sys = dp.system();
  const std::vector<Vec> u = orbit(sys, u0, p, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  Vec ek = Vec::Zero(p.size());
  ek(static_cast<Eigen::Index>(parameter)) = 1.0;
  double sens = 0.0;
  if (kind == Case::Tangent) {
    Vec v = Vec::Zero(u0.size());
    for (std::size_t i = 1; i < n; ++i) {
      v = dp.jvp(u[i - 1], p, v, ek);
      sens += sys.observe_gradient(observable, u[i], p).dot(v);
    }
    return sens * inv_n;
  }
  Vec carried = Vec::Zero(u0.size());
  for (std::size_t i = n - 1; i >= 1; --i) {
    const Vec z = inv_n * sys.observe_gradient(observable, u[i], p) + carried;
    auto [gu, gp] = dp.vjp(u[i - 1], p, z);
    sens += gp(static_cast<Eigen::Index>(parameter));
    carried = gu;
  }
  return sens;
}

GrowthSeries perturbation_growth(const System& sys, const Vec& u0, const Vec& p, std::size_t n, double eps,
                                 std::uint64_t seed) {
  if (!(eps > 0.0)) throw InputError("perturbation growth: eps must be positive");
  std::mt19937_64 rng(seed);
  const auto d = u0.size();
  const Vec q0 = random_unit(d, rng);
  const Vec z0 = random_unit(d, rng);
  const Vec zero_p = Vec::Zero(p.size());
  const std::vector<Vec> u = orbit(sys, u0, p, n);

  GrowthSeries g;
  g.time.resize(n + 1);
  g.tangent.resize(n + 1);
  g.adjoint.resize(n + 1);
  g.finite_difference.resize(n + 1);
  g.ad_forward.resize(n + 1);
  g.ad_reverse.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g.time[i] = static_cast<double>(i) * sys.dt();

  const DerivativeProvider analytic(sys, DerivativeMode::Analytic);
  const DerivativeProvider reverse(sys, DerivativeMode::ADReverse);

  Vec q = q0;
  Vec w = u0 + eps * q0;
  Vec wn(d);
  std::vector<ad::Dual> x(static_cast<std::size_t>(d));
  std::vector<ad::Dual> xn(static_cast<std::size_t>(d));
  std::vector<ad::Dual> pd(static_cast<std::size_t>(p.size()));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = {u0(static_cast<Eigen::Index>(i)), q0(static_cast<Eigen::Index>(i))};
  for (std::size_t i = 0; i < pd.size(); ++i) pd[i] = p(static_cast<Eigen::Index>(i));
  for (std::size_t i = 0; i <= n; ++i) {
    g.tangent[i] = q.norm();
    g.finite_difference[i] = (w - u[i]).norm() / eps;
    double s2 = 0.0;
    for (const auto& xi : x) s2 += xi.d * xi.d;
    g.ad_forward[i] = std::sqrt(s2);
    if (i == n) break;
    q = analytic.jvp(u[i], p, q, zero_p);
    sys.step(as_span(w), as_span(p), as_span(wn));
    check_finite(as_span(wn), i + 1);
    w.swap(wn);
    sys.step(std::span<const ad::Dual>(x), std::span<const ad::Dual>(pd), std::span<ad::Dual>(xn));
    x.swap(xn);
  }

  Vec za = z0;
  Vec zr = z0;
  for (std::size_t k = 0; k <= n; ++k) {
    g.adjoint[k] = za.norm();
    g.ad_reverse[k] = zr.norm();
    if (k == n) break;
    const Vec& at = u[n - 1 - k];
    za = analytic.vjp(at, p, za).first;
    zr = reverse.vjp(at, p, zr).first;
  }
  return g;
}

double log_slope(const std::vector<double>& time, const std::vector<double>& series, double t0, double t1) {
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  double cnt = 0.0;
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (time[i] < t0 || time[i] > t1 || !(series[i] > 0.0)) continue;
    const double y = std::log(series[i]);
    st += time[i];
    sy += y;
    stt += time[i] * time[i];
    sty += time[i] * y;
    cnt += 1.0;
  }
  if (cnt < 2.0) throw InputError("log_slope: fewer than two points in range");
  return (cnt * sty - st * sy) / (cnt * stt - st * st);
}

}  // namespace shadow
