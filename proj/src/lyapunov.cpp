#include "shadow/lyapunov.hpp"

#include "shadow/dynamics.hpp"

#include <cmath>
#include <limits>

namespace shadow {

std::pair<Mat, Mat> qr_positive(const Mat& m, std::size_t step) {
  const auto k = m.cols();
  Eigen::HouseholderQR<Mat> qr(m);
  Mat q = qr.householderQ() * Mat::Identity(m.rows(), k);
  Mat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (r(i, i) < 0.0) {
      r.row(i) *= -1.0;
      q.col(i) *= -1.0;
    }
    if (!(r(i, i) >= kDegenerateDiagonal)) {
      throw DegenerateBasis("rank-deficient basis: R(" + std::to_string(i) + "," + std::to_string(i) +
                                ") = " + std::to_string(r(i, i)) + " at step " + std::to_string(step),
                            step);
    }
  }
  return {q, r};
}

LyapunovResult lyapunov_spectrum(const System& sys, const Vec& u0, const Vec& p, std::size_t k, std::size_t n,
                                 std::uint64_t seed, DerivativeMode mode, std::size_t record_every) {
  if (k < 1 || k > sys.dim()) throw InputError("lyapunov: need 1 <= k <= d");
  if (n < 1) throw InputError("lyapunov: need at least one step");
  const DerivativeProvider dp(sys, mode);
  std::mt19937_64 rng(seed);
  const auto kk = static_cast<Eigen::Index>(k);
  Mat q = qr_positive(random_matrix(u0.size(), kk, rng)).first;
  const Mat zero_p = Mat::Zero(p.size(), kk);
  Vec u = u0;
  Vec next(u.size());
  Vec sum_log = Vec::Zero(kk);
  LyapunovResult res;
  if (record_every > 0) {
    res.time.reserve(n / record_every);
    res.running.resize(static_cast<Eigen::Index>(n / record_every), kk);
  }
  for (std::size_t i = 1; i <= n; ++i) {
    const Mat aq = dp.jvp_block(u, p, q, zero_p);
    auto [qn, r] = qr_positive(aq, i);
    q = std::move(qn);
    for (Eigen::Index j = 0; j < kk; ++j) sum_log(j) += std::log(r(j, j));
    sys.step(as_span(u), as_span(p), as_span(next));
    check_finite(as_span(next), i);
    u.swap(next);
    if (record_every > 0 && i % record_every == 0) {
      const double t = static_cast<double>(i) * sys.dt();
      res.time.push_back(t);
      res.running.row(static_cast<Eigen::Index>(res.time.size() - 1)) = (sum_log / t).transpose();
    }
  }
  res.exponents = sum_log / (static_cast<double>(n) * sys.dt());
  return res;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::FixedPoint:
      return "fixed-point";
    case Regime::Periodic:
      return "periodic";
    case Regime::Quasiperiodic:
      return "quasiperiodic";
    case Regime::Chaotic:
      return "chaotic";
  }
  return "unknown";
}

Regime classify_regime(const Vec& exponents, double tol) {
  if (exponents.size() == 0) throw InputError("classify_regime: no exponents");
  if (exponents.maxCoeff() > tol) return Regime::Chaotic;
  if ((exponents.array() < -tol).all()) return Regime::FixedPoint;
  const auto neutral = (exponents.array().abs() <= tol).count();
  return neutral >= 2 ? Regime::Quasiperiodic : Regime::Periodic;
}

ClvSet clv_ginelli(const System& sys, const std::vector<Vec>& orbit, const Vec& p, Case variant,
                   const ClvOptions& opts) {
  const std::size_t total = 2 * opts.spin_steps + opts.steps;
  if (orbit.size() < total + 1) throw InputError("clv_ginelli: orbit too short for the requested window");
  if (opts.k < 1 || opts.k > sys.dim()) throw InputError("clv_ginelli: need 1 <= k <= d");
  const DerivativeProvider dp(sys, opts.mode);
  const auto kk = static_cast<Eigen::Index>(opts.k);
  const auto d = static_cast<Eigen::Index>(sys.dim());
  const Mat zero_p = Mat::Zero(p.size(), kk);
  std::mt19937_64 rng(opts.seed);

  // Sweep time s = 0..total. Tangent: s is the orbit index. Adjoint: s maps to
  // orbit index total - s, and the map from s to s+1 is Df^T at that index.
  auto orbit_index = [&](std::size_t s) { return variant == Case::Tangent ? s : total - s; };

  std::vector<Mat> qs(total + 1);
  std::vector<Mat> rs(total + 1);
  qs[0] = qr_positive(random_matrix(d, kk, rng)).first;
  for (std::size_t s = 1; s <= total; ++s) {
    Mat aq;
    if (variant == Case::Tangent) {
      aq = dp.jvp_block(orbit[s - 1], p, qs[s - 1], zero_p);
    } else {
      aq = dp.vjp_block(orbit[total - s], p, qs[s - 1]).first;
    }
    auto [q, r] = qr_positive(aq, s);
    qs[s] = std::move(q);
    rs[s] = std::move(r);
  }

  ClvSet out;
  out.variant = variant;
  out.first_step = opts.spin_steps;
  out.vectors.resize(opts.steps);

  // Backward sweep on upper-triangular coefficients C_s = R_{s+1}^{-1} C_{s+1}.
  Mat c = Mat::Identity(kk, kk);
  for (std::size_t s = total; s-- > 0;) {
    const auto tri = rs[s + 1].triangularView<Eigen::Upper>();
    c = tri.solve(c);
    for (Eigen::Index j = 0; j < kk; ++j) c.col(j).normalize();
    const std::size_t idx = orbit_index(s);
    if (idx >= opts.spin_steps && idx < opts.spin_steps + opts.steps) {
      const Vec diag = rs[s + 1].diagonal().cwiseAbs();
      if (diag.maxCoeff() / diag.minCoeff() > 1e12) out.ill_conditioned_steps.push_back(idx);
      Mat v = qs[s] * c;
      for (Eigen::Index j = 0; j < kk; ++j) v.col(j).normalize();
      out.vectors[idx - opts.spin_steps] = std::move(v);
    }
  }
  return out;
}

double vector_angle_deg(const Vec& a, const Vec& b) {
  const double cosine = std::min(1.0, std::abs(a.dot(b)) / (a.norm() * b.norm()));
  return std::acos(cosine) * 180.0 / M_PI;
}

Mat clv_angle_statistics(const ClvSet& a, const ClvSet& b) {
  if (a.first_step != b.first_step || a.vectors.size() != b.vectors.size() || a.vectors.empty()) {
    throw InputError("clv_angle_statistics: sets cover different step ranges");
  }
  const auto ka = a.vectors.front().cols();
  const auto kb = b.vectors.front().cols();
  Mat m = Mat::Zero(ka, kb);
  for (std::size_t s = 0; s < a.vectors.size(); ++s)
    for (Eigen::Index i = 0; i < ka; ++i)
      for (Eigen::Index j = 0; j < kb; ++j) m(i, j) += vector_angle_deg(a.vectors[s].col(i), b.vectors[s].col(j));
  return m / static_cast<double>(a.vectors.size());
}

double min_pairwise_angle(const ClvSet& s) {
  double best = std::numeric_limits<double>::infinity();
  for (const Mat& v : s.vectors)
    for (Eigen::Index i = 0; i < v.cols(); ++i)
      for (Eigen::Index j = i + 1; j < v.cols(); ++j) best = std::min(best, vector_angle_deg(v.col(i), v.col(j)));
  return best;
}

}  // namespace shadow
