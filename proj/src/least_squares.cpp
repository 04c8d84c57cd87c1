#include "shadow/least_squares.hpp"

#include <cmath>

namespace shadow {

BlockTridiagonal::BlockTridiagonal(std::vector<Mat> diag, std::vector<Mat> lower)
    : diag_(std::move(diag)), lower_(std::move(lower)) {
  if (diag_.empty()) throw InputError("block tridiagonal: no blocks");
  if (lower_.size() + 1 != diag_.size()) throw InputError("block tridiagonal: need one fewer off-diagonal block");
  factorize();
}

// S_0 = D_0, S_{i+1} = D_{i+1} - E_i S_i^{-1} E_i^T.
void BlockTridiagonal::factorize() {
  schur_.clear();
  schur_.reserve(diag_.size());
  schur_.emplace_back(diag_[0]);
  for (std::size_t i = 0; i + 1 < diag_.size(); ++i) {
    if (schur_.back().info() != Eigen::Success) throw InputError("block tridiagonal: matrix not positive definite");
    const Mat t = schur_.back().solve(lower_[i].transpose());
    schur_.emplace_back(diag_[i + 1] - lower_[i] * t);
  }
  if (schur_.back().info() != Eigen::Success) throw InputError("block tridiagonal: matrix not positive definite");
}

Vec BlockTridiagonal::multiply(const Vec& x) const {
  const Eigen::Index m = block_size();
  Vec y(x.size());
  for (std::size_t i = 0; i < diag_.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    y.segment(ii * m, m) = diag_[i] * x.segment(ii * m, m);
    if (i > 0) y.segment(ii * m, m) += lower_[i - 1] * x.segment((ii - 1) * m, m);
    if (i + 1 < diag_.size()) y.segment(ii * m, m) += lower_[i].transpose() * x.segment((ii + 1) * m, m);
  }
  return y;
}

Vec BlockTridiagonal::solve(const Vec& rhs) const {
  const Eigen::Index m = block_size();
  const std::size_t nb = diag_.size();
  Vec g = rhs;
  for (std::size_t i = 0; i + 1 < nb; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    g.segment((ii + 1) * m, m) -= lower_[i] * schur_[i].solve(g.segment(ii * m, m));
  }
  Vec y(rhs.size());
  for (std::size_t i = nb; i-- > 0;) {
    const auto ii = static_cast<Eigen::Index>(i);
    Vec t = g.segment(ii * m, m);
    if (i + 1 < nb) t -= lower_[i].transpose() * y.segment((ii + 1) * m, m);
    y.segment(ii * m, m) = schur_[i].solve(t);
  }
  return y;
}

double BlockTridiagonal::condition_estimate(int iterations) const {
  const Eigen::Index n = static_cast<Eigen::Index>(diag_.size()) * block_size();
  Vec x = Vec::Ones(n).normalized();
  double lmax = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vec y = multiply(x);
    lmax = y.norm();
    x = y / lmax;
  }
  x = Vec::Ones(n).normalized();
  double inv_max = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vec y = solve(x);
    inv_max = y.norm();
    x = y / inv_max;
  }
  return lmax * inv_max;
}

Mat BlockTridiagonal::dense() const {
  const Eigen::Index m = block_size();
  const Eigen::Index n = static_cast<Eigen::Index>(diag_.size()) * m;
  Mat t = Mat::Zero(n, n);
  for (std::size_t i = 0; i < diag_.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    t.block(ii * m, ii * m, m, m) = diag_[i];
    if (i + 1 < diag_.size()) {
      t.block((ii + 1) * m, ii * m, m, m) = lower_[i];
      t.block(ii * m, (ii + 1) * m, m, m) = lower_[i].transpose();
    }
  }
  return t;
}

Vec stack(const std::vector<Vec>& blocks) {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.size();
  Vec x(n);
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    x.segment(off, b.size()) = b;
    off += b.size();
  }
  return x;
}

namespace {

std::size_t check_shapes(const std::vector<Mat>& r, const std::vector<Vec>& pi, const ExtraRow* row) {
  if (r.size() < 2 || r.size() != pi.size()) throw InputError("min-norm solve: need R_1..R_N and pi_1..pi_N");
  const std::size_t n = r.size() - 1;
  if (row != nullptr && row->w.size() != n + 1) throw InputError("min-norm solve: extra row needs N + 1 blocks");
  return n;
}

// G^T y for y stacked over block rows 1..N.
Vec apply_gt(const std::vector<Mat>& r, const Vec& y, Eigen::Index m) {
  const std::size_t n = r.size() - 1;
  Vec x = Vec::Zero(static_cast<Eigen::Index>(n + 1) * m);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const Vec yk = y.segment((kk - 1) * m, m);
    x.segment((kk - 1) * m, m) -= r[k].transpose() * yk;
    x.segment(kk * m, m) += yk;
  }
  return x;
}

// G x stacked over block rows 1..N.
Vec apply_g(const std::vector<Mat>& r, const Vec& x, Eigen::Index m) {
  const std::size_t n = r.size() - 1;
  Vec y(static_cast<Eigen::Index>(n) * m);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    y.segment((kk - 1) * m, m) = x.segment(kk * m, m) - r[k] * x.segment((kk - 1) * m, m);
  }
  return y;
}

std::vector<Vec> unstack(const Vec& x, Eigen::Index m) {
  std::vector<Vec> out(static_cast<std::size_t>(x.size() / m));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.segment(static_cast<Eigen::Index>(i) * m, m);
  return out;
}

double relative_residual(const Mat& g, const Vec& x, const Vec& h) {
  const double hn = h.norm();
  const double res = (g * x - h).norm();
  return hn > 0.0 ? res / hn : res;
}

}  // namespace

CoefficientSolution solve_min_norm(const std::vector<Mat>& r, const std::vector<Vec>& pi, const ExtraRow* row,
                                   bool estimate_condition) {
  const std::size_t n = check_shapes(r, pi, row);
  const Eigen::Index m = r[1].rows();
  std::vector<Mat> diag(n);
  std::vector<Mat> lower(n - 1);
  for (std::size_t k = 1; k <= n; ++k) {
    diag[k - 1] = r[k] * r[k].transpose() + Mat::Identity(m, m);
    if (k < n) lower[k - 1] = -r[k + 1];
  }
  const BlockTridiagonal t(std::move(diag), std::move(lower));
  Vec h(static_cast<Eigen::Index>(n) * m);
  for (std::size_t k = 1; k <= n; ++k) h.segment(static_cast<Eigen::Index>(k - 1) * m, m) = pi[k];

  CoefficientSolution sol;
  Vec x;
  if (row == nullptr) {
    sol.multipliers = t.solve(h);
    x = apply_gt(r, sol.multipliers, m);
  } else {
    const Vec w = stack(row->w);
    const Vec b = apply_g(r, w, m);
    const Vec y1 = t.solve(h);
    const Vec y2 = t.solve(b);
    const double schur = w.squaredNorm() - b.dot(y2);
    if (!(schur > 0.0)) throw InputError("min-norm solve: extra row is dependent on the block constraints");
    sol.row_multiplier = (row->rhs - b.dot(y1)) / schur;
    sol.multipliers = y1 - sol.row_multiplier * y2;
    x = apply_gt(r, sol.multipliers, m) + sol.row_multiplier * w;
  }
  sol.a = unstack(x, m);

  Vec gx = apply_g(r, x, m);
  double num = (gx - h).squaredNorm();
  double den = h.squaredNorm();
  if (row != nullptr) {
    const double e = stack(row->w).dot(x) - row->rhs;
    num += e * e;
    den += row->rhs * row->rhs;
  }
  sol.residual = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  if (estimate_condition) sol.condition = t.condition_estimate();
  return sol;
}

Mat assemble_constraints(const std::vector<Mat>& r, const ExtraRow* row) {
  const std::size_t n = r.size() - 1;
  const Eigen::Index m = r[1].rows();
  const Eigen::Index rows = static_cast<Eigen::Index>(n) * m + (row != nullptr ? 1 : 0);
  Mat g = Mat::Zero(rows, static_cast<Eigen::Index>(n + 1) * m);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    g.block((kk - 1) * m, (kk - 1) * m, m, m) = -r[k];
    g.block((kk - 1) * m, kk * m, m, m).setIdentity();
  }
  if (row != nullptr) g.row(rows - 1) = stack(row->w).transpose();
  return g;
}

Vec assemble_rhs(const std::vector<Vec>& pi, const ExtraRow* row) {
  std::vector<Vec> blocks(pi.begin() + 1, pi.end());
  Vec h = stack(blocks);
  if (row != nullptr) {
    h.conservativeResize(h.size() + 1);
    h(h.size() - 1) = row->rhs;
  }
  return h;
}

CoefficientSolution solve_min_norm_dense(const std::vector<Mat>& r, const std::vector<Vec>& pi, const ExtraRow* row) {
  check_shapes(r, pi, row);
  const Eigen::Index m = r[1].rows();
  const Mat g = assemble_constraints(r, row);
  const Vec h = assemble_rhs(pi, row);
  const Eigen::CompleteOrthogonalDecomposition<Mat> cod(g);
  const Vec x = cod.solve(h);
  CoefficientSolution sol;
  sol.a = unstack(x, m);
  sol.residual = relative_residual(g, x, h);
  const Eigen::JacobiSVD<Mat> svd(g * g.transpose());
  const Vec s = svd.singularValues();
  sol.condition = s(0) / s(s.size() - 1);
  return sol;
}

}  // namespace shadow
