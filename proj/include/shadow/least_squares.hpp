/**
 * @file least_squares.hpp
 * @brief Minimum-norm solution of the block-bidiagonal shadowing constraints
 *
 *     a_n - R_n a_{n-1} = pi_n,  n = 1..N,   unknowns a_0..a_N,
 *
 * optionally with one extra dense row w . X = h.
 *
 * The normal matrix G G^T is block tridiagonal and SPD, so X = G^T y with
 * (G G^T) y = H costs O(N d_u^3). The extra row is handled by a bordered
 * (Schur complement) solve that reuses the same factorization.
 */
#pragma once

#include "shadow/system.hpp"

#include <vector>

namespace shadow {

/// Symmetric positive definite block-tridiagonal matrix, blocks of size m.
/// diag[i] is block (i, i); lower[i] is block (i + 1, i).
class BlockTridiagonal {
 public:
  BlockTridiagonal(std::vector<Mat> diag, std::vector<Mat> lower);

  [[nodiscard]] std::size_t blocks() const { return diag_.size(); }
  [[nodiscard]] Eigen::Index block_size() const { return diag_.front().rows(); }

  [[nodiscard]] Vec multiply(const Vec& x) const;
  /// Block Cholesky forward/backward substitution. Throws InputError if a
  /// Schur complement is not positive definite.
  [[nodiscard]] Vec solve(const Vec& rhs) const;
  /// lambda_max / lambda_min by power and inverse iteration.
  [[nodiscard]] double condition_estimate(int iterations = 40) const;
  [[nodiscard]] Mat dense() const;

 private:
  void factorize();

  std::vector<Mat> diag_;
  std::vector<Mat> lower_;
  std::vector<Eigen::LLT<Mat>> schur_;
};

/// Extra constraint sum_n w_n . a_n = rhs, w has one block per a_n.
struct ExtraRow {
  std::vector<Vec> w;
  double rhs = 0.0;
};

struct CoefficientSolution {
  std::vector<Vec> a;       ///< a_0..a_N
  Vec multipliers;          ///< y with X = G^T y (+ w z)
  double row_multiplier = 0.0;
  double residual = 0.0;    ///< |G X - H| / |H| including the extra row (0 when H = 0)
  double condition = 0.0;   ///< estimate for G G^T
};

/// r[n], pi[n] for n = 1..N (index 0 ignored).
CoefficientSolution solve_min_norm(const std::vector<Mat>& r, const std::vector<Vec>& pi, const ExtraRow* row = nullptr,
                                   bool estimate_condition = true);

/// Dense reference: complete orthogonal decomposition of the assembled G.
CoefficientSolution solve_min_norm_dense(const std::vector<Mat>& r, const std::vector<Vec>& pi,
                                         const ExtraRow* row = nullptr);

/// Assembled G (N d_u (+1) x (N+1) d_u) and H.
Mat assemble_constraints(const std::vector<Mat>& r, const ExtraRow* row = nullptr);
Vec assemble_rhs(const std::vector<Vec>& pi, const ExtraRow* row = nullptr);

/// Stacks a_0..a_N into one vector.
Vec stack(const std::vector<Vec>& blocks);

}  // namespace shadow
