#include "shadow/models/chebyshev.hpp"

#include <cmath>
#include <numbers>

namespace shadow::models {

ChebyshevGrid cheb(std::size_t n) {
  if (n < 2) throw InputError("cheb: need at least 2 collocation points");
  const auto m = static_cast<Eigen::Index>(n);
  const double order = static_cast<double>(n - 1);
  ChebyshevGrid g{Vec(m), Mat(m, m)};
  Vec c(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    g.points(j) = std::cos(std::numbers::pi * static_cast<double>(j) / order);
    const double edge = (j == 0 || j == m - 1) ? 2.0 : 1.0;
    c(j) = (j % 2 == 0 ? 1.0 : -1.0) * edge;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      g.diff(i, j) = (c(i) / c(j)) / (g.points(i) - g.points(j));
      row_sum += g.diff(i, j);
    }
    g.diff(i, i) = -row_sum;
  }
  return g;
}

}  // namespace shadow::models
