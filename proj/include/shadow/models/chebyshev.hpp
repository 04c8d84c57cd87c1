#pragma once

#include "shadow/system.hpp"

namespace shadow::models {

struct ChebyshevGrid {
  Vec points;  ///< y_j = cos(j pi / (n - 1)), j = 0..n-1; descending from +1 to -1
  Mat diff;    ///< collocation differentiation matrix
};

/// Gauss-Lobatto points and differentiation matrix for n >= 2 points
/// (Trefethen's construction with the negative-sum diagonal).
ChebyshevGrid cheb(std::size_t n);

}  // namespace shadow::models
