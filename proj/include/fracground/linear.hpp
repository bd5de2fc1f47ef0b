#pragma once

#include <functional>

#include "fracground/grid.hpp"

namespace fracground {

using LinearMap = std::function<Field(const Field&)>;

struct KrylovResult {
  Field x;
  int iterations = 0;
  double relative_residual = 0.0;  ///< preconditioned residual / initial
  bool converged = false;
};

/// Preconditioned MINRES for a symmetric (possibly indefinite) map.
/// `precond_inverse` must apply an SPD approximation of the inverse.
KrylovResult minres(const LinearMap& apply, const Field& rhs, const LinearMap& precond_inverse,
                    double rtol, int max_iters);

/// Preconditioned conjugate gradients for an SPD map.
KrylovResult pcg(const LinearMap& apply, const Field& rhs, const LinearMap& precond_inverse,
                 double rtol, int max_iters);

}  // namespace fracground
