#include "fracground/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracground {

namespace {

double dot(const Field& a, const Field& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

// Lanczos-based MINRES following Paige & Saunders, with the preconditioner
// entering through the M^{-1}-inner product.
KrylovResult minres(const LinearMap& apply, const Field& rhs, const LinearMap& precond_inverse,
                    double rtol, int max_iters) {
  const Grid& g = rhs.grid;
  KrylovResult out{Field(g)};
  Field r1 = rhs;
  Field y = precond_inverse(r1);
  const double beta1_sq = dot(r1, y);
  if (beta1_sq < 0.0) throw NumericalError("minres: preconditioner is not positive definite");
  const double beta1 = std::sqrt(beta1_sq);
  if (beta1 == 0.0) {
    out.converged = true;
    return out;
  }

  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  Field w(g), w1(g), w2(g), r2 = r1;
  Field& x = out.x;

  for (int itn = 1; itn <= max_iters; ++itn) {
    const double sinv = 1.0 / beta;
    Field v = sinv * y;
    y = apply(v);
    if (itn >= 2) axpy(-beta / oldb, r1, y);
    const double alfa = dot(v, y);
    axpy(-alfa / beta, r2, y);
    r1 = r2;
    r2 = y;
    y = precond_inverse(r2);
    oldb = beta;
    const double bsq = dot(r2, y);
    if (bsq < 0.0) throw NumericalError("minres: preconditioner is not positive definite");
    beta = std::sqrt(bsq);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::epsilon());
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
    axpy(phi, w, x);

    out.iterations = itn;
    out.relative_residual = phibar / beta1;
    if (out.relative_residual <= rtol) {
      out.converged = true;
      break;
    }
    if (beta == 0.0) break;
  }
  return out;
}

KrylovResult pcg(const LinearMap& apply, const Field& rhs, const LinearMap& precond_inverse,
                 double rtol, int max_iters) {
  const Grid& g = rhs.grid;
  KrylovResult out{Field(g)};
  Field r = rhs;
  Field z = precond_inverse(r);
  Field p = z;
  double rz = dot(r, z);
  const double r0 = std::sqrt(std::max(rz, 0.0));
  if (r0 == 0.0) {
    out.converged = true;
    return out;
  }
  for (int itn = 1; itn <= max_iters; ++itn) {
    const Field ap = apply(p);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw NumericalError("pcg: operator is not positive definite");
    const double alpha = rz / pap;
    axpy(alpha, p, out.x);
    axpy(-alpha, ap, r);
    z = precond_inverse(r);
    const double rz_new = dot(r, z);
    out.iterations = itn;
    out.relative_residual = std::sqrt(std::max(rz_new, 0.0)) / r0;
    if (out.relative_residual <= rtol) {
      out.converged = true;
      break;
    }
    const double b = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + b * p[i];
  }
  return out;
}

}  // namespace fracground
