#include "fracground/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fracground {

bool check_subcritical(int dim, double s, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) return false;
  if (dim <= 2.0 * s) return true;
  return p < (dim + 2.0 * s) / (dim - 2.0 * s);
}

bool check_subcritical(const ProblemParams& params) {
  return check_subcritical(params.dim(), params.s(), params.p());
}

ProblemParams::ProblemParams(int dim, double s, double p, double eps, Point x0, Potential potential)
    : dim_(dim), s_(s), p_(p), eps_(eps), x0_(std::move(x0)), potential_(std::move(potential)) {}

ProblemParams ProblemParams::make(int dim, double s, double p, double eps, Point x0,
                                  Potential potential) {
  if (dim != 1 && dim != 2) throw ConfigError("dim must be 1 or 2");
  if (!(s > 0.0 && s <= 1.0)) throw ConfigError("s must lie in (0, 1]");
  if (!check_subcritical(dim, s, p)) {
    std::ostringstream msg;
    msg << "exponent p = " << p << " violates the subcriticality condition: need 1 < p";
    if (dim > 2.0 * s) msg << " < (N+2s)/(N-2s) = " << (dim + 2.0 * s) / (dim - 2.0 * s);
    msg << " for N = " << dim << ", s = " << s;
    throw ConfigError(msg.str());
  }
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be >= 0");
  if (x0.empty()) x0.assign(dim, 0.0);
  if (static_cast<int>(x0.size()) != dim) throw ConfigError("x0 must have dim coordinates");
  potential.validate(dim);
  return ProblemParams(dim, s, p, eps, std::move(x0), std::move(potential));
}

ProblemParams ProblemParams::with_eps(double eps) const {
  return make(dim_, s_, p_, eps, x0_, potential_);
}

ProblemParams ProblemParams::with_x0(Point x0) const {
  return make(dim_, s_, p_, eps_, std::move(x0), potential_);
}

double rescaled_potential(const ProblemParams& params, const Point& x) {
  Point y(params.dim());
  for (int d = 0; d < params.dim(); ++d) y[d] = params.eps() * x[d] + params.x0()[d];
  return params.potential()(y);
}

Field positive_power(const Field& u, double q) {
  Field out(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] > 1e-30 ? std::exp(q * std::log(u[i])) : 0.0;
  return out;
}

RescaledModel::RescaledModel(const ProblemParams& params, const FracLapOperator& op)
    : params_(params), op_(op), vsamples_(op.grid()), vmean_(0.0) {
  if (op.grid().dim() != params.dim()) throw ConfigError("grid dimension differs from problem dimension");
  if (std::abs(op.s() - params.s()) > 0.0) throw ConfigError("operator order differs from problem s");
  vsamples_ = sample(op.grid(), [&](const Point& x) { return rescaled_potential(params, x); });
  for (double v : vsamples_.values) vmean_ += v;
  vmean_ /= static_cast<double>(vsamples_.size());
}

Field RescaledModel::apply_h(const Field& u) const {
  Field out = apply_flap_spectral(op_, u);
  for (std::size_t i = 0; i < u.size(); ++i) out[i] += vsamples_[i] * u[i];
  return out;
}

double RescaledModel::eps_inner(const Field& u, const Field& w) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += vsamples_[i] * u[i] * w[i];
  return dsquare_inner(op_, u, w) + acc * grid().cell_measure();
}

double RescaledModel::eps_norm2(const Field& u) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += vsamples_[i] * u[i] * u[i];
  return dsquare_seminorm(op_, u) + acc * grid().cell_measure();
}

double RescaledModel::lp1_norm(const Field& u) const { return norm_lq(u, params_.p() + 1.0); }

double RescaledModel::quotient(const Field& u) const {
  const double denom = lp1_norm(u);
  if (!(denom > 0.0)) throw ConfigError("rayleigh_quotient: zero field");
  return eps_norm2(u) / (denom * denom);
}

namespace {

void require_nonnegative(const Field& u, const char* where) {
  const double tol = 1e-9 * max_abs(u);
  for (double x : u.values)
    if (x < -tol) throw NumericalError(std::string(where) + ": field has negative entries");
}

}  // namespace

Field RescaledModel::el_residual(const Field& u, double nu) const {
  require_nonnegative(u, "el_residual");
  Field r = apply_h(u);
  const Field up = positive_power(u, params_.p());
  axpy(-nu, up, r);
  return r;
}

double RescaledModel::energy(const Field& u, double nu) const {
  const double q = params_.p() + 1.0;
  double acc = 0.0;
  for (double x : u.values) acc += std::pow(std::abs(x), q);
  return 0.5 * eps_norm2(u) - nu / q * acc * grid().cell_measure();
}

double rayleigh_quotient(const Field& u, const ProblemParams& params, const FracLapOperator& op) {
  return RescaledModel(params, op).quotient(u);
}

double energy_J(const Field& u, double nu, const ProblemParams& params, const FracLapOperator& op) {
  return RescaledModel(params, op).energy(u, nu);
}

Field el_residual(const Field& u, double nu, const ProblemParams& params, const FracLapOperator& op) {
  return RescaledModel(params, op).el_residual(u, nu);
}

namespace {

// Linear interpolation of v at y, zero outside the box of v.
double interpolate(const Field& v, const Point& y) {
  const Grid& g = v.grid;
  const int n = g.points_per_axis();
  double w[2][2] = {};
  int j[2][2] = {};
  for (int d = 0; d < g.dim(); ++d) {
    const double pos = (y[d] + g.half_width()) / g.spacing();
    if (pos < 0.0 || pos > n - 1) return 0.0;
    const int j0 = std::min(static_cast<int>(std::floor(pos)), n - 2);
    const double t = pos - j0;
    j[d][0] = j0;
    j[d][1] = j0 + 1;
    w[d][0] = 1.0 - t;
    w[d][1] = t;
  }
  if (g.dim() == 1) return w[0][0] * v[g.flat(j[0][0])] + w[0][1] * v[g.flat(j[0][1])];
  double acc = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) acc += w[0][a] * w[1][b] * v[g.flat(j[0][a], j[1][b])];
  return acc;
}

}  // namespace

Field frame_transfer(const Field& v, const ProblemParams& params, const Grid& target) {
  const double eps = params.eps();
  if (!(eps > 0.0)) throw ConfigError("frame_transfer: eps must be positive");
  if (target.dim() != v.grid.dim()) throw ConfigError("frame_transfer: dimension mismatch");
  // Target spacing measured in rescaled units must not be coarser than the
  // source spacing by more than a factor of two.
  if (target.spacing() / eps > 2.0 * v.grid.spacing() * (1 + 1e-12))
    throw ConfigError("frame_transfer: target grid cannot resolve the dilated profile");

  // Mass of v outside the preimage of the target box.
  const Grid& g = v.grid;
  double outside = 0.0, total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point y = g.node(i);
    bool inside = true;
    for (int d = 0; d < g.dim(); ++d) {
      const double x = eps * y[d] + params.x0()[d];
      if (x < -target.half_width() || x > target.half_width()) inside = false;
    }
    total += v[i] * v[i];
    if (!inside) outside += v[i] * v[i];
  }
  if (outside > 1e-4 * total)
    throw ConfigError("frame_transfer: dilated support does not fit in the target box");

  return sample(target, [&](const Point& x) {
    Point y(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) y[d] = (x[d] - params.x0()[d]) / eps;
    return interpolate(v, y);
  });
}

double physical_quotient(const Field& u, const ProblemParams& params, const FracLapOperator& op) {
  const double eps = params.eps();
  const int N = params.dim();
  const double p = params.p();
  double pot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) pot += params.potential()(u.grid.node(i)) * u[i] * u[i];
  pot *= u.grid.cell_measure();
  const double num = std::pow(eps, 2.0 * params.s()) * dsquare_seminorm(op, u) + pot;
  const double den = norm_lq(u, p + 1.0);
  if (!(den > 0.0)) throw ConfigError("physical_quotient: zero field");
  return std::pow(eps, N * (1.0 - p) / (1.0 + p)) * num / (den * den);
}

}  // namespace fracground
