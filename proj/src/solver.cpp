#include "fracground/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fracground/linear.hpp"
#include "fracground/spectral.hpp"

namespace fracground {

std::string_view to_string(InitKind k) {
  switch (k) {
    case InitKind::gaussian_bump: return "gaussian_bump";
    case InitKind::random_positive: return "random_positive";
    case InitKind::warm_start: return "warm_start";
  }
  return "?";
}

InitKind parse_init_kind(std::string_view name) {
  for (auto k : {InitKind::gaussian_bump, InitKind::random_positive, InitKind::warm_start})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown init_kind '" + std::string(name) +
                    "' (expected gaussian_bump, random_positive or warm_start)");
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(step > 0.0)) throw ConfigError("step must be positive");
  if (!(tol_residual > 0.0) || !(tol_stall > 0.0) || !(refine_tol > 0.0))
    throw ConfigError("solver tolerances must be positive");
  if (init_kind == InitKind::warm_start && !warm_start)
    throw ConfigError("init_kind warm_start needs a warm-start field");
}

Field init_field(const Grid& grid, InitKind kind, std::uint64_t seed, const std::optional<Field>& warm) {
  auto bump = [](const Point& x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return std::exp(-r2);
  };
  switch (kind) {
    case InitKind::gaussian_bump: return sample(grid, bump);
    case InitKind::random_positive: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> eta(-1.0, 1.0);
      Field out(grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double b = bump(grid.node(i));
        out[i] = std::max(b * (1.0 + 0.3 * eta(rng)), 0.1 * b);
      }
      return out;
    }
    case InitKind::warm_start:
      if (!warm) throw ConfigError("init_field: warm_start requires a field");
      if (!(warm->grid == grid)) throw ConfigError("init_field: warm-start grid mismatch");
      return *warm;
  }
  return Field(grid);
}

namespace {

void clip_negative(Field& u) {
  for (double& x : u.values) x = std::max(x, 0.0);
}

// Positive part, optional symmetrization, then scaling onto ||u||_{p+1} = 1.
// Returns false when the field has collapsed.
bool project(Field& u, const RescaledModel& model, bool radial) {
  if (radial) u = symmetrize_about_origin(u);
  clip_negative(u);
  const double nrm = model.lp1_norm(u);
  if (!(nrm > 1e-150) || !std::isfinite(nrm)) return false;
  for (double& x : u.values) x /= nrm;
  return true;
}

double relative_residual(const RescaledModel& model, const Field& u, double nu) {
  return norm_l2(model.el_residual(u, nu)) / norm_l2(u);
}

}  // namespace

SolveResult minimize_rayleigh(const ProblemParams& params, const FracLapOperator& op,
                              const SolverConfig& cfg, std::stop_token stop) {
  cfg.validate();
  const RescaledModel model(params, op);
  const Grid& grid = op.grid();

  Field u = init_field(grid, cfg.init_kind, cfg.rng_seed, cfg.warm_start);
  if (!project(u, model, cfg.radial_class))
    throw ConfigError("minimize_rayleigh: initial field underflows (box or step misconfigured)");
  double q = model.quotient(u);
  if (!std::isfinite(q) || q > 1e6)
    throw ConfigError("minimize_rayleigh: initial quotient " + std::to_string(q) +
                      " exceeds 1e6 (grid does not resolve the initial field)");

  SolveResult res{.minimizer = u};
  res.energy_trace.push_back(q);
  res.status = "max_iters";

  const double shift = model.mean_potential();
  const double max_step = 8.0 * cfg.step;
  double tau = cfg.step;
  int stalls = 0;
  double resid = relative_residual(model, u, q);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    if (stop.stop_requested()) {
      res.status = "cancelled";
      break;
    }
    if (resid <= cfg.tol_residual) {
      res.status = "converged";
      break;
    }
    const Field grad = apply_resolvent(op, model.el_residual(u, q), shift);

    bool accepted = false;
    Field trial(grid);
    double qt = q;
    while (tau >= 1e-12 * cfg.step) {
      trial = u;
      axpy(-tau, grad, trial);
      if (project(trial, model, cfg.radial_class)) {
        qt = model.quotient(trial);
        if (qt <= q) {
          accepted = true;
          break;
        }
      }
      tau *= 0.5;
    }
    res.iters = it;
    if (!accepted) {
      res.status = "stalled";
      break;
    }
    const double decrease = q - qt;
    u = std::move(trial);
    q = qt;
    res.energy_trace.push_back(q);
    resid = relative_residual(model, u, q);
    tau = std::min(tau * 1.5, max_step);
    stalls = decrease <= cfg.tol_stall * q ? stalls + 1 : 0;
    if (stalls >= 3 && resid > cfg.tol_residual) {
      res.status = "stalled";
      break;
    }
  }
  if (resid <= cfg.tol_residual) res.status = "converged";

  res.minimizer = u;
  res.nu = q;
  res.residual_l2 = resid;
  res.converged = resid <= cfg.tol_residual;

  if (cfg.refine && !stop.stop_requested()) {
    if (resid > 1e-3) {
      res.status += "; refine skipped (residual above 1e-3)";
      return res;
    }
    SolveResult refined = newton_refine(u, params, op, q, cfg);
    refined.iters = res.iters;
    refined.energy_trace = std::move(res.energy_trace);
    return refined;
  }
  return res;
}

SolveResult newton_refine(const Field& u0, const ProblemParams& params, const FracLapOperator& op,
                          double nu0, const SolverConfig& cfg) {
  const RescaledModel model(params, op);
  const double p = params.p();
  const double shift = model.mean_potential();

  // Work with w = nu^{1/(p-1)} u, which solves H w = w^p.
  Field w = std::pow(nu0, 1.0 / (p - 1.0)) * u0;
  clip_negative(w);
  auto stationarity = [&](const Field& f) {
    Field r = model.apply_h(f);
    axpy(-1.0, positive_power(f, p), r);
    return r;
  };
  auto rel = [&](const Field& f, const Field& r) { return norm_l2(r) / norm_l2(f); };

  Field fw = stationarity(w);
  double fnorm = rel(w, fw);
  int steps = 0;
  bool failed = false;
  const LinearMap precond = [&](const Field& f) { return apply_resolvent(op, f, shift); };

  for (; steps < cfg.refine_max_steps && fnorm > cfg.refine_tol; ++steps) {
    const Field weight = positive_power(w, p - 1.0);
    const LinearMap jac = [&](const Field& v) {
      Field out = model.apply_h(v);
      for (std::size_t i = 0; i < v.size(); ++i) out[i] -= p * weight[i] * v[i];
      return out;
    };
    KrylovResult kr = minres(jac, -1.0 * fw, precond, 1e-8, 400);
    Field delta = std::move(kr.x);
    if (cfg.radial_class) delta = symmetrize_about_origin(delta);

    bool accepted = false;
    double t = 1.0;
    for (int k = 0; k < 8; ++k, t *= 0.5) {
      Field trial = w;
      axpy(t, delta, trial);
      clip_negative(trial);
      Field ft = stationarity(trial);
      const double fn = rel(trial, ft);
      if (fn < fnorm) {
        w = std::move(trial);
        fw = std::move(ft);
        fnorm = fn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      failed = !kr.converged || fnorm > cfg.tol_residual;
      break;
    }
  }

  Field u = w;
  const double nrm = model.lp1_norm(u);
  if (!(nrm > 0.0)) throw NumericalError("newton_refine: iterate collapsed to zero");
  for (double& x : u.values) x /= nrm;

  SolveResult res{.minimizer = u};
  res.nu = model.quotient(u);
  res.residual_l2 = relative_residual(model, u, res.nu);
  res.refine_steps = steps;
  res.converged = res.residual_l2 <= cfg.tol_residual;
  res.status = res.converged ? "converged" : "refine_incomplete";

  if (failed && !res.converged) {
    // Linearization too singular here: fall back to the first-order method.
    SolverConfig fallback = cfg;
    fallback.refine = false;
    fallback.init_kind = InitKind::warm_start;
    fallback.warm_start = u0;
    SolveResult d = minimize_rayleigh(params, op, fallback);
    d.refine_steps = steps;
    d.status = "refine_fallback; " + d.status;
    return d;
  }
  return res;
}

SolveResult ground_state_constant(double lambda, int dim, double s, double p, const Grid& grid,
                                  const SolverConfig& cfg) {
  if (!(lambda > 0.0)) throw ConfigError("ground_state_constant: lambda must be positive");
  const ProblemParams params =
      ProblemParams::make(dim, s, p, 1.0, Point(dim, 0.0), Potential::constant(lambda));
  const FracLapOperator op(grid, s);
  SolveResult res = minimize_rayleigh(params, op, cfg);

  const Point peak = spectral_argmax(res.minimizer);
  Point back(dim);
  for (int d = 0; d < dim; ++d) back[d] = -peak[d];
  Field centered = spectral_shift(res.minimizer, back);
  clip_negative(centered);

  const Field sym = symmetrize_about_origin(centered);
  res.symmetry_correction = norm_l2(sym - centered) / norm_l2(centered);
  res.symmetry_flag = res.symmetry_correction > 1e-4;

  const RescaledModel model(params, op);
  Field u = sym;
  project(u, model, false);
  res.minimizer = u;
  res.nu = model.quotient(u);
  res.residual_l2 = relative_residual(model, u, res.nu);
  res.converged = res.residual_l2 <= cfg.tol_residual;
  if (res.symmetry_flag) res.status += "; symmetry correction above 1e-4";
  return res;
}

}  // namespace fracground
