#include "fracground/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <thread>

namespace fracground {

int sweep_threads() {
  if (const char* env = std::getenv("FRACGROUND_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
    throw ConfigError("FRACGROUND_THREADS must be a positive integer, got '" + std::string(env) + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

SweepEntry solve_entry(const ProblemParams& params, const Grid& grid, const SweepOptions& opt,
                       const Field& U, double r1, double r2) {
  const FracLapOperator op(grid, params.s());
  SolveResult res = minimize_rayleigh(params, op, opt.solver);
  const Field& v = res.minimizer;

  const Maximizer m = locate_maximizer(v);
  Point physical(params.dim());
  for (int d = 0; d < params.dim(); ++d) physical[d] = params.x0()[d] + params.eps() * m.point[d];

  Field aligned = align_to_origin(v);
  double slope = std::numeric_limits<double>::quiet_NaN();
  try {
    slope = decay_fit(aligned, r1, r2).slope;
  } catch (const Error&) {
  }

  std::vector<double> crit = criticality_residual(v, params);
  double acc = 0.0;
  for (double c : crit) acc += c * c;
  ProfileGap gap = profile_gap(v, U, op);
  return SweepEntry{.solve = std::move(res),
                    .maximizer_rescaled = m.point,
                    .maximizer = std::move(physical),
                    .maximizer_multiple = m.multiple,
                    .decay_slope = slope,
                    .criticality = std::move(crit),
                    .criticality_norm = std::sqrt(acc),
                    .gap = std::move(gap),
                    .aligned = std::move(aligned)};
}

}  // namespace

SweepOutcome run_eps_sweep(const ProblemParams& base, const std::vector<double>& eps_list, const Grid& grid,
                           const SweepOptions& opt) {
  if (eps_list.empty()) throw ConfigError("eps_list must not be empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw ConfigError("eps_list entries must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw ConfigError("eps_list must be strictly decreasing");
  }
  const double r1 = opt.decay_r2 > 0.0 ? opt.decay_r1 : 0.3 * grid.half_width();
  const double r2 = opt.decay_r2 > 0.0 ? opt.decay_r2 : 0.7 * grid.half_width();

  SolverConfig limit_cfg = opt.solver;
  limit_cfg.init_kind = InitKind::gaussian_bump;
  SolveResult limit =
      ground_state_constant(base.potential().infimum(), base.dim(), base.s(), base.p(), grid, limit_cfg);
  const double nu_limit = limit.nu;
  SweepOutcome out{.report = {}, .entries = {}, .limit = std::move(limit), .nu_limit = nu_limit};

  const std::size_t m = eps_list.size();
  std::vector<std::optional<SweepEntry>> slots(m);
  std::vector<std::exception_ptr> errors(m);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < m; i = next++) {
      try {
        slots[i] = solve_entry(base.with_eps(eps_list[i]), grid, opt, out.limit.minimizer, r1, r2);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(opt.threads > 0 ? opt.threads : sweep_threads(), 1, static_cast<int>(m));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  SweepReport& r = out.report;
  for (std::size_t i = 0; i < m; ++i) {
    SweepEntry& e = *slots[i];
    r.eps_list.push_back(eps_list[i]);
    r.nu_list.push_back(e.solve.nu);
    r.maximizer_list.push_back(e.maximizer);
    r.decay_slope_list.push_back(e.decay_slope);
    r.criticality_list.push_back(e.criticality_norm);
    r.profile_gap_list.push_back(e.gap.gap);
    r.converged_flags.push_back(e.solve.converged);
    out.entries.push_back(std::move(e));
  }
  r.validate();
  return out;
}

MaximizerRate maximizer_rate(const SweepReport& report, const Point& target, double rescaled_spacing) {
  report.validate();
  MaximizerRate out;
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < report.eps_list.size(); ++i) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < target.size(); ++k) {
      const double diff = report.maximizer_list[i][k] - target[k];
      d2 += diff * diff;
    }
    out.distances.push_back(std::sqrt(d2));
    if (report.converged_flags[i]) used.push_back(i);
  }
  if (used.size() < 2) {
    out.message = "fewer than 2 converged entries";
    return out;
  }
  const std::size_t f = used.back(), g = used[used.size() - 2];
  out.C = std::max(out.distances[f] / report.eps_list[f], out.distances[g] / report.eps_list[g]);
  for (std::size_t i : used) {
    const double slack = 2.0 * rescaled_spacing * report.eps_list[i];
    if (out.distances[i] > out.C * report.eps_list[i] + slack) {
      out.message = "maximizer distance above C eps at eps = " + std::to_string(report.eps_list[i]);
      return out;
    }
  }
  const double pred = out.C * report.eps_list[f];
  if (std::abs(out.distances[f] - pred) > 2.0 * rescaled_spacing * report.eps_list[f]) {
    out.message = "finest maximizer further than 2h from its prediction";
    return out;
  }
  out.pass = true;
  out.message = "ok";
  return out;
}

}  // namespace fracground
