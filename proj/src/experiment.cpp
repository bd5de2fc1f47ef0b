#include "fracground/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <unistd.h>

#include "fracground/spectral.hpp"

namespace fracground {

using nlohmann::json;

bool RunOutcome::all_pass() const { return error.empty() && first_failure().empty(); }

std::string RunOutcome::first_failure() const {
  for (const auto& v : verdicts)
    if (!v.pass) return v.name;
  return "";
}

std::string format12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

namespace {

std::string sci(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17e", x);
  return buf;
}

void emit(const json& j, std::string& out, int depth) {
  const std::string pad(2 * (depth + 1), ' '), close(2 * depth, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        emit(it.value(), out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      out += flat ? "[" : "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += flat ? ", " : ",\n";
        if (!flat) out += pad;
        emit(j[i], out, depth + 1);
      }
      out += flat ? "]" : "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? sci(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

json point_json(const Point& p) { return json(p); }

/// Values along axis 0 through the origin node (the whole field in 1D).
json axis_slice(const Field& u) {
  const Grid& g = u.grid;
  std::vector<double> vals;
  const int n = g.points_per_axis();
  for (int j = 0; j < n; ++j) vals.push_back(u[g.dim() == 1 ? g.flat(j) : g.flat(j, n / 2)]);
  return vals;
}

json axis_coordinates(const Grid& g) {
  std::vector<double> xs;
  for (int j = 0; j < g.points_per_axis(); ++j) xs.push_back(g.coordinate(j));
  return xs;
}

json solve_summary(const SolveResult& r) {
  return json{{"nu", r.nu},
              {"residual_l2", r.residual_l2},
              {"iters", r.iters},
              {"refine_steps", r.refine_steps},
              {"converged", r.converged},
              {"status", r.status},
              {"energy_trace", r.energy_trace}};
}

struct Context {
  const RunConfig& cfg;
  std::vector<Verdict>& verdicts;
  json& results;

  void verdict(std::string name, bool pass, std::string detail = "") {
    verdicts.push_back({std::move(name), pass, std::move(detail)});
  }
};

std::pair<double, double> fit_window(const RunConfig& cfg) {
  if (cfg.fit_window.size() == 2) return {cfg.fit_window[0], cfg.fit_window[1]};
  return {0.3 * cfg.L, 0.7 * cfg.L};
}

// --- solve -----------------------------------------------------------------

void run_solve(Context& ctx) {
  const ProblemParams params = ctx.cfg.problem();
  const FracLapOperator op(ctx.cfg.grid(), params.s());
  const SolveResult r = minimize_rayleigh(params, op, ctx.cfg.solver);
  const Maximizer m = locate_maximizer(r.minimizer);
  Point physical(params.dim());
  for (int d = 0; d < params.dim(); ++d) physical[d] = params.x0()[d] + params.eps() * m.point[d];

  ctx.results["solve"] = solve_summary(r);
  ctx.results["maximizer_rescaled"] = point_json(m.point);
  ctx.results["maximizer"] = point_json(physical);
  ctx.results["maximizer_multiple"] = m.multiple;
  ctx.results["profile"] = {{"x", axis_coordinates(op.grid())}, {"u", axis_slice(r.minimizer)}};
  ctx.verdict("converged", r.converged, r.status);
}

// --- sweep-eps ---------------------------------------------------------------

void run_sweep(Context& ctx, std::string& table) {
  const RunConfig& cfg = ctx.cfg;
  const ProblemParams base = cfg.problem();
  const Grid grid = cfg.grid();
  SweepOptions opt;
  opt.solver = cfg.solver;
  std::tie(opt.decay_r1, opt.decay_r2) = fit_window(cfg);
  opt.threads = cfg.threads;
  const SweepOutcome out = run_eps_sweep(base, cfg.eps_list, grid, opt);
  const SweepReport& rep = out.report;
  table = format_sweep_table(rep, cfg.dim);

  json entries = json::array();
  json profiles = json::array();
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    const SweepEntry& e = out.entries[i];
    entries.push_back({{"eps", rep.eps_list[i]},
                       {"nu", e.solve.nu},
                       {"residual_l2", e.solve.residual_l2},
                       {"converged", e.solve.converged},
                       {"status", e.solve.status},
                       {"maximizer", point_json(e.maximizer)},
                       {"maximizer_rescaled", point_json(e.maximizer_rescaled)},
                       {"maximizer_multiple", e.maximizer_multiple},
                       {"decay_slope", e.decay_slope},
                       {"criticality", e.criticality},
                       {"crit_norm", e.criticality_norm},
                       {"profile_gap", e.gap.gap},
                       {"alignment_shift", point_json(e.gap.shift)},
                       {"wrap_ambiguous", e.gap.wrap_ambiguous}});
    profiles.push_back(axis_slice(e.aligned));
  }
  ctx.results["nu_limit"] = out.nu_limit;
  ctx.results["limit"] = solve_summary(out.limit);
  ctx.results["entries"] = entries;
  ctx.results["profiles"] = {{"x", axis_coordinates(grid)},
                             {"U_tilde", axis_slice(out.limit.minimizer)},
                             {"v_aligned", profiles}};

  const TrendVerdict nu = nu_convergence(rep, out.nu_limit, cfg.nu_threshold);
  ctx.results["nu_gaps"] = nu.gaps;
  ctx.verdict("nu_convergence", nu.pass, nu.message);

  const TrendVerdict crit = strictly_decreasing(rep, rep.criticality_list, "criticality residual");
  ctx.verdict("criticality_decreasing", crit.pass, crit.message);

  Point target;
  if (base.potential().unique_minimizer(cfg.dim, target)) {
    const MaximizerRate rate = maximizer_rate(rep, target, grid.spacing());
    ctx.results["maximizer_rate"] = {{"C", rate.C}, {"distances", rate.distances}, {"target", point_json(target)}};
    ctx.verdict("maximizer_rate", rate.pass, rate.message);
  }

  const TrendVerdict gap = strictly_decreasing(rep, rep.profile_gap_list, "profile gap");
  ctx.verdict("profile_gap_decreasing", gap.pass, gap.message);
}

// --- uniqueness ----------------------------------------------------------------

void run_uniqueness(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const ProblemParams params = cfg.problem();
  const FracLapOperator op(cfg.grid(), params.s());
  const UniquenessReport rep = multistart_uniqueness(params, op, cfg.k, cfg.seed, cfg.solver);
  json runs = json::array();
  for (const auto& r : rep.runs) runs.push_back(solve_summary(r));
  ctx.results["runs"] = runs;
  ctx.results["max_pairwise_gap"] = rep.max_pairwise_gap;
  ctx.results["all_converged"] = rep.all_converged;
  ctx.verdict("all_converged", rep.all_converged);
  if (rep.all_converged)
    ctx.verdict("unique", rep.unique(1e-5), "max pairwise H^s gap " + format12(rep.max_pairwise_gap));
}

// --- coercivity ----------------------------------------------------------------

void run_coercivity(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const ProblemParams params = cfg.problem();
  const Grid grid = cfg.grid();
  const FracLapOperator op(grid, params.s());
  const double lambda = params.potential()(params.x0());
  const SolveResult U = ground_state_constant(lambda, cfg.dim, cfg.s, cfg.p, grid, cfg.solver);

  double nu = U.nu;
  bool nu_converged = U.converged;
  if (params.eps() > 0.0 && params.potential().family() != PotentialFamily::constant) {
    const SolveResult r = minimize_rayleigh(params, op, cfg.solver);
    nu = r.nu;
    nu_converged = r.converged;
  }
  ctx.results["ground_state"] = solve_summary(U);
  ctx.results["nu"] = nu;
  ctx.verdict("ground_state_converged", U.converged && nu_converged);

  json cases = json::array();
  const std::vector<Point> shifts{Point(cfg.dim, 0.0), cfg.shift_a};
  for (std::size_t c = 0; c < shifts.size(); ++c) {
    const Field Ua = spectral_shift(U.minimizer, shifts[c]);
    const CoercivityReport rep = coercivity_check(Ua, nu, params, op, cfg.n_probe, cfg.seed, cfg.power_steps);
    cases.push_back({{"a", point_json(shifts[c])},
                     {"min_quotient", rep.min_quotient},
                     {"probe_min", rep.probe_min},
                     {"power_estimate", rep.power_estimate},
                     {"power_change", rep.power_change},
                     {"neg_direction_value", rep.neg_direction_value},
                     {"gram_condition", rep.gram_condition}});
    const std::string tag = c == 0 ? "" : "_offset";
    ctx.verdict("min_quotient_positive" + tag, rep.min_quotient > 0.0, "min " + format12(rep.min_quotient));
    if (c == 0) {
      ctx.verdict("negative_direction", rep.neg_direction_value < 0.0,
                  "J''[U,U]/|U|^2 = " + format12(rep.neg_direction_value));
      if (cfg.coercivity_reference) {
        const double ref = *cfg.coercivity_reference;
        ctx.verdict("regression_within_20pct", std::abs(rep.min_quotient - ref) <= 0.2 * std::abs(ref),
                    "reference " + format12(ref));
      }
    }
  }
  ctx.results["cases"] = cases;
}

// --- validate-operator -----------------------------------------------------------

void run_validate_operator(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const Grid grid = cfg.grid();
  const int n = grid.points_per_axis();

  // Plane waves cos(xi . x) are eigenfunctions with eigenvalue |xi|^{2s}.
  const std::vector<int> ks{1, 2, 3, 5, 8, 13, 21, 34, 55, 89};
  double plane_err = 0.0;
  int plane_cases = 0;
  for (double s : {0.25, 0.5, 0.75, 1.0}) {
    const FracLapOperator op(grid, s);
    for (int k : ks) {
      if (k >= n / 2) continue;
      std::vector<int> kv{k};
      if (grid.dim() == 2) kv.push_back(k % 7);
      Point xi;
      double r2 = 0.0;
      for (int c : kv) {
        xi.push_back(grid.frequency_step() * c);
        r2 += xi.back() * xi.back();
      }
      const Field u = sample(grid, [&](const Point& x) {
        double ph = 0.0;
        for (std::size_t d = 0; d < x.size(); ++d) ph += xi[d] * x[d];
        return std::cos(ph);
      });
      const double lambda = std::pow(r2, s);
      const Field au = apply_flap_spectral(op, u);
      plane_err = std::max(plane_err, max_abs(au - lambda * u) / (lambda * max_abs(u)));
      ++plane_cases;
    }
  }
  ctx.results["plane_wave"] = {{"max_relative_error", plane_err}, {"cases", plane_cases}};
  ctx.verdict("plane_wave", plane_cases > 0 && plane_err <= 1e-10, "max rel " + format12(plane_err));

  // Self-adjointness on random pairs.
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto random_field = [&] {
    Field f(grid);
    for (double& x : f.values) x = unif(rng);
    return f;
  };
  const FracLapOperator op(grid, cfg.s);
  double sym_err = 0.0, even_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Field u = random_field(), w = random_field();
    const Field au = apply_flap_spectral(op, u), aw = apply_flap_spectral(op, w);
    const double lhs = inner_l2(au, w), rhs = inner_l2(u, aw);
    const double scale = 0.5 * (norm_l2(au) * norm_l2(w) + norm_l2(u) * norm_l2(aw));
    sym_err = std::max(sym_err, std::abs(lhs - rhs) / scale);

    const Spectrum c = spectrum(u);
    double top = 0.0, gap = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      top = std::max(top, std::norm(c[i]));
      std::size_t mirror = 0;
      if (paired_slot(grid, i, mirror)) gap = std::max(gap, std::abs(std::norm(c[i]) - std::norm(c[mirror])));
    }
    even_err = std::max(even_err, gap / top);
  }
  ctx.results["symmetry"] = {{"max_relative_error", sym_err}, {"pairs", 20}};
  ctx.results["spectral_evenness"] = {{"max_relative_error", even_err}};
  ctx.verdict("symmetry", sym_err <= 1e-8, "max rel " + format12(sym_err));
  ctx.verdict("spectral_evenness", even_err <= 1e-12, "max rel " + format12(even_err));

  // Multiplier against the singular integral on a Gaussian (1D, s = 1/2).
  const Grid line = make_grid(1, n, cfg.L);
  const double s = 0.5;
  const FracLapOperator op1(line, s);
  const Field g = sample(line, [](const Point& x) { return std::exp(-x[0] * x[0]); });
  const Field ag = apply_flap_spectral(op1, g);
  const Calibration cal = calibrate_cns(s, line);
  json points = json::array();
  double oracle_err = 0.0;
  for (double x : {0.0, 0.5, 1.0}) {
    const std::size_t j = line.nearest_node({x});
    const Point xj = line.node(j);
    const double q = apply_flap_quadrature(g, s, xj, 2.0 * line.spacing(), cfg.L, cal.cns);
    const double rel = std::abs(q - ag[j]) / std::abs(ag[j]);
    oracle_err = std::max(oracle_err, rel);
    points.push_back({{"x", xj[0]}, {"spectral", ag[j]}, {"quadrature", q}, {"relative_error", rel}});
  }
  ctx.results["oracle"] = {{"cns", cal.cns},
                           {"calibration_misfit", cal.relative_misfit},
                           {"points", points},
                           {"max_relative_error", oracle_err}};
  ctx.verdict("oracle_equivalence", oracle_err <= 1e-3, "max rel " + format12(oracle_err));
}

// --- decay ------------------------------------------------------------------------

void run_decay(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const ProblemParams params = cfg.problem();
  const Grid grid = cfg.grid();
  const auto [r1, r2] = fit_window(cfg);
  const double q = cfg.dim + 2.0 * cfg.s;

  const SolveResult U =
      ground_state_constant(params.potential().infimum(), cfg.dim, cfg.s, cfg.p, grid, cfg.solver);
  ctx.results["ground_state"] = solve_summary(U);
  ctx.results["profile"] = {{"x", axis_coordinates(grid)}, {"u", axis_slice(U.minimizer)}};
  ctx.results["expected_slope"] = -q;
  ctx.results["fit_window"] = {r1, r2};
  ctx.verdict("ground_state_converged", U.converged, U.status);

  const DecayFit fit = decay_fit(U.minimizer, r1, r2);
  ctx.results["fit"] = {{"slope", fit.slope}, {"r2_stat", fit.r2_stat}, {"bins", fit.bins},
                        {"non_power_law", fit.non_power_law}};
  ctx.verdict("decay_slope", std::abs(fit.slope + q) <= 0.15 * q,
              "slope " + format12(fit.slope) + " vs " + format12(-q));

  const Field synthetic = sample(grid, [q](const Point& x) {
    double r2sum = 0.0;
    for (double c : x) r2sum += c * c;
    return 1.0 / (1.0 + std::pow(std::sqrt(r2sum), q));
  });
  const DecayFit control = decay_fit(synthetic, r1, r2);
  ctx.results["control"] = {{"slope", control.slope}, {"r2_stat", control.r2_stat}, {"bins", control.bins}};
  ctx.verdict("synthetic_control", std::abs(control.slope + q) <= 0.01 * q,
              "slope " + format12(control.slope) + " vs " + format12(-q));
}

std::string timestamp_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

std::filesystem::path unique_stem(const std::filesystem::path& dir, const std::string& base) {
  for (int k = 1;; ++k) {
    const std::string stem = k == 1 ? base : base + "-" + std::to_string(k);
    if (!std::filesystem::exists(dir / (stem + ".record.json")) &&
        !std::filesystem::exists(dir / (stem + ".sweep.tsv")))
      return dir / stem;
  }
}

}  // namespace

std::string serialize_record(const json& record) {
  std::string out;
  emit(record, out, 0);
  out += "\n";
  return out;
}

std::string format_sweep_table(const SweepReport& report, int dim) {
  report.validate();
  std::string out = "eps\tnu\tmax_x";
  if (dim == 2) out += "\tmax_y";
  out += "\tdecay_slope\tcrit_norm\tprofile_gap\tconverged\n";
  for (std::size_t i = 0; i < report.eps_list.size(); ++i) {
    out += sci(report.eps_list[i]) + "\t" + sci(report.nu_list[i]);
    for (int d = 0; d < dim; ++d) out += "\t" + sci(report.maximizer_list[i][d]);
    out += "\t" + sci(report.decay_slope_list[i]) + "\t" + sci(report.criticality_list[i]) + "\t" +
           sci(report.profile_gap_list[i]) + "\t" + (report.converged_flags[i] ? "1" : "0") + "\n";
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp =
      path.parent_path() / ("." + path.filename().string() + ".tmp-" + std::to_string(::getpid()));
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + tmp.string() + "' for writing");
    f << content;
    f.flush();
    if (!f) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

json config_echo(const RunConfig& c) {
  const SolverConfig& sv = c.solver;
  json j{{"experiment", to_string(c.experiment)},
         {"dim", c.dim},
         {"s", c.s},
         {"p", c.p},
         {"eps", c.eps},
         {"x0", c.x0},
         {"potential", to_string(c.potential)},
         {"potential_params", c.potential_params},
         {"n", c.n},
         {"L", c.L},
         {"max_iters", sv.max_iters},
         {"step", sv.step},
         {"tol_residual", sv.tol_residual},
         {"tol_stall", sv.tol_stall},
         {"init_kind", to_string(sv.init_kind)},
         {"rng_seed", sv.rng_seed},
         {"refine", sv.refine},
         {"radial_class", sv.radial_class},
         {"refine_tol", sv.refine_tol},
         {"refine_max_steps", sv.refine_max_steps},
         {"eps_list", c.eps_list},
         {"output_dir", c.output_dir},
         {"seed", c.seed},
         {"k", c.k},
         {"n_probe", c.n_probe},
         {"power_steps", c.power_steps},
         {"shift_a", c.shift_a},
         {"fit_window", c.fit_window},
         {"nu_threshold", c.nu_threshold},
         {"threads", c.threads}};
  j["coercivity_reference"] = c.coercivity_reference ? json(*c.coercivity_reference) : json(nullptr);
  return j;
}

RunOutcome run_experiment(const RunConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  const std::filesystem::path stem =
      unique_stem(dir, std::string(to_string(cfg.experiment)) + "-" + timestamp_now());

  RunOutcome out;
  json results = json::object();
  Context ctx{cfg, out.verdicts, results};
  std::string table;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (cfg.experiment) {
      case Experiment::solve: run_solve(ctx); break;
      case Experiment::sweep_eps: run_sweep(ctx, table); break;
      case Experiment::uniqueness: run_uniqueness(ctx); break;
      case Experiment::coercivity: run_coercivity(ctx); break;
      case Experiment::validate_operator: run_validate_operator(ctx); break;
      case Experiment::decay: run_decay(ctx); break;
    }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json verdicts = json::object(), details = json::object();
  for (const auto& v : out.verdicts) {
    verdicts[v.name] = v.pass;
    details[v.name] = v.detail;
  }
  out.record = json{{"schema", "fracground.record/1"},
                    {"experiment", to_string(cfg.experiment)},
                    {"tool_version", kToolVersion},
                    {"config_echo", config_echo(cfg)},
                    {"wall_time_s", wall},
                    {"results", results},
                    {"verdicts", verdicts},
                    {"verdict_details", details},
                    {"status", out.error.empty() ? "ok" : "error"}};
  if (!out.error.empty()) out.record["error"] = out.error;

  if (!table.empty()) {
    out.table_path = stem.string() + ".sweep.tsv";
    write_atomic(out.table_path, table);
    out.record["sweep_table"] = out.table_path.filename().string();
  }
  out.record_path = stem.string() + ".record.json";
  write_atomic(out.record_path, serialize_record(out.record));
  return out;
}

}  // namespace fracground
