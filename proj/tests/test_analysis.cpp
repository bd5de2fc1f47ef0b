#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "fracground/analysis.hpp"
#include "fracground/spectral.hpp"
#include "fracground/sweep.hpp"

using namespace fracground;

namespace {

SolverConfig refined() {
  SolverConfig c;
  c.refine = true;
  return c;
}

const SolveResult& ground_1d() {
  static const SolveResult r = ground_state_constant(1.0, 1, 0.5, 3.0, make_grid(1, 2048, 32.0), refined());
  return r;
}

Field power_law(const Grid& g, double q) {
  return sample(g, [q](const Point& x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return 1.0 / (1.0 + std::pow(std::sqrt(r2), q));
  });
}

SweepReport toy_report(std::vector<double> values, std::vector<bool> ok) {
  SweepReport r;
  const std::size_t m = values.size();
  for (std::size_t i = 0; i < m; ++i) r.eps_list.push_back(1.0 / (1 << i));
  r.nu_list = values;
  r.maximizer_list.assign(m, Point{0.0});
  r.decay_slope_list.assign(m, -2.0);
  r.criticality_list = values;
  r.profile_gap_list = values;
  r.converged_flags = std::move(ok);
  return r;
}

}  // namespace

TEST_CASE("locate_maximizer") {
  const Field& U = ground_1d().minimizer;
  const Grid& g = U.grid;
  const Maximizer m = locate_maximizer(U);
  CHECK(std::abs(m.point[0]) <= g.spacing() / 10);
  CHECK_FALSE(m.multiple);

  const int shift[1] = {3};
  const Maximizer moved = locate_maximizer(roll(U, shift));
  CHECK(g.node(moved.node)[0] == doctest::Approx(3 * g.spacing()));

  const Grid c = make_grid(1, 256, 8.0);
  const Field wave = sample(c, [](const Point& x) { return std::cos(std::numbers::pi * (x[0] - 0.01) / 8.0); });
  CHECK(std::abs(locate_maximizer(wave).point[0] - 0.01) <= c.spacing() * c.spacing());

  const Grid g2 = make_grid(2, 64, 8.0);
  const Field bump = sample(g2, [](const Point& x) { return std::exp(-(x[0] - 0.1) * (x[0] - 0.1) - (x[1] + 0.05) * (x[1] + 0.05)); });
  const Maximizer m2 = locate_maximizer(bump);
  CHECK(m2.point[0] == doctest::Approx(0.1).epsilon(0.02 * g2.spacing() / 0.1));
  CHECK(m2.point[1] == doctest::Approx(-0.05).epsilon(0.02 * g2.spacing() / 0.05));

  Field twin(c);
  twin[40] = 1.0;
  twin[200] = 1.0;
  const Maximizer t = locate_maximizer(twin);
  CHECK(t.multiple);
  CHECK(t.node == 40);
  REQUIRE(t.others.size() == 1);
  CHECK(t.others[0][0] == c.node(200)[0]);

  CHECK_THROWS_AS(locate_maximizer(Field(c)), ConfigError);
}

TEST_CASE("criticality residual") {
  const Grid g = make_grid(1, 1024, 16.0);
  const Field v = sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]); });
  const auto flat = ProblemParams::make(1, 0.5, 3.0, 0.3, {0.4}, Potential::constant(2.0));
  CHECK(criticality_residual(v, flat) == std::vector<double>{0.0});

  const Potential well(PotentialFamily::smooth_well, {0.5});
  const auto centered = ProblemParams::make(1, 0.5, 3.0, 0.25, {0.5}, well);
  CHECK(std::abs(criticality_residual(v, centered)[0]) <= 1e-14);

  const auto off = centered.with_x0({0.9});
  const double r = criticality_residual(v, off)[0];
  CHECK(r > 0.0);
  CHECK(r <= 1.0);
}

TEST_CASE("decay_fit on exact power laws") {
  const Grid g = make_grid(1, 4096, 256.0);
  for (double q : {1.5, 2.0, 3.0}) {
    const DecayFit f = decay_fit(power_law(g, q), 0.3 * 256, 0.7 * 256);
    CAPTURE(q);
    CHECK(std::abs(f.slope + q) <= 1e-2);
    CHECK(f.r2_stat > 0.999);
    CHECK_FALSE(f.non_power_law);
  }
  const Grid g64 = make_grid(1, 4096, 64.0);
  CHECK(std::abs(decay_fit(power_law(g64, 2.0), 10.0, 45.0).slope + 2.0) <= 2e-2);

  const Grid g2 = make_grid(2, 512, 128.0);
  CHECK(std::abs(decay_fit(power_law(g2, 2.0), 0.3 * 128, 0.7 * 128).slope + 2.0) <= 1e-2);
}

TEST_CASE("decay_fit flags non-power-law tails and bad windows") {
  const Grid g = make_grid(1, 1024, 8.0);
  const Field gauss = sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]); });
  const DecayFit f = decay_fit(gauss, 1.0, 4.0);
  CHECK(f.non_power_law);
  CHECK(f.slope < -4.0);
  CHECK_THROWS_AS(decay_fit(gauss, 1.0, 7.0), ConfigError);
  CHECK_THROWS_AS(decay_fit(gauss, 3.0, 2.0), ConfigError);
  const Field narrow = sample(g, [](const Point& x) { return std::exp(-30.0 * x[0] * x[0]); });
  CHECK_THROWS_AS(decay_fit(narrow, 1.0, 6.0), NumericalError);  // underflows to 0 in the window
  const Grid coarse = make_grid(1, 16, 8.0);
  CHECK_THROWS_AS(decay_fit(power_law(coarse, 2.0), 1.0, 6.0), NumericalError);
}

TEST_CASE("decay of the ground state") {
  for (double s : {0.5, 0.75}) {
    const Grid g = make_grid(1, 4096, 64.0);
    const SolveResult U = ground_state_constant(1.0, 1, s, 3.0, g, refined());
    const DecayFit f = decay_fit(U.minimizer, 10.0, 45.0);
    const double q = 1.0 + 2.0 * s;
    CAPTURE(s);
    CHECK(std::abs(f.slope + q) <= 0.15 * q);
  }
}

TEST_CASE("nu_convergence and trend verdicts") {
  const auto ok = nu_convergence(toy_report({1.4, 1.2, 1.1}, {true, true, true}), 1.0, 0.2);
  CHECK(ok.pass);
  CHECK(ok.gaps[2] == doctest::Approx(0.1));

  const auto bad = nu_convergence(toy_report({1.4, 1.5, 1.1}, {true, true, true}), 1.0, 0.2);
  CHECK_FALSE(bad.pass);
  CHECK(bad.message.find("0.500000") != std::string::npos);

  const auto excluded = nu_convergence(toy_report({1.4, 1.5, 1.2, 1.1}, {true, false, true, true}), 1.0, 0.2);
  CHECK(excluded.pass);
  CHECK(excluded.used == std::vector<std::size_t>{0, 2, 3});
  CHECK(std::isnan(excluded.gaps[1]));

  CHECK_FALSE(nu_convergence(toy_report({1.4, 1.2, 1.1}, {true, true, true}), 1.0, 0.05).pass);
  CHECK_FALSE(nu_convergence(toy_report({1.4, 1.2, 1.1}, {true, false, true}), 1.0, 0.2).pass);

  const SweepReport r = toy_report({3.0, 2.0, 2.0}, {true, true, true});
  CHECK_FALSE(strictly_decreasing(r, r.profile_gap_list, "gap").pass);
  CHECK(strictly_decreasing(r, {3.0, 2.0, std::numeric_limits<double>::quiet_NaN()}, "gap").pass);

  SweepReport unordered = toy_report({1.0, 0.5}, {true, true});
  unordered.eps_list = {0.1, 0.2};
  CHECK_THROWS_AS(unordered.validate(), ConfigError);
  SweepReport ragged = toy_report({1.0, 0.5}, {true, true});
  ragged.nu_list.pop_back();
  CHECK_THROWS_AS(ragged.validate(), ConfigError);
}

TEST_CASE("profile gap and alignment") {
  const Field& U = ground_1d().minimizer;
  const FracLapOperator op(U.grid, 0.5);
  const ProfileGap self = profile_gap(U, U, op);
  CHECK(self.gap <= 1e-12);
  CHECK(std::abs(self.shift[0]) <= 1e-10);

  const int shift[1] = {5};
  const ProfileGap moved = profile_gap(roll(U, shift), U, op);
  CHECK(moved.gap <= 1e-6);
  CHECK(moved.shift[0] == doctest::Approx(5 * U.grid.spacing()).epsilon(1e-8));
  CHECK_FALSE(moved.wrap_ambiguous);

  const int far[1] = {1024 - 10};
  CHECK(profile_gap(roll(U, far), U, op).wrap_ambiguous);
}

TEST_CASE("orthogonality relations at the ground state") {
  const SolveResult& r1 = ground_1d();
  const OrthogonalityReport o1 = orthogonality_diagnostics(r1.minimizer, FracLapOperator(r1.minimizer.grid, 0.5), 1.0, 3.0);
  CHECK(o1.gram.rows() == 2);
  CHECK(std::abs(o1.gram(0, 1)) <= 1e-6);
  CHECK(std::abs(o1.up_du[0]) <= 1e-6);
  CHECK(o1.gram(0, 0) == doctest::Approx(1.0));

  const Grid g2 = make_grid(2, 256, 16.0);
  const SolveResult r2 = ground_state_constant(1.0, 2, 0.5, 2.0, g2, refined());
  REQUIRE(r2.converged);
  const OrthogonalityReport o2 = orthogonality_diagnostics(r2.minimizer, FracLapOperator(g2, 0.5), 1.0, 2.0);
  CHECK(o2.max_offdiag() <= 1e-6);
  CHECK(std::abs(o2.gram(1, 2)) <= 1e-6);
  CHECK(std::abs(o2.up1_cross) <= 1e-6);
}

TEST_CASE("projection onto W_eps") {
  const SolveResult& r = ground_1d();
  const Field& U = r.minimizer;
  const FracLapOperator op(U.grid, 0.5);
  const auto params = ProblemParams::make(1, 0.5, 3.0, 0.0, {0.0}, Potential::constant(1.0));
  const RescaledModel model(params, op);
  const ProjectionBasis basis(U, model);
  CHECK(basis.gram_condition() < 1e3);

  const Field dU = spectral_derivative(U, 0);
  CHECK(norm_l2(basis.project_out(dU)) <= 1e-8 * norm_l2(dU));
  CHECK(norm_l2(basis.project_out(U)) <= 1e-8 * norm_l2(U));

  const Field probe = sample(U.grid, [](const Point& x) { return std::exp(-0.3 * (x[0] - 1.0) * (x[0] - 1.0)); });
  const Field once = basis.project_out(probe);
  const Field twice = basis.project_out(once);
  CHECK(norm_l2(twice - once) <= 1e-10 * norm_l2(once));
  for (const Field& b : basis.vectors()) CHECK(std::abs(model.eps_inner(once, b)) <= 1e-10 * std::sqrt(model.eps_norm2(once) * model.eps_norm2(b)));
}

TEST_CASE("coercivity on W_0 and the negative direction") {
  const SolveResult& r = ground_1d();
  const FracLapOperator op(r.minimizer.grid, 0.5);
  const auto params = ProblemParams::make(1, 0.5, 3.0, 0.0, {0.0}, Potential::constant(1.0));
  const CoercivityReport c = coercivity_check(r.minimizer, r.nu, params, op, 20, 7);
  CHECK(c.min_quotient > 0.01);
  CHECK(c.min_quotient == doctest::Approx(0.2837).epsilon(0.2));  // frozen regression value
  CHECK(c.min_quotient <= c.probe_min);
  CHECK(c.power_change <= 1e-8);
  // J''[U,U] = (1 - p) ||U||^2 at a normalized minimizer.
  CHECK(c.neg_direction_value == doctest::Approx(-2.0).epsilon(1e-8));

  const CoercivityReport shifted = coercivity_check(spectral_shift(r.minimizer, {1.0}), r.nu, params, op, 20, 7);
  CHECK(shifted.min_quotient == doctest::Approx(c.min_quotient).epsilon(1e-6));
}

TEST_CASE("multistart uniqueness") {
  const Grid g = make_grid(1, 2048, 32.0);
  const FracLapOperator op(g, 0.5);
  SolverConfig cfg = refined();

  const auto flat = ProblemParams::make(1, 0.5, 3.0, 1.0, {0.0}, Potential::constant(1.0));
  const UniquenessReport a = multistart_uniqueness(flat, op, 5, 11, cfg);
  CHECK(a.all_converged);
  CHECK(a.unique());

  cfg.radial_class = true;
  const auto radial = ProblemParams::make(1, 0.5, 3.0, 0.1, {0.0}, Potential(PotentialFamily::radial_decreasing, {}));
  const UniquenessReport b = multistart_uniqueness(radial, op, 5, 1, cfg);
  CHECK(b.all_converged);
  CHECK(b.max_pairwise_gap <= 1e-5);

  // Two wells: no uniqueness is expected, exploratory only.
  cfg.radial_class = false;
  const auto dw = ProblemParams::make(1, 0.5, 3.0, 0.5, {0.0}, Potential(PotentialFamily::double_well, {2.0}));
  const UniquenessReport c = multistart_uniqueness(dw, op, 5, 1, cfg);
  CHECK(c.runs.size() == 5);
  MESSAGE("double_well max pairwise gap: " << c.max_pairwise_gap);

  CHECK_THROWS_AS(multistart_uniqueness(flat, op, 2, 0, cfg), ConfigError);
}

TEST_CASE("eps sweep on a constant potential has zero gaps") {
  const Grid g = make_grid(1, 1024, 32.0);
  SweepOptions opt;
  opt.solver = refined();
  opt.threads = 1;
  const auto flat = ProblemParams::make(1, 0.5, 3.0, 1.0, {0.0}, Potential::constant(1.0));
  const SweepOutcome out = run_eps_sweep(flat, {0.5, 0.25, 0.125}, g, opt);
  for (double nu : out.report.nu_list) CHECK(std::abs(nu - out.nu_limit) <= 1e-9 * nu);
  for (double c : out.report.criticality_list) CHECK(c == 0.0);
  CHECK_THROWS_AS(run_eps_sweep(flat, {0.25, 0.5}, g, opt), ConfigError);
}

TEST_CASE("sweep results do not depend on the worker count") {
  const Grid g = make_grid(1, 1024, 32.0);
  const auto well = ProblemParams::make(1, 0.5, 3.0, 1.0, {0.0}, Potential(PotentialFamily::smooth_well, {}));
  SweepOptions opt;
  opt.solver = refined();
  opt.threads = 1;
  const SweepOutcome a = run_eps_sweep(well, {0.5, 0.25, 0.125}, g, opt);
  opt.threads = 3;
  const SweepOutcome b = run_eps_sweep(well, {0.5, 0.25, 0.125}, g, opt);
  CHECK(a.report.nu_list == b.report.nu_list);
  CHECK(a.report.profile_gap_list == b.report.profile_gap_list);
  CHECK(a.report.criticality_list == b.report.criticality_list);
}

TEST_CASE("maximizer rate") {
  SweepReport r = toy_report({1.0, 1.0, 1.0}, {true, true, true});
  r.maximizer_list = {{1.0}, {0.5}, {0.25}};
  const MaximizerRate ok = maximizer_rate(r, {0.0}, 0.01);
  CHECK(ok.pass);
  CHECK(ok.C == doctest::Approx(1.0));

  r.maximizer_list = {{3.0}, {0.5}, {0.25}};
  CHECK_FALSE(maximizer_rate(r, {0.0}, 0.01).pass);
}
