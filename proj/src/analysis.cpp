#include "fracground/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fracground/linear.hpp"
#include "fracground/spectral.hpp"

namespace fracground {

namespace {

bool adjacent(const Grid& g, std::size_t a, std::size_t b) {
  const int n = g.points_per_axis();
  auto close = [n](int i, int j) {
    const int d = std::abs(i - j);
    return std::min(d, n - d) <= 1;
  };
  if (g.dim() == 1) return close(static_cast<int>(a), static_cast<int>(b));
  return close(static_cast<int>(a / n), static_cast<int>(b / n)) &&
         close(static_cast<int>(a % n), static_cast<int>(b % n));
}

int wrap(int j, int n) { return ((j % n) + n) % n; }

}  // namespace

Maximizer locate_maximizer(const Field& u) {
  const Grid& g = u.grid;
  if (max_abs(u) == 0.0) throw ConfigError("locate_maximizer: field is identically zero");
  const int n = g.points_per_axis();
  const double h = g.spacing();

  Maximizer out;
  for (std::size_t i = 1; i < u.size(); ++i)
    if (u[i] > u[out.node]) out.node = i;
  const double top = u[out.node];
  const double tie_tol = 1e-12 * std::max(1.0, std::abs(top));
  for (std::size_t i = 0; i < u.size(); ++i)
    if (i != out.node && u[i] >= top - tie_tol && !adjacent(g, i, out.node)) {
      out.multiple = true;
      out.others.push_back(g.node(i));
    }

  out.point = g.node(out.node);
  if (g.dim() == 1) {
    const int j = static_cast<int>(out.node);
    const double fm = u[wrap(j - 1, n)], f0 = u[j], fp = u[wrap(j + 1, n)];
    const double curv = fm - 2.0 * f0 + fp;
    if (curv < 0.0) out.point[0] += std::clamp(0.5 * (fm - fp) / curv, -1.0, 1.0) * h;
    return out;
  }

  // f(a, b) ~ c0 + c1 a + c2 b + c3 a^2 + c4 a b + c5 b^2 on the 3x3 stencil.
  const int j0 = static_cast<int>(out.node / n), j1 = static_cast<int>(out.node % n);
  Eigen::Matrix<double, 9, 6> A;
  Eigen::Matrix<double, 9, 1> f;
  int row = 0;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b, ++row) {
      A.row(row) << 1.0, a, b, a * a, a * b, b * b;
      f(row) = u[g.flat(wrap(j0 + a, n), wrap(j1 + b, n))];
    }
  const Eigen::Matrix<double, 6, 1> c = A.colPivHouseholderQr().solve(f);
  Eigen::Matrix2d H;
  H << 2.0 * c(3), c(4), c(4), 2.0 * c(5);
  if (H(0, 0) < 0.0 && H.determinant() > 0.0) {
    const Eigen::Vector2d off = H.ldlt().solve(-Eigen::Vector2d(c(1), c(2)));
    out.point[0] += std::clamp(off(0), -1.0, 1.0) * h;
    out.point[1] += std::clamp(off(1), -1.0, 1.0) * h;
  }
  return out;
}

std::vector<double> criticality_residual(const Field& v, const ProblemParams& params) {
  const Grid& g = v.grid;
  const int N = params.dim();
  std::vector<double> out(N, 0.0);
  if (params.potential().family() == PotentialFamily::constant) return out;

  double grad_sup = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.node(i);
    Point y(N);
    for (int d = 0; d < N; ++d) y[d] = params.eps() * x[d] + params.x0()[d];
    const Point dv = params.potential().gradient(y);
    double m = 0.0;
    for (double c : dv) m += c * c;
    grad_sup = std::max(grad_sup, std::sqrt(m));
    for (int d = 0; d < N; ++d) out[d] += dv[d] * v[i] * v[i];
  }
  const double mass = inner_l2(v, v);
  if (grad_sup == 0.0 || mass == 0.0) return std::vector<double>(N, 0.0);
  for (double& c : out) c *= g.cell_measure() / (grad_sup * mass);
  return out;
}

DecayFit decay_fit(const Field& u, double r1, double r2, int bins) {
  const Grid& g = u.grid;
  if (!(r1 > 0.0 && r1 < r2)) throw ConfigError("decay_fit: need 0 < r1 < r2");
  if (r2 > 0.8 * g.half_width() * (1 + 1e-12))
    throw ConfigError("decay_fit: r2 exceeds 0.8 L (wrap-around zone)");
  std::vector<double> sum_r(bins, 0.0), sum_u(bins, 0.0);
  std::vector<int> count(bins, 0);
  const double lr1 = std::log(r1), lr2 = std::log(r2);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.node(i);
    double r = 0.0;
    for (double c : x) r += c * c;
    r = std::sqrt(r);
    if (r < r1 || r > r2) continue;
    if (!(u[i] > 0.0)) throw NumericalError("decay_fit: non-positive value inside the fit window");
    const int b = std::min(bins - 1, static_cast<int>((std::log(r) - lr1) / (lr2 - lr1) * bins));
    sum_r[b] += r;
    sum_u[b] += u[i];
    ++count[b];
  }
  std::vector<double> X, Y;
  for (int b = 0; b < bins; ++b)
    if (count[b] > 0) {
      X.push_back(std::log(sum_r[b] / count[b]));
      Y.push_back(std::log(sum_u[b] / count[b]));
    }
  if (X.size() < 8) throw NumericalError("decay_fit: fewer than 8 populated bins");

  auto fit = [&](std::size_t lo, std::size_t hi, double* r2stat) {
    const double m = static_cast<double>(hi - lo);
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      sx += X[i];
      sy += Y[i];
      sxx += X[i] * X[i];
      sxy += X[i] * Y[i];
      syy += Y[i] * Y[i];
    }
    const double cxx = sxx - sx * sx / m, cxy = sxy - sx * sy / m, cyy = syy - sy * sy / m;
    if (r2stat) *r2stat = cyy > 0.0 ? cxy * cxy / (cxx * cyy) : 1.0;
    return cxy / cxx;
  };

  DecayFit out;
  out.bins = static_cast<int>(X.size());
  out.slope = fit(0, X.size(), &out.r2_stat);
  const std::size_t third = X.size() / 3;
  const double head = fit(0, third + 1, nullptr);
  const double tail = fit(X.size() - third - 1, X.size(), nullptr);
  out.non_power_law = std::abs(head - tail) > 0.1 * std::max(std::abs(head), std::abs(tail));
  return out;
}

void SweepReport::validate() const {
  const std::size_t m = eps_list.size();
  if (nu_list.size() != m || maximizer_list.size() != m || decay_slope_list.size() != m ||
      criticality_list.size() != m || profile_gap_list.size() != m || converged_flags.size() != m)
    throw ConfigError("SweepReport: column lengths differ");
  for (std::size_t i = 1; i < m; ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw ConfigError("SweepReport: eps_list must strictly decrease");
}

TrendVerdict nu_convergence(const SweepReport& report, double nu_limit, double threshold) {
  report.validate();
  TrendVerdict v;
  v.gaps.assign(report.eps_list.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < report.eps_list.size(); ++i)
    if (report.converged_flags[i]) {
      v.gaps[i] = std::abs(report.nu_list[i] - nu_limit);
      v.used.push_back(i);
    }
  if (v.used.size() < 3) {
    v.message = "fewer than 3 converged entries";
    return v;
  }
  for (std::size_t k = 1; k < v.used.size(); ++k) {
    const std::size_t a = v.used[k - 1], b = v.used[k];
    if (v.gaps[b] > v.gaps[a]) {
      v.message = "nu gap increases between eps = " + std::to_string(report.eps_list[a]) +
                  " and eps = " + std::to_string(report.eps_list[b]);
      return v;
    }
  }
  if (v.gaps[v.used.back()] > threshold) {
    v.message = "last nu gap above threshold";
    return v;
  }
  v.pass = true;
  v.message = "ok";
  return v;
}

TrendVerdict strictly_decreasing(const SweepReport& report, const std::vector<double>& values,
                                 const std::string& what) {
  report.validate();
  TrendVerdict v;
  v.gaps = values;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (report.converged_flags[i] && std::isfinite(values[i])) v.used.push_back(i);
  if (v.used.size() < 2) {
    v.message = what + ": fewer than 2 usable entries";
    return v;
  }
  for (std::size_t k = 1; k < v.used.size(); ++k) {
    const std::size_t a = v.used[k - 1], b = v.used[k];
    if (!(values[b] < values[a])) {
      v.message = what + " does not decrease between eps = " + std::to_string(report.eps_list[a]) +
                  " and eps = " + std::to_string(report.eps_list[b]);
      return v;
    }
  }
  v.pass = true;
  v.message = "ok";
  return v;
}

Field align_to_origin(const Field& v, Point* shift) {
  const Point peak = spectral_argmax(v);
  Point back(peak.size());
  for (std::size_t d = 0; d < peak.size(); ++d) back[d] = -peak[d];
  if (shift) *shift = peak;
  return spectral_shift(v, back);
}

ProfileGap profile_gap(const Field& v, const Field& U, const FracLapOperator& op) {
  require_same_grid(v, U, "profile_gap");
  ProfileGap out;
  const Field aligned = align_to_origin(v, &out.shift);
  for (double c : out.shift)
    if (std::abs(c) > 0.5 * v.grid.half_width()) out.wrap_ambiguous = true;
  out.gap = std::sqrt(hs_norm_squared(op, aligned - U));
  return out;
}

double OrthogonalityReport::max_offdiag() const {
  double m = 0.0;
  for (int i = 0; i < gram.rows(); ++i)
    for (int j = 0; j < gram.cols(); ++j)
      if (i != j) m = std::max(m, std::abs(gram(i, j)));
  for (double c : up_du) m = std::max(m, std::abs(c));
  return std::max(m, std::abs(up1_cross));
}

OrthogonalityReport orthogonality_diagnostics(const Field& U, const FracLapOperator& op, double lambda,
                                              double p) {
  const int N = U.grid.dim();
  std::vector<Field> basis{U};
  for (int i = 0; i < N; ++i) basis.push_back(spectral_derivative(U, i));
  auto inner0 = [&](const Field& a, const Field& b) { return dsquare_inner(op, a, b) + lambda * inner_l2(a, b); };

  OrthogonalityReport rep;
  rep.gram.resize(N + 1, N + 1);
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N; ++j) rep.gram(i, j) = inner0(basis[i], basis[j]);
  const Eigen::VectorXd d = rep.gram.diagonal().cwiseSqrt();
  rep.gram = d.cwiseInverse().asDiagonal() * rep.gram * d.cwiseInverse().asDiagonal();

  const Field up = positive_power(U, p);
  for (int i = 0; i < N; ++i)
    rep.up_du.push_back(inner_l2(up, basis[i + 1]) / (norm_l2(up) * norm_l2(basis[i + 1])));
  if (N == 2) {
    const Field w = positive_power(U, p - 1.0);
    Field a(U.grid), b(U.grid);
    for (std::size_t k = 0; k < U.size(); ++k) {
      a[k] = std::sqrt(w[k]) * basis[1][k];
      b[k] = std::sqrt(w[k]) * basis[2][k];
    }
    rep.up1_cross = inner_l2(a, b) / (norm_l2(a) * norm_l2(b));
  }
  return rep;
}

ProjectionBasis::ProjectionBasis(const Field& base, const RescaledModel& model) : model_(&model) {
  vectors_.push_back(base);
  for (int i = 0; i < base.grid.dim(); ++i) vectors_.push_back(spectral_derivative(base, i));
  const int m = static_cast<int>(vectors_.size());
  gram_.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) gram_(i, j) = model.eps_inner(vectors_[i], vectors_[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(condition_ < 1e12)) throw NumericalError("ProjectionBasis: ill-conditioned Gram matrix");
  solver_.compute(gram_);
}

Field ProjectionBasis::project_out(const Field& v) const {
  const int m = static_cast<int>(vectors_.size());
  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i) rhs(i) = model_->eps_inner(vectors_[i], v);
  const Eigen::VectorXd c = solver_.solve(rhs);
  Field out = v;
  for (int i = 0; i < m; ++i) axpy(-c(i), vectors_[i], out);
  return out;
}

double second_variation(const RescaledModel& model, const Field& U, double nu, const Field& v,
                        const Field& w) {
  const double p = model.params().p();
  const Field weight = positive_power(U, p - 1.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += weight[i] * v[i] * w[i];
  return model.eps_inner(v, w) - p * nu * acc * U.grid.cell_measure();
}

CoercivityReport coercivity_check(const Field& U_a, double nu, const ProblemParams& params,
                                  const FracLapOperator& op, int n_probe, std::uint64_t seed,
                                  int power_steps) {
  const RescaledModel model(params, op);
  const Grid& g = op.grid();
  const double p = params.p();
  const ProjectionBasis basis(U_a, model);

  CoercivityReport rep;
  rep.gram_condition = basis.gram_condition();
  rep.neg_direction_value = second_variation(model, U_a, nu, U_a, U_a) / model.eps_norm2(U_a);

  // J''[v,v]/||v||^2_eps = 1 - <Kv, v>_eps/||v||^2_eps with K = H^{-1}(p nu U^{p-1} .),
  // which is self-adjoint and nonnegative in the eps-inner product.
  const Field weight = positive_power(U_a, p - 1.0);
  const Field& vs = model.potential_samples();
  const bool flat = std::all_of(vs.values.begin(), vs.values.end(),
                                [&](double x) { return x == vs.values.front(); });
  const double shift = model.mean_potential();
  auto apply_k = [&](const Field& v) {
    Field rhs(g);
    for (std::size_t i = 0; i < v.size(); ++i) rhs[i] = p * nu * weight[i] * v[i];
    if (flat) return apply_resolvent(op, rhs, shift);
    const KrylovResult kr = pcg([&](const Field& f) { return model.apply_h(f); }, rhs,
                                [&](const Field& f) { return apply_resolvent(op, f, shift); }, 1e-12, 500);
    return kr.x;
  };
  auto quotient = [&](const Field& v) {
    return second_variation(model, U_a, nu, v, v) / model.eps_norm2(v);
  };

  // Smooth random probes localized near the bump.
  Point center = spectral_argmax(U_a);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  rep.probe_min = std::numeric_limits<double>::infinity();
  Field best(g);
  for (int k = 0; k < std::max(1, n_probe); ++k) {
    Field eta(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point x = g.node(i);
      double r2 = 0.0;
      for (std::size_t d = 0; d < x.size(); ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
      eta[i] = normal(rng) * std::exp(-r2 / 8.0);
    }
    Field v = basis.project_out(apply_resolvent(op, eta, 1.0));
    const double q = quotient(v);
    if (q < rep.probe_min) {
      rep.probe_min = q;
      best = v;
    }
  }

  Field v = best;
  double prev = rep.probe_min;
  rep.power_estimate = rep.probe_min;
  for (int it = 0; it < power_steps; ++it) {
    v = basis.project_out(apply_k(v));
    const double nrm = std::sqrt(model.eps_norm2(v));
    if (!(nrm > 0.0)) break;
    v = (1.0 / nrm) * v;
    const double q = quotient(v);
    rep.power_change = std::abs(q - prev);
    prev = q;
    rep.power_estimate = q;
  }
  rep.min_quotient = std::min(rep.probe_min, rep.power_estimate);
  return rep;
}

UniquenessReport multistart_uniqueness(const ProblemParams& params, const FracLapOperator& op, int k,
                                       std::uint64_t seed, const SolverConfig& base_cfg) {
  if (k < 3) throw ConfigError("multistart_uniqueness: need k >= 3");
  UniquenessReport rep;
  rep.all_converged = true;
  std::vector<Field> aligned;
  for (int i = 0; i < k; ++i) {
    SolverConfig cfg = base_cfg;
    cfg.init_kind = InitKind::random_positive;
    cfg.rng_seed = seed + static_cast<std::uint64_t>(i);
    SolveResult r = minimize_rayleigh(params, op, cfg);
    rep.all_converged = rep.all_converged && r.converged;
    aligned.push_back(align_to_origin(r.minimizer));
    rep.runs.push_back(std::move(r));
  }
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      rep.max_pairwise_gap =
          std::max(rep.max_pairwise_gap, std::sqrt(hs_norm_squared(op, aligned[i] - aligned[j])));
  return rep;
}

}  // namespace fracground
