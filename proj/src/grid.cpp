#include "fracground/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fracground {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int wrap(long j, int n) {
  long r = j % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace

Grid::Grid(int dim, int points_per_axis, double half_width)
    : dim_(dim), n_(points_per_axis), L_(half_width) {
  if (dim != 1 && dim != 2)
    throw ConfigError("grid dimension must be 1 or 2 (got " + std::to_string(dim) + ")");
  if (points_per_axis < 8 || !is_power_of_two(points_per_axis))
    throw ConfigError("points_per_axis must be a power of two >= 8 (got " +
                      std::to_string(points_per_axis) + ")");
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw ConfigError("half_width must be positive and finite");
  h_ = 2.0 * L_ / n_;
  size_ = dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
  cell_ = dim_ == 1 ? h_ : h_ * h_;
}

Grid make_grid(int dim, int points_per_axis, double half_width) {
  return Grid(dim, points_per_axis, half_width);
}

double Grid::frequency_step() const { return std::numbers::pi / L_; }

std::vector<double> Grid::frequencies() const {
  std::vector<double> out;
  out.reserve(n_);
  for (int k = -n_ / 2; k < n_ / 2; ++k) out.push_back(frequency_step() * k);
  return out;
}

Point Grid::node(std::size_t idx) const {
  if (dim_ == 1) return {coordinate(static_cast<int>(idx))};
  const int j0 = static_cast<int>(idx / n_);
  const int j1 = static_cast<int>(idx % n_);
  return {coordinate(j0), coordinate(j1)};
}

std::size_t Grid::origin_index() const { return dim_ == 1 ? flat(n_ / 2) : flat(n_ / 2, n_ / 2); }

std::size_t Grid::nearest_node(const Point& x) const {
  auto axis = [&](double xi) { return wrap(std::lround((xi + L_) / h_), n_); };
  return dim_ == 1 ? flat(axis(x.at(0))) : flat(axis(x.at(0)), axis(x.at(1)));
}

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size())
    throw ConfigError("field length " + std::to_string(values.size()) +
                      " does not match grid node count " + std::to_string(grid.size()));
}

bool Field::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

void require_same_grid(const Field& a, const Field& b, const char* where) {
  if (!(a.grid == b.grid)) throw ConfigError(std::string(where) + ": grid mismatch");
}

void require_finite(const Field& u, const char* where) {
  if (!u.all_finite()) throw NumericalError(std::string(where) + ": non-finite field values");
}

double inner_l2(const Field& a, const Field& b) {
  require_same_grid(a, b, "inner_l2");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc * a.grid.cell_measure();
}

double norm_l2(const Field& a) { return std::sqrt(inner_l2(a, a)); }

double norm_lq(const Field& a, double q) {
  double acc = 0.0;
  for (double x : a.values) acc += std::pow(std::abs(x), q);
  return std::pow(acc * a.grid.cell_measure(), 1.0 / q);
}

double max_abs(const Field& a) {
  double m = 0.0;
  for (double x : a.values) m = std::max(m, std::abs(x));
  return m;
}

Field operator+(const Field& a, const Field& b) {
  require_same_grid(a, b, "operator+");
  Field out(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
  return out;
}

Field operator-(const Field& a, const Field& b) {
  require_same_grid(a, b, "operator-");
  Field out(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] -= b[i];
  return out;
}

Field operator*(double t, const Field& a) {
  Field out(a);
  for (double& x : out.values) x *= t;
  return out;
}

void axpy(double t, const Field& b, Field& a) {
  require_same_grid(a, b, "axpy");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += t * b[i];
}

Field roll(const Field& u, std::span<const int> shift) {
  const Grid& g = u.grid;
  const int n = g.points_per_axis();
  Field out(g);
  if (g.dim() == 1) {
    for (int j = 0; j < n; ++j) out[g.flat(wrap(j + shift[0], n))] = u[g.flat(j)];
  } else {
    for (int j0 = 0; j0 < n; ++j0)
      for (int j1 = 0; j1 < n; ++j1)
        out[g.flat(wrap(j0 + shift[0], n), wrap(j1 + shift[1], n))] = u[g.flat(j0, j1)];
  }
  return out;
}

}  // namespace fracground
