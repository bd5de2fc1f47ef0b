#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracground {

/// Base error for everything raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad user input (parameters outside their admissible range, malformed config).
struct ConfigError : Error {
  using Error::Error;
};

/// A numerical procedure could not produce a trustworthy answer.
struct NumericalError : Error {
  using Error::Error;
};

/// A point of R^N, N in {1, 2}.
using Point = std::vector<double>;

/// Uniform periodic lattice on the box [-L, L)^N.
///
/// Node j on an axis sits at x_j = -L + j*h, so the origin is node n/2.
/// Frequencies are xi_k = (pi/L) k with k in {-n/2, ..., n/2-1}; the
/// discrete transform stores them in the usual FFT order (k >= 0 first).
class Grid {
 public:
  Grid(int dim, int points_per_axis, double half_width);

  int dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  double half_width() const { return L_; }
  double spacing() const { return h_; }
  /// Spacing of the frequency lattice, pi / L.
  double frequency_step() const;
  std::size_t size() const { return size_; }
  /// Riemann-sum weight h^N of one node.
  double cell_measure() const { return cell_; }

  double coordinate(int j) const { return -L_ + j * h_; }
  /// Integer frequency index of FFT slot m (m in [0, n)).
  int frequency_index(int m) const { return m < n_ / 2 ? m : m - n_; }
  double frequency(int m) const { return frequency_step() * frequency_index(m); }
  /// Sorted frequency list {-n/2, ..., n/2-1} * pi/L.
  std::vector<double> frequencies() const;

  /// Node multi-index -> flat row-major index (axis 0 slowest).
  std::size_t flat(int j0, int j1 = 0) const {
    return dim_ == 1 ? static_cast<std::size_t>(j0)
                     : static_cast<std::size_t>(j0) * n_ + j1;
  }
  /// Coordinates of flat node `idx`.
  Point node(std::size_t idx) const;
  /// Flat index of the node at the origin.
  std::size_t origin_index() const;
  /// Flat index of the node nearest to `x` (periodic wrap).
  std::size_t nearest_node(const Point& x) const;

  bool operator==(const Grid& other) const = default;

 private:
  int dim_;
  int n_;
  double L_;
  double h_;
  double cell_;
  std::size_t size_;
};

/// Validated constructor used by every front end.
Grid make_grid(int dim, int points_per_axis, double half_width);

/// Real samples of a function on a grid (row-major).
struct Field {
  Grid grid;
  std::vector<double> values;

  explicit Field(const Grid& g) : grid(g), values(g.size(), 0.0) {}
  Field(const Grid& g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::span<const double> span() const { return values; }

  bool all_finite() const;
};

/// Samples f(x) at every node.
template <class F>
Field sample(const Grid& grid, F&& f) {
  Field out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid.node(i));
  return out;
}

void require_same_grid(const Field& a, const Field& b, const char* where);
void require_finite(const Field& u, const char* where);

// L^2-type quantities (Riemann sums with the uniform cell measure).
double inner_l2(const Field& a, const Field& b);
double norm_l2(const Field& a);
/// (h^N sum |u|^q)^(1/q)
double norm_lq(const Field& a, double q);
double max_abs(const Field& a);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double t, const Field& a);
/// a += t * b
void axpy(double t, const Field& b, Field& a);

/// Periodic shift by whole nodes: out(x) = u(x - shift*h).
Field roll(const Field& u, std::span<const int> shift);

}  // namespace fracground
