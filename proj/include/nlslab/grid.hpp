#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlslab {

using cplx = std::complex<double>;

// Error taxonomy shared by every module.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct NumericalDomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Uniform periodic grid on the box [-L, L)^d with n points per axis.
///
/// Physical nodes are x_j = -L + j h with h = 2L/n. Frequency nodes are
/// xi_k = pi k / L for k in [-n/2, n/2), stored in monotone order so that
/// public frequency-space arrays index k + n/2 along each axis.
class Grid {
 public:
  Grid(int dimension, std::size_t n, double half_width)
      : d_(dimension), n_(n), L_(half_width) {
    if (d_ < 1 || d_ > 3)
      throw UsageError("grid dimension must be 1, 2 or 3");
    if (n_ < 8 || (n_ & (n_ - 1)) != 0)
      throw UsageError("points per axis must be a power of two >= 8");
    if (!(L_ > 0.0) || !std::isfinite(L_))
      throw UsageError("grid half-width must be positive and finite");
    total_ = 1;
    for (int a = 0; a < d_; ++a) total_ *= n_;
  }

  int dimension() const { return d_; }
  std::size_t points_per_axis() const { return n_; }
  double half_width() const { return L_; }
  std::size_t size() const { return total_; }

  double spacing() const { return 2.0 * L_ / static_cast<double>(n_); }
  double frequency_spacing() const { return std::numbers::pi / L_; }
  double nyquist() const { return std::numbers::pi / spacing(); }

  /// Quadrature weight h^d for physical sums.
  double cell_volume() const { return std::pow(spacing(), d_); }
  /// Quadrature weight (pi/L)^d for frequency sums.
  double frequency_cell_volume() const { return std::pow(frequency_spacing(), d_); }

  double x(std::size_t j) const { return -L_ + static_cast<double>(j) * spacing(); }

  /// Signed integer frequency index for monotone position m in [0, n).
  long k_of_monotone(std::size_t m) const {
    return static_cast<long>(m) - static_cast<long>(n_ / 2);
  }
  double xi(std::size_t m) const {
    return frequency_spacing() * static_cast<double>(k_of_monotone(m));
  }

  /// Splits a row-major flat index into per-axis indices.
  std::array<std::size_t, 3> unflatten(std::size_t flat) const {
    std::array<std::size_t, 3> idx{0, 0, 0};
    for (int a = d_ - 1; a >= 0; --a) {
      idx[a] = flat % n_;
      flat /= n_;
    }
    return idx;
  }

  /// |x|^2 at a flat physical index.
  double x_squared(std::size_t flat) const {
    auto idx = unflatten(flat);
    double r2 = 0.0;
    for (int a = 0; a < d_; ++a) r2 += x(idx[a]) * x(idx[a]);
    return r2;
  }

  /// max_a |x_a| at a flat physical index (box "radius").
  double x_max_abs(std::size_t flat) const {
    auto idx = unflatten(flat);
    double r = 0.0;
    for (int a = 0; a < d_; ++a) r = std::max(r, std::abs(x(idx[a])));
    return r;
  }

  /// |xi|^2 at a flat monotone frequency index.
  double xi_squared(std::size_t flat) const {
    auto idx = unflatten(flat);
    double r2 = 0.0;
    for (int a = 0; a < d_; ++a) r2 += xi(idx[a]) * xi(idx[a]);
    return r2;
  }

  std::array<double, 3> xi_vector(std::size_t flat) const {
    auto idx = unflatten(flat);
    std::array<double, 3> v{0.0, 0.0, 0.0};
    for (int a = 0; a < d_; ++a) v[a] = xi(idx[a]);
    return v;
  }

  std::array<double, 3> x_vector(std::size_t flat) const {
    auto idx = unflatten(flat);
    std::array<double, 3> v{0.0, 0.0, 0.0};
    for (int a = 0; a < d_; ++a) v[a] = x(idx[a]);
    return v;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.d_ == b.d_ && a.n_ == b.n_ && a.L_ == b.L_;
  }

 private:
  int d_;
  std::size_t n_;
  double L_;
  std::size_t total_;
};

enum class Space { Physical, Frequency };

inline const char* to_string(Space s) {
  return s == Space::Physical ? "physical" : "frequency";
}

/// Complex samples on a Grid, tagged with the space they live in.
struct ComplexField {
  Grid grid;
  Space space;
  std::vector<cplx> values;
  bool blown_up = false;

  ComplexField(Grid g, Space sp) : grid(g), space(sp), values(g.size(), cplx{0.0, 0.0}) {}
  ComplexField(Grid g, Space sp, std::vector<cplx> v)
      : grid(g), space(sp), values(std::move(v)) {
    if (values.size() != grid.size())
      throw UsageError("field length does not match grid size");
  }

  std::size_t size() const { return values.size(); }
  cplx& operator[](std::size_t i) { return values[i]; }
  const cplx& operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const {
    for (const auto& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

  ComplexField& operator*=(cplx c) {
    for (auto& v : values) v *= c;
    return *this;
  }
};

inline void require_space(const ComplexField& f, Space expected, const char* op) {
  if (f.space != expected)
    throw UsageError(std::string(op) + ": expected a " + to_string(expected) +
                     "-space field, got " + to_string(f.space));
}

/// Samples a function of position on the physical lattice.
template <class F>
ComplexField sample_physical(const Grid& g, F&& fn) {
  ComplexField f(g, Space::Physical);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = fn(g.x_vector(i));
  return f;
}

/// Samples a function of frequency on the (monotone) frequency lattice.
template <class F>
ComplexField sample_frequency(const Grid& g, F&& fn) {
  ComplexField f(g, Space::Frequency);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = fn(g.xi_vector(i));
  return f;
}

}  // namespace nlslab
