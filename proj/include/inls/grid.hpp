#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace inls {

using Complex = std::complex<double>;

// 64-byte aligned storage so any array can be handed to the FFT plans.
template <class T> struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() noexcept = default;
  template <class U> AlignedAllocator(const AlignedAllocator<U> &) noexcept {}

  T *allocate(std::size_t n) {
    return static_cast<T *>(::operator new(n * sizeof(T), alignment));
  }
  void deallocate(T *p, std::size_t) noexcept {
    ::operator delete(p, alignment);
  }
  template <class U> bool operator==(const AlignedAllocator<U> &) const noexcept {
    return true;
  }
};

using ComplexArray = std::vector<Complex, AlignedAllocator<Complex>>;
using RealArray = std::vector<double>;

// Periodic box [-L/2, L/2)^d with n points per axis, row-major with axis 0
// slowest.
struct GridSpec {
  int d = 1;
  double L = 1.0;
  int n = 8;
  bool offset = true;

  std::size_t total() const;
  double h() const { return L / n; }
  double cell_volume() const;
  double coord(int j) const { return -0.5 * L + (j + (offset ? 0.5 : 0.0)) * h(); }
  // Wavenumber of FFT index j: 2 pi m / L with m in [-n/2, n/2).
  double wavenumber(int j) const;

  bool operator==(const GridSpec &) const = default;
};

GridSpec make_grid(int d, double L, int n, bool offset);

// Multi-index of a flat node index.
struct NodeIndex {
  int i[3] = {0, 0, 0};
};
NodeIndex unflatten(const GridSpec &g, std::size_t flat);
double radius_squared(const GridSpec &g, std::size_t flat);

// State sampled on a grid. Values never contain NaN or Inf.
class Field {
public:
  Field(GridSpec grid, ComplexArray values);
  static Field zeros(const GridSpec &grid);

  const GridSpec &grid() const { return grid_; }
  const ComplexArray &values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  ComplexArray take_values() && { return std::move(values_); }

private:
  GridSpec grid_;
  ComplexArray values_;
};

// True iff every entry is finite.
bool all_finite(std::span<const Complex> values);

// Cached FFT plans and wavenumber tables for one grid shape. Execution is
// safe from several threads on distinct arrays.
class Spectral {
public:
  static std::shared_ptr<const Spectral> get(const GridSpec &grid);

  // Unnormalized forward transform, in place.
  void forward(Complex *data) const;
  // Normalized inverse transform (divides by n^d), in place.
  void inverse(Complex *data) const;

  const GridSpec &grid() const { return grid_; }
  double axis_wavenumber(int j) const { return k_axis_[j]; }
  // Derivative symbol per axis; zero on the Nyquist index.
  double derivative_symbol(int j) const { return dk_axis_[j]; }
  const RealArray &k_squared() const { return k_squared_; }

  Spectral(const GridSpec &grid, int);
  ~Spectral();
  Spectral(const Spectral &) = delete;
  Spectral &operator=(const Spectral &) = delete;

private:
  GridSpec grid_;
  std::vector<double> k_axis_, dk_axis_;
  RealArray k_squared_;
  void *forward_plan_ = nullptr;
  void *inverse_plan_ = nullptr;
};

enum class OriginPolicy {
  require_offset, // the grid must be offset, so no node sits at the origin
  cap,            // nodes with |x| < h/2 use |x| := h/2
};

// W_j = |x_j|^{-s}.
RealArray singular_weight(const GridSpec &grid, double s,
                          OriginPolicy policy = OriginPolicy::require_offset);

// Analytic gradient of |x|^{-s} at the nodes: -s x |x|^{-s-2}, one array
// per axis, with the same origin policy as singular_weight.
std::vector<RealArray>
singular_weight_gradient(const GridSpec &grid, double s,
                         OriginPolicy policy = OriginPolicy::require_offset);

// Spectral partial derivatives, one array per axis.
// |u|^p evaluated from |u|^2, with multiplication-only paths when 2p is a
// small positive integer.
class ModulusPower {
public:
  explicit ModulusPower(double p);
  double operator()(double r2) const {
    switch (mode_) {
    case Mode::r2:
      return ipow(r2, count_);
    case Mode::r:
      return ipow(std::sqrt(r2), count_);
    case Mode::sqrt_r:
      return ipow(std::sqrt(std::sqrt(r2)), count_);
    case Mode::generic:
      break;
    }
    return std::pow(r2, half_);
  }

private:
  enum class Mode { generic, r2, r, sqrt_r };
  static double ipow(double x, int m) {
    double r = 1.0;
    for (int i = 0; i < m; ++i)
      r *= x;
    return r;
  }
  double half_;
  Mode mode_ = Mode::generic;
  int count_ = 0;
};

// Inverse transform of i k_axis * hat into out (length n^d).
void derivative_from_hat(const GridSpec &grid, const Complex *hat, int axis,
                         Complex *out);
std::vector<ComplexArray> gradient(const Field &field);
std::vector<ComplexArray> gradient(const GridSpec &grid,
                                   std::span<const Complex> values);

// Rectangle-rule L^q norm; q = +inf gives the max modulus.
double lq_norm(const Field &field, double q);
double lq_norm(const GridSpec &grid, std::span<const Complex> values, double q);
double l2_norm(const Field &field);
// L^2 norm through the discrete Parseval identity.
double l2_norm_spectral(const Field &field);
// (h^d / n^d) sum (1 + |k|^2) |u_k|^2, square-rooted.
double h1_norm(const Field &field);
double h1_norm(const GridSpec &grid, std::span<const Complex> values);
// Kinetic integral  sum |k|^2 |u_k|^2 (h^d / n^d), i.e. ||grad u||_2^2.
double gradient_l2_squared(const GridSpec &grid, std::span<const Complex> values);

// Largest L^2 mass over grid-aligned cubes with the given edge (a multiple
// of h), sliding by one cell with periodic wrap.
double sup_cube_l2(const Field &field, double edge);

// Band-limited random field: independent complex Gaussian coefficients on
// modes with |k| <= cutoff, zero elsewhere, normalized to max modulus 1.
Field band_limited_random(const GridSpec &grid, double cutoff,
                          std::uint64_t seed);

// Binary field format: int32 d, int32 n, float64 L, int32 offset, then
// interleaved re/im float64 in row-major order, all little-endian.
void write_field(const std::filesystem::path &path, const Field &field);
Field read_field(const std::filesystem::path &path);
std::string encode_field(const Field &field);
Field decode_field(std::string_view bytes);

} // namespace inls
