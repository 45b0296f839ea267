#include "inls/grid.hpp"

#include "inls/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <tuple>

namespace inls {

namespace {

constexpr double kPi = std::numbers::pi;

std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}

} // namespace

std::size_t GridSpec::total() const {
  std::size_t t = 1;
  for (int a = 0; a < d; ++a)
    t *= static_cast<std::size_t>(n);
  return t;
}

double GridSpec::cell_volume() const { return std::pow(h(), d); }

double GridSpec::wavenumber(int j) const {
  int m = j < n / 2 ? j : j - n;
  return 2.0 * kPi * m / L;
}

GridSpec make_grid(int d, double L, int n, bool offset) {
  if (d < 1 || d > 3)
    throw ValidationError("grid dimension must be 1, 2 or 3, got " +
                          std::to_string(d));
  if (!(L > 0.0) || !std::isfinite(L))
    throw ValidationError("box length L must be positive and finite");
  if (n < 8 || !std::has_single_bit(static_cast<unsigned>(n)))
    throw ValidationError("points per axis must be a power of two >= 8, got " +
                          std::to_string(n));
  return GridSpec{d, L, n, offset};
}

NodeIndex unflatten(const GridSpec &g, std::size_t flat) {
  NodeIndex idx;
  for (int a = g.d - 1; a >= 0; --a) {
    idx.i[a] = static_cast<int>(flat % g.n);
    flat /= g.n;
  }
  return idx;
}

double radius_squared(const GridSpec &g, std::size_t flat) {
  NodeIndex idx = unflatten(g, flat);
  double r2 = 0.0;
  for (int a = 0; a < g.d; ++a) {
    double x = g.coord(idx.i[a]);
    r2 += x * x;
  }
  return r2;
}

bool all_finite(std::span<const Complex> values) {
  for (const Complex &z : values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      return false;
  return true;
}

Field::Field(GridSpec grid, ComplexArray values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.total())
    throw ValidationError("field has " + std::to_string(values_.size()) +
                          " values, grid needs " +
                          std::to_string(grid_.total()));
  if (!all_finite(values_))
    throw ValidationError("field contains NaN or Inf");
}

Field Field::zeros(const GridSpec &grid) {
  return Field(grid, ComplexArray(grid.total(), Complex(0.0, 0.0)));
}

// ---------------------------------------------------------------------------
// Spectral

Spectral::Spectral(const GridSpec &grid, int) : grid_(grid) {
  const int n = grid.n;
  k_axis_.resize(n);
  dk_axis_.resize(n);
  for (int j = 0; j < n; ++j) {
    k_axis_[j] = grid.wavenumber(j);
    dk_axis_[j] = (j == n / 2) ? 0.0 : k_axis_[j];
  }
  const std::size_t total = grid.total();
  k_squared_.resize(total);
  for (std::size_t f = 0; f < total; ++f) {
    NodeIndex idx = unflatten(grid, f);
    double k2 = 0.0;
    for (int a = 0; a < grid.d; ++a)
      k2 += k_axis_[idx.i[a]] * k_axis_[idx.i[a]];
    k_squared_[f] = k2;
  }

  int dims[3] = {n, n, n};
  ComplexArray scratch(total);
  auto *buf = reinterpret_cast<fftw_complex *>(scratch.data());
  std::lock_guard lock(planner_mutex());
  forward_plan_ =
      fftw_plan_dft(grid.d, dims, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  inverse_plan_ =
      fftw_plan_dft(grid.d, dims, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!forward_plan_ || !inverse_plan_)
    throw Error(ExitCode::internal, "FFTW planning failed");
}

Spectral::~Spectral() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_)
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_)
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

std::shared_ptr<const Spectral> Spectral::get(const GridSpec &grid) {
  using Key = std::tuple<int, int, double>;
  static std::mutex cache_mutex;
  static std::map<Key, std::shared_ptr<const Spectral>> cache;
  Key key{grid.d, grid.n, grid.L};
  std::lock_guard lock(cache_mutex);
  if (auto it = cache.find(key); it != cache.end())
    return it->second;
  // The offset flag does not change plans or wavenumbers.
  GridSpec canonical = grid;
  canonical.offset = true;
  auto sp = std::make_shared<const Spectral>(canonical, 0);
  cache[key] = sp;
  return sp;
}

void Spectral::forward(Complex *data) const {
  auto *buf = reinterpret_cast<fftw_complex *>(data);
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), buf, buf);
}

void Spectral::inverse(Complex *data) const {
  auto *buf = reinterpret_cast<fftw_complex *>(data);
  fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), buf, buf);
  const double scale = 1.0 / static_cast<double>(grid_.total());
  const std::size_t total = grid_.total();
  for (std::size_t i = 0; i < total; ++i)
    data[i] *= scale;
}

// ---------------------------------------------------------------------------
// Weights

namespace {

double capped_radius_squared(const GridSpec &grid, std::size_t f,
                             OriginPolicy policy) {
  double r2 = radius_squared(grid, f);
  if (policy == OriginPolicy::cap) {
    double floor = 0.25 * grid.h() * grid.h();
    r2 = std::max(r2, floor);
  }
  return r2;
}

void check_weight_args(const GridSpec &grid, double s, OriginPolicy policy) {
  if (!(s > 0.0))
    throw ValidationError("weight exponent s must be positive");
  if (!grid.offset && policy == OriginPolicy::require_offset)
    throw ValidationError(
        "singular weight needs an offset grid or an explicit origin cap");
}

} // namespace

RealArray singular_weight(const GridSpec &grid, double s, OriginPolicy policy) {
  check_weight_args(grid, s, policy);
  const std::size_t total = grid.total();
  RealArray w(total);
  for (std::size_t f = 0; f < total; ++f)
    w[f] = std::pow(capped_radius_squared(grid, f, policy), -0.5 * s);
  return w;
}

std::vector<RealArray> singular_weight_gradient(const GridSpec &grid, double s,
                                                OriginPolicy policy) {
  check_weight_args(grid, s, policy);
  const std::size_t total = grid.total();
  std::vector<RealArray> g(grid.d, RealArray(total));
  for (std::size_t f = 0; f < total; ++f) {
    NodeIndex idx = unflatten(grid, f);
    double r2 = capped_radius_squared(grid, f, policy);
    double factor = -s * std::pow(r2, -0.5 * s - 1.0);
    for (int a = 0; a < grid.d; ++a)
      g[a][f] = factor * grid.coord(idx.i[a]);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Differentiation and norms

ModulusPower::ModulusPower(double p) : half_(0.5 * p) {
  const double twice = 2.0 * p;
  const double m = std::round(twice);
  if (m != twice || m < 1.0 || m > 16.0)
    return;
  count_ = static_cast<int>(m);
  if (count_ % 4 == 0) {
    mode_ = Mode::r2;
    count_ /= 4;
  } else if (count_ % 2 == 0) {
    mode_ = Mode::r;
    count_ /= 2;
  } else {
    mode_ = Mode::sqrt_r;
  }
}

void derivative_from_hat(const GridSpec &grid, const Complex *hat, int axis,
                         Complex *out) {
  auto sp = Spectral::get(grid);
  const std::size_t total = grid.total();
  std::size_t stride = 1;
  for (int a = grid.d - 1; a > axis; --a)
    stride *= static_cast<std::size_t>(grid.n);
  const std::size_t n = static_cast<std::size_t>(grid.n);
  for (std::size_t f = 0; f < total; ++f) {
    double k = sp->derivative_symbol(static_cast<int>((f / stride) % n));
    out[f] = Complex(-k * hat[f].imag(), k * hat[f].real());
  }
  sp->inverse(out);
}

std::vector<ComplexArray> gradient(const GridSpec &grid,
                                   std::span<const Complex> values) {
  auto sp = Spectral::get(grid);
  ComplexArray hat(values.begin(), values.end());
  sp->forward(hat.data());
  std::vector<ComplexArray> out(grid.d, ComplexArray(grid.total()));
  for (int a = 0; a < grid.d; ++a)
    derivative_from_hat(grid, hat.data(), a, out[a].data());
  return out;
}

std::vector<ComplexArray> gradient(const Field &field) {
  return gradient(field.grid(), field.values());
}

double lq_norm(const GridSpec &grid, std::span<const Complex> values, double q) {
  if (!(q >= 1.0))
    throw ValidationError("L^q norm needs q >= 1");
  if (std::isinf(q)) {
    double m = 0.0;
    for (const Complex &z : values)
      m = std::max(m, std::abs(z));
    return m;
  }
  double sum = 0.0;
  if (q == 2.0) {
    for (const Complex &z : values)
      sum += std::norm(z);
  } else {
    const ModulusPower power(q);
    for (const Complex &z : values)
      sum += power(std::norm(z));
  }
  return std::pow(sum * grid.cell_volume(), 1.0 / q);
}

double lq_norm(const Field &field, double q) {
  return lq_norm(field.grid(), field.values(), q);
}

double l2_norm(const Field &field) { return lq_norm(field, 2.0); }

double l2_norm_spectral(const Field &field) {
  const GridSpec &g = field.grid();
  auto sp = Spectral::get(g);
  ComplexArray hat = field.values();
  sp->forward(hat.data());
  double sum = 0.0;
  for (const Complex &z : hat)
    sum += std::norm(z);
  return std::sqrt(sum * g.cell_volume() / static_cast<double>(g.total()));
}

namespace {

// Returns (sum |u_k|^2, sum |k|^2 |u_k|^2), both scaled by h^d / n^d.
std::pair<double, double> spectral_energies(const GridSpec &grid,
                                            std::span<const Complex> values) {
  auto sp = Spectral::get(grid);
  ComplexArray hat(values.begin(), values.end());
  sp->forward(hat.data());
  const RealArray &k2 = sp->k_squared();
  double mass = 0.0, grad = 0.0;
  for (std::size_t f = 0; f < hat.size(); ++f) {
    double p = std::norm(hat[f]);
    mass += p;
    grad += k2[f] * p;
  }
  const double scale = grid.cell_volume() / static_cast<double>(grid.total());
  return {mass * scale, grad * scale};
}

} // namespace

double h1_norm(const GridSpec &grid, std::span<const Complex> values) {
  auto [m, g] = spectral_energies(grid, values);
  return std::sqrt(m + g);
}

double h1_norm(const Field &field) {
  return h1_norm(field.grid(), field.values());
}

double gradient_l2_squared(const GridSpec &grid,
                           std::span<const Complex> values) {
  return spectral_energies(grid, values).second;
}

double sup_cube_l2(const Field &field, double edge) {
  const GridSpec &g = field.grid();
  if (!(edge > 0.0))
    throw ValidationError("cube edge must be positive");
  if (edge > g.L * (1.0 + 1e-12))
    throw ValidationError("cube edge exceeds the box length");
  const double cells = edge / g.h();
  const long m = std::lround(cells);
  if (m < 1 || std::abs(cells - static_cast<double>(m)) > 1e-9 * cells)
    throw ValidationError("cube edge must be a multiple of the grid spacing");

  const std::size_t total = g.total();
  const int n = g.n;
  RealArray acc(total);
  for (std::size_t f = 0; f < total; ++f)
    acc[f] = std::norm(field.values()[f]);

  // Separable periodic window sums, one axis at a time.
  std::size_t stride = 1;
  for (int a = g.d - 1; a >= 0; --a) {
    RealArray next(total);
    const std::size_t block = stride * n;
    for (std::size_t outer = 0; outer < total; outer += block) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t base = outer + inner;
        double window = 0.0;
        for (long j = 0; j < m; ++j)
          window += acc[base + (j % n) * stride];
        for (int start = 0; start < n; ++start) {
          next[base + start * stride] = window;
          window -= acc[base + start * stride];
          window += acc[base + ((start + m) % n) * stride];
        }
      }
    }
    acc.swap(next);
    stride *= n;
  }
  double best = *std::max_element(acc.begin(), acc.end());
  return std::sqrt(std::max(best, 0.0) * g.cell_volume());
}

Field band_limited_random(const GridSpec &grid, double cutoff,
                          std::uint64_t seed) {
  auto sp = Spectral::get(grid);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t total = grid.total();
  ComplexArray hat(total, Complex(0.0, 0.0));
  const RealArray &k2 = sp->k_squared();
  for (std::size_t f = 0; f < total; ++f) {
    // Draw for every mode so the stream does not depend on the cutoff.
    double re = normal(rng), im = normal(rng);
    NodeIndex idx = unflatten(grid, f);
    bool nyquist = false;
    for (int a = 0; a < grid.d; ++a)
      nyquist = nyquist || idx.i[a] == grid.n / 2;
    if (!nyquist && k2[f] <= cutoff * cutoff)
      hat[f] = Complex(re, im);
  }
  sp->inverse(hat.data());
  double peak = 0.0;
  for (const Complex &z : hat)
    peak = std::max(peak, std::abs(z));
  if (peak > 0.0)
    for (Complex &z : hat)
      z /= peak;
  return Field(grid, std::move(hat));
}

// ---------------------------------------------------------------------------
// Binary format

namespace {

void put_bytes(std::string &out, const void *p, std::size_t n) {
  const auto *c = static_cast<const unsigned char *>(p);
  if constexpr (std::endian::native == std::endian::little) {
    out.append(reinterpret_cast<const char *>(c), n);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      out.push_back(static_cast<char>(c[n - 1 - i]));
  }
}

template <class T> void put(std::string &out, T v) { put_bytes(out, &v, sizeof v); }

template <class T> T get(std::string_view &in) {
  if (in.size() < sizeof(T))
    throw IoError("truncated field data");
  T v;
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, in.data(), sizeof(T));
  if constexpr (std::endian::native != std::endian::little)
    std::reverse(raw, raw + sizeof(T));
  std::memcpy(&v, raw, sizeof(T));
  in.remove_prefix(sizeof(T));
  return v;
}

} // namespace

std::string encode_field(const Field &field) {
  const GridSpec &g = field.grid();
  std::string out;
  out.reserve(20 + 16 * field.size());
  put<std::int32_t>(out, g.d);
  put<std::int32_t>(out, g.n);
  put<double>(out, g.L);
  put<std::int32_t>(out, g.offset ? 1 : 0);
  for (const Complex &z : field.values()) {
    put<double>(out, z.real());
    put<double>(out, z.imag());
  }
  return out;
}

Field decode_field(std::string_view bytes) {
  auto d = get<std::int32_t>(bytes);
  auto n = get<std::int32_t>(bytes);
  auto L = get<double>(bytes);
  auto off = get<std::int32_t>(bytes);
  GridSpec g;
  try {
    g = make_grid(d, L, n, off != 0);
  } catch (const ValidationError &e) {
    throw IoError(std::string("bad field header: ") + e.what());
  }
  const std::size_t total = g.total();
  if (bytes.size() != total * 16)
    throw IoError("field payload has " + std::to_string(bytes.size()) +
                  " bytes, expected " + std::to_string(total * 16));
  ComplexArray values(total);
  for (std::size_t i = 0; i < total; ++i) {
    double re = get<double>(bytes);
    double im = get<double>(bytes);
    values[i] = Complex(re, im);
  }
  try {
    return Field(g, std::move(values));
  } catch (const ValidationError &e) {
    throw IoError(std::string("bad field payload: ") + e.what());
  }
}

void write_field(const std::filesystem::path &path, const Field &field) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw IoError("cannot open " + path.string() + " for writing");
  std::string bytes = encode_field(field);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os)
    throw IoError("write failed for " + path.string());
}

Field read_field(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return decode_field(ss.str());
}

} // namespace inls
