#include "inls/error.hpp"
#include "inls/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using inls::Complex;
using inls::ComplexArray;
using inls::Field;
using inls::GridSpec;

namespace {

constexpr double pi = std::numbers::pi;

Field from_function(const GridSpec &g, auto fn) {
  ComplexArray v(g.total());
  for (std::size_t f = 0; f < v.size(); ++f) {
    inls::NodeIndex idx = inls::unflatten(g, f);
    double x[3] = {0, 0, 0};
    for (int a = 0; a < g.d; ++a)
      x[a] = g.coord(idx.i[a]);
    v[f] = fn(x);
  }
  return Field(g, std::move(v));
}

Field random_field(const GridSpec &g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  ComplexArray v(g.total());
  for (auto &z : v)
    z = Complex(n01(rng), n01(rng));
  return Field(g, std::move(v));
}

// Window scan over every start cell with periodic wrap.
double brute_sup_cube(const Field &u, int m) {
  const GridSpec &g = u.grid();
  const int n = g.n;
  double best = 0.0;
  int start[3] = {0, 0, 0};
  const int span0 = n, span1 = g.d > 1 ? n : 1, span2 = g.d > 2 ? n : 1;
  for (start[0] = 0; start[0] < span0; ++start[0])
    for (start[1] = 0; start[1] < span1; ++start[1])
      for (start[2] = 0; start[2] < span2; ++start[2]) {
        double sum = 0.0;
        int off[3] = {0, 0, 0};
        const int w1 = g.d > 1 ? m : 1, w2 = g.d > 2 ? m : 1;
        for (off[0] = 0; off[0] < m; ++off[0])
          for (off[1] = 0; off[1] < w1; ++off[1])
            for (off[2] = 0; off[2] < w2; ++off[2]) {
              std::size_t flat = 0;
              for (int a = 0; a < g.d; ++a)
                flat = flat * n + static_cast<std::size_t>((start[a] + off[a]) % n);
              sum += std::norm(u.values()[flat]);
            }
        best = std::max(best, sum);
      }
  return std::sqrt(best * g.cell_volume());
}

} // namespace

TEST_CASE("grid construction") {
  GridSpec g = inls::make_grid(1, 2 * pi, 8, false);
  CHECK(g.total() == 8);
  CHECK(g.coord(0) == doctest::Approx(-pi));
  CHECK(g.coord(7) == doctest::Approx(-pi + 7 * pi / 4));
  CHECK(g.coord(1) - g.coord(0) == doctest::Approx(pi / 4));

  GridSpec o = inls::make_grid(1, 2 * pi, 8, true);
  double m = 1e300;
  for (int j = 0; j < 8; ++j)
    m = std::min(m, std::abs(o.coord(j)));
  CHECK(m == doctest::Approx(pi / 8));

  GridSpec c = inls::make_grid(3, 32, 64, true);
  CHECK(c.total() == 262144);
  CHECK(c.h() == 0.5);

  // FFT index order: 0..n/2-1, then -n/2..-1.
  CHECK(g.wavenumber(0) == 0.0);
  CHECK(g.wavenumber(3) == doctest::Approx(3.0));
  CHECK(g.wavenumber(4) == doctest::Approx(-4.0));
  CHECK(g.wavenumber(7) == doctest::Approx(-1.0));

  CHECK_THROWS_AS(inls::make_grid(1, 1.0, 12, true), inls::ValidationError);
  CHECK_THROWS_AS(inls::make_grid(1, 1.0, 4, true), inls::ValidationError);
  CHECK_THROWS_AS(inls::make_grid(4, 1.0, 8, true), inls::ValidationError);
  CHECK_THROWS_AS(inls::make_grid(2, -1.0, 8, true), inls::ValidationError);
}

TEST_CASE("offset grids keep every node at least h/2 from the origin") {
  for (int d = 1; d <= 3; ++d) {
    GridSpec g = inls::make_grid(d, 3.0, 16, true);
    double m = 1e300;
    for (std::size_t f = 0; f < g.total(); ++f)
      m = std::min(m, std::sqrt(inls::radius_squared(g, f)));
    CHECK(m >= 0.5 * g.h() * (1 - 1e-14));
  }
}

TEST_CASE("singular weight") {
  GridSpec g = inls::make_grid(3, 2.0, 8, true);
  auto w = inls::singular_weight(g, 1.0);
  for (std::size_t f = 0; f < g.total(); ++f) {
    CHECK(std::isfinite(w[f]));
    CHECK(w[f] == doctest::Approx(1.0 / std::sqrt(inls::radius_squared(g, f))));
  }
  // Monotone decreasing in |x|.
  for (std::size_t f = 0; f < g.total(); ++f)
    for (std::size_t e = 0; e < g.total(); e += 7)
      if (inls::radius_squared(g, f) < inls::radius_squared(g, e))
        CHECK(w[f] >= w[e]);

  CHECK_THROWS_AS(inls::singular_weight(g, 0.0), inls::ValidationError);
  GridSpec centered = inls::make_grid(1, 2.0, 8, false);
  CHECK_THROWS_AS(inls::singular_weight(centered, 1.0), inls::ValidationError);
  auto capped = inls::singular_weight(centered, 1.0, inls::OriginPolicy::cap);
  CHECK(capped[4] == doctest::Approx(1.0 / (0.5 * centered.h())));
  CHECK(capped[5] == doctest::Approx(1.0 / centered.h()));

  // Node at x = (1/2, 0, 0) with the cap policy: weight 2.
  GridSpec unit = inls::make_grid(3, 4.0, 8, false);
  auto wc = inls::singular_weight(unit, 1.0, inls::OriginPolicy::cap);
  std::size_t flat = (5 * 8 + 4) * 8 + 4;
  CHECK(unit.coord(5) == doctest::Approx(0.5));
  CHECK(wc[flat] == doctest::Approx(2.0));

  auto grad = inls::singular_weight_gradient(g, 0.5);
  for (std::size_t f = 0; f < g.total(); f += 5) {
    inls::NodeIndex idx = inls::unflatten(g, f);
    double r2 = inls::radius_squared(g, f);
    for (int a = 0; a < 3; ++a)
      CHECK(grad[a][f] ==
            doctest::Approx(-0.5 * g.coord(idx.i[a]) * std::pow(r2, -1.25)));
  }
}

TEST_CASE("ball quadrature of |x|^-1 in three dimensions") {
  GridSpec g = inls::make_grid(3, 2.5, 128, true);
  auto w = inls::singular_weight(g, 1.0);
  double sum = 0.0;
  for (std::size_t f = 0; f < g.total(); ++f)
    if (inls::radius_squared(g, f) < 1.0)
      sum += w[f];
  sum *= g.cell_volume();
  CHECK(std::abs(sum - 2 * pi) / (2 * pi) < 0.01);
}

TEST_CASE("transforms and Parseval") {
  for (int d = 1; d <= 3; ++d) {
    GridSpec g = inls::make_grid(d, 5.0, d == 3 ? 16 : 32, true);
    Field u = random_field(g, 11 + d);
    auto sp = inls::Spectral::get(g);
    ComplexArray v = u.values();
    sp->forward(v.data());
    sp->inverse(v.data());
    double err = 0.0, ref = 0.0;
    for (std::size_t f = 0; f < v.size(); ++f) {
      err = std::max(err, std::abs(v[f] - u.values()[f]));
      ref = std::max(ref, std::abs(u.values()[f]));
    }
    CHECK(err / ref < 1e-12);
    CHECK(std::abs(inls::l2_norm(u) - inls::l2_norm_spectral(u)) /
              inls::l2_norm(u) <
          1e-12);
  }
}

TEST_CASE("spectral gradient") {
  SUBCASE("Fourier mode") {
    GridSpec g = inls::make_grid(2, 2 * pi, 16, true);
    const int k0 = 3, k1 = -2;
    Field u = from_function(g, [&](const double *x) {
      return std::exp(Complex(0, k0 * x[0] + k1 * x[1]));
    });
    auto grad = inls::gradient(u);
    double err = 0.0;
    for (std::size_t f = 0; f < u.size(); ++f) {
      err = std::max(err, std::abs(grad[0][f] - Complex(0, k0) * u.values()[f]));
      err = std::max(err, std::abs(grad[1][f] - Complex(0, k1) * u.values()[f]));
    }
    CHECK(err < 1e-12);
  }
  SUBCASE("constant field") {
    GridSpec g = inls::make_grid(3, 4.0, 8, true);
    Field u(g, ComplexArray(g.total(), Complex(2.0, -1.0)));
    for (const auto &comp : inls::gradient(u))
      for (const Complex &z : comp)
        CHECK(std::abs(z) < 1e-13);
  }
  SUBCASE("sine in one dimension") {
    const double L = 3.0;
    GridSpec g = inls::make_grid(1, L, 64, true);
    Field u = from_function(g, [&](const double *x) {
      return Complex(std::sin(2 * pi * x[0] / L), 0.0);
    });
    auto grad = inls::gradient(u);
    double err = 0.0;
    for (int j = 0; j < g.n; ++j)
      err = std::max(err, std::abs(grad[0][j].real() -
                                   2 * pi / L * std::cos(2 * pi * g.coord(j) / L)));
    CHECK(err < 1e-12);
  }
  SUBCASE("product of resolved modes") {
    const double L = 2 * pi;
    GridSpec g = inls::make_grid(3, L, 16, true);
    Field u = from_function(g, [&](const double *x) {
      return Complex(std::sin(x[0]) * std::cos(2 * x[1]) * std::sin(3 * x[2]),
                     std::cos(x[0] + x[2]));
    });
    auto grad = inls::gradient(u);
    double err = 0.0;
    for (std::size_t f = 0; f < u.size(); ++f) {
      inls::NodeIndex idx = inls::unflatten(g, f);
      double x = g.coord(idx.i[0]), y = g.coord(idx.i[1]), z = g.coord(idx.i[2]);
      Complex dx(std::cos(x) * std::cos(2 * y) * std::sin(3 * z), -std::sin(x + z));
      Complex dy(-2 * std::sin(x) * std::sin(2 * y) * std::sin(3 * z), 0.0);
      Complex dz(3 * std::sin(x) * std::cos(2 * y) * std::cos(3 * z), -std::sin(x + z));
      err = std::max({err, std::abs(grad[0][f] - dx), std::abs(grad[1][f] - dy),
                      std::abs(grad[2][f] - dz)});
    }
    CHECK(err < 1e-10);
  }
}

TEST_CASE("norms") {
  SUBCASE("constant field") {
    for (int d = 1; d <= 3; ++d) {
      const double L = 3.0;
      GridSpec g = inls::make_grid(d, L, 8, true);
      Field one(g, ComplexArray(g.total(), Complex(1.0, 0.0)));
      for (double q : {1.0, 2.0, 3.0, 4.5})
        CHECK(inls::lq_norm(one, q) == doctest::Approx(std::pow(L, d / q)));
      CHECK(inls::lq_norm(one, INFINITY) == doctest::Approx(1.0));
    }
  }
  SUBCASE("Gaussian L2") {
    for (int d = 1; d <= 3; ++d) {
      GridSpec g = inls::make_grid(d, 20.0, d == 3 ? 64 : 128, true);
      Field u = from_function(g, [&](const double *x) {
        double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        return Complex(std::exp(-r2), 0.0);
      });
      double l2sq = std::pow(inls::l2_norm(u), 2);
      CHECK(l2sq == doctest::Approx(std::pow(pi / 2, d / 2.0)).epsilon(1e-12));
    }
  }
  SUBCASE("homogeneity") {
    GridSpec g = inls::make_grid(2, 4.0, 16, true);
    Field u = random_field(g, 5);
    ComplexArray v = u.values();
    const Complex c(-1.5, 2.0);
    for (auto &z : v)
      z *= c;
    Field cu(g, std::move(v));
    for (double q : {1.0, 2.0, 3.0, 4.0, 10.0 / 3.0, double(INFINITY)})
      CHECK(inls::lq_norm(cu, q) ==
            doctest::Approx(std::abs(c) * inls::lq_norm(u, q)).epsilon(1e-14));
  }
  SUBCASE("H1 of a Fourier mode") {
    GridSpec g = inls::make_grid(1, 2 * pi, 16, true);
    Field u = from_function(g, [](const double *x) {
      return std::exp(Complex(0, 3 * x[0]));
    });
    CHECK(inls::h1_norm(u) == doctest::Approx(std::sqrt(2 * pi * 10)));
  }
  CHECK_THROWS_AS(inls::lq_norm(Field::zeros(inls::make_grid(1, 1, 8, true)), 0.5),
                  inls::ValidationError);
}

TEST_CASE("modulus power paths agree with pow") {
  for (double p : {0.5, 1.0, 1.5, 2.0, 3.0, 3.5, 4.0, 6.0, 8.0, 10.0 / 3.0, 4.7}) {
    inls::ModulusPower pw(p);
    for (double r2 : {0.0, 1e-6, 0.3, 1.0, 2.5, 40.0})
      CHECK(pw(r2) == doctest::Approx(std::pow(r2, 0.5 * p)).epsilon(1e-14));
  }
}

TEST_CASE("sup cube matches the brute-force window scan") {
  for (int d = 1; d <= 3; ++d) {
    GridSpec g = inls::make_grid(d, 8.0, 8, true); // h = 1
    Field u = random_field(g, 100 + d);
    for (int m = 1; m <= 8; ++m) {
      CAPTURE(d);
      CAPTURE(m);
      double fast = inls::sup_cube_l2(u, m * g.h());
      double slow = brute_sup_cube(u, m);
      CHECK(fast == doctest::Approx(slow).epsilon(1e-13));
    }
  }
  GridSpec g = inls::make_grid(2, 4.0, 8, true);
  Field c(g, ComplexArray(g.total(), Complex(3.0, 0.0)));
  CHECK(inls::sup_cube_l2(c, 1.5) == doctest::Approx(3.0 * 1.5));
  ComplexArray spike(g.total());
  spike[19] = Complex(2.0, 0.0);
  Field s(g, spike);
  CHECK(inls::sup_cube_l2(s, 1.0) == doctest::Approx(inls::l2_norm(s)));
  CHECK(inls::sup_cube_l2(s, 2.0) == doctest::Approx(inls::l2_norm(s)));
  CHECK_THROWS_AS(inls::sup_cube_l2(c, 5.0), inls::ValidationError);
  CHECK_THROWS_AS(inls::sup_cube_l2(c, 0.7), inls::ValidationError);
}

TEST_CASE("field files round-trip bit for bit") {
  GridSpec g = inls::make_grid(2, 6.5, 8, true);
  Field u = random_field(g, 3);
  auto path = std::filesystem::temp_directory_path() / "inls_grid_roundtrip.field";
  inls::write_field(path, u);
  Field v = inls::read_field(path);
  CHECK(v.grid() == g);
  CHECK(v.values() == u.values());
  CHECK(std::filesystem::file_size(path) == 4 + 4 + 8 + 4 + 16 * g.total());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(inls::decode_field("short"), inls::Error);
  CHECK_THROWS_AS(inls::read_field("/nonexistent/inls.field"), inls::IoError);
}

TEST_CASE("fields reject non-finite values") {
  GridSpec g = inls::make_grid(1, 1.0, 8, true);
  ComplexArray v(g.total());
  v[3] = Complex(NAN, 0.0);
  CHECK_THROWS_AS(Field(g, v), inls::ValidationError);
  CHECK_THROWS_AS(Field(g, ComplexArray(3)), inls::ValidationError);
}

TEST_CASE("band-limited random fields are reproducible and band-limited") {
  GridSpec g = inls::make_grid(2, 2 * pi, 32, true);
  Field a = inls::band_limited_random(g, 4.0, 9);
  Field b = inls::band_limited_random(g, 4.0, 9);
  Field c = inls::band_limited_random(g, 4.0, 10);
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
  ComplexArray hat = a.values();
  inls::Spectral::get(g)->forward(hat.data());
  double outside = 0.0, total = 0.0;
  for (std::size_t f = 0; f < hat.size(); ++f) {
    inls::NodeIndex idx = inls::unflatten(g, f);
    double k2 = std::pow(g.wavenumber(idx.i[0]), 2) + std::pow(g.wavenumber(idx.i[1]), 2);
    total += std::norm(hat[f]);
    if (k2 > 16.0 + 1e-9)
      outside += std::norm(hat[f]);
  }
  CHECK(outside <= 1e-20 * total);
}
