#include "inls/diagnostics.hpp"

#include "inls/error.hpp"

#include <algorithm>
#include <cmath>

namespace inls {

namespace {

int hess_index(int d, int j, int k) {
  if (j > k)
    std::swap(j, k);
  return j * d - j * (j - 1) / 2 + (k - j);
}

// |u|^p for every node.
RealArray modulus_power(std::span<const Complex> values, double p) {
  RealArray out(values.size());
  const ModulusPower power(p);
  for (std::size_t f = 0; f < values.size(); ++f)
    out[f] = power(std::norm(values[f]));
  return out;
}

std::vector<ComplexArray> gradient_from_hat(const GridSpec &grid,
                                            const ComplexArray &hat) {
  std::vector<ComplexArray> out(grid.d, ComplexArray(grid.total()));
  for (int a = 0; a < grid.d; ++a)
    derivative_from_hat(grid, hat.data(), a, out[a].data());
  return out;
}

double action_sum(const GridSpec &grid, std::span<const Complex> u,
                  const std::vector<ComplexArray> &grad,
                  const MorawetzWeight &w) {
  double sum = 0.0;
  for (int a = 0; a < grid.d; ++a) {
    const RealArray &ga = w.grad(a);
    const ComplexArray &du = grad[a];
    for (std::size_t f = 0; f < u.size(); ++f)
      sum += ga[f] * (u[f].real() * du[f].imag() - u[f].imag() * du[f].real());
  }
  return 2.0 * sum * grid.cell_volume();
}

double rhs_sum(const GridSpec &grid, std::span<const Complex> u,
               const std::vector<ComplexArray> &grad, const RealArray &power,
               const MorawetzWeight &w, const Params &params,
               const SingularWeight &bw) {
  const int d = grid.d;
  const std::size_t total = u.size();
  const double alpha = params.alpha_value();
  const double sign = -static_cast<double>(params.mu);
  const RealArray &bilap = w.bilaplacian();
  const RealArray &lap = w.laplacian();
  double linear = 0.0, hessian = 0.0, nonlinear = 0.0;
  for (std::size_t f = 0; f < total; ++f)
    linear -= bilap[f] * std::norm(u[f]);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      const RealArray &hjk = w.hessian(j, k);
      const ComplexArray &dj = grad[j];
      const ComplexArray &dk = grad[k];
      for (std::size_t f = 0; f < total; ++f)
        hessian += hjk[f] * (dk[f].real() * dj[f].real() +
                             dk[f].imag() * dj[f].imag());
    }
  for (std::size_t f = 0; f < total; ++f) {
    double dot = 0.0;
    for (int a = 0; a < d; ++a)
      dot += w.grad(a)[f] * bw.grad[a][f];
    nonlinear += (2.0 * alpha * lap[f] * bw.values[f] - 4.0 * dot) * power[f];
  }
  nonlinear *= sign / (alpha + 2.0);
  return (linear + 4.0 * hessian + nonlinear) * grid.cell_volume();
}

double weighted_power_sum(const GridSpec &grid, const RealArray &weight,
                          const RealArray &power) {
  double sum = 0.0;
  for (std::size_t f = 0; f < power.size(); ++f)
    sum += weight[f] * power[f];
  return sum * grid.cell_volume();
}

double nakanishi_sum(const GridSpec &grid, double t, const RealArray &weight,
                     const RealArray &power, const RealArray &r2) {
  if (t == 0.0)
    return 0.0;
  const double t2 = t * t;
  double sum = 0.0;
  for (std::size_t f = 0; f < power.size(); ++f) {
    double s = t2 + r2[f];
    sum += weight[f] * power[f] / (s * std::sqrt(s));
  }
  return t2 * sum * grid.cell_volume();
}

double gn_ratio_values(const GridSpec &grid, std::span<const Complex> values,
                       double h1) {
  if (!(h1 > 0.0))
    return 0.0;
  const int d = grid.d;
  const double p = 2.0 + 4.0 / d;
  double num = std::pow(lq_norm(grid, values, p), p);
  ComplexArray copy(values.begin(), values.end());
  double cube = sup_cube_l2(Field(grid, std::move(copy)), gn_cube_edge(grid));
  if (!(cube > 0.0))
    return 0.0;
  return num / (std::pow(cube, 4.0 / d) * h1 * h1);
}

} // namespace

// ---------------------------------------------------------------------------

SingularWeight SingularWeight::build(const GridSpec &grid, double s,
                                     OriginPolicy policy) {
  SingularWeight w;
  w.s = s;
  w.values = singular_weight(grid, s, policy);
  w.grad = singular_weight_gradient(grid, s, policy);
  return w;
}

SingularWeight SingularWeight::zero(const GridSpec &grid) {
  SingularWeight w;
  w.values.assign(grid.total(), 0.0);
  w.grad.assign(grid.d, RealArray(grid.total(), 0.0));
  return w;
}

MorawetzWeight::MorawetzWeight(const GridSpec &g, MorawetzKind kind,
                               double delta)
    : grid_(g), kind_(kind), delta_(delta) {
  const int d = g.d;
  const std::size_t total = g.total();
  a_.resize(total);
  lap_.resize(total);
  grad_.assign(d, RealArray(total));
  hess_.assign(d * (d + 1) / 2, RealArray(total));
  if (kind != MorawetzKind::abs)
    bilap_.resize(total);
  const double d2 = delta * delta;
  for (std::size_t f = 0; f < total; ++f) {
    NodeIndex idx = unflatten(g, f);
    double x[3] = {0.0, 0.0, 0.0};
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      x[a] = g.coord(idx.i[a]);
      r2 += x[a] * x[a];
    }
    switch (kind) {
    case MorawetzKind::quadratic:
      a_[f] = r2;
      for (int j = 0; j < d; ++j) {
        grad_[j][f] = 2.0 * x[j];
        for (int k = j; k < d; ++k)
          hess_[hess_index(d, j, k)][f] = j == k ? 2.0 : 0.0;
      }
      lap_[f] = 2.0 * d;
      bilap_[f] = 0.0;
      break;
    case MorawetzKind::abs: {
      double r = std::sqrt(r2);
      a_[f] = r;
      for (int j = 0; j < d; ++j) {
        grad_[j][f] = x[j] / r;
        for (int k = j; k < d; ++k)
          hess_[hess_index(d, j, k)][f] =
              ((j == k ? 1.0 : 0.0) - x[j] * x[k] / r2) / r;
      }
      lap_[f] = (d - 1) / r;
      break;
    }
    case MorawetzKind::smoothed_abs: {
      double s2 = d2 + r2;
      double rho = std::sqrt(s2);
      double rho3 = rho * s2;
      a_[f] = rho;
      for (int j = 0; j < d; ++j) {
        grad_[j][f] = x[j] / rho;
        for (int k = j; k < d; ++k)
          hess_[hess_index(d, j, k)][f] =
              (j == k ? 1.0 / rho : 0.0) - x[j] * x[k] / rho3;
      }
      lap_[f] = (d - 1) / rho + d2 / rho3;
      double rho5 = rho3 * s2, rho7 = rho5 * s2;
      bilap_[f] = (d - 1) * (3 - d) / rho3 + (18.0 - 6.0 * d) * d2 / rho5 -
                  15.0 * d2 * d2 / rho7;
      break;
    }
    }
  }
}

MorawetzWeight MorawetzWeight::abs(const GridSpec &grid) {
  if (!grid.offset)
    throw ValidationError("the |x| weight needs an offset grid");
  return MorawetzWeight(grid, MorawetzKind::abs, 0.0);
}

MorawetzWeight MorawetzWeight::quadratic(const GridSpec &grid) {
  return MorawetzWeight(grid, MorawetzKind::quadratic, 0.0);
}

MorawetzWeight MorawetzWeight::smoothed_abs(const GridSpec &grid, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw ValidationError("smoothing length must be positive");
  return MorawetzWeight(grid, MorawetzKind::smoothed_abs, delta);
}

std::string MorawetzWeight::name() const {
  switch (kind_) {
  case MorawetzKind::abs:
    return "abs";
  case MorawetzKind::quadratic:
    return "quadratic";
  case MorawetzKind::smoothed_abs:
    return "smoothed_abs";
  }
  return "unknown";
}

const RealArray &MorawetzWeight::hessian(int j, int k) const {
  return hess_[hess_index(grid_.d, j, k)];
}

const RealArray &MorawetzWeight::bilaplacian() const {
  if (kind_ == MorawetzKind::abs)
    throw ValidationError("the |x| weight has a distributional bilaplacian");
  return bilap_;
}

// ---------------------------------------------------------------------------

double mass(const Field &field) {
  double s = 0.0;
  for (const Complex &z : field.values())
    s += std::norm(z);
  return s * field.grid().cell_volume();
}

EnergyParts energy_parts(const Field &field, const Params &params,
                         const RealArray &weight) {
  const GridSpec &g = field.grid();
  if (weight.size() != field.size())
    throw ValidationError("weight size does not match the field");
  EnergyParts e;
  e.kinetic = 0.5 * gradient_l2_squared(g, field.values());
  const double alpha = params.alpha_value();
  RealArray power = modulus_power(field.values(), alpha + 2.0);
  e.potential_term =
      -params.mu / (alpha + 2.0) * weighted_power_sum(g, weight, power);
  e.energy = e.kinetic + e.potential_term;
  return e;
}

double energy(const Field &field, const Params &params,
              const RealArray &weight) {
  return energy_parts(field, params, weight).energy;
}

double morawetz_action(const Field &field, const MorawetzWeight &weight) {
  if (!(weight.grid() == field.grid()))
    throw ValidationError("Morawetz weight and field live on different grids");
  return action_sum(field.grid(), field.values(), gradient(field), weight);
}

double morawetz_rhs(const Field &field, const MorawetzWeight &weight,
                    const Params &params, const SingularWeight &b_weight) {
  if (!weight.has_bilaplacian())
    throw ValidationError(
        "Morawetz right-hand side needs a weight with a classical bilaplacian");
  if (!(weight.grid() == field.grid()))
    throw ValidationError("Morawetz weight and field live on different grids");
  RealArray power = modulus_power(field.values(), params.alpha_value() + 2.0);
  return rhs_sum(field.grid(), field.values(), gradient(field), power, weight,
                 params, b_weight);
}

double momentum_bracket_residual(const Field &field, const Params &params,
                                 const SingularWeight &b_weight) {
  const GridSpec &g = field.grid();
  const int d = g.d;
  const std::size_t total = field.size();
  const double alpha = params.alpha_value();
  const auto &u = field.values();

  ComplexArray G(total);
  RealArray P(total);
  for (std::size_t f = 0; f < total; ++f) {
    double r2 = std::norm(u[f]);
    double ra = std::pow(r2, 0.5 * alpha);
    G[f] = ra * u[f];
    P[f] = ra * r2;
  }

  std::vector<ComplexArray> du = gradient(g, u);
  std::vector<ComplexArray> dG, dP;
  const bool polynomial = params.alpha.is_finite() &&
                          params.alpha.value().get_den() == 1 &&
                          params.alpha.value().get_num() % 2 == 0;
  if (polynomial) {
    dG = gradient(g, G);
    ComplexArray Pc(P.begin(), P.end());
    dP = gradient(g, Pc);
  } else {
    dG.assign(d, ComplexArray(total));
    dP.assign(d, ComplexArray(total));
    for (std::size_t f = 0; f < total; ++f) {
      double r2 = std::norm(u[f]);
      double ra = std::pow(r2, 0.5 * alpha);
      double ra2 = r2 > 0.0 ? ra / r2 : 0.0;
      for (int a = 0; a < d; ++a) {
        double re = (std::conj(u[f]) * du[a][f]).real();
        dG[a][f] = ra * du[a][f] + alpha * ra2 * re * u[f];
        dP[a][f] = (alpha + 2.0) * ra * re;
      }
    }
  }

  double worst = 0.0;
  for (std::size_t f = 0; f < total; ++f) {
    const double W = b_weight.values[f];
    const Complex N = W * G[f];
    double acc = 0.0;
    for (int a = 0; a < d; ++a) {
      const double gW = b_weight.grad[a][f];
      Complex dN = gW * G[f] + W * dG[a][f];
      double lhs = (N * std::conj(du[a][f]) - u[f] * std::conj(dN)).real();
      double rhs = -(alpha / (alpha + 2.0)) * (gW * P[f] + W * dP[a][f].real()) -
                   (2.0 / (alpha + 2.0)) * gW * P[f];
      acc += (lhs - rhs) * (lhs - rhs);
    }
    worst = std::max(worst, std::sqrt(acc));
  }
  return worst;
}

double morawetz_integrand(const Field &field, const Params &params,
                          const RealArray &weight_b_plus_1) {
  RealArray power = modulus_power(field.values(), params.alpha_value() + 2.0);
  return weighted_power_sum(field.grid(), weight_b_plus_1, power);
}

double nakanishi_integrand(const Field &field, double t, const Params &params,
                           const RealArray &b_weight) {
  RealArray power = modulus_power(field.values(), params.alpha_value() + 2.0);
  const GridSpec &g = field.grid();
  RealArray r2(g.total());
  for (std::size_t f = 0; f < r2.size(); ++f)
    r2[f] = radius_squared(g, f);
  return nakanishi_sum(g, t, b_weight, power, r2);
}

double gn_cube_edge(const GridSpec &grid) {
  const double h = grid.h();
  int cells = std::max(1, static_cast<int>(std::lround(1.0 / h)));
  cells = std::min(cells, grid.n);
  return cells * h;
}

double gn_ratio(const Field &field) {
  return gn_ratio_values(field.grid(), field.values(), h1_norm(field));
}

SpacetimeIntegral
morawetz_spacetime_integral(const std::vector<DiagnosticSample> &series,
                            const Params &params, double morawetz_abs_initial) {
  SpacetimeIntegral out;
  const double alpha = params.alpha_value();
  const double b = params.b_value();
  const double denom = 2.0 * alpha * (params.d - 1) + 4.0 * b;
  if (!(denom > 0.0))
    throw ValidationError("Morawetz ceiling undefined for these parameters");
  const double factor = (alpha + 2.0) / denom;
  double running = 0.0, sup = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const DiagnosticSample &s = series[i];
    if (std::isnan(s.morawetz_integrand))
      throw ValidationError("series lacks the Morawetz integrand at t = " +
                            std::to_string(s.t));
    if (i > 0)
      running += 0.5 * std::abs(s.t - series[i - 1].t) *
                 (s.morawetz_integrand + series[i - 1].morawetz_integrand);
    sup = std::max(sup, std::sqrt(s.mass) * std::sqrt(2.0 * s.kinetic));
    out.times.push_back(s.t);
    out.running.push_back(running);
    out.running_ceiling.push_back((2.0 * sup + std::abs(morawetz_abs_initial)) *
                                  factor);
  }
  out.integral = running;
  out.ceiling = out.running_ceiling.empty() ? 0.0 : out.running_ceiling.back();
  return out;
}

DecayFit decay_fit(const std::vector<DiagnosticSample> &series,
                   const ExtRational &q, std::size_t q_index, int d,
                   double t_begin, double t_end) {
  ExponentReport crit = critical_exponents(d, ExtRational(1));
  if (!(q > ExtRational(2)) || !(q < crit.two_star))
    throw ValidationError("decay exponent q = " + q.str() +
                          " must lie strictly between 2 and " +
                          crit.two_star.str());
  std::vector<double> xs, ys;
  for (const DiagnosticSample &s : series) {
    double at = std::abs(s.t);
    if (at <= 0.0 || at < t_begin || at > t_end)
      continue;
    if (q_index >= s.lq_norms.size() || !(s.lq_norms[q_index] > 0.0))
      continue;
    xs.push_back(std::log(at));
    ys.push_back(std::log(s.lq_norms[q_index]));
  }
  if (xs.size() < 5)
    throw WindowTooShort("decay fit needs at least 5 trusted samples, got " +
                         std::to_string(xs.size()));
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  double mx = sx / m, my = sy / m, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0))
    throw WindowTooShort("decay fit window has no spread in log t");
  DecayFit fit;
  fit.fitted = sxy / sxx;
  fit.theoretical = -d * (0.5 - 1.0 / q.to_double());
  fit.samples = static_cast<int>(xs.size());
  return fit;
}

// ---------------------------------------------------------------------------

DiagnosticsEngine::DiagnosticsEngine(const GridSpec &grid, const Params &params,
                                     bool free_evolution, Options options)
    : grid_(grid), params_(params), options_(std::move(options)),
      weight_(free_evolution ? SingularWeight::zero(grid)
                             : SingularWeight::build(grid, params.b_value())),
      weight_b_(singular_weight(grid, params.b_value())),
      weight_b1_(singular_weight(grid, params.b_value() + 1.0)),
      abs_(MorawetzWeight::abs(grid)),
      quadratic_(MorawetzWeight::quadratic(grid)),
      smoothed_(MorawetzWeight::smoothed_abs(
          grid, options_.delta > 0.0 ? options_.delta : 2.0 * grid.h())) {
  const std::size_t total = grid.total();
  edge_mask_.assign(total, 0);
  radius2_.resize(total);
  const double limit = 0.5 * grid.L - options_.wrap_slab * grid.L;
  for (std::size_t f = 0; f < total; ++f) {
    NodeIndex idx = unflatten(grid, f);
    radius2_[f] = radius_squared(grid, f);
    for (int a = 0; a < grid.d; ++a)
      if (std::abs(grid.coord(idx.i[a])) > limit)
        edge_mask_[f] = 1;
  }
}

std::pair<double, double>
DiagnosticsEngine::actions(std::span<const Complex> values) const {
  auto grad = gradient(grid_, values);
  return {action_sum(grid_, values, grad, quadratic_),
          action_sum(grid_, values, grad, smoothed_)};
}

double DiagnosticsEngine::morawetz_abs(std::span<const Complex> values) const {
  return action_sum(grid_, values, gradient(grid_, values), abs_);
}

DiagnosticSample DiagnosticsEngine::sample(std::span<const Complex> values,
                                           double t, long step) const {
  DiagnosticSample s;
  s.t = t;
  s.step = step;
  const double vol = grid_.cell_volume();
  const double alpha = params_.alpha_value();

  double m = 0.0, edge = 0.0;
  for (std::size_t f = 0; f < values.size(); ++f) {
    double p = std::norm(values[f]);
    m += p;
    if (edge_mask_[f])
      edge += p;
  }
  s.mass = m * vol;
  s.edge_mass = m > 0.0 ? edge / m : 0.0;

  auto sp = Spectral::get(grid_);
  ComplexArray hat(values.begin(), values.end());
  sp->forward(hat.data());
  const RealArray &k2 = sp->k_squared();
  double spec_mass = 0.0, spec_grad = 0.0;
  for (std::size_t f = 0; f < hat.size(); ++f) {
    double p = std::norm(hat[f]);
    spec_mass += p;
    spec_grad += k2[f] * p;
  }
  const double spec_scale = vol / static_cast<double>(grid_.total());
  s.kinetic = 0.5 * spec_grad * spec_scale;
  s.h1 = std::sqrt((spec_mass + spec_grad) * spec_scale);

  RealArray power = modulus_power(values, alpha + 2.0);
  s.potential_term = -params_.mu / (alpha + 2.0) *
                     weighted_power_sum(grid_, weight_.values, power);
  s.energy = s.kinetic + s.potential_term;

  if (options_.lq_norms)
    for (const ExtRational &q : options_.lq)
      s.lq_norms.push_back(lq_norm(
          grid_, values,
          q.is_infinite() ? std::numeric_limits<double>::infinity()
                          : q.to_double()));
  else
    s.lq_norms.assign(options_.lq.size(), kNaN);

  if (options_.morawetz) {
    auto grad = gradient_from_hat(grid_, hat);
    s.morawetz_abs = action_sum(grid_, values, grad, abs_);
    s.morawetz_quadratic = action_sum(grid_, values, grad, quadratic_);
    s.morawetz_smoothed = action_sum(grid_, values, grad, smoothed_);
    s.rhs_quadratic =
        rhs_sum(grid_, values, grad, power, quadratic_, params_, weight_);
    s.rhs_smoothed =
        rhs_sum(grid_, values, grad, power, smoothed_, params_, weight_);
    s.morawetz_integrand = weighted_power_sum(grid_, weight_b1_, power);
  }
  if (options_.nakanishi) {
    s.nakanishi_integrand = nakanishi_sum(grid_, t, weight_b_, power, radius2_);
  }
  if (options_.gn)
    s.gn_ratio = gn_ratio_values(grid_, values, s.h1);
  return s;
}

} // namespace inls
