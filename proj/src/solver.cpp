#include "inls/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace inls {

const char *initial_kind_name(InitialKind k) {
  switch (k) {
  case InitialKind::gaussian:
    return "gaussian";
  case InitialKind::modulated_gaussian:
    return "modulated-gaussian";
  case InitialKind::random:
    return "random";
  }
  return "unknown";
}

InitialKind parse_initial_kind(const std::string &name) {
  if (name == "gaussian")
    return InitialKind::gaussian;
  if (name == "modulated-gaussian" || name == "modulated_gaussian")
    return InitialKind::modulated_gaussian;
  if (name == "random")
    return InitialKind::random;
  throw ValidationError("unknown initial data kind '" + name +
                        "' (expected gaussian, modulated-gaussian or random)");
}

Field make_initial(const GridSpec &grid, const InitialData &init) {
  if (!std::isfinite(init.amplitude))
    throw ValidationError("initial amplitude must be finite");
  const bool envelope = init.kind != InitialKind::random || init.width > 0.0;
  if (init.kind != InitialKind::random && !(init.width > 0.0))
    throw ValidationError("gaussian width must be positive");
  const std::size_t total = grid.total();
  ComplexArray values(total);
  const double inv_w2 = envelope ? 1.0 / (init.width * init.width) : 0.0;

  ComplexArray base;
  if (init.kind == InitialKind::random) {
    if (!(init.cutoff > 0.0))
      throw ValidationError("random data cutoff must be positive");
    base = band_limited_random(grid, init.cutoff, init.seed).take_values();
  }
  for (std::size_t f = 0; f < total; ++f) {
    NodeIndex idx = unflatten(grid, f);
    double r2 = 0.0, phase = 0.0;
    for (int a = 0; a < grid.d; ++a) {
      double x = grid.coord(idx.i[a]);
      r2 += x * x;
      phase += init.velocity[a] * x;
    }
    double env = std::exp(-r2 * inv_w2);
    switch (init.kind) {
    case InitialKind::gaussian:
      values[f] = init.amplitude * env;
      break;
    case InitialKind::modulated_gaussian:
      values[f] = init.amplitude * env * std::polar(1.0, phase);
      break;
    case InitialKind::random:
      values[f] = env * base[f];
      break;
    }
  }
  if (init.kind == InitialKind::random) {
    double peak = 0.0;
    for (const Complex &z : values)
      peak = std::max(peak, std::abs(z));
    if (peak > 0.0)
      for (Complex &z : values)
        z *= init.amplitude / peak;
  }
  return Field(grid, std::move(values));
}

// ---------------------------------------------------------------------------
// Substep kernels

namespace {

void apply_phase(ComplexArray &u, double tau, int mu, const RealArray &weight,
                 const ModulusPower &power) {
  const double c = mu * tau;
  for (std::size_t f = 0; f < u.size(); ++f) {
    double w = weight[f];
    if (w == 0.0)
      continue;
    const double theta = c * w * power(std::norm(u[f]));
    const double cs = std::cos(theta), sn = std::sin(theta);
    const double re = u[f].real(), im = u[f].imag();
    u[f] = Complex(re * cs - im * sn, re * sn + im * cs);
  }
}

class FreePropagator {
public:
  FreePropagator(const GridSpec &grid, double t)
      : sp_(Spectral::get(grid)), symbol_(grid.total()) {
    const RealArray &k2 = sp_->k_squared();
    for (std::size_t f = 0; f < k2.size(); ++f)
      symbol_[f] = std::polar(1.0, -k2[f] * t);
  }
  void apply(ComplexArray &u) const {
    sp_->forward(u.data());
    for (std::size_t f = 0; f < u.size(); ++f) {
      const double re = u[f].real(), im = u[f].imag();
      const double sr = symbol_[f].real(), si = symbol_[f].imag();
      u[f] = Complex(re * sr - im * si, re * si + im * sr);
    }
    sp_->inverse(u.data());
  }

private:
  std::shared_ptr<const Spectral> sp_;
  ComplexArray symbol_;
};

void check_weight(const Field &field, const RealArray &weight) {
  if (weight.size() != field.size())
    throw ValidationError("weight size does not match the field");
}

} // namespace

Field free_propagate(const Field &field, double t) {
  if (t == 0.0)
    return field;
  ComplexArray u = field.values();
  FreePropagator(field.grid(), t).apply(u);
  return Field(field.grid(), std::move(u));
}

Field nonlinear_phase_step(const Field &field, double dt, const Params &params,
                           const RealArray &weight) {
  check_weight(field, weight);
  ComplexArray u = field.values();
  apply_phase(u, dt, params.mu, weight, ModulusPower(params.alpha_value()));
  return Field(field.grid(), std::move(u));
}

Field strang_step(const Field &field, double dt, const Params &params,
                  const RealArray &weight) {
  check_weight(field, weight);
  ModulusPower power(params.alpha_value());
  ComplexArray u = field.values();
  apply_phase(u, 0.5 * dt, params.mu, weight, power);
  FreePropagator(field.grid(), dt).apply(u);
  apply_phase(u, 0.5 * dt, params.mu, weight, power);
  if (!all_finite(u))
    throw StepBlowup(0, nullptr);
  return Field(field.grid(), std::move(u));
}

// ---------------------------------------------------------------------------
// Configuration

long RunConfig::steps() const {
  if (t_end == 0.0)
    return 0;
  return std::lround(t_end / dt);
}

double RunConfig::smoothing_length() const {
  return morawetz_delta > 0.0 ? morawetz_delta : 2.0 * grid.h();
}

bool RunConfig::wants(const std::string &group) const {
  if (diagnostics.empty())
    return true;
  return std::find(diagnostics.begin(), diagnostics.end(), group) !=
         diagnostics.end();
}

void RunConfig::validate() const {
  params.validate();
  params.validate_simulable();
  make_grid(grid.d, grid.L, grid.n, grid.offset);
  if (grid.d != params.d)
    throw ValidationError("grid dimension " + std::to_string(grid.d) +
                          " differs from params dimension " +
                          std::to_string(params.d));
  if (!grid.offset)
    throw ValidationError("runs need an offset grid so no node sits at the "
                          "origin of the singular weight");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ValidationError("dt must be positive and finite");
  if (!(t_end >= 0.0) || !std::isfinite(t_end))
    throw ValidationError("t_end must be nonnegative and finite");
  if (sample_every < 1)
    throw ValidationError("sample_every must be a positive integer");
  if (t_end > 0.0) {
    if (dt > t_end)
      throw ValidationError("dt must not exceed t_end");
    if (sample_every * dt > t_end * (1.0 + 1e-12))
      throw ValidationError("sample_every * dt must not exceed t_end");
    double ratio = t_end / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio))
      throw ValidationError("t_end must be an integer multiple of dt");
  }
  if (direction != 1 && direction != -1)
    throw ValidationError("direction must be +1 or -1");
  for (const std::string &g : diagnostics)
    if (std::find(diagnostic_groups().begin(), diagnostic_groups().end(), g) ==
        diagnostic_groups().end())
      throw ValidationError("unknown diagnostic group '" + g + "'");
  for (const ExtRational &q : lq)
    if (q < ExtRational(1))
      throw ValidationError("L^q exponent must be >= 1, got " + q.str());
  for (const StrichartzPair &pr : pairs)
    if (!is_admissible(pr.p, pr.q, grid.d))
      throw ValidationError("pair (" + pr.p.str() + ", " + pr.q.str() +
                            ") is not Schrodinger admissible in d = " +
                            std::to_string(grid.d));
  if (checkpoint_every < 0)
    throw ValidationError("checkpoint_every must be nonnegative");
  if (!(t_transient >= 0.0))
    throw ValidationError("t_transient must be nonnegative");
  if (!(wrap_tol > 0.0 && wrap_tol < 1.0))
    throw ValidationError("wrap_tol must lie in (0, 1)");
  if (!(wrap_slab > 0.0 && wrap_slab < 0.5))
    throw ValidationError("wrap_slab must lie in (0, 1/2)");
  if (!(morawetz_delta >= 0.0) || !std::isfinite(morawetz_delta))
    throw ValidationError("morawetz_delta must be nonnegative");
  if (!std::isfinite(initial.amplitude))
    throw ValidationError("initial amplitude must be finite");
  if (initial.kind != InitialKind::random && !(initial.width > 0.0))
    throw ValidationError("gaussian width must be positive");
  if (initial.kind == InitialKind::random && !(initial.cutoff > 0.0))
    throw ValidationError("random data cutoff must be positive");
}

bool RunOutput::in_trusted_window(double t) const {
  double at = std::abs(t);
  return at >= trusted_begin() && at <= trusted_end();
}

// ---------------------------------------------------------------------------
// Time stepping

namespace {

double exponent_value(const ExtRational &q) {
  return q.is_infinite() ? std::numeric_limits<double>::infinity()
                         : q.to_double();
}

// Running L^p_t L^q_x norms by the trapezoid rule over samples.
class StrichartzTracker {
public:
  StrichartzTracker(const GridSpec &grid, std::vector<StrichartzPair> pairs)
      : grid_(grid), pairs_(std::move(pairs)), acc_(pairs_.size(), 0.0),
        prev_(pairs_.size(), 0.0) {}

  std::vector<double> update(std::span<const Complex> u, double t) {
    std::vector<double> out(pairs_.size());
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      double nq = lq_norm(grid_, u, exponent_value(pairs_[i].q));
      if (pairs_[i].p.is_infinite()) {
        acc_[i] = std::max(acc_[i], nq);
        out[i] = acc_[i];
        continue;
      }
      double p = pairs_[i].p.to_double();
      double cur = std::pow(nq, p);
      if (started_)
        acc_[i] += 0.5 * std::abs(t - t_prev_) * (cur + prev_[i]);
      prev_[i] = cur;
      out[i] = std::pow(acc_[i], 1.0 / p);
    }
    started_ = true;
    t_prev_ = t;
    return out;
  }

private:
  GridSpec grid_;
  std::vector<StrichartzPair> pairs_;
  std::vector<double> acc_, prev_;
  double t_prev_ = 0.0;
  bool started_ = false;
};

} // namespace

RunOutput evolve(const RunConfig &config) {
  config.validate();
  const GridSpec &grid = config.grid;
  const Params &params = config.params;
  const long steps = config.steps();
  const double h = config.direction * config.dt;
  const int every = config.sample_every;

  DiagnosticsEngine::Options opts;
  opts.lq = config.lq;
  opts.lq_norms = config.wants("lq");
  opts.morawetz = config.wants("morawetz");
  opts.nakanishi = config.wants("nakanishi");
  opts.gn = config.wants("gn");
  opts.delta = config.smoothing_length();
  opts.wrap_slab = config.wrap_slab;
  DiagnosticsEngine engine(grid, params, config.free_evolution, opts);
  const RealArray &weight = engine.weight().values;
  const bool fd = config.wants("morawetz_fd");
  const bool strichartz = config.wants("strichartz");

  auto out = std::make_shared<RunOutput>();
  out->config = config;
  out->regime = classify_regime(params);
  out->step_seconds.reserve(static_cast<std::size_t>(steps));

  ModulusPower power(params.alpha_value());
  FreePropagator propagator(grid, h);
  StrichartzTracker tracker(grid, config.pairs);

  ComplexArray u = make_initial(grid, config.initial).take_values();
  bool wrap_found = false;
  double t_wrap = 0.0;
  double last_t = 0.0;
  // Actions at the last two observed steps, keyed by step index.
  struct Observed {
    long step = -1;
    std::pair<double, double> acts{kNaN, kNaN};
  };
  Observed history[2];

  auto record = [&](long s) {
    const double t = s * h;
    DiagnosticSample sample = engine.sample(u, t, s);
    if (strichartz)
      sample.strichartz = tracker.update(u, t);
    else
      sample.strichartz.assign(config.pairs.size(), kNaN);
    if (!wrap_found && sample.edge_mass > config.wrap_tol) {
      wrap_found = true;
      t_wrap = std::abs(t);
    }
    out->series.push_back(std::move(sample));
  };
  auto checkpoint = [&](long s) {
    const double t = s * h;
    if (config.checkpoint_every > 0 && s % config.checkpoint_every == 0 &&
        std::abs(t) <= config.checkpoint_t_max * (1.0 + 1e-12))
      out->checkpoints.push_back(Checkpoint{t, s, Field(grid, u)});
  };

  out->morawetz_abs_initial = engine.morawetz_abs(u);
  record(0);
  checkpoint(0);

  bool pending_half = false;
  for (long s = 1; s <= steps; ++s) {
    auto start = std::chrono::steady_clock::now();
    apply_phase(u, pending_half ? h : 0.5 * h, params.mu, weight, power);
    propagator.apply(u);
    pending_half = true;

    const bool is_sample = s % every == 0 || s == steps;
    const bool before_sample = fd && (s + 1) % every == 0 && s + 1 <= steps;
    const bool after_sample = fd && (s - 1) % every == 0 && s - 1 >= 1;
    const bool is_checkpoint =
        config.checkpoint_every > 0 && s % config.checkpoint_every == 0;
    if (is_sample || before_sample || after_sample || is_checkpoint ||
        s == steps) {
      apply_phase(u, 0.5 * h, params.mu, weight, power);
      pending_half = false;
    }
    out->step_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count());

    if (!all_finite(u)) {
      out->t_wrap = wrap_found ? t_wrap : last_t;
      out->wrap_reached = wrap_found;
      throw StepBlowup(s, out);
    }
    if (pending_half)
      continue;

    std::pair<double, double> acts{kNaN, kNaN};
    if (after_sample || before_sample)
      acts = engine.actions(u);
    if (after_sample) {
      // Complete the centered difference of the sample at step s - 1.
      DiagnosticSample &prev = out->series.back();
      for (const Observed &o : history)
        if (o.step == s - 2 && prev.step == s - 1) {
          prev.fd_quadratic = (acts.first - o.acts.first) / (2.0 * h);
          prev.fd_smoothed = (acts.second - o.acts.second) / (2.0 * h);
        }
    }
    if (before_sample || after_sample) {
      history[0] = history[1];
      history[1] = Observed{s, acts};
    }
    if (is_sample) {
      record(s);
      last_t = std::abs(s * h);
    }
    checkpoint(s);
  }

  out->final_field = Field(grid, std::move(u));
  out->wrap_reached = wrap_found;
  out->t_wrap = wrap_found ? t_wrap : std::abs(steps * h);
  return std::move(*out);
}

// ---------------------------------------------------------------------------
// Series layout

namespace {

std::string exponent_tag(const ExtRational &q) {
  std::string s = q.str();
  if (s.size() > 2 && s.substr(s.size() - 2) == "/1")
    s.resize(s.size() - 2);
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

} // namespace

std::vector<std::string> series_columns(const RunConfig &config) {
  std::vector<std::string> cols{"t", "step", "mass", "energy", "kinetic",
                                "potential_term", "h1"};
  for (const ExtRational &q : config.lq)
    cols.push_back("lq_" + exponent_tag(q));
  for (const char *c :
       {"morawetz_abs", "morawetz_quadratic", "morawetz_smoothed",
        "rhs_quadratic", "rhs_smoothed", "fd_quadratic", "fd_smoothed",
        "morawetz_integrand", "nakanishi_integrand", "gn_ratio", "edge_mass"})
    cols.emplace_back(c);
  for (const StrichartzPair &p : config.pairs)
    cols.push_back("strichartz_" + exponent_tag(p.p) + "_" + exponent_tag(p.q));
  return cols;
}

std::vector<double> series_row(const RunConfig &config,
                               const DiagnosticSample &s) {
  std::vector<double> row{s.t,       static_cast<double>(s.step),
                          s.mass,    s.energy,
                          s.kinetic, s.potential_term,
                          s.h1};
  for (std::size_t i = 0; i < config.lq.size(); ++i)
    row.push_back(i < s.lq_norms.size() ? s.lq_norms[i] : kNaN);
  for (double v : {s.morawetz_abs, s.morawetz_quadratic, s.morawetz_smoothed,
                   s.rhs_quadratic, s.rhs_smoothed, s.fd_quadratic,
                   s.fd_smoothed, s.morawetz_integrand, s.nakanishi_integrand,
                   s.gn_ratio, s.edge_mass})
    row.push_back(v);
  for (std::size_t i = 0; i < config.pairs.size(); ++i)
    row.push_back(i < s.strichartz.size() ? s.strichartz[i] : kNaN);
  return row;
}

} // namespace inls
