// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--configs DIR] [--only AC3,AC5] [--report]
//
// Exit status is 1 when any criterion fails, unless --report is given.

#include "inls/config.hpp"
#include "inls/outputs.hpp"
#include "inls/scattering.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#ifndef INLS_CONFIG_DIR
#define INLS_CONFIG_DIR "configs"
#endif

using namespace inls;
using Q = ExtRational;

namespace {

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}
std::string sci(double v) { return fmt("%.3g", v); }

int failures = 0;

void report(const std::string &id, bool pass, const std::string &detail) {
  std::printf("%s %s  %s\n", id.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass)
    ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Drift {
  double mass = 0.0, energy = 0.0;
};

Drift drifts(const std::vector<DiagnosticSample> &s) {
  Drift d;
  for (const auto &x : s) {
    d.mass = std::max(d.mass, std::abs(x.mass - s[0].mass) / s[0].mass);
    d.energy = std::max(d.energy, std::abs(x.energy - s[0].energy) / std::abs(s[0].energy));
  }
  return d;
}

std::vector<DiagnosticSample> box(const RunOutput &run) {
  std::vector<DiagnosticSample> out;
  for (const auto &x : run.series)
    if (std::abs(x.t) <= run.t_wrap * (1.0 + 1e-12))
      out.push_back(x);
  return out;
}

class Runs {
public:
  explicit Runs(fs::path dir) : dir_(std::move(dir)) {}

  RunConfig config(const std::string &name) const {
    return parse_config(read_text_file(dir_ / (name + ".ini")));
  }

  const RunOutput &get(const std::string &name) {
    auto it = cache_.find(name);
    if (it != cache_.end())
      return it->second;
    auto t0 = std::chrono::steady_clock::now();
    RunOutput out = evolve(config(name));
    std::fprintf(stderr, "  [%s: %.1f s]\n", name.c_str(), seconds_since(t0));
    return cache_.emplace(name, std::move(out)).first->second;
  }

  // Same run at dt/2 with matching sample times, conserved quantities only.
  const RunOutput &halved(const std::string &name) {
    std::string key = name + "@half";
    auto it = cache_.find(key);
    if (it != cache_.end())
      return it->second;
    RunConfig c = config(name);
    c.dt /= 2;
    c.sample_every *= 2;
    c.diagnostics = {"lq"};
    c.checkpoint_every = 0;
    auto t0 = std::chrono::steady_clock::now();
    RunOutput out = evolve(c);
    std::fprintf(stderr, "  [%s: %.1f s]\n", key.c_str(), seconds_since(t0));
    return cache_.emplace(key, std::move(out)).first->second;
  }

private:
  fs::path dir_;
  std::map<std::string, RunOutput> cache_;
};

const char *kStandard[] = {"standard_d1", "standard_d2", "standard_d3"};

// --- AC1 --------------------------------------------------------------------

void ac1() {
  auto t0 = std::chrono::steady_clock::now();
  int agree = 0, total = 0, certified = 0;
  std::string first_bad;
  for (int d = 3; d <= 6; ++d)
    for (long bn = 1; bn <= 7; ++bn) {
      Q b = Q::fraction(bn, 4);
      ExponentReport ce = critical_exponents(d, b);
      for (long k = 1; k <= 5; ++k) {
        Params p;
        p.d = d;
        p.b = b;
        p.alpha = ce.alpha_star + (ce.alpha_sup - ce.alpha_star) * Q::fraction(k, 6);
        bool flag = classify_regime(p).flags.scattering;
        bool ok;
        try {
          ExponentCertificate cert = scattering_certificate(p);
          ok = flag && cert.all_hold();
          ++certified;
        } catch (const RegimeError &) {
          ok = !flag;
        } catch (const SearchExhausted &) {
          ok = false;
        }
        ++total;
        if (ok)
          ++agree;
        else if (first_bad.empty())
          first_bad = "d=" + std::to_string(d) + " b=" + b.str() + " alpha=" + p.alpha.str();
      }
    }
  Params w;
  w.d = 4;
  w.b = Q(1);
  w.alpha = Q::fraction(3, 4);
  ExponentCertificate c = scattering_certificate(w, Q::fraction(1, 10));
  bool worked = c.q1 == Q::fraction(113, 30) && c.p1 == Q::fraction(113, 53) &&
                c.theta1 == Q::fraction(7, 53) && c.q2 == Q::fraction(107, 30) &&
                c.p2 == Q::fraction(107, 47) && c.theta2 == Q::fraction(13, 47) &&
                c.all_hold();
  double secs = seconds_since(t0);
  std::string detail = std::to_string(agree) + "/" + std::to_string(total) +
                       " grid points agree (" + std::to_string(certified) +
                       " certified); worked certificate q1=" + c.q1.str() +
                       " p1=" + c.p1.str() + " theta1=" + c.theta1.str() +
                       " q2=" + c.q2.str() + " p2=" + c.p2.str() +
                       " theta2=" + c.theta2.str() + "; " + fmt("%.3f", secs) + " s";
  if (!first_bad.empty())
    detail += "; first disagreement " + first_bad;
  report("AC1", agree == total && worked && secs < 1.0, detail);
}

// --- AC2 --------------------------------------------------------------------

void ac2(Runs &runs) {
  bool pass = true;
  std::string detail;
  for (const char *name : kStandard) {
    Drift a = drifts(runs.get(name).series);
    Drift b = drifts(runs.halved(name).series);
    double ratio = a.energy / b.energy;
    bool ok = a.mass < 1e-10 && a.energy < 1e-5 && ratio >= 3.0;
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : "; ") + name + ": mass " + sci(a.mass) +
              " energy " + sci(a.energy) + " halved " + sci(b.energy) + " ratio " +
              fmt("%.2f", ratio) + (ok ? "" : " [fail]");
  }
  report("AC2", pass, detail + " (tol mass 1e-10, energy 1e-5, ratio >= 3)");
}

// --- AC3 --------------------------------------------------------------------

void ac3(Runs &runs) {
  bool pass = true;
  std::string detail;
  for (const char *name : {"standard_d1", "standard_d2"}) {
    const RunOutput &run = runs.get(name);
    double worst = 0.0, first = NAN, t_first = NAN;
    for (const auto &x : box(run)) {
      if (std::isnan(x.fd_quadratic))
        continue;
      double gap = std::abs(x.fd_quadratic - x.rhs_quadratic) / std::abs(x.rhs_quadratic);
      if (std::isnan(first)) {
        first = gap;
        t_first = x.t;
      }
      worst = std::max(worst, gap);
    }
    bool ok = worst < 1e-3;
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : "; ") + name + ": max gap " + sci(worst) +
              " over |t| <= " + fmt("%.3g", run.t_wrap) + ", " + sci(first) + " at t=" +
              fmt("%.3g", t_first) + (ok ? "" : " [fail]");
  }
  report("AC3", pass, detail + " (tol 1e-3)");
}

// --- AC4 --------------------------------------------------------------------

void ac4(Runs &runs) {
  bool pass = true;
  std::string detail;
  for (const char *name : kStandard) {
    RunConfig c = runs.config(name);
    SingularWeight w = SingularWeight::build(c.grid, c.params.b_value());
    const double alpha = c.params.alpha_value();
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Field u = band_limited_random(c.grid, 4.0, seed);
      double peak = lq_norm(u, INFINITY);
      worst = std::max(worst, momentum_bracket_residual(u, c.params, w) /
                                  std::pow(peak, alpha + 2.0));
    }
    pass = pass && worst < 1e-8;
    detail += std::string(detail.empty() ? "" : "; ") + "d=" + std::to_string(c.grid.d) +
              " alpha=" + c.params.alpha.str() + ": " + sci(worst);
  }
  report("AC4", pass, detail + " (20 fields each, scaled by peak^(alpha+2), tol 1e-8)");
}

// --- AC5 --------------------------------------------------------------------

void ac5(Runs &runs) {
  const RunOutput &run = runs.get("standard_d3");
  const auto &s = run.series;
  double min_integrand = INFINITY;
  for (const auto &x : s)
    min_integrand = std::min(min_integrand, x.morawetz_integrand);
  SpacetimeIntegral si =
      morawetz_spacetime_integral(s, run.config.params, run.morawetz_abs_initial);
  double ceiling_ratio = 0.0;
  for (std::size_t i = 0; i < si.running.size(); ++i)
    ceiling_ratio = std::max(ceiling_ratio, si.running[i] / si.running_ceiling[i]);

  auto drop = [](const std::vector<DiagnosticSample> &v) {
    double scale = 0.0, worst = 0.0;
    for (const auto &x : v)
      scale = std::max(scale, std::abs(x.morawetz_smoothed));
    for (std::size_t i = 1; i < v.size(); ++i)
      worst = std::max(worst, v[i - 1].morawetz_smoothed - v[i].morawetz_smoothed);
    return scale > 0 ? worst / scale : 0.0;
  };
  double in_box = drop(box(run)), whole = drop(s);
  bool pass = min_integrand >= 0.0 && ceiling_ratio <= 1.0 && in_box <= 1e-6;
  report("AC5", pass,
         "min integrand " + sci(min_integrand) + " over " + std::to_string(s.size()) +
             " samples; max running integral / ceiling " + fmt("%.3f", ceiling_ratio) +
             "; smoothed action largest relative decrease " + sci(in_box) +
             " for |t| <= t_wrap=" + fmt("%.3g", run.t_wrap) + " (" + sci(whole) +
             " incl. post-wrap samples, tol 1e-6)");
}

// --- AC6 --------------------------------------------------------------------

void ac6(Runs &runs) {
  const RunOutput &run = runs.get("standard_d3");
  const RunConfig &c = run.config;
  std::size_t qi = 0;
  while (qi < c.lq.size() && !(c.lq[qi] == Q(4)))
    ++qi;
  if (qi == c.lq.size()) {
    report("AC6", false, "standard_d3 does not track the L^4 norm");
    return;
  }
  double l0 = run.series.front().lq_norms[qi], best = INFINITY, t_best = NAN;
  for (const auto &x : run.series)
    if (run.in_trusted_window(x.t) && x.lq_norms[qi] < best) {
      best = x.lq_norms[qi];
      t_best = x.t;
    }
  bool halved = best <= 0.5 * l0;

  const RunOutput &free_run = runs.get("free_d3");
  DecayFit fit = decay_fit(free_run.series, Q(4), qi, 3, free_run.trusted_begin(),
                           free_run.trusted_end());
  double rel = std::abs(fit.fitted - fit.theoretical) / std::abs(fit.theoretical);
  report("AC6", halved && rel <= 0.15,
         "L4 " + fmt("%.4f", l0) + " -> " + fmt("%.4f", best) + " at t=" +
             fmt("%.3g", t_best) + " in trusted window [" +
             fmt("%.3g", run.trusted_begin()) + ", " + fmt("%.3g", run.trusted_end()) +
             "] (need <= half); free control exponent " + fmt("%.4f", fit.fitted) +
             " vs " + fmt("%.4f", fit.theoretical) + " (" + fmt("%.1f", 100 * rel) +
             "%, tol 15%, " + std::to_string(fit.samples) + " samples)");
}

// --- AC7 --------------------------------------------------------------------

void ac7(Runs &runs) {
  const RunOutput &run = runs.get("standard_d3");
  ScatteringState st =
      extract_scattering_state(run.checkpoints, run.trusted_begin(), run.trusted_end());
  const auto &d = st.trusted_deltas;
  bool eventually = d.size() >= 4;
  for (std::size_t i = d.size() >= 3 ? d.size() - 3 : 0; eventually && i < d.size(); ++i)
    eventually = d[i].delta < d.front().delta;

  bool residual_down = true;
  for (std::size_t i = 1; i < st.records.size(); ++i)
    residual_down = residual_down && st.records[i].residual < st.records[i - 1].residual;

  const RunOutput &free_run = runs.get("free_d3");
  double free_worst = 0.0;
  for (const auto &x : cauchy_deltas(free_run.checkpoints))
    free_worst = std::max(free_worst, x.delta);

  std::string ds;
  for (const auto &x : d)
    ds += (ds.empty() ? "" : " ") + sci(x.delta);
  report("AC7", eventually && residual_down && free_worst < 1e-12,
         "trusted deltas [" + ds + "]; residual " + sci(st.records.front().residual) +
             " at t=" + fmt("%.3g", st.records.front().t) + " -> 0 at t_extract=" +
             fmt("%.3g", st.t_extract) + (residual_down ? " (strictly decreasing)"
                                                         : " (not monotone)") +
             "; free control max delta " + sci(free_worst) + " (tol 1e-12)");
}

// --- AC8 --------------------------------------------------------------------

double brute_sup_cube(const Field &u, int m) {
  const GridSpec &g = u.grid();
  const int n = g.n, s1 = g.d > 1 ? n : 1, s2 = g.d > 2 ? n : 1;
  const int w1 = g.d > 1 ? m : 1, w2 = g.d > 2 ? m : 1;
  double best = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < s1; ++b)
      for (int c = 0; c < s2; ++c) {
        double sum = 0.0;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < w1; ++j)
            for (int k = 0; k < w2; ++k) {
              int idx[3] = {(a + i) % n, (b + j) % n, (c + k) % n};
              std::size_t flat = 0;
              for (int ax = 0; ax < g.d; ++ax)
                flat = flat * n + idx[ax];
              sum += std::norm(u.values()[flat]);
            }
        best = std::max(best, sum);
      }
  return std::sqrt(best * g.cell_volume());
}

Complex rk4_phase(Complex u, double t, double mu, double w, double alpha, int steps) {
  auto rhs = [&](Complex v) { return Complex(0, mu * w * std::pow(std::abs(v), alpha)) * v; };
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    Complex k1 = rhs(u), k2 = rhs(u + 0.5 * h * k1), k3 = rhs(u + 0.5 * h * k2),
            k4 = rhs(u + h * k3);
    u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

void ac8(Runs &runs) {
  double cube_gap = 0.0;
  for (int d = 1; d <= 3; ++d) {
    GridSpec g = make_grid(d, 8.0, 8, true);
    Field u = band_limited_random(g, 4.0, 40 + d);
    for (int m = 1; m <= 8; ++m) {
      double slow = brute_sup_cube(u, m);
      cube_gap = std::max(cube_gap, std::abs(sup_cube_l2(u, m * g.h()) - slow) / slow);
    }
  }

  RunConfig c = runs.config("standard_d3");
  GridSpec g = make_grid(3, c.grid.L, 16, true);
  RealArray w = singular_weight(g, c.params.b_value());
  Field u = band_limited_random(g, 2.0, 5);
  const double dt = 0.05, alpha = c.params.alpha_value();
  Field v = nonlinear_phase_step(u, dt, c.params, w);
  double ode_gap = 0.0;
  for (std::size_t f = 0; f < g.total(); f += 7) {
    Complex ref = rk4_phase(u.values()[f], dt, c.params.mu, w[f], alpha, 2000);
    ode_gap = std::max(ode_gap, std::abs(v.values()[f] - ref) / std::abs(ref));
  }

  GridSpec bg = make_grid(3, 2.5, 128, true);
  RealArray bw = singular_weight(bg, 1.0);
  double ball = 0.0;
  for (std::size_t f = 0; f < bg.total(); ++f)
    if (radius_squared(bg, f) < 1.0)
      ball += bw[f];
  ball *= bg.cell_volume();
  const double two_pi = 2 * std::acos(-1.0);
  double ball_gap = std::abs(ball - two_pi) / two_pi;

  report("AC8", cube_gap <= 1e-13 && ode_gap <= 1e-12 && ball_gap <= 0.01,
         "sup_cube vs brute force max relative difference " + sci(cube_gap) +
             " (d=1..3, m=1..8; summation order only); phase step vs RK4 " + sci(ode_gap) +
             " (tol 1e-12); ball quadrature " + fmt("%.5f", ball) + " vs 2pi, " +
             fmt("%.3f", 100 * ball_gap) + "% (tol 1%)");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"acceptance criteria"};
  std::string configs = INLS_CONFIG_DIR, only;
  bool report_only = false;
  app.add_option("--configs", configs, "directory with the standard configs");
  app.add_option("--only", only, "comma separated subset, e.g. AC1,AC8");
  app.add_flag("--report", report_only, "always exit 0 after printing the table");
  CLI11_PARSE(app, argc, argv);

  std::set<std::string> wanted;
  std::stringstream ss(only);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty())
      wanted.insert(item);
  auto want = [&](const std::string &id) { return wanted.empty() || wanted.count(id); };

  Runs runs(configs);
  auto t0 = std::chrono::steady_clock::now();
  const std::pair<const char *, std::function<void()>> suite[] = {
      {"AC1", [] { ac1(); }},
      {"AC2", [&] { ac2(runs); }},
      {"AC3", [&] { ac3(runs); }},
      {"AC4", [&] { ac4(runs); }},
      {"AC5", [&] { ac5(runs); }},
      {"AC6", [&] { ac6(runs); }},
      {"AC7", [&] { ac7(runs); }},
      {"AC8", [&] { ac8(runs); }},
  };
  for (const auto &[id, fn] : suite) {
    if (!want(id))
      continue;
    try {
      fn();
    } catch (const std::exception &e) {
      report(id, false, std::string("error: ") + e.what());
    }
  }
  std::printf("%d criteria failed; %.0f s\n", failures, seconds_since(t0));
  return failures > 0 && !report_only ? 1 : 0;
}
