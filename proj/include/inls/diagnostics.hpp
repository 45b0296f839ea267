#pragma once

#include "inls/grid.hpp"
#include "inls/params.hpp"

#include <limits>
#include <string>
#include <vector>

namespace inls {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One time slice of observables. Quantities that were not requested or not
// available at this sample are NaN.
struct DiagnosticSample {
  double t = 0.0;
  long step = 0;
  double mass = 0.0;
  double energy = 0.0;
  double kinetic = 0.0;        // (1/2) ||grad u||_2^2
  double potential_term = 0.0; // -mu/(alpha+2) int W |u|^{alpha+2}
  double h1 = 0.0;
  std::vector<double> lq_norms; // aligned with RunConfig::lq
  double morawetz_abs = kNaN;
  double morawetz_quadratic = kNaN;
  double morawetz_smoothed = kNaN;
  double rhs_quadratic = kNaN;
  double rhs_smoothed = kNaN;
  double fd_quadratic = kNaN; // centered difference of the action
  double fd_smoothed = kNaN;
  double morawetz_integrand = kNaN; // int |x|^{-b-1} |u|^{alpha+2}
  double nakanishi_integrand = kNaN;
  double gn_ratio = kNaN;
  double edge_mass = 0.0; // mass fraction in the boundary slab
  std::vector<double> strichartz; // running L^p_t L^q_x, aligned with pairs
};

// |x|^{-s} together with its analytic gradient; all zero for the free flow.
struct SingularWeight {
  double s = 0.0;
  RealArray values;
  std::vector<RealArray> grad;

  static SingularWeight build(const GridSpec &grid, double s,
                              OriginPolicy policy = OriginPolicy::require_offset);
  static SingularWeight zero(const GridSpec &grid);
};

enum class MorawetzKind { abs, quadratic, smoothed_abs };

// Weight a(x) with its derivatives tabulated on the grid nodes.
class MorawetzWeight {
public:
  static MorawetzWeight abs(const GridSpec &grid);
  static MorawetzWeight quadratic(const GridSpec &grid);
  static MorawetzWeight smoothed_abs(const GridSpec &grid, double delta);

  MorawetzKind kind() const { return kind_; }
  std::string name() const;
  double delta() const { return delta_; }
  bool has_bilaplacian() const { return kind_ != MorawetzKind::abs; }

  const GridSpec &grid() const { return grid_; }
  const RealArray &value() const { return a_; }
  const RealArray &grad(int j) const { return grad_[j]; }
  // Symmetric Hessian entry d^2 a / dx_j dx_k.
  const RealArray &hessian(int j, int k) const;
  const RealArray &laplacian() const { return lap_; }
  const RealArray &bilaplacian() const;

private:
  MorawetzWeight(const GridSpec &g, MorawetzKind k, double delta);

  GridSpec grid_;
  MorawetzKind kind_;
  double delta_ = 0.0;
  RealArray a_, lap_, bilap_;
  std::vector<RealArray> grad_;
  std::vector<RealArray> hess_; // upper triangle, row-major
};

struct EnergyParts {
  double kinetic = 0.0;
  double potential_term = 0.0;
  double energy = 0.0;
};

double mass(const Field &field);
EnergyParts energy_parts(const Field &field, const Params &params,
                         const RealArray &weight);
double energy(const Field &field, const Params &params,
              const RealArray &weight);

// 2 int grad a . Im(conj(u) grad u).
double morawetz_action(const Field &field, const MorawetzWeight &weight);

// Right-hand side of the virial identity for the action. The nonlinear
// terms carry the factor -mu, so mu = -1 gives the defocusing formula.
// Throws ValidationError for the abs weight.
double morawetz_rhs(const Field &field, const MorawetzWeight &weight,
                    const Params &params, const SingularWeight &b_weight);

// max_j |{N(u), u}_p - closed form|, N(u) = W |u|^alpha u, as a Euclidean
// norm per node. Smooth factors are differentiated spectrally when alpha is
// an even integer and by the chain rule otherwise; the weight always
// enters through its analytic gradient.
double momentum_bracket_residual(const Field &field, const Params &params,
                                 const SingularWeight &b_weight);

// int |x|^{-b-1} |u|^{alpha+2}: pass build(grid, b + 1).
double morawetz_integrand(const Field &field, const Params &params,
                          const RealArray &weight_b_plus_1);

double nakanishi_integrand(const Field &field, double t, const Params &params,
                           const RealArray &b_weight);

// Cube edge used by gn_ratio: the multiple of h nearest to 1 (at least h).
double gn_cube_edge(const GridSpec &grid);
double gn_ratio(const Field &field);

struct SpacetimeIntegral {
  std::vector<double> times;
  std::vector<double> running; // trapezoid integral up to each sample
  std::vector<double> running_ceiling;
  double integral = 0.0;
  double ceiling = 0.0;
};

// Trapezoid-in-time integral of the sampled Morawetz integrand together
// with the a-priori ceiling (2 sup ||u||_2 ||grad u||_2 + |M_abs(0)|)
// (alpha+2) / (2 alpha (d-1) + 4b), evaluated up to every sample.
SpacetimeIntegral
morawetz_spacetime_integral(const std::vector<DiagnosticSample> &series,
                            const Params &params,
                            double morawetz_abs_initial = 0.0);

struct DecayFit {
  double fitted = 0.0;
  double theoretical = 0.0; // -d (1/2 - 1/q)
  int samples = 0;
};

// Least-squares slope of log ||u(t)||_q against log |t| over samples with
// |t| in [t_begin, t_end]. q_index selects the lq column.
DecayFit decay_fit(const std::vector<DiagnosticSample> &series,
                   const ExtRational &q, std::size_t q_index, int d,
                   double t_begin, double t_end);

// Precomputed tables for evaluating a full DiagnosticSample.
class DiagnosticsEngine {
public:
  struct Options {
    std::vector<ExtRational> lq;
    bool lq_norms = true;
    bool morawetz = true;
    bool nakanishi = true;
    bool gn = true;
    double delta = 0.0;
    double wrap_slab = 1.0 / 16.0;
  };

  DiagnosticsEngine(const GridSpec &grid, const Params &params,
                    bool free_evolution, Options options);

  DiagnosticSample sample(std::span<const Complex> values, double t,
                          long step) const;
  // (quadratic, smoothed) actions only.
  std::pair<double, double> actions(std::span<const Complex> values) const;
  double morawetz_abs(std::span<const Complex> values) const;

  const SingularWeight &weight() const { return weight_; }

private:
  GridSpec grid_;
  Params params_;
  Options options_;
  SingularWeight weight_;
  RealArray weight_b_, weight_b1_; // observables, independent of the flow
  MorawetzWeight abs_, quadratic_, smoothed_;
  std::vector<unsigned char> edge_mask_;
  RealArray radius2_;
};

} // namespace inls
