#pragma once

#include "inls/diagnostics.hpp"
#include "inls/error.hpp"
#include "inls/grid.hpp"
#include "inls/params.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace inls {

enum class InitialKind { gaussian, modulated_gaussian, random };

const char *initial_kind_name(InitialKind k);
InitialKind parse_initial_kind(const std::string &name);

struct InitialData {
  InitialKind kind = InitialKind::gaussian;
  double amplitude = 1.0;
  double width = 1.0;
  std::array<double, 3> velocity{0.0, 0.0, 0.0};
  std::uint64_t seed = 1;
  double cutoff = 4.0; // random kind: spectral radius of the coefficients
};

// gaussian:            A exp(-|x|^2 / w^2)
// modulated-gaussian:  A exp(-|x|^2 / w^2) exp(i v.x)
// random:              band-limited random field times exp(-|x|^2 / w^2),
//                      rescaled to peak modulus A (no envelope when w <= 0)
Field make_initial(const GridSpec &grid, const InitialData &init);

struct RunConfig {
  Params params;
  GridSpec grid;
  double dt = 1e-3;
  double t_end = 1.0;
  int sample_every = 10;
  InitialData initial;
  std::vector<std::string> diagnostics; // empty means every group
  std::vector<StrichartzPair> pairs;
  std::vector<ExtRational> lq{ExtRational(4)}; // tracked as lq_<q> columns
  int checkpoint_every = 0;    // steps; 0 disables checkpoints
  double checkpoint_t_max = std::numeric_limits<double>::infinity();
  bool free_evolution = false; // zero weight: pure free flow
  int direction = 1;           // +1 forward in time, -1 backward
  double t_transient = 1.0;
  double wrap_tol = 1e-3;
  double wrap_slab = 1.0 / 16.0;
  double morawetz_delta = 0.0; // smoothing length; 0 means 2h

  // Throws ValidationError on any inconsistency.
  void validate() const;
  long steps() const;
  double smoothing_length() const;
  bool wants(const std::string &group) const;
};

inline const std::vector<std::string> &diagnostic_groups() {
  static const std::vector<std::string> groups{
      "lq", "morawetz", "morawetz_fd", "nakanishi", "gn", "strichartz"};
  return groups;
}

struct Checkpoint {
  double t = 0.0;
  long step = 0;
  Field field;
};

struct RunOutput {
  RunConfig config;
  ExponentReport regime;
  std::vector<DiagnosticSample> series;
  std::vector<Checkpoint> checkpoints;
  std::optional<Field> final_field;
  std::vector<double> step_seconds;
  double t_wrap = 0.0;
  bool wrap_reached = false;
  double morawetz_abs_initial = 0.0;

  // [t_transient, t_wrap] in |t|.
  double trusted_begin() const { return config.t_transient; }
  double trusted_end() const { return t_wrap; }
  bool in_trusted_window(double t) const;
};

class StepBlowup : public Error {
public:
  StepBlowup(long step, std::shared_ptr<RunOutput> partial)
      : Error(ExitCode::blowup,
              "non-finite values after step " + std::to_string(step)),
        step_(step), partial_(std::move(partial)) {}
  long step() const noexcept { return step_; }
  const std::shared_ptr<RunOutput> &partial() const noexcept { return partial_; }

private:
  long step_;
  std::shared_ptr<RunOutput> partial_;
};

// u_hat <- exp(-i |k|^2 t) u_hat.
Field free_propagate(const Field &field, double t);
// u_j <- u_j exp(i mu dt W_j |u_j|^alpha).
Field nonlinear_phase_step(const Field &field, double dt, const Params &params,
                           const RealArray &weight);
// Half nonlinear, full free, half nonlinear. Throws StepBlowup (step 0)
// when the result is not finite.
Field strang_step(const Field &field, double dt, const Params &params,
                  const RealArray &weight);

RunOutput evolve(const RunConfig &config);

// Column header of the time series, in output order.
std::vector<std::string> series_columns(const RunConfig &config);
// Row values matching series_columns.
std::vector<double> series_row(const RunConfig &config,
                               const DiagnosticSample &s);

} // namespace inls
