#pragma once

#include "inls/solver.hpp"

#include <vector>

namespace inls {

// w(t) = e^{-it Delta} u(t).
Field pullback(const Field &field, double t);

// ||a - b||_{H^1}; the fields must share a grid.
double h1_distance(const Field &a, const Field &b);

struct CauchyDelta {
  double t = 0.0;
  double delta = 0.0; // ||w(t) - w(t_prev)||_{H^1}
};

// Consecutive H^1 differences of the pullbacks. Checkpoints must be ordered
// by increasing |t|; throws ValidationError for fewer than two.
std::vector<CauchyDelta> cauchy_deltas(const std::vector<Checkpoint> &checkpoints);

struct ScatteringRecord {
  double t = 0.0;
  Field pullback;
  double h1_delta_prev = 0.0; // NaN for the first record
  double residual = 0.0;      // ||u(t) - e^{it Delta} u_plus||_{H^1}
};

struct ScatteringState {
  Field u_plus;
  double t_extract = 0.0;
  std::vector<ScatteringRecord> records; // every checkpoint up to t_extract
  std::vector<CauchyDelta> trusted_deltas;
};

// Checkpoints with |t| in [window_begin, window_end].
std::vector<Checkpoint> trusted_checkpoints(const std::vector<Checkpoint> &all,
                                            double window_begin,
                                            double window_end);

// u_plus is the pullback at the last checkpoint inside the window, which
// must hold at least three checkpoints. The residual is evaluated as
// ||w(t) - u_plus||_{H^1}, equal to the forward form by isometry and exactly
// zero at the extraction time.
ScatteringState extract_scattering_state(const std::vector<Checkpoint> &all,
                                         double window_begin,
                                         double window_end);

} // namespace inls
