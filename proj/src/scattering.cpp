#include "inls/scattering.hpp"

#include <cmath>

namespace inls {

Field pullback(const Field &field, double t) { return free_propagate(field, -t); }

double h1_distance(const Field &a, const Field &b) {
  if (!(a.grid() == b.grid()))
    throw ValidationError("H^1 distance between fields on different grids");
  ComplexArray diff(a.size());
  for (std::size_t f = 0; f < diff.size(); ++f)
    diff[f] = a.values()[f] - b.values()[f];
  return h1_norm(a.grid(), diff);
}

namespace {

void check_order(const std::vector<Checkpoint> &cps) {
  for (std::size_t i = 1; i < cps.size(); ++i)
    if (!(std::abs(cps[i].t) > std::abs(cps[i - 1].t)))
      throw ValidationError("checkpoints must be ordered by increasing |t|");
}

} // namespace

std::vector<CauchyDelta>
cauchy_deltas(const std::vector<Checkpoint> &checkpoints) {
  if (checkpoints.size() < 2)
    throw ValidationError("Cauchy deltas need at least two checkpoints, got " +
                          std::to_string(checkpoints.size()));
  check_order(checkpoints);
  std::vector<CauchyDelta> out;
  Field prev = pullback(checkpoints.front().field, checkpoints.front().t);
  for (std::size_t i = 1; i < checkpoints.size(); ++i) {
    Field w = pullback(checkpoints[i].field, checkpoints[i].t);
    out.push_back({checkpoints[i].t, h1_distance(w, prev)});
    prev = std::move(w);
  }
  return out;
}

std::vector<Checkpoint> trusted_checkpoints(const std::vector<Checkpoint> &all,
                                            double window_begin,
                                            double window_end) {
  std::vector<Checkpoint> out;
  for (const Checkpoint &c : all) {
    double at = std::abs(c.t);
    if (at >= window_begin - 1e-12 && at <= window_end + 1e-12)
      out.push_back(c);
  }
  return out;
}

ScatteringState extract_scattering_state(const std::vector<Checkpoint> &all,
                                         double window_begin,
                                         double window_end) {
  check_order(all);
  std::vector<Checkpoint> trusted =
      trusted_checkpoints(all, window_begin, window_end);
  if (trusted.size() < 3)
    throw ValidationError(
        "scattering extraction needs at least 3 checkpoints in the trusted "
        "window, got " +
        std::to_string(trusted.size()));
  std::vector<CauchyDelta> deltas = cauchy_deltas(trusted);

  const Checkpoint &last = trusted.back();
  ScatteringState state{pullback(last.field, last.t), last.t, {},
                        std::move(deltas)};
  const double t_abs = std::abs(last.t);
  for (const Checkpoint &c : all) {
    if (std::abs(c.t) > t_abs)
      break;
    Field w = pullback(c.field, c.t);
    double prev = state.records.empty()
                      ? std::nan("")
                      : h1_distance(w, state.records.back().pullback);
    double residual = h1_distance(w, state.u_plus);
    state.records.push_back(ScatteringRecord{c.t, std::move(w), prev, residual});
  }
  return state;
}

} // namespace inls
