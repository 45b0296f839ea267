#pragma once

#include "inls/solver.hpp"

#include <string>
#include <string_view>

namespace inls {

// Sectioned key = value text:
//
//   [params]      d, b, alpha, mu, free_evolution
//   [grid]        L, n, offset
//   [time]        dt, t_end, sample_every, direction,
//                 checkpoint_every, checkpoint_t_max
//   [initial]     kind, amplitude, width, velocity, seed, cutoff
//   [diagnostics] groups, lq, pairs, morawetz_delta
//   [window]      t_transient, wrap_tol, wrap_slab
//
// '#' starts a comment. b and alpha are exact rationals ("3/2", "0.5").
// Lists are comma separated; a Strichartz pair is written p:q. Unknown
// sections or keys, repeated keys and malformed values are errors naming
// the line. grid.d follows params.d.
RunConfig parse_config(std::string_view text);

// Canonical text with every key present; parse_config(format_config(c))
// reproduces c.
std::string format_config(const RunConfig &config);

// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

} // namespace inls
