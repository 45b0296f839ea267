#pragma once

#include "inls/rational.hpp"

#include <optional>
#include <string>
#include <vector>

namespace inls {

// Problem parameters of i u_t + Δu + mu |x|^{-b} |u|^alpha u = 0.
struct Params {
  int d = 3;
  ExtRational b{ExtRational::fraction(1, 2)};
  ExtRational alpha{ExtRational::fraction(3, 2)};
  int mu = -1; // -1 defocusing, +1 focusing

  // Throws ValidationError unless d >= 1, b > 0, alpha > 0 (both finite)
  // and mu is +-1.
  void validate() const;
  // Additional requirements for the simulation modules: d in {1,2,3} and
  // 0 < b < min(2, d).
  void validate_simulable() const;

  double b_value() const { return b.to_double(); }
  double alpha_value() const { return alpha.to_double(); }
};

struct RegimeFlags {
  bool simulable = false;          // d <= 3 and 0 < b < min(2, d)
  bool defocusing = false;         // mu == -1
  bool mass_subcritical = false;   // 0 < alpha < alpha_star
  bool intercritical = false;      // alpha_star < alpha < alpha_sup
  bool genoud_stuart_lwp = false;  // 0 < b < min(2,d), 0 < alpha < alpha_sup
  bool guzman_lwp = false;         // d >= 2, 0 < b < tilde_b, 0 < alpha < alpha_sup
  bool dinh_lwp = false;           // improved H^1 ranges for d = 2, 3, >= 4
  bool decay = false;              // d >= 3, 0 < b < 2, 0 < alpha < alpha_sup
  bool scattering = false;         // energy-scattering exponent range
};

struct ExponentReport {
  int d = 0;
  ExtRational b;
  std::optional<ExtRational> alpha; // absent for the partial report
  ExtRational alpha_star;
  ExtRational alpha_sup;   // infinity for d in {1,2}
  ExtRational two_star;    // infinity for d in {1,2}
  std::optional<ExtRational> gamma_c;
  ExtRational tilde_alpha; // at gamma = min(1, d/2)
  ExtRational tilde_b;
  RegimeFlags flags;
};

struct StrichartzPair {
  ExtRational p;
  ExtRational q;
};

enum class Relation { less, greater, equal };

const char *relation_symbol(Relation r);

struct ConstraintRecord {
  std::string name;
  ExtRational lhs;
  Relation relation = Relation::less;
  ExtRational rhs;

  // Re-evaluates the recorded comparison exactly.
  bool holds() const;
};

struct ExponentCertificate {
  int d = 0;
  ExtRational epsilon;
  ExtRational tau{0};
  ExtRational q1, p1, theta1;
  ExtRational q2, p2, theta2;
  std::vector<ConstraintRecord> constraint_log;

  bool all_hold() const;
  const ConstraintRecord *first_failure() const;
};

// alpha_star, alpha_sup and two_star for (d, b); alpha and gamma_c unset.
ExponentReport critical_exponents(int d, const ExtRational &b);

// gamma_c = d/2 - (2 - b)/alpha.
ExtRational critical_sobolev(const Params &params);

bool is_admissible(const ExtRational &p, const ExtRational &q, int d);

// Time exponent p paired with q, p = 2/(d/2 - d/q); nullopt when
// d/2 - d/q <= 0.
std::optional<ExtRational> admissible_partner(const ExtRational &q, int d);

ExponentReport classify_regime(const Params &params);

enum class Region { ball, exterior };

// |x|^{-s} in L^gamma(B) iff d/gamma > s; in L^gamma(B^c) iff d/gamma < s.
bool weight_integrability(int d, const ExtRational &s, const ExtRational &gamma,
                          Region region);

// Evaluates every constraint of the exponent system at fixed (epsilon, tau)
// without throwing on failure. tau is ignored for d >= 4.
ExponentCertificate evaluate_certificate(const Params &params,
                                         const ExtRational &epsilon,
                                         const ExtRational &tau);

// Finds a verified witness. Without hints epsilon runs over
// 1/10 * 2^-k and tau (d = 3 only) over 1/100 * 2^-k, k = 0..40, tau outer.
// Throws RegimeError outside the scattering range and SearchExhausted when
// no candidate verifies.
ExponentCertificate
scattering_certificate(const Params &params,
                       const std::optional<ExtRational> &epsilon_hint = {},
                       const std::optional<ExtRational> &tau_hint = {});

inline constexpr int kHalvingBudget = 40;

} // namespace inls
