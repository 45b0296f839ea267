#include "inls/params.hpp"

#include "inls/error.hpp"

#include <algorithm>

namespace inls {

namespace {

using Q = ExtRational;

Q frac(long n, long d) { return Q::fraction(n, d); }

bool in_open(const Q &x, const Q &lo, const Q &hi) { return lo < x && x < hi; }

} // namespace

void Params::validate() const {
  if (d < 1)
    throw ValidationError("dimension d must be >= 1, got " + std::to_string(d));
  if (!b.is_finite() || b <= Q(0))
    throw ValidationError("b must be a positive finite rational, got " +
                          b.str());
  if (!alpha.is_finite() || alpha <= Q(0))
    throw ValidationError("alpha must be a positive finite rational, got " +
                          alpha.str());
  if (mu != 1 && mu != -1)
    throw ValidationError("mu must be +1 or -1, got " + std::to_string(mu));
}

void Params::validate_simulable() const {
  validate();
  if (d > 3)
    throw ValidationError("simulation supports d in {1,2,3}, got " +
                          std::to_string(d));
  if (b >= Q(std::min(2, d)))
    throw ValidationError("simulation requires 0 < b < min(2, d), got b = " +
                          b.str());
}

const char *relation_symbol(Relation r) {
  switch (r) {
  case Relation::less:
    return "<";
  case Relation::greater:
    return ">";
  case Relation::equal:
    return "=";
  }
  return "?";
}

bool ConstraintRecord::holds() const {
  switch (relation) {
  case Relation::less:
    return lhs < rhs;
  case Relation::greater:
    return lhs > rhs;
  case Relation::equal:
    return lhs == rhs;
  }
  return false;
}

bool ExponentCertificate::all_hold() const { return first_failure() == nullptr; }

const ConstraintRecord *ExponentCertificate::first_failure() const {
  for (const auto &c : constraint_log)
    if (!c.holds())
      return &c;
  return nullptr;
}

ExponentReport critical_exponents(int d, const Q &b) {
  if (d < 1)
    throw ValidationError("dimension d must be >= 1");
  if (!b.is_finite() || b <= Q(0))
    throw ValidationError("b must be positive, got " + b.str());
  ExponentReport r;
  r.d = d;
  r.b = b;
  Q four_minus_2b = Q(4) - Q(2) * b;
  r.alpha_star = four_minus_2b / Q(d);
  if (d >= 3) {
    r.alpha_sup = four_minus_2b / Q(d - 2);
    r.two_star = Q(2 * d) / Q(d - 2);
  } else {
    r.alpha_sup = Q::infinity();
    r.two_star = Q::infinity();
  }
  // Energy-space regularity gamma = min(1, d/2); tilde alpha is infinite
  // exactly when gamma = d/2.
  if (d >= 3)
    r.tilde_alpha = four_minus_2b / Q(d - 2);
  else
    r.tilde_alpha = Q::infinity();
  r.tilde_b = d <= 3 ? frac(d, 3) : Q(2);
  return r;
}

Q critical_sobolev(const Params &params) {
  params.validate();
  return frac(params.d, 2) - (Q(2) - params.b) / params.alpha;
}

bool is_admissible(const Q &p, const Q &q, int d) {
  if (d < 1)
    return false;
  if (p < Q(2) || q < Q(2))
    return false;
  if (d == 2 && p == Q(2) && q.is_infinite())
    return false;
  return Q(2) * reciprocal(p) + Q(d) * reciprocal(q) == frac(d, 2);
}

std::optional<Q> admissible_partner(const Q &q, int d) {
  if (d < 1 || q <= Q(0))
    return std::nullopt;
  Q denom = frac(d, 2) - Q(d) * reciprocal(q);
  if (denom <= Q(0))
    return std::nullopt;
  return Q(2) / denom;
}

ExponentReport classify_regime(const Params &params) {
  params.validate();
  const int d = params.d;
  const Q &b = params.b;
  const Q &a = params.alpha;
  ExponentReport r = critical_exponents(d, b);
  r.alpha = a;
  r.gamma_c = critical_sobolev(params);

  RegimeFlags &f = r.flags;
  const Q zero(0);
  const Q b_cap(std::min(2, d));
  const bool alpha_energy_sub = zero < a && a < r.alpha_sup;
  f.simulable = d <= 3 && b < b_cap;
  f.defocusing = params.mu == -1;
  f.mass_subcritical = a < r.alpha_star;
  f.intercritical = in_open(a, r.alpha_star, r.alpha_sup);
  f.genoud_stuart_lwp = b < b_cap && alpha_energy_sub;
  f.guzman_lwp = d >= 2 && b < r.tilde_b && alpha_energy_sub;
  if (d >= 4)
    f.dinh_lwp = b < Q(2) && alpha_energy_sub;
  else if (d == 3)
    f.dinh_lwp = (b < Q(1) && alpha_energy_sub) ||
                 (Q(1) <= b && b < frac(3, 2) && zero < a &&
                  a < (Q(6) - Q(4) * b) / (Q(2) * b - Q(1)));
  else if (d == 2)
    f.dinh_lwp = b < Q(1) && alpha_energy_sub;
  f.decay = d >= 3 && b < Q(2) && alpha_energy_sub;
  if (d >= 4)
    f.scattering = b < Q(2) && f.intercritical;
  else if (d == 3)
    f.scattering = b < frac(5, 4) && in_open(a, r.alpha_star, Q(3) - Q(2) * b);
  return r;
}

bool weight_integrability(int d, const Q &s, const Q &gamma, Region region) {
  if (gamma < Q(1))
    throw ValidationError("integrability exponent gamma must be >= 1");
  Q ratio = Q(d) / gamma;
  return region == Region::ball ? ratio > s : ratio < s;
}

namespace {

void push(std::vector<ConstraintRecord> &log, std::string name, Q lhs,
          Relation rel, Q rhs) {
  log.push_back({std::move(name), std::move(lhs), rel, std::move(rhs)});
}

// Admissibility of (p, q) and the derived p = theta + 2 bounds.
void log_pair(std::vector<ConstraintRecord> &log, const std::string &tag,
              const Q &p, const Q &q, const Q &theta, const Q &alpha, int d) {
  if (p <= Q(0))
    push(log, "p" + tag + " defined on the admissible line", p,
         Relation::greater, Q(0));
  else
    push(log, "(p" + tag + ",q" + tag + ") admissible: 2/p+d/q",
         Q(2) * reciprocal(p) + Q(d) * reciprocal(q), Relation::equal,
         frac(d, 2));
  push(log, "p" + tag + " > 2", p, Relation::greater, Q(2));
  push(log, "theta" + tag + " > 0", theta, Relation::greater, Q(0));
  push(log, "theta" + tag + " < alpha", theta, Relation::less, alpha);
}

// p from q on the admissible line; the caller logs whether it is valid.
Q partner_or_zero(const Q &q, int d) {
  auto p = admissible_partner(q, d);
  return p ? *p : Q(0);
}

} // namespace

ExponentCertificate evaluate_certificate(const Params &params, const Q &epsilon,
                                         const Q &tau) {
  params.validate();
  const int d = params.d;
  if (d < 3)
    throw RegimeError("exponent certificates exist only for d >= 3");
  const Q &a = params.alpha;
  const Q &b = params.b;
  ExponentReport rep = critical_exponents(d, b);

  if (b >= Q(2))
    throw RegimeError("exponent certificates require b < 2");
  if (epsilon <= Q(0) || !epsilon.is_finite())
    throw ValidationError("epsilon must be a positive rational");
  if (epsilon >= frac(1, 2))
    throw ValidationError("epsilon must be below 1/2, got " + epsilon.str());

  ExponentCertificate c;
  c.d = d;
  c.epsilon = epsilon;
  c.tau = d == 3 ? tau : Q(0);
  auto &log = c.constraint_log;
  push(log, "epsilon > 0", epsilon, Relation::greater, Q(0));

  if (d >= 4) {
    Q center = Q(d) * (a + Q(2)) / (Q(d) - b);
    c.q1 = center + epsilon;
    c.q2 = center - epsilon;
    c.p1 = partner_or_zero(c.q1, d);
    c.p2 = partner_or_zero(c.q2, d);
    c.theta1 = c.p1 - Q(2);
    c.theta2 = c.p2 - Q(2);

    push(log, "q1 > 2", c.q1, Relation::greater, Q(2));
    push(log, "q1 < 2^*", c.q1, Relation::less, rep.two_star);
    push(log, "q2 > 2", c.q2, Relation::greater, Q(2));
    push(log, "q2 < 2^*", c.q2, Relation::less, rep.two_star);
    log_pair(log, "1", c.p1, c.q1, c.theta1, a, d);
    log_pair(log, "2", c.p2, c.q2, c.theta2, a, d);
    // d/gamma_1 = d - d(alpha+2)/q1 > b and d/gamma_2 < b.
    push(log, "ball integrability d-d(alpha+2)/q1 > b",
         Q(d) - Q(d) * (a + Q(2)) * reciprocal(c.q1), Relation::greater, b);
    push(log, "exterior integrability d-d(alpha+2)/q2 < b",
         Q(d) - Q(d) * (a + Q(2)) * reciprocal(c.q2), Relation::less, b);
    Q base = Q(d) * (a + Q(2)) * (Q(d) * a - Q(4) + Q(2) * b);
    Q slope = epsilon * (Q(d) - b) * (Q(d) * (a + Q(2)) - Q(4));
    push(log, "d(a+2)(da-4+2b) + eps(d-b)[d(a+2)-4] > 0", base + slope,
         Relation::greater, Q(0));
    // The minus branch may be negative, so compare base > slope.
    push(log, "d(a+2)(da-4+2b) - eps(d-b)[d(a+2)-4] > 0", base,
         Relation::greater, slope);
    push(log, "alpha < d-b-2", a, Relation::less, Q(d) - b - Q(2));
    push(log, "q1 < d (homogeneous Sobolev)", c.q1, Relation::less, Q(d));
    push(log, "q2 < d (homogeneous Sobolev)", c.q2, Relation::less, Q(d));
    return c;
  }

  // d = 3
  push(log, "tau > 0", tau, Relation::greater, Q(0));
  push(log, "tau < 1", tau, Relation::less, Q(1));
  Q center = Q(3) * (a + Q(1) + tau) / (Q(2) - b);
  c.q1 = center + epsilon;
  c.q2 = center - epsilon;
  c.p1 = partner_or_zero(c.q1, 3);
  c.p2 = partner_or_zero(c.q2, 3);
  c.theta1 = c.p1 - Q(2);
  c.theta2 = c.p2 - Q(2);

  push(log, "q1 > 3", c.q1, Relation::greater, Q(3));
  push(log, "q1 < 6", c.q1, Relation::less, Q(6));
  push(log, "q2 > 3", c.q2, Relation::greater, Q(3));
  push(log, "q2 < 6", c.q2, Relation::less, Q(6));
  log_pair(log, "1", c.p1, c.q1, c.theta1, a, 3);
  log_pair(log, "2", c.p2, c.q2, c.theta2, a, 3);
  push(log, "alpha > 1-b-tau", a, Relation::greater, Q(1) - b - tau);
  push(log, "alpha < 3-2b-tau", a, Relation::less, Q(3) - Q(2) * b - tau);
  Q quad = Q(3) * a * a + (Q(1) + Q(2) * b) * a + Q(4) * b - Q(6) +
           tau * (Q(3) * a + Q(2));
  push(log, "3a^2+(1+2b)a+4b-6+tau(3a+2) > 0", quad, Relation::greater, Q(0));
  Q slope = epsilon * (Q(2) - b) * (Q(3) * a + Q(2));
  push(log, "3[quad] + eps(2-b)(3a+2) > 0", Q(3) * quad + slope,
       Relation::greater, Q(0));
  push(log, "3[quad] - eps(2-b)(3a+2) > 0", Q(3) * quad, Relation::greater,
       slope);
  // Ball side: 3/gamma_1 = 3 - 3(alpha+1+tau)/q1 > b+1, plus the
  // undifferentiated term's 3 - 3(alpha+2)/q1 > b.
  push(log, "ball 3(a+1+tau)/q1 < 2-b",
       Q(3) * (a + Q(1) + tau) * reciprocal(c.q1), Relation::less, Q(2) - b);
  push(log, "ball integrability 3-3(alpha+2)/q1 > b",
       Q(3) - Q(3) * (a + Q(2)) * reciprocal(c.q1), Relation::greater, b);
  push(log, "exterior 3(a+1+tau)/q2 > 2-b",
       Q(3) * (a + Q(1) + tau) * reciprocal(c.q2), Relation::greater, Q(2) - b);
  return c;
}

ExponentCertificate scattering_certificate(const Params &params,
                                           const std::optional<Q> &epsilon_hint,
                                           const std::optional<Q> &tau_hint) {
  ExponentReport rep = classify_regime(params);
  if (!rep.flags.scattering)
    throw RegimeError("parameters (d=" + std::to_string(params.d) +
                      ", b=" + params.b.str() + ", alpha=" + params.alpha.str() +
                      ") are outside the energy-scattering range");

  auto ladder = [](const std::optional<Q> &hint, const Q &start) {
    std::vector<Q> values;
    if (hint) {
      values.push_back(*hint);
      return values;
    }
    Q v = start;
    for (int k = 0; k <= kHalvingBudget; ++k) {
      values.push_back(v);
      v = v / Q(2);
    }
    return values;
  };
  const std::vector<Q> eps_values = ladder(epsilon_hint, frac(1, 10));
  const std::vector<Q> tau_values =
      params.d == 3 ? ladder(tau_hint, frac(1, 100)) : std::vector<Q>{Q(0)};

  std::string last_failure = "none";
  for (const Q &tau : tau_values) {
    for (const Q &eps : eps_values) {
      ExponentCertificate c = evaluate_certificate(params, eps, tau);
      const ConstraintRecord *bad = c.first_failure();
      if (!bad)
        return c;
      last_failure = bad->name;
    }
  }
  throw SearchExhausted("no exponent witness found; last failing constraint: " +
                            last_failure,
                        last_failure);
}

} // namespace inls
