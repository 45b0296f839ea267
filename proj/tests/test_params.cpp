#include "inls/error.hpp"
#include "inls/params.hpp"

#include <doctest.h>

using inls::ExtRational;
using Q = inls::ExtRational;

namespace {

Q r(long n, long d = 1) { return Q::fraction(n, d); }

inls::Params make(int d, Q b, Q alpha, int mu = -1) {
  inls::Params p;
  p.d = d;
  p.b = std::move(b);
  p.alpha = std::move(alpha);
  p.mu = mu;
  return p;
}

} // namespace

TEST_CASE("rational parsing is exact") {
  CHECK(Q::parse("3/2") == r(3, 2));
  CHECK(Q::parse("0.1") == r(1, 10));
  CHECK(Q::parse("-1.5e-2") == r(-3, 200));
  CHECK(Q::parse("6/4").str() == "3/2");
  CHECK(Q::parse("inf").is_infinite());
  CHECK(Q::parse("4").str() == "4/1");
  CHECK_THROWS(Q::parse("abc"));
  CHECK_THROWS(Q::parse("1/0"));
  CHECK(Q::infinity() > r(1000000));
  CHECK(inls::reciprocal(Q::infinity()) == Q(0));
}

TEST_CASE("critical exponents") {
  auto a = inls::critical_exponents(3, r(1));
  CHECK(a.alpha_star == r(2, 3));
  CHECK(a.alpha_sup == r(2));
  CHECK(a.two_star == r(6));

  auto b = inls::critical_exponents(2, r(1));
  CHECK(b.alpha_sup.is_infinite());
  CHECK(b.two_star.is_infinite());

  auto c = inls::critical_exponents(4, r(1));
  CHECK(c.alpha_star == r(1, 2));
  CHECK(c.alpha_sup == r(1));
  CHECK(c.two_star == r(4));

  CHECK_THROWS_AS(inls::critical_exponents(3, r(0)), inls::ValidationError);
  CHECK_THROWS_AS(inls::critical_exponents(3, r(-1, 2)), inls::ValidationError);
}

TEST_CASE("critical Sobolev exponent") {
  CHECK(inls::critical_sobolev(make(3, r(1, 2), r(3, 2))) == r(1, 2));
  CHECK(inls::critical_sobolev(make(3, r(1), r(2))) == r(1));
  for (int d = 1; d <= 6; ++d)
    for (long bn = 1; bn < 8; ++bn) {
      Q b = r(bn, 4);
      Q alpha_star = (Q(4) - Q(2) * b) / Q(d);
      if (!(alpha_star > Q(0)))
        continue;
      CHECK(inls::critical_sobolev(make(d, b, alpha_star)) == Q(0));
    }
}

TEST_CASE("Strichartz admissibility") {
  CHECK(inls::is_admissible(Q::infinity(), r(2), 3));
  CHECK_FALSE(inls::is_admissible(r(2), Q::infinity(), 2));
  CHECK(inls::is_admissible(r(113, 53), r(113, 30), 4));
  CHECK(inls::is_admissible(r(2), r(6), 3));
  CHECK_FALSE(inls::is_admissible(r(3, 2), r(6), 3));
  CHECK_FALSE(inls::is_admissible(r(4), r(3), 1));
  CHECK(inls::is_admissible(r(8), r(4), 1));
  CHECK_FALSE(inls::is_admissible(r(4), r(4), 0));
}

TEST_CASE("admissible partner agrees with the admissibility test") {
  for (int d = 1; d <= 6; ++d)
    for (long num = 4; num <= 60; ++num) {
      Q q = r(num, 4);
      auto p = inls::admissible_partner(q, d);
      if (!p)
        continue;
      bool expect = *p >= Q(2) && !(d == 2 && *p == Q(2) && q.is_infinite());
      CHECK(inls::is_admissible(*p, q, d) == expect);
    }
}

TEST_CASE("regime classification") {
  CHECK(inls::classify_regime(make(3, r(1, 2), r(3, 2))).flags.scattering);
  CHECK_FALSE(inls::classify_regime(make(3, r(13, 10), r(1))).flags.scattering);
  CHECK(inls::classify_regime(make(4, r(1), r(3, 4))).flags.scattering);
  // Flags depend on the exponents only; the sign is reported separately.
  auto focusing = inls::classify_regime(make(3, r(1, 2), r(3, 2), 1));
  CHECK(focusing.flags.scattering);
  CHECK_FALSE(focusing.flags.defocusing);
  auto low = inls::classify_regime(make(3, r(1, 2), r(1, 2)));
  CHECK(low.flags.mass_subcritical);
  CHECK_FALSE(low.flags.intercritical);
  CHECK(low.flags.decay);
  auto d1 = inls::classify_regime(make(1, r(1, 2), r(4)));
  CHECK(d1.flags.intercritical);
  CHECK(d1.flags.simulable);
  CHECK_FALSE(d1.flags.decay);
  CHECK_FALSE(inls::classify_regime(make(2, r(5, 2), r(1))).flags.simulable);
}

TEST_CASE("worked scattering certificate") {
  auto c = inls::scattering_certificate(make(4, r(1), r(3, 4)), r(1, 10));
  CHECK(c.q1 == r(113, 30));
  CHECK(c.p1 == r(113, 53));
  CHECK(c.theta1 == r(7, 53));
  CHECK(c.q2 == r(107, 30));
  CHECK(c.p2 == r(107, 47));
  CHECK(c.theta2 == r(13, 47));
  CHECK(c.all_hold());
  CHECK_FALSE(c.constraint_log.empty());
  for (const auto &rec : c.constraint_log)
    CHECK_MESSAGE(rec.holds(), rec.name);
}

TEST_CASE("three-dimensional certificate with a tau hint") {
  inls::Params p = make(3, r(1, 2), r(3, 2));
  auto c = inls::scattering_certificate(p, std::nullopt, r(1, 100));
  CHECK(c.tau == r(1, 100));
  CHECK(c.all_hold());
  bool found = false;
  for (const auto &rec : c.constraint_log)
    if (rec.name == "3a^2+(1+2b)a+4b-6+tau(3a+2) > 0") {
      CHECK(rec.lhs == r(23, 4) + r(13, 200));
      found = true;
    }
  CHECK(found);
  CHECK_THROWS_AS(inls::scattering_certificate(make(3, r(13, 10), r(1))),
                  inls::RegimeError);
}

TEST_CASE("certificate exists exactly when the scattering flag is set") {
  int certified = 0, rejected = 0;
  for (int d = 3; d <= 6; ++d)
    for (long bn = 1; bn <= 7; ++bn) {
      Q b = r(bn, 4);
      auto ce = inls::critical_exponents(d, b);
      for (long k = 1; k <= 5; ++k) {
        Q alpha = ce.alpha_star + (ce.alpha_sup - ce.alpha_star) * r(k, 6);
        inls::Params p = make(d, b, alpha);
        bool flag = inls::classify_regime(p).flags.scattering;
        CAPTURE(d);
        CAPTURE(b.str());
        CAPTURE(alpha.str());
        if (flag) {
          auto c = inls::scattering_certificate(p);
          for (const auto &rec : c.constraint_log)
            CHECK_MESSAGE(rec.holds(), rec.name);
          ++certified;
        } else {
          CHECK_THROWS_AS(inls::scattering_certificate(p), inls::RegimeError);
          ++rejected;
        }
      }
    }
  CHECK(certified > 0);
  CHECK(rejected > 0);
}

TEST_CASE("halving epsilon keeps a valid certificate valid") {
  for (int d = 4; d <= 6; ++d)
    for (long bn = 1; bn <= 7; ++bn) {
      Q b = r(bn, 4);
      auto ce = inls::critical_exponents(d, b);
      Q alpha = (ce.alpha_star + ce.alpha_sup) / Q(2);
      inls::Params p = make(d, b, alpha);
      if (!inls::classify_regime(p).flags.scattering)
        continue;
      auto c = inls::scattering_certificate(p);
      Q eps = c.epsilon;
      for (int i = 0; i < 10; ++i) {
        eps = eps / Q(2);
        auto h = inls::evaluate_certificate(p, eps, Q(0));
        CAPTURE(eps.str());
        CHECK(h.all_hold());
      }
    }
}

TEST_CASE("weight integrability") {
  using inls::Region;
  CHECK(inls::weight_integrability(3, r(1), r(2), Region::ball));
  CHECK_FALSE(inls::weight_integrability(3, r(1), r(4), Region::ball));
  CHECK(inls::weight_integrability(3, r(1), r(4), Region::exterior));
  CHECK_THROWS_AS(inls::weight_integrability(3, r(1), r(1, 2), Region::ball),
                  inls::ValidationError);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(make(0, r(1), r(1)).validate(), inls::ValidationError);
  CHECK_THROWS_AS(make(3, r(0), r(1)).validate(), inls::ValidationError);
  CHECK_THROWS_AS(make(3, r(1), r(0)).validate(), inls::ValidationError);
  CHECK_THROWS_AS(make(3, r(1), r(1), 0).validate(), inls::ValidationError);
  CHECK_NOTHROW(make(7, r(1), r(1)).validate());
  CHECK_THROWS_AS(make(4, r(1), r(1)).validate_simulable(), inls::ValidationError);
  CHECK_THROWS_AS(make(1, r(1), r(1)).validate_simulable(), inls::ValidationError);
  CHECK_NOTHROW(make(1, r(1, 2), r(1)).validate_simulable());
}
