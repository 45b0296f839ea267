#pragma once

#include <gmpxx.h>

#include <compare>
#include <iosfwd>
#include <string>
#include <string_view>

namespace inls {

// Exact rational extended by a single +infinity point. Infinity is a
// distinguished state, never a large number.
class ExtRational {
public:
  ExtRational() = default;
  ExtRational(long v) : value_(v) {}
  ExtRational(int v) : value_(v) {}
  ExtRational(mpq_class v) : value_(std::move(v)) { value_.canonicalize(); }

  static ExtRational infinity() {
    ExtRational r;
    r.infinite_ = true;
    return r;
  }
  static ExtRational fraction(long num, long den);

  // Accepts "n/d", integers, decimals ("0.25", "-1.5e-2"), and "inf".
  // Decimals are converted exactly (0.1 becomes 1/10).
  static ExtRational parse(std::string_view text);

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }
  // Throws std::domain_error when infinite.
  const mpq_class &value() const;
  double to_double() const;

  // "num/den" (always with a denominator) or "inf".
  std::string str() const;

  friend ExtRational operator+(const ExtRational &a, const ExtRational &b);
  friend ExtRational operator-(const ExtRational &a, const ExtRational &b);
  friend ExtRational operator*(const ExtRational &a, const ExtRational &b);
  friend ExtRational operator/(const ExtRational &a, const ExtRational &b);
  ExtRational operator-() const;

  friend bool operator==(const ExtRational &a, const ExtRational &b);
  friend std::strong_ordering operator<=>(const ExtRational &a,
                                          const ExtRational &b);

private:
  mpq_class value_{0};
  bool infinite_ = false;
};

std::ostream &operator<<(std::ostream &os, const ExtRational &r);

// 1/x with 1/inf = 0; throws on 1/0.
ExtRational reciprocal(const ExtRational &x);

} // namespace inls
