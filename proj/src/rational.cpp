#include "inls/rational.hpp"

#include "inls/error.hpp"

#include <cctype>
#include <ostream>
#include <limits>
#include <stdexcept>

namespace inls {

ExtRational ExtRational::fraction(long num, long den) {
  if (den == 0)
    throw std::domain_error("rational with zero denominator");
  return ExtRational(mpq_class(num, den));
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty())
    return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      return false;
  return true;
}

mpz_class parse_integer(std::string_view s, std::string_view whole) {
  std::string_view digits = s;
  bool negative = false;
  if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) {
    negative = digits.front() == '-';
    digits.remove_prefix(1);
  }
  if (!all_digits(digits))
    throw ValidationError("not a rational number: '" + std::string(whole) +
                          "'");
  mpz_class z(std::string(digits), 10);
  return negative ? mpz_class(-z) : z;
}

mpz_class pow10(long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, static_cast<unsigned long>(e));
  return r;
}

// Exact decimal parse: [sign] digits [. digits] [e|E [sign] digits].
mpq_class parse_decimal(std::string_view s) {
  std::string_view rest = s;
  bool negative = false;
  if (!rest.empty() && (rest.front() == '-' || rest.front() == '+')) {
    negative = rest.front() == '-';
    rest.remove_prefix(1);
  }
  long exponent = 0;
  if (auto epos = rest.find_first_of("eE"); epos != std::string_view::npos) {
    mpz_class e = parse_integer(rest.substr(epos + 1), s);
    if (!e.fits_slong_p() || abs(e) > 4096)
      throw ValidationError("exponent out of range: '" + std::string(s) + "'");
    exponent = e.get_si();
    rest = rest.substr(0, epos);
  }
  std::string_view int_part = rest, frac_part;
  if (auto dot = rest.find('.'); dot != std::string_view::npos) {
    int_part = rest.substr(0, dot);
    frac_part = rest.substr(dot + 1);
  }
  if ((int_part.empty() && frac_part.empty()) ||
      (!int_part.empty() && !all_digits(int_part)) ||
      (!frac_part.empty() && !all_digits(frac_part)))
    throw ValidationError("not a rational number: '" + std::string(s) + "'");
  std::string digits = std::string(int_part) + std::string(frac_part);
  mpz_class mantissa(digits.empty() ? std::string("0") : digits, 10);
  exponent -= static_cast<long>(frac_part.size());
  mpq_class q;
  if (exponent >= 0)
    q = mpq_class(mantissa * pow10(exponent));
  else
    q = mpq_class(mantissa, pow10(-exponent));
  q.canonicalize();
  return negative ? mpq_class(-q) : q;
}

} // namespace

ExtRational ExtRational::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  if (text == "inf" || text == "+inf" || text == "infinity" || text == "∞")
    return infinity();
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    mpz_class num = parse_integer(text.substr(0, slash), text);
    mpz_class den = parse_integer(text.substr(slash + 1), text);
    if (den == 0)
      throw ValidationError("zero denominator in '" + std::string(text) + "'");
    mpq_class q(num, den);
    q.canonicalize();
    return ExtRational(q);
  }
  return ExtRational(parse_decimal(text));
}

const mpq_class &ExtRational::value() const {
  if (infinite_)
    throw std::domain_error("value() of infinite rational");
  return value_;
}

double ExtRational::to_double() const {
  if (infinite_)
    return std::numeric_limits<double>::infinity();
  return value_.get_d();
}

std::string ExtRational::str() const {
  if (infinite_)
    return "inf";
  return value_.get_num().get_str() + "/" + value_.get_den().get_str();
}

ExtRational operator+(const ExtRational &a, const ExtRational &b) {
  if (a.infinite_ || b.infinite_)
    return ExtRational::infinity();
  return ExtRational(mpq_class(a.value_ + b.value_));
}

ExtRational operator-(const ExtRational &a, const ExtRational &b) {
  if (b.infinite_)
    throw std::domain_error("subtraction of infinity");
  if (a.infinite_)
    return ExtRational::infinity();
  return ExtRational(mpq_class(a.value_ - b.value_));
}

ExtRational operator*(const ExtRational &a, const ExtRational &b) {
  if (a.infinite_ || b.infinite_) {
    const ExtRational &other = a.infinite_ ? b : a;
    if (other.infinite_ || other.value_ > 0)
      return ExtRational::infinity();
    throw std::domain_error("infinity times a non-positive rational");
  }
  return ExtRational(mpq_class(a.value_ * b.value_));
}

ExtRational operator/(const ExtRational &a, const ExtRational &b) {
  return a * reciprocal(b);
}

ExtRational ExtRational::operator-() const {
  if (infinite_)
    throw std::domain_error("negation of infinity");
  return ExtRational(mpq_class(-value_));
}

bool operator==(const ExtRational &a, const ExtRational &b) {
  if (a.infinite_ || b.infinite_)
    return a.infinite_ == b.infinite_;
  return a.value_ == b.value_;
}

std::strong_ordering operator<=>(const ExtRational &a, const ExtRational &b) {
  if (a.infinite_ || b.infinite_) {
    if (a.infinite_ && b.infinite_)
      return std::strong_ordering::equal;
    return a.infinite_ ? std::strong_ordering::greater
                       : std::strong_ordering::less;
  }
  int c = cmp(a.value_, b.value_);
  if (c < 0)
    return std::strong_ordering::less;
  if (c > 0)
    return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::ostream &operator<<(std::ostream &os, const ExtRational &r) {
  return os << r.str();
}

ExtRational reciprocal(const ExtRational &x) {
  if (x.is_infinite())
    return ExtRational(0);
  if (x.value() == 0)
    throw std::domain_error("reciprocal of zero");
  return ExtRational(mpq_class(1 / x.value()));
}

} // namespace inls
