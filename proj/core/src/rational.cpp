#include "modeseek/rational.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace modeseek {

namespace {

// ln of a positive big integer, stable for values far outside double range.
double log_mpz(const mpz_class& z) {
  signed long exp = 0;
  double d = mpz_get_d_2exp(&exp, z.get_mpz_t());
  return std::log(d) + static_cast<double>(exp) * M_LN2;
}

}  // namespace

Rational::Rational(long num, long den) {
  if (den == 0) throw std::invalid_argument("Rational: zero denominator");
  v_ = mpq_class(num, den);
  v_.canonicalize();
}

Rational::Rational(mpq_class v) : v_(std::move(v)) { v_.canonicalize(); }

Rational Rational::parse(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("Rational: empty string");

  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = s.substr(0, slash);
    std::string den = s.substr(slash + 1);
    if (num.empty() || den.empty())
      throw std::invalid_argument("Rational: malformed fraction '" + s + "'");
    try {
      mpz_class n(num), d(den);
      if (d == 0) throw std::invalid_argument("zero denominator");
      mpq_class v{n, d};
      v.canonicalize();
      return Rational(std::move(v));
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("Rational: malformed fraction '" + s + "'");
    }
  }

  // Decimal / scientific form, parsed exactly: digits[.digits][e[+-]digits]
  bool negative = false;
  std::size_t pos = 0;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    negative = (s[pos] == '-');
    ++pos;
  }
  std::string mantissa;
  long frac_digits = 0;
  bool seen_dot = false, seen_digit = false;
  long exp10 = 0;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c >= '0' && c <= '9') {
      mantissa.push_back(c);
      seen_digit = true;
      if (seen_dot) ++frac_digits;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if ((c == 'e' || c == 'E') && seen_digit) {
      try {
        exp10 = std::stol(s.substr(pos + 1));
      } catch (const std::exception&) {
        throw std::invalid_argument("Rational: malformed number '" + s + "'");
      }
      pos = s.size() - 1;
    } else {
      throw std::invalid_argument("Rational: malformed number '" + s + "'");
    }
  }
  if (!seen_digit) throw std::invalid_argument("Rational: malformed number '" + s + "'");

  mpz_class num(mantissa.empty() ? "0" : mantissa);
  if (negative) num = -num;
  long net_exp = exp10 - frac_digits;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(net_exp)));
  mpq_class v = net_exp >= 0 ? mpq_class(num * scale) : mpq_class(num, scale);
  v.canonicalize();
  return Rational(std::move(v));
}

Rational Rational::pow2(unsigned exponent) {
  mpz_class z = 1;
  z <<= exponent;
  return Rational(mpq_class(z));
}

Rational Rational::operator/(const Rational& o) const {
  if (o.is_zero()) throw std::invalid_argument("Rational: division by zero");
  return Rational(mpq_class(v_ / o.v_));
}

bool Rational::is_integer() const { return v_.get_den() == 1; }

double Rational::log() const {
  int s = sign();
  if (s == 0) return -std::numeric_limits<double>::infinity();
  if (s < 0) throw std::domain_error("Rational::log of negative value");
  return log_mpz(mpz_class(v_.get_num())) - log_mpz(mpz_class(v_.get_den()));
}

std::string Rational::str() const {
  if (v_.get_den() == 1) return v_.get_num().get_str();
  return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

}  // namespace modeseek
