#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace modeseek {

/// Exact rational number. Probabilities constructed from rationals stay exact
/// until they cross the log-space model boundary.
class Rational {
 public:
  Rational() : v_(0) {}
  Rational(long num, long den);
  explicit Rational(long n) : v_(n) {}
  explicit Rational(mpq_class v);

  // Accepts "p/q", plain integers, decimals ("0.25") and scientific
  // notation ("1e-4"), all parsed exactly.
  static Rational parse(std::string_view text);
  static Rational pow2(unsigned exponent);
  static Rational zero() { return Rational(); }
  static Rational one() { return Rational(1); }

  Rational operator+(const Rational& o) const { return Rational(mpq_class(v_ + o.v_)); }
  Rational operator-(const Rational& o) const { return Rational(mpq_class(v_ - o.v_)); }
  Rational operator*(const Rational& o) const { return Rational(mpq_class(v_ * o.v_)); }
  Rational operator/(const Rational& o) const;
  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }

  bool operator==(const Rational& o) const { return v_ == o.v_; }
  bool operator!=(const Rational& o) const { return v_ != o.v_; }
  bool operator<(const Rational& o) const { return v_ < o.v_; }
  bool operator<=(const Rational& o) const { return v_ <= o.v_; }
  bool operator>(const Rational& o) const { return v_ > o.v_; }
  bool operator>=(const Rational& o) const { return v_ >= o.v_; }

  int sign() const { return sgn(v_); }
  bool is_zero() const { return sign() == 0; }
  bool is_integer() const;

  double to_double() const { return v_.get_d(); }
  double log() const;  // natural log; -inf for zero

  /// Canonical text form: "p/q", or just "p" when the denominator is 1.
  std::string str() const;

  const mpq_class& raw() const { return v_; }

 private:
  mpq_class v_;
};

}  // namespace modeseek
