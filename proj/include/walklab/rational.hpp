#pragma once

// Exact rational arithmetic for lattice increment laws. Keeps pmf weights,
// support spacings, and moment identities free of rounding so "mean zero"
// and "weights sum to one" can be checked exactly.

#include <cstdint>
#include <stdexcept>
#include <string>

namespace walklab {

class Rational {
 public:
  constexpr Rational() : num_(0), den_(1) {}
  Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT: implicit on purpose
  Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }

  Rational operator-() const { return Rational(-num_, den_, already_normal_tag{}); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }

  Rational abs() const { return num_ < 0 ? -*this : *this; }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

  // gcd in the rational sense: the generator of the group a*Z + b*Z.
  static Rational gcd(const Rational& a, const Rational& b) {
    if (a.is_zero()) return b.abs();
    if (b.is_zero()) return a.abs();
    const i128 n = gcd_i128(i128(a.num_) * b.den_, i128(b.num_) * a.den_);
    return make(n, i128(a.den_) * b.den_);
  }

 private:
  using i128 = __int128;
  struct already_normal_tag {};
  Rational(std::int64_t n, std::int64_t d, already_normal_tag) : num_(n), den_(d) {}

  static i128 gcd_i128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const i128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static Rational make(i128 n, i128 d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    if (d < 0) { n = -n; d = -d; }
    const i128 g = gcd_i128(n, d);
    if (g > 1) { n /= g; d /= g; }
    constexpr i128 lim = INT64_MAX;
    if (n > lim || n < -lim || d > lim) throw std::overflow_error("rational overflow");
    return Rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d), already_normal_tag{});
  }

  void normalize() { *this = make(num_, den_); }

  std::int64_t num_;
  std::int64_t den_;
};

// Parses "3", "-2", "2/3", "0.25", "-1.5e-2" exactly. Decimal and fraction
// forms always yield the exact rational; anything else is a parse error.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty rational literal");
  const auto bad = [&] { return std::invalid_argument("bad rational literal: " + text); };
  std::size_t slash = text.find('/');
  if (slash != std::string::npos) {
    const Rational n = parse_rational(text.substr(0, slash));
    const Rational d = parse_rational(text.substr(slash + 1));
    return n / d;
  }
  std::size_t pos = 0;
  bool neg = false;
  if (text[pos] == '+' || text[pos] == '-') neg = text[pos++] == '-';
  std::int64_t mantissa = 0;
  int frac_digits = 0;
  bool seen_digit = false, seen_dot = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == '.') {
      if (seen_dot) throw bad();
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      if (mantissa > (INT64_MAX - 9) / 10) throw std::overflow_error("rational literal overflow");
      mantissa = mantissa * 10 + (c - '0');
      if (seen_dot) ++frac_digits;
      seen_digit = true;
    } else if (c == 'e' || c == 'E') {
      break;
    } else {
      throw bad();
    }
  }
  if (!seen_digit) throw bad();
  int exp10 = 0;
  if (pos < text.size()) {  // exponent part
    ++pos;
    bool eneg = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) eneg = text[pos++] == '-';
    if (pos == text.size()) throw bad();
    for (; pos < text.size(); ++pos) {
      if (text[pos] < '0' || text[pos] > '9') throw bad();
      exp10 = exp10 * 10 + (text[pos] - '0');
      if (exp10 > 18) throw std::overflow_error("rational literal overflow");
    }
    if (eneg) exp10 = -exp10;
  }
  Rational r(neg ? -mantissa : mantissa, 1);
  int shift = exp10 - frac_digits;
  std::int64_t pow = 1;
  for (int i = 0; i < (shift < 0 ? -shift : shift); ++i) {
    if (pow > INT64_MAX / 10) throw std::overflow_error("rational literal overflow");
    pow *= 10;
  }
  return shift >= 0 ? r * Rational(pow) : r / Rational(pow);
}

}  // namespace walklab
