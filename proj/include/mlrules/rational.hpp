#pragma once

#include <cstdint>
#include <compare>
#include <ostream>
#include <string>
#include <string_view>

namespace mlrules {

/// Exact fraction with a positive denominator, always stored in lowest terms.
///
/// Scores are compared exactly so that tie-breaking in the head search and the
/// covering loop does not depend on floating-point rounding. Arithmetic runs in
/// 128-bit intermediates; a result that does not fit back into 64 bits throws
/// std::overflow_error.
class Rational {
public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  [[nodiscard]] std::int64_t num() const { return num_; }
  [[nodiscard]] std::int64_t den() const { return den_; }
  [[nodiscard]] double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  [[nodiscard]] bool is_zero() const { return num_ == 0; }

  /// "a/b", or "a" when the denominator is 1.
  [[nodiscard]] std::string str() const;

  /// Parses "a/b", an integer, or a plain decimal such as "0.25" exactly.
  static Rational parse(std::string_view text);

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational& operator+=(const Rational& o) { return *this = *this + o; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

private:
  static Rational from_wide(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

}  // namespace mlrules
