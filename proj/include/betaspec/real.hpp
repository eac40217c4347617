#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace betaspec {

namespace mp = boost::multiprecision;

/// Binary floating point with a 128-bit mantissa. Expression templates are
/// disabled so that `auto` never captures a dangling expression.
using real128 = mp::number<mp::cpp_bin_float<128, mp::digit_base_2, void, std::int32_t>, mp::et_off>;
using real256 = mp::number<mp::cpp_bin_float<256, mp::digit_base_2, void, std::int32_t>, mp::et_off>;

/// Exact word counts. Σ_β^n grows like β^n, so fixed-width integers overflow
/// long before the dynamic-programming paths become slow.
using count_t = mp::cpp_int;

template <class Real>
constexpr int mantissa_bits() {
  return std::numeric_limits<Real>::digits;
}

template <class Real>
Real pow2(int exponent) {
  using std::ldexp;
  return ldexp(Real(1), exponent);
}

/// β^{-n} by binary exponentiation.
template <class Real>
Real inverse_power(const Real& beta, std::size_t n) {
  Real result(1);
  Real factor = Real(1) / beta;
  while (n != 0) {
    if (n & 1U) result *= factor;
    factor *= factor;
    n >>= 1U;
  }
  return result;
}

template <class Real>
long long floor_to_integer(const Real& x) {
  using std::floor;
  return static_cast<long long>(floor(x));
}

template <class Real>
double to_double(const Real& x) {
  return static_cast<double>(x);
}

/// Decimal rendering that round-trips at the type's precision.
template <class Real>
std::string to_decimal(const Real& x) {
  if constexpr (std::is_floating_point_v<Real>) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", std::numeric_limits<Real>::max_digits10, static_cast<double>(x));
    return buf;
  } else {
    return x.str(std::numeric_limits<Real>::max_digits10, std::ios_base::fmtflags(0));
  }
}

inline std::string to_decimal(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

/// Natural log of an exact count; -inf for zero.
inline double log_count(const count_t& c) {
  if (c.is_zero()) return -std::numeric_limits<double>::infinity();
  const std::size_t bits = mp::msb(c) + 1;
  if (bits <= 1000) return std::log(c.convert_to<long double>());
  const std::size_t shift = bits - 64;
  const count_t top = c >> shift;
  return static_cast<double>(std::log(top.convert_to<long double>()) +
                             static_cast<long double>(shift) * std::log(2.0L));
}

}  // namespace betaspec
