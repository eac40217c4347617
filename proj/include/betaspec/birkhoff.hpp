#pragma once

#include "betaspec/expansion.hpp"
#include "betaspec/observable.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace betaspec {

/// S_nψ(x) = Σ_{j<n} ψ(T_β^j x).
template <class Real>
double birkhoff_sum(const BetaBase<Real>& base, const Observable<Real>& psi, const Real& x, std::size_t n) {
  check_unit_interval(x);
  double sum = 0;
  Real y = x;
  for (std::size_t j = 0; j < n; ++j) {
    sum += psi(y);
    y = base.step(y).second;
  }
  return sum;
}

/// ⌈a⌉, treating values within relative 1e-9 of an integer as that integer.
inline long long robust_ceil(double a) {
  const double r = std::round(a);
  if (std::abs(a - r) <= 1e-9 * std::max(1.0, std::abs(a))) return static_cast<long long>(r);
  return static_cast<long long>(std::ceil(a));
}

/// n₀ = ⌈2N‖ψ‖/ε⌉ + 1, past which appending N terms moves the average by less than ε.
inline std::size_t average_stability_bound(double sup_norm, std::size_t N, double eps) {
  if (!(eps > 0)) throw input_error("eps must be positive");
  return static_cast<std::size_t>(robust_ceil(2.0 * static_cast<double>(N) * sup_norm / eps)) + 1;
}

template <class Real>
std::size_t average_stability_bound(const Observable<Real>& psi, std::size_t N, double eps) {
  return average_stability_bound(psi.sup_norm(), N, eps);
}

/// Σ_{k=1}^{n} ω(β^{-k}): how far S_nψ can move across a cylinder of order n.
template <class Real>
double cylinder_sum_slack(const BetaBase<Real>& base, const Observable<Real>& psi, std::size_t n) {
  if (psi.digit_exact()) return 0;
  double slack = 0;
  double scale = 1;
  const double inv = 1.0 / static_cast<double>(base.value());
  for (std::size_t k = 1; k <= n; ++k) {
    scale *= inv;
    slack += psi.continuity()(scale);
  }
  return slack;
}

/// Running averages S_nψ(x)/n for n = 1..depth.
struct RunningAverageTrace {
  std::string point;
  std::vector<double> averages;  // averages[n-1] = S_n/n
  std::size_t window_begin = 1;  // first n of the estimation window
  double liminf_est = 0;
  double limsup_est = 0;

  double average(std::size_t n) const { return averages.at(n - 1); }
};

inline void finish_trace(RunningAverageTrace& trace) {
  const std::size_t depth = trace.averages.size();
  trace.window_begin = std::max<std::size_t>(1, depth / 2);
  auto first = trace.averages.begin() + static_cast<std::ptrdiff_t>(trace.window_begin - 1);
  auto [lo, hi] = std::minmax_element(first, trace.averages.end());
  trace.liminf_est = *lo;
  trace.limsup_est = *hi;
}

template <class Real>
RunningAverageTrace accumulation_trace(const BetaBase<Real>& base, const Observable<Real>& psi, const Real& x,
                                       std::size_t depth) {
  check_unit_interval(x);
  if (depth == 0) throw input_error("depth must be positive");
  RunningAverageTrace trace;
  trace.point = to_decimal(x);
  trace.averages.resize(depth);
  double sum = 0;
  Real y = x;
  for (std::size_t n = 1; n <= depth; ++n) {
    sum += psi(y);
    trace.averages[n - 1] = sum / static_cast<double>(n);
    y = base.step(y).second;
  }
  finish_trace(trace);
  return trace;
}

/// Visits T^j x for j < count, where x has the given digit string (zeros
/// beyond its end). Points are rebuilt from a digit window every few steps so
/// rounding does not compound over long orbits.
template <class Real, class Fn>
void for_each_orbit_point(const BetaBase<Real>& base, std::span<const int> digits, std::size_t count, Fn&& fn) {
  const double bits_per_digit = base.log_value() / std::log(2.0);
  const std::size_t window = static_cast<std::size_t>(std::ceil((base.precision_bits() + 8) / bits_per_digit)) + 1;
  const std::size_t reseed = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(24.0 / bits_per_digit)));
  auto digit = [&](std::size_t i) { return i < digits.size() ? digits[i] : 0; };
  Real x(0);
  for (std::size_t j = 0; j < count; ++j) {
    if (j % reseed == 0) {
      x = 0;
      for (std::size_t i = j + window; i-- > j;) x = (x + Real(digit(i))) / base.value();
    } else {
      x = x * base.value() - Real(digit(j - 1));
      if (x < 0) x = 0;
    }
    fn(j, x);
  }
}

/// Running averages along the point whose digits are `digits`; the depth is
/// the length of the string.
template <class Real>
RunningAverageTrace accumulation_trace_digits(const BetaBase<Real>& base, const Observable<Real>& psi,
                                              std::span<const int> digits) {
  if (digits.empty()) throw input_error("digit string must be nonempty");
  RunningAverageTrace trace;
  trace.point = "digits:" + std::to_string(digits.size());
  trace.averages.resize(digits.size());
  double sum = 0;
  if (psi.digit_exact()) {
    for (std::size_t n = 1; n <= digits.size(); ++n) {
      sum += digits[n - 1];
      trace.averages[n - 1] = sum / static_cast<double>(n);
    }
  } else {
    for_each_orbit_point(base, digits, digits.size(), [&](std::size_t j, const Real& x) {
      sum += psi(x);
      trace.averages[j] = sum / static_cast<double>(j + 1);
    });
  }
  finish_trace(trace);
  return trace;
}

/// Largest distance from a value in [lo, hi] to the nearest recorded average.
inline double interval_filling_gap(const RunningAverageTrace& trace, double lo, double hi) {
  if (lo > hi) return 0;
  std::vector<double> v(trace.averages);
  std::sort(v.begin(), v.end());
  auto dist = [&](double t) {
    auto it = std::lower_bound(v.begin(), v.end(), t);
    double d = std::numeric_limits<double>::infinity();
    if (it != v.end()) d = std::min(d, *it - t);
    if (it != v.begin()) d = std::min(d, t - *(it - 1));
    return d;
  };
  double worst = std::max(dist(lo), dist(hi));
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double mid = 0.5 * (v[i - 1] + v[i]);
    if (mid > lo && mid < hi) worst = std::max(worst, dist(mid));
  }
  return worst;
}

}  // namespace betaspec
