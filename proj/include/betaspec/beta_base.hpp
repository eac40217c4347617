#pragma once

#include "betaspec/errors.hpp"
#include "betaspec/real.hpp"
#include "betaspec/word.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>

namespace betaspec {

/// A base β > 1 with its quasi-greedy expansion of unity d*(β).
///
/// For Parry numbers d* is stored as one period; otherwise as the prefix
/// that the working precision can certify. Admissibility is tracked by a
/// small automaton whose state is the length of the longest suffix still
/// tied with a prefix of d*.
template <class Real>
class BetaBase {
 public:
  using state_type = std::size_t;

  explicit BetaBase(const Real& value, int precision_bits = mantissa_bits<Real>())
      : value_(value), precision_(precision_bits) {
    init_common();
    compute_unity();
  }

  /// A Parry base whose d* is `block` repeated. No greedy run is performed.
  static BetaBase parry(const Real& value, Word block, int precision_bits = mantissa_bits<Real>()) {
    if (block.empty()) throw input_error("periodic unity block must be nonempty");
    BetaBase b(value, precision_bits, tag{});
    b.unity_ = std::move(block);
    b.period_ = b.unity_.size();
    b.greedy_ = b.unity_;
    b.greedy_.back() += 1;
    b.depth_ = std::numeric_limits<std::size_t>::max();
    return b;
  }

  const Real& value() const noexcept { return value_; }
  int precision_bits() const noexcept { return precision_; }
  /// Remainders below this are treated as zero: 2^{-(p-8)}.
  const Real& zero_threshold() const noexcept { return threshold_; }
  /// ⌈β⌉ − 1.
  int max_digit() const noexcept { return max_digit_; }
  double log_value() const noexcept { return log_beta_; }
  std::optional<std::size_t> parry_period() const noexcept { return period_; }
  /// Number of unity digits that can be trusted (unbounded for Parry bases).
  std::size_t reliable_depth() const noexcept { return depth_; }
  /// Greedy digits of 1: the terminating expansion for Parry bases.
  const Word& greedy_unity() const noexcept { return greedy_; }

  /// ω*_k(β), 1-based.
  int unity_digit(std::size_t k) const {
    if (k == 0) throw input_error("unity digits are indexed from 1");
    if (period_) return unity_[(k - 1) % *period_];
    if (k > depth_)
      throw budget_error("expansion of unity requested to depth " + std::to_string(k) +
                         " but only " + std::to_string(depth_) + " digits are reliable at " +
                         std::to_string(precision_) + " bits");
    return unity_[k - 1];
  }

  Word unity_expansion(std::size_t depth) const {
    Word out(depth);
    for (std::size_t k = 1; k <= depth; ++k) out[k - 1] = unity_digit(k);
    return out;
  }

  /// One greedy step: (⌊βx⌋, βx − ⌊βx⌋), snapping βx up to the next integer
  /// when it falls within the zero threshold below it. `cap` bounds the digit.
  std::pair<int, Real> step(const Real& x, int cap) const {
    using std::floor;
    Real t = value_ * x;
    Real fl = floor(t);
    int d = static_cast<int>(fl);
    Real rem = t - fl;
    if (d + 1 <= cap && Real(1) - rem <= threshold_) {
      ++d;
      rem = 0;
    }
    if (d > cap) {
      d = cap;
      rem = t - Real(cap);
      if (rem >= Real(1)) rem = Real(1) - threshold_;
    }
    if (rem < 0) rem = 0;
    return {d, rem};
  }

  std::pair<int, Real> step(const Real& x) const { return step(x, max_digit_); }

  /// Largest digit allowed after `state` tied digits.
  int digit_bound(state_type state) const { return unity_digit(state + 1); }

  /// Next automaton state, or nullopt when `digit` breaks admissibility.
  std::optional<state_type> advance(state_type state, int digit) const {
    const int bound = digit_bound(state);
    if (digit > bound || digit < 0) return std::nullopt;
    if (digit < bound) return state_type{0};
    return normalize(state + 1);
  }

  state_type normalize(state_type state) const noexcept {
    if (period_) return state % *period_;
    return state;
  }

  /// Σ_{i≥1} ω*_{state+i} β^{-i}: the relative length of a cylinder whose
  /// word ends in `state` tied digits. Equals 1 exactly for full cylinders.
  Real tail_value(state_type state) const {
    state = normalize(state);
    Real v(1);
    for (state_type i = 1; i <= state; ++i) v = v * value_ - Real(unity_digit(i));
    return v;
  }

 private:
  struct tag {};
  BetaBase(const Real& value, int precision_bits, tag) : value_(value), precision_(precision_bits) {
    init_common();
  }

  void init_common() {
    using std::floor;
    if (!(value_ > Real(1))) throw domain_error("base must exceed 1, got " + to_decimal(value_));
    if (precision_ < 16) throw input_error("precision must be at least 16 bits");
    threshold_ = pow2<Real>(-(precision_ - 8));
    const Real fl = floor(value_);
    max_digit_ = static_cast<int>(fl) - (fl == value_ ? 1 : 0);
    log_beta_ = std::log(static_cast<double>(value_));
  }

  void compute_unity() {
    const double bits_per_digit = log_beta_ / std::log(2.0);
    const std::size_t cap = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor((precision_ - 16) / bits_per_digit)));
    Real r(1);
    for (std::size_t k = 1; k <= cap; ++k) {
      auto [d, rem] = step(r, std::numeric_limits<int>::max());
      greedy_.push_back(d);
      r = rem;
      if (r < threshold_) {
        unity_ = greedy_;
        unity_.back() -= 1;
        period_ = k;
        depth_ = std::numeric_limits<std::size_t>::max();
        return;
      }
    }
    unity_ = greedy_;
    depth_ = cap;
  }

  Real value_;
  int precision_;
  Real threshold_;
  int max_digit_ = 0;
  double log_beta_ = 0;
  Word unity_;
  Word greedy_;
  std::optional<std::size_t> period_;
  std::size_t depth_ = 0;
};

/// Parses a decimal string into a base.
template <class Real>
BetaBase<Real> parse_base(std::string_view text, int precision_bits = mantissa_bits<Real>());

template <class Real>
Real parse_real(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t lead = 0;
  while (lead < s.size() && std::isspace(static_cast<unsigned char>(s[lead]))) ++lead;
  s = s.substr(lead);
  bool ok = !s.empty();
  for (char c : s)
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E'))
      ok = false;
  if (!ok) throw input_error("malformed decimal number: '" + std::string(text) + "'");
  try {
    if constexpr (std::is_floating_point_v<Real>) {
      return static_cast<Real>(std::stold(s));
    } else {
      return Real(s);
    }
  } catch (const std::exception&) {
    throw input_error("malformed decimal number: '" + std::string(text) + "'");
  }
}

template <class Real>
BetaBase<Real> parse_base(std::string_view text, int precision_bits) {
  return BetaBase<Real>(parse_real<Real>(text), precision_bits);
}

}  // namespace betaspec
