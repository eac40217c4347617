#pragma once

#include "betaspec/admissibility.hpp"
#include "betaspec/cylinder.hpp"
#include "betaspec/parallel.hpp"

#include <map>
#include <numeric>
#include <vector>

namespace betaspec {

/// β_N: the root of 1 = Σ_{i≤N} ω*_i(β) x^{-i}, a Parry number below β.
template <class Real>
struct Approximant {
  BetaBase<Real> parent;
  std::size_t order;
  BetaBase<Real> base;

  /// (ω*_1, ..., ω*_N), the block that project() rewrites.
  Word pattern() const { return parent.unity_expansion(order); }

  /// |1 − Σ ω*_i β_N^{-i}|.
  Real residual() const {
    using std::abs;
    return abs(truncated_unity_sum(parent, order, base.value()) - Real(1));
  }

  static Real truncated_unity_sum(const BetaBase<Real>& parent, std::size_t order, const Real& x) {
    Real y = Real(1) / x;
    Real s(0);
    for (std::size_t i = order; i >= 1; --i) s = (s + Real(parent.unity_digit(i))) * y;
    return s;
  }
};

/// Orders N ≤ max_N with ω*_N ≥ 1 whose truncated equation has a root above 1.
/// The root exceeds 1 exactly when the truncated digits sum to more than 1.
template <class Real>
std::vector<std::size_t> valid_orders(const BetaBase<Real>& base, std::size_t max_N) {
  std::vector<std::size_t> out;
  long long digit_sum = 0;
  for (std::size_t N = 1; N <= max_N; ++N) {
    const int d = base.unity_digit(N);
    digit_sum += d;
    if (d >= 1 && digit_sum > 1) out.push_back(N);
  }
  return out;
}

template <class Real>
Approximant<Real> approximant(const BetaBase<Real>& base, std::size_t N) {
  if (N == 0) throw input_error("approximant order must be positive");
  const int last = base.unity_digit(N);
  long long digit_sum = 0;
  for (std::size_t i = 1; i <= N; ++i) digit_sum += base.unity_digit(i);
  if (last < 1) throw input_error("order " + std::to_string(N) + " is not valid: unity digit is 0");
  if (digit_sum <= 1)
    throw input_error("order " + std::to_string(N) + " is degenerate: the truncated equation has root 1");
  Real lo(1), hi = base.value();
  auto f = [&](const Real& x) { return Approximant<Real>::truncated_unity_sum(base, N, x) - Real(1); };
  for (int it = 0; it < base.precision_bits() + 64; ++it) {
    Real mid = (lo + hi) / 2;
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0)
      lo = mid;
    else
      hi = mid;
  }
  using std::abs;
  Real root = abs(f(lo)) < abs(f(hi)) ? lo : hi;
  if (root <= Real(1) + Real(1e-12))
    throw input_error("order " + std::to_string(N) + " gives a degenerate approximant");
  Word block = base.unity_expansion(N);
  block.back() -= 1;
  Approximant<Real> a{base, N, BetaBase<Real>::parry(root, std::move(block), base.precision_bits())};
  if (a.residual() >= pow2<Real>(-(base.precision_bits() - 16)))
    throw budget_error("approximant root did not converge at the working precision");
  return a;
}

/// π_N: left-to-right, non-overlapping rewrite of (ω*_1..ω*_N) into
/// (ω*_1..ω*_N − 1).
template <class Real>
Word project(const Approximant<Real>& appr, std::span<const int> w) {
  if (!is_admissible(appr.parent, w)) throw input_error("word " + format_word(w) + " is not admissible");
  const Word pat = appr.pattern();
  const std::size_t N = pat.size();
  Word out(w.begin(), w.end());
  std::size_t i = 0;
  while (i < w.size()) {
    if (i + N <= w.size() && std::equal(pat.begin(), pat.end(), w.begin() + static_cast<std::ptrdiff_t>(i))) {
      out[i + N - 1] -= 1;
      i += N;
    } else {
      ++i;
    }
  }
  return out;
}

/// For every image of π_N on Σ_β^n, the number of preimages.
template <class Real>
std::map<Word, std::uint64_t> fiber_counts(const Approximant<Real>& appr, std::size_t n,
                                           const ComputeOptions& opts = {}) {
  check_enumeration_budget(appr.parent, n, opts);
  const auto shards = shard_prefixes(appr.parent, shard_depth(appr.parent, n));
  auto partial = parallel_map(shards.size(), opts.threads, [&](std::size_t s) {
    std::map<Word, std::uint64_t> local;
    for_each_word_with_prefix(appr.parent, n, shards[s],
                              [&](std::span<const int> w) { ++local[project(appr, w)]; });
    return local;
  });
  std::map<Word, std::uint64_t> total;
  for (auto& m : partial)
    for (auto& [k, v] : m) total[k] += v;
  return total;
}

template <class Real>
std::uint64_t fiber_count(const Approximant<Real>& appr, std::span<const int> wbar, const ComputeOptions& opts = {}) {
  const auto all = fiber_counts(appr, wbar.size(), opts);
  auto it = all.find(Word(wbar.begin(), wbar.end()));
  return it == all.end() ? 0 : it->second;
}

/// Whether w·0^N·v is β-admissible; expected to hold for all admissible inputs.
template <class Real>
bool full_concatenation_check(const Approximant<Real>& appr, std::span<const int> w, std::span<const int> v) {
  if (!is_admissible(appr.base, w)) throw input_error("word " + format_word(w) + " is not admissible for β_N");
  if (!is_admissible(appr.parent, v)) throw input_error("word " + format_word(v) + " is not admissible for β");
  const Word joined = concat(concat(w, zeros(appr.order)), v);
  return is_admissible(appr.parent, joined);
}

}  // namespace betaspec
