#pragma once

#include "betaspec/beta_base.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace betaspec {

/// Runs the admissibility automaton over `w`; nullopt if some tail of w·0^∞
/// exceeds d*(β).
template <class Real>
std::optional<std::size_t> scan_state(const BetaBase<Real>& base, std::span<const int> w,
                                      std::size_t start = 0) {
  std::size_t state = start;
  for (int d : w) {
    auto next = base.advance(state, d);
    if (!next) return std::nullopt;
    state = *next;
  }
  return state;
}

template <class Real>
bool is_admissible(const BetaBase<Real>& base, std::span<const int> w) {
  for (int d : w)
    if (d < 0) return false;
  return scan_state(base, w).has_value();
}

/// Largest admissible word that is ≤_lex w, of the same length.
template <class Real>
Word clamp_to_admissible(const BetaBase<Real>& base, Word w) {
  std::size_t state = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const int bound = base.digit_bound(state);
    if (w[i] > bound) {
      for (std::size_t k = i; k < w.size(); ++k) {
        w[k] = base.digit_bound(state);
        state = *base.advance(state, w[k]);
      }
      break;
    }
    state = *base.advance(state, w[i]);
  }
  return w;
}

/// Limits on exhaustive work.
struct ComputeOptions {
  double enum_budget = 1e8;
  unsigned threads = 1;
};

/// Throws when ⌈β⌉^n exceeds the enumeration budget.
template <class Real>
void check_enumeration_budget(const BetaBase<Real>& base, std::size_t n, const ComputeOptions& opts) {
  const double words = std::pow(static_cast<double>(base.max_digit() + 1), static_cast<double>(n));
  if (words > opts.enum_budget)
    throw budget_error("enumerating words of length " + std::to_string(n) + " may visit " +
                       std::to_string(words) + " words, above the budget of " +
                       std::to_string(opts.enum_budget));
}

/// Depth-first walk over every admissible word of length n extending
/// `prefix`, in lexicographic order. The visitor receives each word.
template <class Real, class Visitor>
void for_each_word_with_prefix(const BetaBase<Real>& base, std::size_t n, std::span<const int> prefix,
                               Visitor&& visit) {
  auto start = scan_state(base, prefix);
  if (!start || prefix.size() > n) return;
  Word word(prefix.begin(), prefix.end());
  word.resize(n, 0);
  const std::size_t depth0 = prefix.size();
  if (depth0 == n) {
    visit(std::span<const int>(word));
    return;
  }
  std::vector<std::size_t> states(n + 1, 0);
  std::vector<int> bounds(n + 1, 0);
  states[depth0] = *start;
  std::size_t pos = depth0;
  bounds[pos] = base.digit_bound(states[pos]);
  word[pos] = 0;
  while (true) {
    if (word[pos] <= bounds[pos]) {
      states[pos + 1] = (word[pos] < bounds[pos]) ? 0 : base.normalize(states[pos] + 1);
      if (pos + 1 == n) {
        visit(std::span<const int>(word));
        ++word[pos];
        continue;
      }
      ++pos;
      word[pos] = 0;
      bounds[pos] = base.digit_bound(states[pos]);
      continue;
    }
    if (pos == depth0) break;
    --pos;
    ++word[pos];
  }
}

template <class Real, class Visitor>
void for_each_word(const BetaBase<Real>& base, std::size_t n, Visitor&& visit,
                   const ComputeOptions& opts = {}) {
  check_enumeration_budget(base, n, opts);
  for_each_word_with_prefix(base, n, std::span<const int>(), std::forward<Visitor>(visit));
}

template <class Real>
std::vector<Word> enumerate_words(const BetaBase<Real>& base, std::size_t n, const ComputeOptions& opts = {}) {
  if (n == 0) throw input_error("word length must be positive");
  std::vector<Word> out;
  for_each_word(base, n, [&](std::span<const int> w) { out.emplace_back(w.begin(), w.end()); }, opts);
  return out;
}

/// Admissible prefixes of length `len`, used to shard enumerations.
template <class Real>
std::vector<Word> shard_prefixes(const BetaBase<Real>& base, std::size_t len) {
  std::vector<Word> out;
  if (len == 0) {
    out.emplace_back();
    return out;
  }
  for_each_word_with_prefix(base, len, std::span<const int>(),
                            [&](std::span<const int> w) { out.emplace_back(w.begin(), w.end()); });
  return out;
}

/// Prefix length giving a few dozen shards without exceeding n.
template <class Real>
std::size_t shard_depth(const BetaBase<Real>& base, std::size_t n) {
  const double per_digit = std::max(1.0, base.log_value() / std::log(2.0));
  const std::size_t depth = static_cast<std::size_t>(std::ceil(6.0 / per_digit));
  return std::min(n, depth);
}

/// Word counts by digit sum: result[s] = #{w ∈ Σ_β^n : Σ w_i = s}.
/// Dynamic programming over (automaton state, partial sum).
template <class Real>
std::vector<count_t> digit_sum_distribution(const BetaBase<Real>& base, std::size_t n) {
  const std::size_t max_sum = n * static_cast<std::size_t>(base.max_digit());
  const std::size_t states = base.parry_period() ? *base.parry_period() : n + 1;
  std::vector<std::vector<count_t>> cur(states), next(states);
  std::vector<std::size_t> reach(states, 0);  // highest reachable sum per state
  cur[0].assign(1, count_t(1));
  std::vector<bool> live(states, false);
  live[0] = true;
  for (std::size_t step = 0; step < n; ++step) {
    for (auto& v : next) v.clear();
    std::vector<bool> next_live(states, false);
    for (std::size_t j = 0; j < states; ++j) {
      if (!live[j]) continue;
      const int bound = base.digit_bound(j);
      const std::size_t tied = base.normalize(j + 1);
      const auto& src = cur[j];
      auto& zero = next[0];
      auto& up = next[tied];
      const std::size_t need0 = src.size() + static_cast<std::size_t>(std::max(0, bound - 1));
      if (bound > 0 && zero.size() < need0) zero.resize(need0);
      if (up.size() < src.size() + static_cast<std::size_t>(bound)) up.resize(src.size() + bound);
      for (std::size_t s = 0; s < src.size(); ++s) {
        if (src[s].is_zero()) continue;
        for (int d = 0; d < bound; ++d) zero[s + d] += src[s];
        up[s + bound] += src[s];
      }
      if (bound > 0) next_live[0] = true;
      next_live[tied] = true;
    }
    std::swap(cur, next);
    live = next_live;
  }
  std::vector<count_t> dist(max_sum + 1);
  for (std::size_t j = 0; j < states; ++j)
    for (std::size_t s = 0; s < cur[j].size() && s <= max_sum; ++s) dist[s] += cur[j][s];
  return dist;
}

/// #Σ_β^n without enumeration.
template <class Real>
count_t count_words(const BetaBase<Real>& base, std::size_t n) {
  const std::size_t states = base.parry_period() ? *base.parry_period() : n + 1;
  std::vector<count_t> cur(states), next(states);
  cur[0] = 1;
  for (std::size_t step = 0; step < n; ++step) {
    for (auto& c : next) c = 0;
    for (std::size_t j = 0; j < states; ++j) {
      if (cur[j].is_zero()) continue;
      const int bound = base.digit_bound(j);
      if (bound > 0) next[0] += cur[j] * bound;
      next[base.normalize(j + 1)] += cur[j];
    }
    std::swap(cur, next);
  }
  count_t total = 0;
  for (auto& c : cur) total += c;
  return total;
}

}  // namespace betaspec
