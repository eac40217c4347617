#pragma once

#include "betaspec/box_dimension.hpp"
#include "betaspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <vector>

namespace betaspec {

struct ScheduleOptions {
  double eps_start = 0.1;
  double eps_ratio = 0.9;
  std::size_t eps_steps = 12;
  std::size_t max_order = 24;
  std::size_t n_cap = 512;
  double n_growth = 1.25;
  std::uint64_t growth_factor = 16;
  double ref_eps0 = 0.25;
  std::size_t ref_levels = 4;
  std::size_t ref_enum_cap = 1U << 18;  // largest enumeration used for continuous references
  ComputeOptions compute;
};

struct CantorStage {
  std::size_t k = 0;
  double target = 0;
  double eps = 0;
  std::size_t N = 0;
  std::size_t n = 0;
  std::uint64_t ell = 0;
  count_t pool_size;
  double estimate = 0;   // log #F_N(n, target, eps) / (n log β)
  double reference = 0;  // reference value of the spectrum at target
  double deviation = 0;  // |estimate − reference|

  std::uint64_t word_length() const { return n + N; }
};

struct CantorSchedule {
  double a = 0, b = 0, delta = 0;
  std::uint64_t growth_factor = 16;
  std::vector<CantorStage> stages;
  bool feasible = true;
  double achieved_delta = 0;
  double reference_a = 0, reference_b = 0;

  /// t_k = Σ_{j≤k} ℓ_j (n_j + N_j); t_0 = 0.
  std::uint64_t checkpoint(std::size_t k) const {
    std::uint64_t t = 0;
    for (std::size_t j = 0; j < k && j < stages.size(); ++j) t += stages[j].ell * stages[j].word_length();
    return t;
  }
  std::uint64_t total_levels() const {
    std::uint64_t l = 0;
    for (const auto& s : stages) l += s.ell;
    return l;
  }
};

/// Violations of the schedule's structural inequalities; empty when sound.
inline std::vector<std::string> audit_schedule(const CantorSchedule& s) {
  std::vector<std::string> issues;
  for (std::size_t k = 0; k < s.stages.size(); ++k) {
    const auto& st = s.stages[k];
    const std::string tag = "stage " + std::to_string(k + 1) + ": ";
    if (k > 0 && !(st.eps < s.stages[k - 1].eps)) issues.push_back(tag + "eps does not decrease");
    if (k > 0 && !(st.N > s.stages[k - 1].N)) issues.push_back(tag + "order does not increase");
    if (static_cast<double>(st.n) < (1 - s.delta) * static_cast<double>(st.word_length()) - 1e-12)
      issues.push_back(tag + "n/(n+N) below 1-delta");
    const std::uint64_t next_len = k + 1 < s.stages.size() ? s.stages[k + 1].word_length() : st.word_length();
    if (st.ell < s.growth_factor * next_len) issues.push_back(tag + "level count below growth x next word length");
    if (st.ell < s.growth_factor * s.checkpoint(k)) issues.push_back(tag + "level count below growth x prior depth");
  }
  return issues;
}

namespace detail {

template <class Real>
bool in_band(std::size_t sum, std::size_t n, double alpha, double eps) {
  return digit_sum_in_band<Real>(sum, n, alpha, eps);
}

/// Largest |s/(n+N) − target| over achievable in-band digit sums, or -1 if none.
template <class Real>
double digit_block_deviation(const std::vector<count_t>& dist, std::size_t n, std::size_t N, double target, double eps) {
  double worst = -1;
  for (std::size_t s = 0; s < dist.size(); ++s) {
    if (dist[s].is_zero() || !in_band<Real>(s, n, target, eps)) continue;
    worst = std::max(worst, std::abs(static_cast<double>(s) / static_cast<double>(n + N) - target));
  }
  return worst;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw budget_error("schedule lengths overflow 64-bit digit counts");
  return r;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw budget_error("schedule lengths overflow 64-bit digit counts");
  return r;
}

}  // namespace detail

/// Reference value of the spectrum at α: the diagonal of the default
/// (ε, n) ladder, truncated to what the base and budget allow.
template <class Real>
double reference_spectrum(const BetaBase<Real>& base, const Observable<Real>& psi, double alpha,
                          const ScheduleOptions& opt) {
  std::size_t n_cap = opt.n_cap;
  if (!base.parry_period()) n_cap = std::min(n_cap, base.reliable_depth());
  if (!psi.digit_exact()) {
    const double per = std::log(static_cast<double>(base.max_digit() + 1));
    const double budget = std::min(opt.compute.enum_budget, static_cast<double>(opt.ref_enum_cap));
    n_cap = std::min<std::size_t>(n_cap, static_cast<std::size_t>(std::floor(std::log(budget) / per)));
  }
  std::vector<ScheduleEntry> ladder;
  for (const auto& e : default_h_schedule(opt.ref_eps0, opt.ref_levels))
    if (e.n <= n_cap) ladder.push_back(e);
  if (ladder.empty()) ladder.push_back({opt.ref_eps0, std::max<std::size_t>(1, n_cap), {}});
  const double h = h_estimate(base, psi, alpha, ladder, opt.compute).estimate;
  return std::isfinite(h) ? h : 0.0;
}

/// Chooses (ε_k, N_k, n_k) stage by stage, trying ε first, then N, then n,
/// until the counting estimate at the stage target is within δ of the
/// reference, then sets the level counts ℓ_k by the growth rule.
template <class Real>
CantorSchedule make_schedule(const BetaBase<Real>& base, const Observable<Real>& psi, double a, double b,
                             double delta, std::size_t stages, const ScheduleOptions& opt = {}) {
  if (!(delta > 0 && delta < 0.5)) throw input_error("delta must lie in (0, 0.5)");
  if (a > b) throw input_error("interval endpoints must satisfy a <= b");
  if (stages == 0) throw input_error("at least one stage is required");
  if (opt.growth_factor == 0) throw input_error("growth factor must be positive");
  if (!(opt.eps_ratio > 0 && opt.eps_ratio < 1)) throw input_error("eps ratio must lie in (0, 1)");

  const std::size_t n_range = psi.digit_exact() ? 64 : std::min<std::size_t>(12, opt.n_cap);
  const LpsiInterval range = estimate_Lpsi(base, psi, n_range, opt.compute);
  if (a < range.lo - 1e-12 || b > range.hi + 1e-12)
    throw input_error("[" + to_decimal(a) + ", " + to_decimal(b) + "] is not inside the estimated range [" +
                      to_decimal(range.lo) + ", " + to_decimal(range.hi) + "]");

  CantorSchedule sched;
  sched.a = a;
  sched.b = b;
  sched.delta = delta;
  sched.growth_factor = opt.growth_factor;
  sched.reference_a = reference_spectrum(base, psi, a, opt);
  sched.reference_b = a == b ? sched.reference_a : reference_spectrum(base, psi, b, opt);

  std::vector<std::size_t> orders;
  for (std::size_t N = 1; N <= opt.max_order; ++N) {
    try {
      const auto v = valid_orders(base, N);
      if (!v.empty() && v.back() == N) orders.push_back(N);
    } catch (const budget_error&) {
      break;
    }
  }

  std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<SpectrumCurve<Real>>> cache;
  auto curve_for = [&](std::size_t N, std::size_t n) {
    auto& slot = cache[{N, n}];
    if (!slot) slot = std::make_shared<SpectrumCurve<Real>>(base, psi, n, N, opt.compute);
    return slot;
  };

  double eps_prev = 0;
  std::size_t N_prev = 0;
  for (std::size_t k = 1; k <= stages; ++k) {
    const double target = (k % 2 == 1) ? a : b;
    const double reference = (k % 2 == 1) ? sched.reference_a : sched.reference_b;
    std::optional<CantorStage> best;
    bool found = false;
    for (std::size_t s = 0; s < opt.eps_steps && !found; ++s) {
      const double eps = k == 1 ? opt.eps_start * std::pow(opt.eps_ratio, static_cast<double>(s))
                                : eps_prev * std::pow(opt.eps_ratio, static_cast<double>(s + 1));
      for (std::size_t N : orders) {
        if (found) break;
        if (N <= N_prev) continue;
        const std::size_t n_min = std::max<std::size_t>(
            {static_cast<std::size_t>(robust_ceil(static_cast<double>(N) * (1 - delta) / delta)),
             average_stability_bound(psi, N, eps), std::size_t{1}});
        for (std::size_t n = n_min; n <= opt.n_cap && !found;
             n = std::max(n + 1, static_cast<std::size_t>(std::ceil(static_cast<double>(n) * opt.n_growth)))) {
          std::shared_ptr<SpectrumCurve<Real>> curve;
          try {
            curve = curve_for(N, n);
          } catch (const budget_error&) {
            break;
          }
          const SpectrumPoint p = curve->point(target, eps);
          if (p.count < 2) continue;
          if (psi.digit_exact()) {
            const double dev = detail::digit_block_deviation<Real>(curve->distribution(), n, N, target, eps);
            if (!(dev < 2 * eps)) continue;
          } else {
            const double slack = cylinder_sum_slack(base, psi, n) / static_cast<double>(n);
            if (2 * slack + 2.0 * N * psi.sup_norm() / static_cast<double>(n + N) > eps) continue;
          }
          CantorStage cand;
          cand.k = k;
          cand.target = target;
          cand.eps = eps;
          cand.N = N;
          cand.n = n;
          cand.pool_size = p.count;
          cand.estimate = p.estimate;
          cand.reference = reference;
          cand.deviation = std::abs(p.estimate - reference);
          if (!best || cand.deviation < best->deviation) best = cand;
          if (cand.deviation < delta) {
            best = cand;
            found = true;
          }
        }
      }
    }
    if (!best) throw schedule_infeasible("stage " + std::to_string(k) + ": no candidate pool with two or more words");
    if (!found) sched.feasible = false;
    sched.stages.push_back(*best);
    eps_prev = best->eps;
    N_prev = best->N;
  }

  std::uint64_t t = 0;
  for (std::size_t k = 0; k < sched.stages.size(); ++k) {
    auto& st = sched.stages[k];
    const std::uint64_t next_len = k + 1 < sched.stages.size() ? sched.stages[k + 1].word_length() : st.word_length();
    st.ell = detail::checked_mul(opt.growth_factor, std::max<std::uint64_t>({next_len, t, 1}));
    t = detail::checked_add(t, detail::checked_mul(st.ell, st.word_length()));
  }
  sched.achieved_delta = 0;
  for (const auto& st : sched.stages) sched.achieved_delta = std::max(sched.achieved_delta, st.deviation);
  return sched;
}

/// Weighted completion counts over (position, automaton state, partial sum)
/// for words of length n whose digit sum lands in an allowed set. Doubles
/// suffice for sampling; exact counts come from the forward pass.
template <class Real>
class CompletionTable {
 public:
  CompletionTable(const BetaBase<Real>& counting, std::size_t n, std::vector<char> allowed)
      : base_(counting), n_(n), digits_(static_cast<std::size_t>(counting.max_digit())), allowed_(std::move(allowed)) {
    if (!counting.parry_period()) throw input_error("pool tables need a Parry base");
    states_ = *counting.parry_period();
    if (static_cast<double>(n) * std::log2(static_cast<double>(digits_ + 1)) > 1000)
      throw budget_error("pool word length too large for completion tables");
    layers_.resize(n + 1);
    layers_[n].assign(states_ * width(n), 0.0);
    for (std::size_t j = 0; j < states_; ++j)
      for (std::size_t s = 0; s < width(n); ++s)
        if (s < allowed_.size() && allowed_[s]) layers_[n][j * width(n) + s] = 1.0;
    for (std::size_t pos = n; pos-- > 0;) {
      layers_[pos].assign(states_ * width(pos), 0.0);
      for (std::size_t j = 0; j < states_; ++j) {
        const int bound = base_.digit_bound(j);
        for (std::size_t s = 0; s < width(pos); ++s) {
          double c = 0;
          for (int d = 0; d <= bound; ++d) c += at(pos + 1, next_state(j, d, bound), s + d);
          layers_[pos][j * width(pos) + s] = c;
        }
      }
    }
  }

  double total() const { return at(0, 0, 0); }
  std::size_t length() const noexcept { return n_; }

  double at(std::size_t pos, std::size_t state, std::size_t sum) const {
    if (sum >= width(pos)) return 0;
    return layers_[pos][state * width(pos) + sum];
  }

  template <class Rng>
  Word sample(Rng& rng) const {
    if (!(total() > 0)) throw input_error("cannot sample from an empty pool");
    Word w(n_);
    std::size_t state = 0, sum = 0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t pos = 0; pos < n_; ++pos) {
      const int bound = base_.digit_bound(state);
      const double here = at(pos, state, sum);
      double u = unit(rng) * here;
      int chosen = -1;
      for (int d = 0; d <= bound; ++d) {
        const double c = at(pos + 1, next_state(state, d, bound), sum + d);
        if (c <= 0) continue;
        chosen = d;
        if (u < c) break;
        u -= c;
      }
      w[pos] = chosen;
      state = next_state(state, chosen, bound);
      sum += static_cast<std::size_t>(chosen);
    }
    return w;
  }

  /// Lexicographically first (or last) word in the pool.
  Word extreme(bool last) const {
    if (!(total() > 0)) throw input_error("pool is empty");
    Word w(n_);
    std::size_t state = 0, sum = 0;
    for (std::size_t pos = 0; pos < n_; ++pos) {
      const int bound = base_.digit_bound(state);
      int chosen = -1;
      for (int i = 0; i <= bound; ++i) {
        const int d = last ? bound - i : i;
        if (at(pos + 1, next_state(state, d, bound), sum + d) > 0) {
          chosen = d;
          break;
        }
      }
      w[pos] = chosen;
      state = next_state(state, chosen, bound);
      sum += static_cast<std::size_t>(chosen);
    }
    return w;
  }

  /// All words in lexicographic order.
  template <class Fn>
  void for_each(Fn&& fn) const {
    Word w(n_);
    walk(0, 0, 0, w, fn);
  }

  /// Exact number of distinct r-digit prefixes of pool words, r = 0..n.
  std::vector<count_t> prefix_counts() const {
    std::vector<count_t> out(n_ + 1);
    std::vector<count_t> cur(states_ * width(0)), next;
    cur[0] = 1;
    for (std::size_t pos = 0;; ++pos) {
      count_t live = 0;
      for (std::size_t j = 0; j < states_; ++j)
        for (std::size_t s = 0; s < width(pos); ++s)
          if (!cur[j * width(pos) + s].is_zero() && at(pos, j, s) > 0) live += cur[j * width(pos) + s];
      out[pos] = live;
      if (pos == n_) break;
      next.assign(states_ * width(pos + 1), count_t(0));
      for (std::size_t j = 0; j < states_; ++j) {
        const int bound = base_.digit_bound(j);
        for (std::size_t s = 0; s < width(pos); ++s) {
          const count_t& c = cur[j * width(pos) + s];
          if (c.is_zero() || !(at(pos, j, s) > 0)) continue;
          for (int d = 0; d <= bound; ++d) next[next_state(j, d, bound) * width(pos + 1) + s + d] += c;
        }
      }
      std::swap(cur, next);
    }
    return out;
  }

 private:
  std::size_t width(std::size_t pos) const { return pos * digits_ + 1; }
  std::size_t next_state(std::size_t j, int d, int bound) const {
    return d < bound ? 0 : base_.normalize(j + 1);
  }

  template <class Fn>
  void walk(std::size_t pos, std::size_t state, std::size_t sum, Word& w, Fn& fn) const {
    if (pos == n_) {
      fn(static_cast<const Word&>(w));
      return;
    }
    const int bound = base_.digit_bound(state);
    for (int d = 0; d <= bound; ++d) {
      const std::size_t nxt = next_state(state, d, bound);
      if (!(at(pos + 1, nxt, sum + d) > 0)) continue;
      w[pos] = d;
      walk(pos + 1, nxt, sum + d, w, fn);
    }
  }

  BetaBase<Real> base_;
  std::size_t n_;
  std::size_t digits_;
  std::size_t states_ = 1;
  std::vector<char> allowed_;
  std::vector<std::vector<double>> layers_;
};

/// Words (v, 0^N) with v ∈ F_N(n, target, ε), the building blocks of one stage.
/// Digit-exact pools are held implicitly by a completion table; other pools
/// are listed explicitly.
template <class Real>
class PoolD {
 public:
  std::size_t stage = 0;
  double target = 0;
  double eps = 0;
  std::size_t n = 0;
  std::size_t N = 0;
  count_t size;
  double max_deviation = 0;
  bool deviation_ok = true;

  std::size_t word_length() const noexcept { return n + N; }
  bool is_implicit() const noexcept { return static_cast<bool>(table_); }

  /// A pool given by an explicit word list of common length (no zero suffix).
  static PoolD from_words(std::vector<Word> words, std::size_t stage = 1) {
    if (words.empty()) throw input_error("pool word list is empty");
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    PoolD p;
    p.stage = stage;
    p.n = words.front().size();
    for (const auto& w : words)
      if (w.size() != p.n) throw input_error("pool words must share one length");
    p.size = words.size();
    p.explicit_ = std::move(words);
    p.prefix_ = explicit_prefix_counts(p.explicit_);
    return p;
  }

  static PoolD from_table(std::shared_ptr<const CompletionTable<Real>> table, std::size_t N) {
    PoolD p;
    p.n = table->length();
    p.N = N;
    p.table_ = std::move(table);
    p.prefix_ = p.table_->prefix_counts();
    p.size = p.prefix_.back();
    for (std::size_t r = 0; r < N; ++r) p.prefix_.push_back(p.size);
    return p;
  }

  /// All words with their zero suffix, in lexicographic order.
  std::vector<Word> words(double max_words = 1e7) const {
    if (size > count_t(static_cast<unsigned long long>(max_words)))
      throw budget_error("pool of stage " + std::to_string(stage) + " is too large to list");
    if (!table_) return explicit_;
    std::vector<Word> out;
    table_->for_each([&](const Word& v) { out.push_back(concat(v, zeros(N))); });
    return out;
  }

  template <class Rng>
  Word sample(Rng& rng) const {
    if (table_) return concat(table_->sample(rng), zeros(N));
    std::uniform_int_distribution<std::size_t> pick(0, explicit_.size() - 1);
    return explicit_[pick(rng)];
  }

  Word first() const { return table_ ? concat(table_->extreme(false), zeros(N)) : explicit_.front(); }
  Word last() const { return table_ ? concat(table_->extreme(true), zeros(N)) : explicit_.back(); }

  /// Distinct prefixes of each length r = 0..word_length().
  const std::vector<count_t>& prefix_counts() const noexcept { return prefix_; }

 private:
  static std::vector<count_t> explicit_prefix_counts(const std::vector<Word>& sorted) {
    const std::size_t len = sorted.front().size();
    std::vector<count_t> out(len + 1, count_t(1));
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      std::size_t common = 0;
      while (common < len && sorted[i][common] == sorted[i - 1][common]) ++common;
      for (std::size_t r = common + 1; r <= len; ++r) out[r] += 1;
    }
    return out;
  }

  std::shared_ptr<const CompletionTable<Real>> table_;
  std::vector<Word> explicit_;
  std::vector<count_t> prefix_;
};

/// The pool of one stage, with the oscillation deviation recorded but not enforced.
template <class Real>
PoolD<Real> build_pool(const BetaBase<Real>& base, const Observable<Real>& psi, std::size_t stage, double target,
                       double eps, std::size_t N, std::size_t n, const ComputeOptions& opts = {}) {
  if (!(eps > 0)) throw input_error("eps must be positive");
  if (n == 0) throw input_error("word length must be positive");
  const Approximant<Real> appr = approximant(base, N);
  PoolD<Real> pool;
  if (psi.digit_exact()) {
    const auto dist = digit_sum_distribution(appr.base, n);
    std::vector<char> allowed(dist.size(), 0);
    for (std::size_t s = 0; s < dist.size(); ++s) allowed[s] = detail::in_band<Real>(s, n, target, eps) ? 1 : 0;
    pool = PoolD<Real>::from_table(std::make_shared<const CompletionTable<Real>>(appr.base, n, allowed), N);
    pool.max_deviation = detail::digit_block_deviation<Real>(dist, n, N, target, eps);
  } else {
    check_enumeration_budget(appr.base, n, opts);
    const double slack_n = cylinder_sum_slack(base, psi, n) / static_cast<double>(n);
    const double slack_full = cylinder_sum_slack(base, psi, n + N) / static_cast<double>(n + N);
    const double lo = target - eps - slack_n + band_guard, hi = target + eps + slack_n - band_guard;
    std::vector<Word> words;
    double worst = -1;
    for_each_word(appr.base, n, [&](std::span<const int> v) {
      const double avg = birkhoff_sum(base, psi, cylinder(base, v).midpoint(), n) / static_cast<double>(n);
      if (!(avg > lo && avg < hi)) return;
      Word w = concat(v, zeros(N));
      const double full = birkhoff_sum(base, psi, cylinder(base, w).midpoint(), n + N) / static_cast<double>(n + N);
      worst = std::max(worst, std::abs(full - target) + slack_full);
      words.push_back(std::move(w));
    }, opts);
    if (words.empty()) {
      pool.size = 0;
    } else {
      pool = PoolD<Real>::from_words(std::move(words));
      pool.N = N;
      pool.n = n;
    }
    pool.max_deviation = worst;
  }
  pool.stage = stage;
  pool.target = target;
  pool.eps = eps;
  pool.n = n;
  pool.N = N;
  pool.deviation_ok = pool.size > 0 && pool.max_deviation < 2 * eps;
  return pool;
}

template <class Real>
std::vector<PoolD<Real>> build_pools(const BetaBase<Real>& base, const Observable<Real>& psi,
                                     const CantorSchedule& schedule, const ComputeOptions& opts = {}) {
  std::vector<PoolD<Real>> pools;
  for (const auto& st : schedule.stages) {
    pools.push_back(build_pool(base, psi, st.k, st.target, st.eps, st.N, st.n, opts));
    const auto& p = pools.back();
    if (p.size < 2)
      throw schedule_infeasible("stage " + std::to_string(st.k) + ": pool has " + p.size.str() +
                                " words, at least two are needed");
    if (!p.deviation_ok)
      throw schedule_infeasible("stage " + std::to_string(st.k) + ": stage averages drift " +
                                to_decimal(p.max_deviation) + " from the target, above 2*eps");
  }
  return pools;
}

/// A run of consecutive levels sharing branching m and ratio c.
struct LevelRun {
  std::size_t stage = 0;
  std::uint64_t first_level = 1;
  std::uint64_t levels = 0;
  count_t m;
  double log_m = 0;
  double log_c = 0;
  std::size_t word_length = 0;
};

template <class Real>
struct GenerationTree {
  std::vector<LevelRun> runs;
  /// generations[i] holds the level-i intervals for every materialized level.
  std::vector<std::vector<CylinderInterval<Real>>> generations;

  std::uint64_t total_levels() const {
    std::uint64_t l = 0;
    for (const auto& r : runs) l += r.levels;
    return l;
  }

  const LevelRun& run_of(std::uint64_t i) const {
    for (const auto& r : runs)
      if (i >= r.first_level && i < r.first_level + r.levels) return r;
    throw input_error("level " + std::to_string(i) + " is outside the tree");
  }

  /// Σ_{l≤i} log m_l and Σ_{l≤i} log c_l.
  std::pair<double, double> log_prefix(std::uint64_t i) const {
    double lm = 0, lc = 0;
    for (const auto& r : runs) {
      if (i < r.first_level) break;
      const double k = static_cast<double>(std::min(r.levels, i - r.first_level + 1));
      lm += k * r.log_m;
      lc += k * r.log_c;
    }
    return {lm, lc};
  }

  static GenerationTree homogeneous(const count_t& m, double c, std::uint64_t levels) {
    if (!(c > 0 && c < 1)) throw input_error("contraction ratio must lie in (0, 1)");
    GenerationTree t;
    t.runs.push_back({1, 1, levels, m, log_count(m), std::log(c), 0});
    return t;
  }
};

/// Nested intervals: level by level, each interval gains one child per pool
/// word of the current stage. Because every pool word ends a full cylinder,
/// children of [l, l + λ) sit at l + λ·value(w) with length λβ^{-|w|}.
template <class Real>
GenerationTree<Real> build_generations(const BetaBase<Real>& base, const std::vector<PoolD<Real>>& pools,
                                       const std::vector<std::uint64_t>& levels, std::size_t depth_limit,
                                       const ComputeOptions& opts = {}) {
  if (pools.empty() || pools.size() != levels.size()) throw input_error("one level count per pool is required");
  GenerationTree<Real> tree;
  std::uint64_t first = 1;
  for (std::size_t k = 0; k < pools.size(); ++k) {
    if (pools[k].size.is_zero()) throw input_error("pool of stage " + std::to_string(k + 1) + " is empty");
    const double c_log = -static_cast<double>(pools[k].word_length()) * base.log_value();
    tree.runs.push_back(
        {k + 1, first, levels[k], pools[k].size, log_count(pools[k].size), c_log, pools[k].word_length()});
    first += levels[k];
  }
  tree.generations.push_back({CylinderInterval<Real>{Real(0), Real(1), 0}});
  std::size_t depth = 0;
  for (std::size_t k = 0; k < pools.size(); ++k) {
    const std::size_t len = pools[k].word_length();
    if (levels[k] == 0 || depth + len > depth_limit) break;
    const auto words = pools[k].words(opts.enum_budget);
    std::vector<Real> offsets;
    for (const auto& w : words) offsets.push_back(word_value(base, w));
    const Real shrink = inverse_power(base.value(), len);
    for (std::uint64_t l = 0; l < levels[k] && depth + len <= depth_limit; ++l) {
      const auto& parent = tree.generations.back();
      if (static_cast<double>(parent.size()) * static_cast<double>(words.size()) > opts.enum_budget)
        throw budget_error("materializing level " + std::to_string(tree.generations.size()) + " exceeds the budget");
      std::vector<CylinderInterval<Real>> next;
      next.reserve(parent.size() * words.size());
      for (const auto& iv : parent)
        for (const auto& off : offsets)
          next.push_back({iv.left + iv.length * off, iv.length * shrink, iv.order + len});
      tree.generations.push_back(std::move(next));
      depth += len;
    }
  }
  return tree;
}

template <class Real>
GenerationTree<Real> build_generations(const BetaBase<Real>& base, const std::vector<PoolD<Real>>& pools,
                                       const CantorSchedule& schedule, std::size_t depth_limit,
                                       const ComputeOptions& opts = {}) {
  std::vector<std::uint64_t> levels;
  for (const auto& st : schedule.stages) levels.push_back(st.ell);
  return build_generations(base, pools, levels, depth_limit, opts);
}

/// min over i ∈ [levels/2, levels] of log(m_1⋯m_i) / (−log(c_1⋯c_{i+1}) − log m_{i+1}).
/// Inside a run the quotient is a ratio of affine functions of i, hence
/// monotone, so only window ends and run boundaries need evaluating.
template <class Real>
double lemma54_lower_bound(const GenerationTree<Real>& tree, std::uint64_t levels) {
  if (levels < 2) throw input_error("at least two levels are required");
  if (levels + 1 > tree.total_levels())
    throw input_error("the tree has " + std::to_string(tree.total_levels()) + " levels, " +
                      std::to_string(levels + 1) + " are needed");
  const std::uint64_t lo = std::max<std::uint64_t>(1, levels / 2), hi = levels;
  std::set<std::uint64_t> candidates{lo, hi};
  for (const auto& r : tree.runs) {
    const std::uint64_t last = r.first_level + r.levels - 1;
    for (std::uint64_t i : {r.first_level - 1, r.first_level, last - 1, last})
      if (i >= lo && i <= hi) candidates.insert(i);
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t i : candidates) {
    const auto [lm, lc_i] = tree.log_prefix(i);
    const LevelRun& next = tree.run_of(i + 1);
    const double denom = -(lc_i + next.log_c) - next.log_m;
    best = std::min(best, lm / denom);
  }
  return best;
}

/// Digits of one branch of the tree, down to `depth` digits.
template <class Real, class Rng>
Word sample_branch(const std::vector<PoolD<Real>>& pools, const CantorSchedule& schedule, std::uint64_t depth,
                   Rng& rng) {
  Word out;
  out.reserve(depth);
  for (std::size_t k = 0; k < pools.size() && out.size() < depth; ++k)
    for (std::uint64_t l = 0; l < schedule.stages[k].ell && out.size() < depth; ++l) {
      const Word w = pools[k].sample(rng);
      const std::size_t take = std::min<std::size_t>(w.size(), depth - out.size());
      out.insert(out.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(take));
    }
  return out;
}

/// Box counts of the whole construction from exact prefix counts: at digit
/// depth L the covering count at scale β^{-L} is the number of distinct
/// L-digit prefixes of branches.
template <class Real>
BoxFit tree_box_dimension(const BetaBase<Real>& base, const std::vector<PoolD<Real>>& pools,
                          const CantorSchedule& schedule, const std::vector<std::uint64_t>& depths) {
  std::vector<BoxPoint> points;
  for (std::uint64_t L : depths) {
    double log_n = 0;
    std::uint64_t t = 0;
    bool placed = false;
    for (std::size_t k = 0; k < pools.size(); ++k) {
      const std::uint64_t len = pools[k].word_length();
      const std::uint64_t span = schedule.stages[k].ell * len;
      const double lm = log_count(pools[k].size);
      if (L < t + span) {
        const std::uint64_t j = (L - t) / len, r = (L - t) % len;
        log_n += static_cast<double>(j) * lm + log_count(pools[k].prefix_counts()[r]);
        placed = true;
        break;
      }
      log_n += static_cast<double>(schedule.stages[k].ell) * lm;
      t += span;
    }
    if (!placed && L != t) throw input_error("box-counting depth exceeds the construction");
    points.push_back({static_cast<double>(L) * base.log_value(), log_n, 0});
  }
  return fit_box_counts(std::move(points));
}

struct OscillationOptions {
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  std::size_t checkpoints = 2;
  double extra_tolerance = 0.05;
  std::size_t bank_size = 256;
  std::uint64_t depth_limit = 4'000'000;  // digit cap for observables that need orbit points
  unsigned threads = 1;
};

struct CheckpointResult {
  std::size_t k = 0;
  std::uint64_t t = 0;
  double target = 0;
  double tolerance = 0;  // 2ε_k + extra
  double slack = 0;      // (t_{k-1}/t_k)(‖ψ‖ + |target|): carry-over from earlier stages
  double max_deviation = 0;
  bool reached = true;
  bool passed = true;
};

struct OscillationReport {
  std::vector<CheckpointResult> checkpoints;
  double upper_bound = 0;  // b + 2ε_1 + extra
  double lower_bound = 0;  // a − 2ε_1 − extra
  double running_max = -std::numeric_limits<double>::infinity();
  double running_min = std::numeric_limits<double>::infinity();
  bool upper_ok = true;
  bool lower_ok = true;
  std::size_t samples = 0;
  std::uint64_t depth = 0;
  bool passed = true;
};

namespace detail {

/// A pool word with what the running-average checks need: its digit sum
/// and the extreme values of P_r − U·r and P_r − L·r over its prefixes.
struct BankWord {
  std::uint64_t sum = 0;
  double high_excess = 0;
  double low_excess = 0;
};

}  // namespace detail

/// Replays sampled branches and checks the running averages: at each
/// checkpoint t_k against the stage target, and for n ≥ t_1 against the
/// band [a − tol, b + tol]. Branches draw each level's word from a bank of
/// uniformly sampled pool words plus the pool's extreme words.
template <class Real>
OscillationReport oscillation_check(const BetaBase<Real>& base, const Observable<Real>& psi,
                                    const std::vector<PoolD<Real>>& pools, const CantorSchedule& schedule,
                                    const OscillationOptions& opt = {}) {
  if (pools.size() != schedule.stages.size()) throw input_error("one pool per stage is required");
  if (opt.samples == 0) throw input_error("at least one sample is required");
  const std::size_t K = std::min(opt.checkpoints, schedule.stages.size());
  if (K == 0) throw input_error("at least one checkpoint is required");
  OscillationReport rep;
  rep.samples = opt.samples;
  const double tol = 2 * schedule.stages.front().eps + opt.extra_tolerance;
  rep.upper_bound = schedule.b + tol;
  rep.lower_bound = schedule.a - tol;
  const std::uint64_t t1 = schedule.checkpoint(1);
  for (std::size_t k = 1; k <= K; ++k) {
    CheckpointResult c;
    c.k = k;
    c.t = schedule.checkpoint(k);
    c.target = schedule.stages[k - 1].target;
    c.tolerance = 2 * schedule.stages[k - 1].eps + opt.extra_tolerance;
    c.slack = static_cast<double>(schedule.checkpoint(k - 1)) / static_cast<double>(c.t) *
              (psi.sup_norm() + std::abs(c.target));
    rep.checkpoints.push_back(c);
  }
  const std::uint64_t full_depth = schedule.checkpoint(K);

  struct SampleResult {
    std::vector<double> deviations;
    std::vector<bool> reached;
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    bool upper_ok = true, lower_ok = true;
  };

  if (psi.digit_exact()) {
    rep.depth = full_depth;
    std::vector<std::vector<detail::BankWord>> banks(K);
    std::mt19937_64 bank_rng(mix_seed(opt.seed, 0xba4cULL));
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<Word> words{pools[k].first(), pools[k].last()};
      for (std::size_t i = 0; i < opt.bank_size; ++i) words.push_back(pools[k].sample(bank_rng));
      for (const auto& w : words) {
        detail::BankWord bw;
        double prefix = 0, hi = -std::numeric_limits<double>::infinity(), lo = std::numeric_limits<double>::infinity();
        for (std::size_t r = 1; r <= w.size(); ++r) {
          prefix += w[r - 1];
          hi = std::max(hi, prefix - rep.upper_bound * static_cast<double>(r));
          lo = std::min(lo, prefix - rep.lower_bound * static_cast<double>(r));
        }
        bw.sum = static_cast<std::uint64_t>(prefix);
        bw.high_excess = hi;
        bw.low_excess = lo;
        banks[k].push_back(bw);
      }
    }
    auto results = parallel_map(opt.samples, opt.threads, [&](std::size_t sample) {
      SampleResult res;
      std::mt19937_64 rng(mix_seed(opt.seed, sample + 1));
      std::uint64_t sum = 0, n = 0;
      for (std::size_t k = 0; k < K; ++k) {
        const auto& bank = banks[k];
        const std::uint64_t len = pools[k].word_length();
        std::uniform_int_distribution<std::size_t> pick(0, bank.size() - 1);
        for (std::uint64_t l = 0; l < schedule.stages[k].ell; ++l) {
          const auto& w = bank[pick(rng)];
          if (n >= t1) {
            const double n0 = static_cast<double>(n), s0 = static_cast<double>(sum);
            if (w.high_excess > rep.upper_bound * n0 - s0) res.upper_ok = false;
            if (w.low_excess < rep.lower_bound * n0 - s0) res.lower_ok = false;
          }
          sum += w.sum;
          n += len;
          if (n >= t1) {
            const double avg = static_cast<double>(sum) / static_cast<double>(n);
            res.hi = std::max(res.hi, avg);
            res.lo = std::min(res.lo, avg);
          }
        }
        const double avg = static_cast<double>(sum) / static_cast<double>(n);
        res.deviations.push_back(std::abs(avg - schedule.stages[k].target));
        res.reached.push_back(true);
      }
      return res;
    });
    for (auto& r : results) {
      for (std::size_t k = 0; k < K; ++k) rep.checkpoints[k].max_deviation =
          std::max(rep.checkpoints[k].max_deviation, r.deviations[k]);
      rep.running_max = std::max(rep.running_max, r.hi);
      rep.running_min = std::min(rep.running_min, r.lo);
      rep.upper_ok = rep.upper_ok && r.upper_ok;
      rep.lower_ok = rep.lower_ok && r.lower_ok;
    }
  } else {
    const std::uint64_t depth = std::min(full_depth, opt.depth_limit);
    rep.depth = depth;
    auto results = parallel_map(opt.samples, opt.threads, [&](std::size_t sample) {
      SampleResult res;
      std::mt19937_64 rng(mix_seed(opt.seed, sample + 1));
      const Word digits = sample_branch(pools, schedule, depth, rng);
      std::vector<double> at_checkpoint(K, std::numeric_limits<double>::quiet_NaN());
      double sum = 0;
      for_each_orbit_point(base, digits, digits.size(), [&](std::size_t j, const Real& x) {
        sum += psi(x);
        const std::uint64_t n = j + 1;
        const double avg = sum / static_cast<double>(n);
        if (n >= t1) {
          res.hi = std::max(res.hi, avg);
          res.lo = std::min(res.lo, avg);
          if (avg > rep.upper_bound) res.upper_ok = false;
          if (avg < rep.lower_bound) res.lower_ok = false;
        }
        for (std::size_t k = 0; k < K; ++k)
          if (n == rep.checkpoints[k].t) at_checkpoint[k] = avg;
      });
      for (std::size_t k = 0; k < K; ++k) {
        const bool reached = !std::isnan(at_checkpoint[k]);
        res.reached.push_back(reached);
        res.deviations.push_back(reached ? std::abs(at_checkpoint[k] - rep.checkpoints[k].target) : 0.0);
      }
      return res;
    });
    for (auto& r : results) {
      for (std::size_t k = 0; k < K; ++k) {
        rep.checkpoints[k].max_deviation = std::max(rep.checkpoints[k].max_deviation, r.deviations[k]);
        rep.checkpoints[k].reached = rep.checkpoints[k].reached && r.reached[k];
      }
      rep.running_max = std::max(rep.running_max, r.hi);
      rep.running_min = std::min(rep.running_min, r.lo);
      rep.upper_ok = rep.upper_ok && r.upper_ok;
      rep.lower_ok = rep.lower_ok && r.lower_ok;
    }
  }
  rep.passed = rep.upper_ok && rep.lower_ok;
  for (auto& c : rep.checkpoints) {
    c.passed = c.reached && c.max_deviation <= c.tolerance;
    rep.passed = rep.passed && c.passed;
  }
  return rep;
}

}  // namespace betaspec
