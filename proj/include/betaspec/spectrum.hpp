#pragma once

#include "betaspec/birkhoff.hpp"
#include "betaspec/parallel.hpp"
#include "betaspec/parry_approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace betaspec {

/// Width of the excluded edge of every band |avg − α| < ε. Parameters arrive
/// as doubles, so an average that sits on the edge up to rounding is treated
/// as on the edge, and edges are open.
inline constexpr double band_guard = 1e-12;

template <class Real>
bool digit_sum_in_band(std::size_t sum, std::size_t n, double alpha, double eps) {
  using std::abs;
  return abs(Real(sum) / Real(n) - Real(alpha)) < Real(eps) - Real(band_guard);
}

/// One count of F(n, α, ε) or F_N(n, α, ε).
struct SpectrumPoint {
  double alpha = 0;
  double eps = 0;
  std::size_t n = 0;
  std::optional<std::size_t> N;
  count_t count;
  double estimate = 0;  // log(count) / (n log β); -inf when count is 0
  double slack = 0;     // added to ε in the membership test
};

/// Words of length n (over β, or over β_N when an order is given), each
/// summarized by its cylinder Birkhoff average. Built once, then queried for
/// any (α, ε). Digit-exact observables keep exact counts by digit sum;
/// continuous ones keep the sorted midpoint averages.
template <class Real>
class SpectrumCurve {
 public:
  SpectrumCurve(const BetaBase<Real>& base, const Observable<Real>& psi, std::size_t n,
                std::optional<std::size_t> N = {}, const ComputeOptions& opts = {}, bool force_enumeration = false)
      : base_(base), n_(n), N_(N), exact_(psi.digit_exact()) {
    if (n == 0) throw input_error("word length must be positive");
    const BetaBase<Real> counting = N ? approximant(base, *N).base : base;
    if (exact_ && !force_enumeration) {
      dist_ = digit_sum_distribution(counting, n);
      return;
    }
    check_enumeration_budget(counting, n, opts);
    const auto shards = shard_prefixes(counting, shard_depth(counting, n));
    if (exact_) {
      auto partial = parallel_map(shards.size(), opts.threads, [&](std::size_t s) {
        std::vector<count_t> local(n * static_cast<std::size_t>(counting.max_digit()) + 1);
        for_each_word_with_prefix(counting, n, shards[s], [&](std::span<const int> w) {
          std::size_t sum = 0;
          for (int d : w) sum += static_cast<std::size_t>(d);
          local[sum] += 1;
        });
        return local;
      });
      dist_.assign(n * static_cast<std::size_t>(counting.max_digit()) + 1, count_t(0));
      for (auto& part : partial)
        for (std::size_t s = 0; s < part.size(); ++s) dist_[s] += part[s];
      return;
    }
    slack_ = cylinder_sum_slack(base, psi, n) / static_cast<double>(n);
    auto partial = parallel_map(shards.size(), opts.threads, [&](std::size_t s) {
      std::vector<double> local;
      for_each_word_with_prefix(counting, n, shards[s], [&](std::span<const int> w) {
        const Real mid = cylinder(base, w).midpoint();
        local.push_back(birkhoff_sum(base, psi, mid, n) / static_cast<double>(n));
      });
      return local;
    });
    for (auto& part : partial) averages_.insert(averages_.end(), part.begin(), part.end());
    std::sort(averages_.begin(), averages_.end());
  }

  SpectrumPoint point(double alpha, double eps) const {
    if (!(eps > 0)) throw input_error("eps must be positive");
    SpectrumPoint p;
    p.alpha = alpha;
    p.eps = eps;
    p.n = n_;
    p.N = N_;
    if (exact_) {
      for (std::size_t s = 0; s < dist_.size(); ++s)
        if (!dist_[s].is_zero() && digit_sum_in_band<Real>(s, n_, alpha, eps)) p.count += dist_[s];
    } else {
      p.slack = slack_;
      const double lo = alpha - eps - slack_ + band_guard, hi = alpha + eps + slack_ - band_guard;
      auto first = std::upper_bound(averages_.begin(), averages_.end(), lo);
      auto last = std::lower_bound(averages_.begin(), averages_.end(), hi);
      p.count = last > first ? static_cast<long long>(last - first) : 0;
    }
    p.estimate = log_count(p.count) / (static_cast<double>(n_) * base_.log_value());
    return p;
  }

  double estimate(double alpha, double eps) const { return point(alpha, eps).estimate; }

  /// Smallest and largest cylinder averages over all words.
  std::pair<double, double> average_range() const {
    if (exact_) {
      std::size_t lo = 0, hi = 0;
      bool seen = false;
      for (std::size_t s = 0; s < dist_.size(); ++s) {
        if (dist_[s].is_zero()) continue;
        if (!seen) lo = s;
        hi = s;
        seen = true;
      }
      return {static_cast<double>(lo) / n_, static_cast<double>(hi) / n_};
    }
    return {averages_.front(), averages_.back()};
  }

  /// Count of words whose digit sum is s (digit-exact curves only).
  const std::vector<count_t>& distribution() const noexcept { return dist_; }
  bool exact() const noexcept { return exact_; }
  std::size_t n() const noexcept { return n_; }
  std::optional<std::size_t> order() const noexcept { return N_; }
  double slack() const noexcept { return slack_; }

 private:
  BetaBase<Real> base_;
  std::size_t n_;
  std::optional<std::size_t> N_;
  bool exact_;
  std::vector<count_t> dist_;
  std::vector<double> averages_;
  double slack_ = 0;
};

template <class Real>
SpectrumPoint count_F(const BetaBase<Real>& base, const Observable<Real>& psi, std::size_t n, double alpha,
                      double eps, std::optional<std::size_t> N = {}, const ComputeOptions& opts = {}) {
  if (!(eps > 0)) throw input_error("eps must be positive");
  return SpectrumCurve<Real>(base, psi, n, N, opts).point(alpha, eps);
}

struct ScheduleEntry {
  double eps;
  std::size_t n;
  std::optional<std::size_t> N;
};

struct HEstimate {
  double estimate = 0;     // last diagonal entry
  double running_max = 0;  // max over the table
  std::vector<SpectrumPoint> table;
};

/// eps_j = eps0·2^{-j} and n_j = ⌈8/eps_j⌉, for j < levels.
inline std::vector<ScheduleEntry> default_h_schedule(double eps0, std::size_t levels,
                                                     std::optional<std::size_t> N = {}) {
  std::vector<ScheduleEntry> out;
  double eps = eps0;
  for (std::size_t j = 0; j < levels; ++j) {
    out.push_back({eps, static_cast<std::size_t>(robust_ceil(8.0 / eps)), N});
    eps /= 2;
  }
  return out;
}

template <class Real>
HEstimate h_estimate(const BetaBase<Real>& base, const Observable<Real>& psi, double alpha,
                     const std::vector<ScheduleEntry>& schedule, const ComputeOptions& opts = {}) {
  if (schedule.empty()) throw input_error("schedule is empty");
  for (std::size_t j = 1; j < schedule.size(); ++j) {
    if (schedule[j].n <= schedule[j - 1].n) throw input_error("schedule lengths must increase");
    if (schedule[j].eps > schedule[j - 1].eps) throw input_error("schedule tolerances must not increase");
  }
  HEstimate h;
  h.running_max = -std::numeric_limits<double>::infinity();
  for (const auto& e : schedule) {
    h.table.push_back(count_F(base, psi, e.n, alpha, e.eps, e.N, opts));
    h.running_max = std::max(h.running_max, h.table.back().estimate);
  }
  h.estimate = h.table.back().estimate;
  return h;
}

enum class LpsiRigor { exact_on_cylinders, heuristic };

struct LpsiInterval {
  double lo = 0;
  double hi = 0;
  std::size_t n_used = 0;
  LpsiRigor rigor = LpsiRigor::heuristic;
};

template <class Real>
LpsiInterval estimate_Lpsi(const SpectrumCurve<Real>& curve) {
  auto [lo, hi] = curve.average_range();
  return {lo, hi, curve.n(), curve.exact() ? LpsiRigor::exact_on_cylinders : LpsiRigor::heuristic};
}

template <class Real>
LpsiInterval estimate_Lpsi(const BetaBase<Real>& base, const Observable<Real>& psi, std::size_t n,
                           const ComputeOptions& opts = {}) {
  return estimate_Lpsi(SpectrumCurve<Real>(base, psi, n, {}, opts));
}

enum class DimensionStatus { ok, empty_intersection };

struct DimensionReport {
  DimensionStatus status = DimensionStatus::ok;
  double a = 0, b = 0;
  double a_clip = 0, b_clip = 0;
  LpsiInterval lpsi;
  double inf_value = 0;
  double sup_value = 0;
  double argsup = 0;
  std::size_t n = 0;
  double eps = 0;
  std::vector<std::pair<double, double>> grid;  // (α, estimate)
};

/// Largest value of a unimodal f on [lo, hi]; ties resolve toward smaller α.
template <class F>
std::pair<double, double> golden_section_max(F&& f, double lo, double hi, double tol) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double best_x = lo, best_v = f(lo);
  auto consider = [&](double x, double v) {
    if (v > best_v || (v == best_v && x < best_x)) {
      best_v = v;
      best_x = x;
    }
  };
  consider(hi, f(hi));
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = f(c), fd = f(d);
  consider(c, fc);
  consider(d, fd);
  while (hi - lo > tol) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = f(c);
      consider(c, fc);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = f(d);
      consider(d, fd);
    }
  }
  return {best_x, best_v};
}

inline double clamp_unit(double v) {
  if (!(v > 0)) return 0;
  return std::min(v, 1.0);
}

/// Numerical inf and sup of the estimated spectrum over [a, b] ∩ L_ψ.
template <class Real>
DimensionReport theorem1_dimensions(const BetaBase<Real>& base, const Observable<Real>& psi, double a, double b,
                                    std::size_t resolution, std::size_t n, double eps,
                                    std::optional<std::size_t> N = {}, const ComputeOptions& opts = {}) {
  if (a > b) throw input_error("interval endpoints must satisfy a <= b");
  if (resolution < 2) throw input_error("resolution must be at least 2");
  if (!(eps > 0)) throw input_error("eps must be positive");
  SpectrumCurve<Real> curve(base, psi, n, N, opts);
  DimensionReport r;
  r.a = a;
  r.b = b;
  r.n = n;
  r.eps = eps;
  r.lpsi = estimate_Lpsi(curve);
  r.a_clip = std::max(a, r.lpsi.lo);
  r.b_clip = std::min(b, r.lpsi.hi);
  if (r.a_clip > r.b_clip) {
    r.status = DimensionStatus::empty_intersection;
    return r;
  }
  auto h = [&](double alpha) { return curve.estimate(alpha, eps); };
  const double ha = h(r.a_clip), hb = h(r.b_clip);
  r.inf_value = clamp_unit(std::min(ha, hb));
  const double span = r.b_clip - r.a_clip;
  const std::size_t points = span > 0 ? resolution : 1;
  double best = -std::numeric_limits<double>::infinity(), best_alpha = r.a_clip;
  for (std::size_t i = 0; i < points; ++i) {
    const double alpha = points == 1 ? r.a_clip : r.a_clip + span * static_cast<double>(i) / (points - 1);
    const double v = h(alpha);
    r.grid.emplace_back(alpha, v);
    if (v > best) {
      best = v;
      best_alpha = alpha;
    }
  }
  if (span > 0) {
    const double step = span / static_cast<double>(points - 1);
    auto [x, v] = golden_section_max(h, r.a_clip, r.b_clip, step / 8);
    if (v > best) {
      best = v;
      best_alpha = x;
    }
  }
  r.sup_value = clamp_unit(best);
  r.argsup = best_alpha;
  if (r.sup_value < r.inf_value) r.sup_value = r.inf_value;
  return r;
}

}  // namespace betaspec
