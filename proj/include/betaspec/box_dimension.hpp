#pragma once

#include "betaspec/cylinder.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace betaspec {

struct BoxPoint {
  double log_inverse_scale = 0;  // -log s
  double log_count = 0;          // log N(s)
  double residual = 0;
};

struct BoxFit {
  double dimension = 0;
  double intercept = 0;
  std::vector<BoxPoint> table;
};

/// Least-squares slope of log N against -log s.
inline BoxFit fit_box_counts(std::vector<BoxPoint> points) {
  if (points.size() < 2) throw input_error("box counting needs at least two scales");
  double mx = 0, my = 0;
  for (const auto& p : points) {
    mx += p.log_inverse_scale;
    my += p.log_count;
  }
  mx /= points.size();
  my /= points.size();
  double sxx = 0, sxy = 0;
  for (const auto& p : points) {
    sxx += (p.log_inverse_scale - mx) * (p.log_inverse_scale - mx);
    sxy += (p.log_inverse_scale - mx) * (p.log_count - my);
  }
  if (sxx <= 0) throw input_error("box counting needs at least two distinct scales");
  BoxFit fit;
  fit.dimension = sxy / sxx;
  fit.intercept = my - fit.dimension * mx;
  for (auto& p : points) p.residual = p.log_count - (fit.intercept + fit.dimension * p.log_inverse_scale);
  fit.table = std::move(points);
  return fit;
}

/// Number of grid boxes [k s, (k+1) s) meeting the union of the intervals.
/// Box indices are computed with a 1e-9 tolerance so that endpoints landing
/// on grid lines do not touch the neighbouring box.
template <class Real>
std::size_t count_boxes(std::span<const CylinderInterval<Real>> intervals, const Real& scale) {
  using std::ceil;
  using std::floor;
  const Real tol(1e-9);
  std::vector<std::pair<long long, long long>> ranges;
  ranges.reserve(intervals.size());
  for (const auto& iv : intervals) {
    const long long first = static_cast<long long>(floor(iv.left / scale + tol));
    long long last = static_cast<long long>(ceil(iv.right() / scale - tol)) - 1;
    if (last < first) last = first;
    ranges.emplace_back(first, last);
  }
  std::sort(ranges.begin(), ranges.end());
  std::size_t total = 0;
  long long covered = std::numeric_limits<long long>::min();
  for (auto [lo, hi] : ranges) {
    if (hi <= covered) continue;
    const long long start = std::max(lo, covered + 1);
    total += static_cast<std::size_t>(hi - start + 1);
    covered = hi;
  }
  return total;
}

template <class Real>
BoxFit box_dimension(std::span<const CylinderInterval<Real>> intervals, std::span<const double> scales) {
  if (scales.size() < 2) throw input_error("box counting needs at least two scales");
  if (intervals.empty()) throw input_error("box counting needs at least one interval");
  std::vector<BoxPoint> points;
  for (double s : scales) {
    if (!(s > 0 && s <= 1)) throw input_error("box scales must lie in (0, 1]");
    const std::size_t n = count_boxes(intervals, Real(s));
    points.push_back({-std::log(s), std::log(static_cast<double>(n)), 0});
  }
  return fit_box_counts(std::move(points));
}

}  // namespace betaspec
