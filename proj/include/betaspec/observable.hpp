#pragma once

#include "betaspec/beta_base.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace betaspec {

enum class ObservableKind { digit_exact, continuous };

/// Bound on |ψ(x) − ψ(y)| as a function of |x − y|: either L·δ or a
/// tabulated modulus, read at the next tabulated δ and extended by
/// subadditivity past the end of the table.
class ContinuityBound {
 public:
  static ContinuityBound lipschitz(double constant) {
    ContinuityBound b;
    b.lipschitz_ = constant;
    return b;
  }

  /// Pairs (δ, ω(δ)) with δ increasing.
  static ContinuityBound modulus(std::vector<std::pair<double, double>> table) {
    if (table.empty()) throw input_error("modulus table is empty");
    std::sort(table.begin(), table.end());
    ContinuityBound b;
    b.table_ = std::move(table);
    return b;
  }

  static ContinuityBound none() {
    ContinuityBound b;
    b.lipschitz_ = std::numeric_limits<double>::infinity();
    return b;
  }

  double operator()(double delta) const {
    if (delta <= 0) return 0;
    if (table_.empty()) return lipschitz_ == 0 ? 0 : lipschitz_ * delta;
    if (delta <= table_.front().first) return table_.front().second;
    for (std::size_t i = 1; i < table_.size(); ++i) {
      if (delta <= table_[i].first) return table_[i].second;
    }
    const auto& last = table_.back();
    return last.second * std::ceil(delta / last.first);
  }

  bool is_lipschitz() const noexcept { return table_.empty(); }
  double lipschitz_constant() const noexcept { return lipschitz_; }

 private:
  double lipschitz_ = 0;
  std::vector<std::pair<double, double>> table_;
};

/// The function ψ averaged along orbits.
template <class Real>
class Observable {
 public:
  using Fn = std::function<double(const Real&)>;

  Observable(Fn fn, ObservableKind kind, double sup_norm, ContinuityBound bound, std::string name)
      : fn_(std::move(fn)), kind_(kind), sup_norm_(sup_norm), bound_(std::move(bound)), name_(std::move(name)) {}

  /// ψ(x) = ω_1(x, β). Birkhoff sums of this are digit sums.
  static Observable first_digit(const BetaBase<Real>& base) {
    auto shared = std::make_shared<const BetaBase<Real>>(base);
    return Observable([shared](const Real& x) { return static_cast<double>(shared->step(x).first); },
                      ObservableKind::digit_exact, static_cast<double>(base.max_digit()), ContinuityBound::none(),
                      "digit");
  }

  static Observable zero() { return affine(0.0, 0.0); }

  /// ψ(x) = slope·x + intercept on [0,1).
  static Observable affine(double slope, double intercept) {
    const double sup = std::max(std::abs(intercept), std::abs(slope + intercept));
    return Observable([slope, intercept](const Real& x) { return slope * static_cast<double>(x) + intercept; },
                      ObservableKind::continuous, sup, ContinuityBound::lipschitz(std::abs(slope)),
                      "affine:" + to_decimal(slope) + "," + to_decimal(intercept));
  }

  /// Piecewise-linear interpolation through (x, y) nodes, constant outside.
  static Observable piecewise_linear(std::vector<std::pair<double, double>> nodes) {
    if (nodes.empty()) throw input_error("observable table is empty");
    std::sort(nodes.begin(), nodes.end());
    double sup = 0, slope = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      sup = std::max(sup, std::abs(nodes[i].second));
      if (i > 0) {
        const double dx = nodes[i].first - nodes[i - 1].first;
        if (dx <= 0) throw input_error("observable table has repeated abscissae");
        slope = std::max(slope, std::abs(nodes[i].second - nodes[i - 1].second) / dx);
      }
    }
    auto table = std::make_shared<const std::vector<std::pair<double, double>>>(std::move(nodes));
    auto fn = [table](const Real& xr) {
      const double x = static_cast<double>(xr);
      const auto& t = *table;
      if (x <= t.front().first) return t.front().second;
      if (x >= t.back().first) return t.back().second;
      auto it = std::upper_bound(t.begin(), t.end(), std::make_pair(x, -std::numeric_limits<double>::infinity()));
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double w = (x - lo.first) / (hi.first - lo.first);
      return lo.second + w * (hi.second - lo.second);
    };
    return Observable(fn, ObservableKind::continuous, sup, ContinuityBound::lipschitz(slope), "table");
  }

  /// Reads "x y" or "x,y" lines; '#' starts a comment.
  static Observable from_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot read observable table '" + path + "'");
    std::vector<std::pair<double, double>> nodes;
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ss(line);
      double x, y;
      if (!(ss >> x)) continue;
      if (!(ss >> y)) throw input_error("observable table line lacks a value: '" + line + "'");
      nodes.emplace_back(x, y);
    }
    return piecewise_linear(std::move(nodes));
  }

  double operator()(const Real& x) const { return fn_(x); }
  ObservableKind kind() const noexcept { return kind_; }
  bool digit_exact() const noexcept { return kind_ == ObservableKind::digit_exact; }
  double sup_norm() const noexcept { return sup_norm_; }
  const ContinuityBound& continuity() const noexcept { return bound_; }
  const std::string& name() const noexcept { return name_; }

 private:
  Fn fn_;
  ObservableKind kind_;
  double sup_norm_;
  ContinuityBound bound_;
  std::string name_;
};

}  // namespace betaspec
