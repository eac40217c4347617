#pragma once

#include "betaspec/expansion.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace betaspec {

/// Truncated density Σ_{n<terms : x ≤ T^n 1} β^{-n} of the β-invariant
/// measure, with T^0 1 = 1 and T^1 1 = β − ⌊β⌋. The orbit of 1 stays at 0
/// once it lands there.
template <class Real>
class ParryDensity {
 public:
  ParryDensity(const BetaBase<Real>& base, std::size_t terms) : base_(base) {
    if (terms == 0) throw input_error("terms must be positive");
    orbit_.reserve(terms);
    weights_.reserve(terms);
    Real v(1);
    double w = 1;
    const double inv = 1.0 / static_cast<double>(base.value());
    for (std::size_t n = 0; n < terms; ++n) {
      orbit_.push_back(v);
      weights_.push_back(w);
      w *= inv;
      if (v > Real(0)) v = base.step(v, std::numeric_limits<int>::max()).second;
    }
    std::vector<Real> cuts(orbit_);
    cuts.push_back(Real(0));
    cuts.push_back(Real(1));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (const Real& c : cuts)
      if (c >= Real(0) && c <= Real(1)) breakpoints_.push_back(static_cast<double>(c));
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
  }

  double operator()(const Real& x) const {
    double sum = 0;
    for (std::size_t n = 0; n < orbit_.size(); ++n)
      if (x <= orbit_[n]) sum += weights_[n];
    return sum;
  }

  const std::vector<Real>& orbit_of_one() const noexcept { return orbit_; }

  /// ∫_0^1 f(x)ρ(x) dx by composite midpoint rule on each piece between
  /// consecutive orbit points, where ρ is constant.
  double integrate(const std::function<double(double)>& f, std::size_t nodes) const {
    if (nodes == 0) throw input_error("quadrature needs at least one node");
    double total = 0;
    for (std::size_t p = 1; p < breakpoints_.size(); ++p) {
      const double lo = breakpoints_[p - 1], hi = breakpoints_[p];
      const double width = hi - lo;
      if (width <= 0) continue;
      const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(nodes * width));
      const double h = width / static_cast<double>(k);
      const double rho = (*this)(Real(lo + 0.5 * width));
      double piece = 0;
      for (std::size_t i = 0; i < k; ++i) piece += f(lo + (static_cast<double>(i) + 0.5) * h);
      total += rho * piece * h;
    }
    return total;
  }

  double normalizer(std::size_t nodes) const {
    return integrate([](double) { return 1.0; }, nodes);
  }

  /// ∫ f dν for the normalized density.
  double expectation(const std::function<double(double)>& f, std::size_t nodes) const {
    return integrate(f, nodes) / normalizer(nodes);
  }

 private:
  BetaBase<Real> base_;
  std::vector<Real> orbit_;
  std::vector<double> weights_;
  std::vector<double> breakpoints_;
};

template <class Real>
double parry_density(const BetaBase<Real>& base, const Real& x, std::size_t terms) {
  check_unit_interval(x);
  return ParryDensity<Real>(base, terms)(x);
}

}  // namespace betaspec
