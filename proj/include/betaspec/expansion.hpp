#pragma once

#include "betaspec/admissibility.hpp"
#include "betaspec/beta_base.hpp"

namespace betaspec {

template <class Real>
void check_unit_interval(const Real& x) {
  if (!(x >= Real(0) && x < Real(1))) throw domain_error("point must lie in [0,1), got " + to_decimal(x));
}

/// T_β(x) = βx − ⌊βx⌋.
template <class Real>
Real t_beta(const BetaBase<Real>& base, const Real& x) {
  check_unit_interval(x);
  return base.step(x).second;
}

/// First n greedy digits of x. Rounding near cylinder boundaries is repaired
/// by clamping to the largest admissible word not above the raw digits.
template <class Real>
Word expand(const BetaBase<Real>& base, const Real& x, std::size_t n) {
  check_unit_interval(x);
  Word w(n);
  Real r = x;
  for (std::size_t i = 0; i < n; ++i) {
    auto [d, rem] = base.step(r);
    w[i] = d;
    r = rem;
  }
  return clamp_to_admissible(base, std::move(w));
}

template <class Real>
Word unity_expansion(const BetaBase<Real>& base, std::size_t depth) {
  return base.unity_expansion(depth);
}

/// Σ w_i β^{-i}.
template <class Real>
Real word_value(const BetaBase<Real>& base, std::span<const int> w) {
  Real v(0);
  for (std::size_t i = w.size(); i-- > 0;) v = (v + Real(w[i])) / base.value();
  return v;
}

}  // namespace betaspec
