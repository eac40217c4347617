#pragma once

#include "betaspec/admissibility.hpp"
#include "betaspec/expansion.hpp"

namespace betaspec {

template <class Real>
struct CylinderInterval {
  Real left;
  Real length;
  std::size_t order = 0;

  Real right() const { return left + length; }
  Real midpoint() const { return left + length / 2; }
};

/// I_n(w). The length follows the maximal admissible continuation of w,
/// so it equals β^{-n} exactly when the cylinder is full.
template <class Real>
CylinderInterval<Real> cylinder(const BetaBase<Real>& base, std::span<const int> w) {
  auto state = scan_state(base, w);
  if (!state) throw input_error("word " + format_word(w) + " is not admissible");
  CylinderInterval<Real> c;
  c.left = word_value(base, w);
  c.order = w.size();
  c.length = inverse_power(base.value(), w.size());
  if (*state != 0) c.length *= base.tail_value(*state);
  return c;
}

template <class Real>
bool is_full(const BetaBase<Real>& base, std::span<const int> w) {
  auto state = scan_state(base, w);
  if (!state) throw input_error("word " + format_word(w) + " is not admissible");
  return *state == 0;
}

}  // namespace betaspec
