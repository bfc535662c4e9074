#pragma once

// Test-side oracles, kept independent of the library's derivative machinery:
// central finite differences for partial derivatives, and simple reference
// integrators. Used to cross-check jets, weights, and partition derivatives.

#include <cmath>
#include <functional>

#include "kondra/common.hpp"

namespace oracles {

// Central finite-difference partial derivative of f at x for multi-index a,
// applied one axis at a time. Step h trades truncation against cancellation;
// callers pick h per scale (1e-5 .. 1e-2 is typical for orders <= 3).
template <int D>
double fd_derivative(const std::function<double(kondra::Pt<D>)>& f, kondra::Pt<D> x,
                     kondra::MultiIdx<D> a, double h) {
  int axis = -1;
  for (int i = 0; i < D; ++i)
    if (a[i] > 0) {
      axis = i;
      break;
    }
  if (axis < 0) return f(x);
  kondra::MultiIdx<D> rest = a;
  rest[axis] -= 1;
  auto xp = x, xm = x;
  xp[axis] += h;
  xm[axis] -= h;
  return (fd_derivative<D>(f, xp, rest, h) - fd_derivative<D>(f, xm, rest, h)) / (2 * h);
}

// Composite midpoint rule over an axis box, n points per axis.
template <int D>
double midpoint_integral(const std::function<double(kondra::Pt<D>)>& f, kondra::Pt<D> lo,
                         kondra::Pt<D> hi, int n) {
  double cellw = 1;
  kondra::Pt<D> h;
  for (int i = 0; i < D; ++i) {
    h[i] = (hi[i] - lo[i]) / n;
    cellw *= h[i];
  }
  long total = 1;
  for (int i = 0; i < D; ++i) total *= n;
  double sum = 0;
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    kondra::Pt<D> x;
    for (int i = 0; i < D; ++i) {
      x[i] = lo[i] + (rem % n + 0.5) * h[i];
      rem /= n;
    }
    sum += f(x);
  }
  return sum * cellw;
}

}  // namespace oracles
