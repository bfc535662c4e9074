#pragma once

// Scalar fields carrying exact jets: polynomial/oscillation/weight-power
// families, box cutoffs, pointwise algebra, the multiplication operator
// rho^b, and dilation pullbacks.

#include <memory>

#include "covers.hpp"

namespace kondra::fields {

// the field algebra below would otherwise hide the array operators
using kondra::operator+;
using kondra::operator-;
using kondra::operator*;

using covers::BumpProfile;
using geometry::SingularSet;
using geometry::WeightMode;

// cos/sin of a jet via the truncated series around the base value
template <int D>
inline Jet<D> jet_cos(const Jet<D>& u) {
  std::vector<double> a(u.ord + 1);
  double fact = 1;
  for (int k = 0; k <= u.ord; ++k) {
    if (k > 0) fact *= k;
    a[k] = std::cos(u.value() + k * M_PI / 2) / fact;
  }
  return compose_series(u, a);
}

template <int D>
inline Jet<D> jet_sin(const Jet<D>& u) {
  std::vector<double> a(u.ord + 1);
  double fact = 1;
  for (int k = 0; k <= u.ord; ++k) {
    if (k > 0) fact *= k;
    a[k] = std::sin(u.value() + k * M_PI / 2) / fact;
  }
  return compose_series(u, a);
}

template <int D>
struct ScalarField {
  std::function<Jet<D>(const Pt<D>&, int)> jet_fn;
  std::string label;
  // optional allocation-free point evaluation for sampling-heavy consumers
  std::function<double(const Pt<D>&)> value_fn{};

  Jet<D> jet(const Pt<D>& x, int ord) const { return jet_fn(x, ord); }
  double value(const Pt<D>& x) const {
    return value_fn ? value_fn(x) : jet_fn(x, 0).value();
  }
};

// ---------------------------------------------------------------------------
// Constructors

template <int D>
inline ScalarField<D> constant_field(double v) {
  return {[v](const Pt<D>&, int ord) { return Jet<D>::constant(v, ord); }, "const"};
}

struct PolyTerm {
  std::vector<int> exps;  // one exponent per axis
  double coef = 0;
};

template <int D>
inline ScalarField<D> polynomial_field(std::vector<PolyTerm> terms) {
  for (const auto& t : terms) require((int)t.exps.size() == D, "term arity mismatch");
  auto fn = [terms](const Pt<D>& x, int ord) {
    Jet<D> sum = Jet<D>::constant(0.0, ord);
    for (const auto& t : terms) {
      Jet<D> m = Jet<D>::constant(t.coef, ord);
      for (int i = 0; i < D; ++i) {
        Jet<D> xi = Jet<D>::variable(x[i], i, ord);
        for (int e = 0; e < t.exps[i]; ++e) m = m * xi;
      }
      sum += m;
    }
    return sum;
  };
  return {fn, "poly"};
}

// (1 - |x-c|^2/r^2)_+^6: C^5 at the sphere, polynomial inside
template <int D>
inline ScalarField<D> radial_bump(Pt<D> center, double radius) {
  require(radius > 0, "bump radius must be positive");
  auto fn = [center, radius](const Pt<D>& x, int ord) {
    double u0 = 0;
    for (int i = 0; i < D; ++i) u0 += (x[i] - center[i]) * (x[i] - center[i]);
    u0 /= radius * radius;
    if (u0 >= 1.0) return Jet<D>::constant(0.0, ord);
    Jet<D> u = Jet<D>::constant(0.0, ord);
    for (int i = 0; i < D; ++i) {
      Jet<D> d = Jet<D>::variable(x[i], i, ord) - center[i];
      u += d * d;
    }
    Jet<D> g = u * (-1.0 / (radius * radius)) + 1.0;
    Jet<D> r = Jet<D>::constant(1.0, ord);
    for (int k = 0; k < 6; ++k) r = r * g;
    return r;
  };
  return {fn, "bump"};
}

// tensor plateau cutoff: 1 on the middle half of the box, 0 outside it
template <int D>
inline ScalarField<D> box_cutoff(Pt<D> lo, Pt<D> hi) {
  for (int i = 0; i < D; ++i) require(hi[i] > lo[i], "degenerate cutoff box");
  auto fn = [lo, hi](const Pt<D>& x, int ord) {
    BumpProfile b;
    Jet<D> r = Jet<D>::constant(1.0, ord);
    for (int i = 0; i < D; ++i) {
      double mid = 0.5 * (lo[i] + hi[i]), half = 0.5 * (hi[i] - lo[i]);
      Jet<D> t = (Jet<D>::variable(x[i], i, ord) - mid) * (1.0 / half);
      r = r * b.apply(t);
    }
    return r;
  };
  return {fn, "cutoff"};
}

// rho^gamma; jets require points off the singular set
template <int D>
inline ScalarField<D> weight_power(SingularSet<D> S, double gamma, WeightMode mode) {
  auto fn = [S, gamma, mode](const Pt<D>& x, int ord) {
    Jet<D> w = geometry::weight_jet<D>(S, x, ord, mode);
    return jet_pow(w, gamma);
  };
  return {fn, "rho^" + std::to_string(gamma)};
}

template <int D>
inline ScalarField<D> oscillation_field(Pt<D> k, double phase) {
  auto fn = [k, phase](const Pt<D>& x, int ord) {
    Jet<D> u = Jet<D>::constant(phase, ord);
    for (int i = 0; i < D; ++i) u += Jet<D>::variable(x[i], i, ord) * k[i];
    return jet_cos(u);
  };
  return {fn, "osc"};
}

// ---------------------------------------------------------------------------
// Algebra

template <int D>
inline ScalarField<D> operator*(const ScalarField<D>& f, const ScalarField<D>& g) {
  auto ff = f.jet_fn, gf = g.jet_fn;
  return {[ff, gf](const Pt<D>& x, int ord) { return ff(x, ord) * gf(x, ord); },
          f.label + "*" + g.label};
}

template <int D>
inline ScalarField<D> operator+(const ScalarField<D>& f, const ScalarField<D>& g) {
  auto ff = f.jet_fn, gf = g.jet_fn;
  return {[ff, gf](const Pt<D>& x, int ord) { return ff(x, ord) + gf(x, ord); },
          f.label + "+" + g.label};
}

template <int D>
inline ScalarField<D> operator*(double s, const ScalarField<D>& f) {
  auto ff = f.jet_fn;
  return {[ff, s](const Pt<D>& x, int ord) { return ff(x, ord) * s; }, f.label};
}

// multiplication operator u -> rho^b u
template <int D>
inline ScalarField<D> shift_apply(const SingularSet<D>& S, double b, WeightMode mode,
                                  const ScalarField<D>& f) {
  return weight_power<D>(S, b, mode) * f;
}

// pullback u(lambda x); derivatives pick up lambda^|alpha|
template <int D>
inline ScalarField<D> dilate(const ScalarField<D>& f, double lambda) {
  require(lambda > 0, "dilation factor must be positive");
  auto ff = f.jet_fn;
  auto fn = [ff, lambda](const Pt<D>& x, int ord) {
    Jet<D> j = ff(lambda * x, ord);
    const auto& layout = JetLayout<D>::get();
    for (size_t i = 0; i < j.c.size(); ++i)
      j.c[i] *= std::pow(lambda, layout.order_of[i]);
    return j;
  };
  return {fn, f.label + "@dilated"};
}

template <int D>
inline ScalarField<D> translate(const ScalarField<D>& f, Pt<D> shift) {
  auto ff = f.jet_fn;
  return {[ff, shift](const Pt<D>& x, int ord) { return ff(x - shift, ord); },
          f.label + "@moved"};
}

// jets cached per (point, order) so one field survives several norm sweeps
// over the same rule cheaply
template <int D>
inline ScalarField<D> memoize_jets(const ScalarField<D>& f) {
  auto cache = std::make_shared<std::map<std::pair<Pt<D>, int>, Jet<D>>>();
  auto ff = f.jet_fn;
  return {[cache, ff](const Pt<D>& x, int ord) {
            auto key = std::make_pair(x, ord);
            auto it = cache->find(key);
            if (it != cache->end()) return it->second;
            return cache->emplace(key, ff(x, ord)).first->second;
          },
          f.label, f.value_fn};
}

// ---------------------------------------------------------------------------
// Deterministic test families: polynomials, weight powers, and oscillations,
// each localized by a box cutoff filling the window.

template <int D>
inline ScalarField<D> make_test_field(int index, const SingularSet<D>& S, const Pt<D>& lo,
                                      const Pt<D>& hi, WeightMode mode, std::uint64_t seed) {
  require(index >= 0, "field index must be nonnegative");
  Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (std::uint64_t)(index + 1)));
  ScalarField<D> cut = box_cutoff<D>(lo, hi);
  int family = index % 3;
  if (family == 0) {
    std::vector<PolyTerm> terms;
    int nterms = 2 + rng.uniform_int(0, 2);
    for (int t = 0; t < nterms; ++t) {
      PolyTerm tm;
      tm.coef = rng.uniform(-2, 2);
      for (int i = 0; i < D; ++i) tm.exps.push_back(rng.uniform_int(0, 2));
      terms.push_back(tm);
    }
    auto f = polynomial_field<D>(terms) * cut;
    f.label = "poly#" + std::to_string(index);
    return f;
  }
  if (family == 1) {
    static const double gammas[] = {-0.6, -0.3, 0.4, 0.9, 1.5};
    double gamma = gammas[(index / 3) % 5];
    auto f = weight_power<D>(S, gamma, mode) * cut;
    f.label = "power#" + std::to_string(index);
    return f;
  }
  Pt<D> k;
  for (int i = 0; i < D; ++i) k[i] = rng.uniform(1, 4);
  auto f = oscillation_field<D>(k, rng.uniform(0, 2 * M_PI)) * cut;
  f.label = "osc#" + std::to_string(index);
  return f;
}

}  // namespace kondra::fields
