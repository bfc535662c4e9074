#pragma once

// Extension operators: moment-matched reflection across a coordinate
// hyperplane, and dyadic-layer gluing over the vertex distance for the
// cone with square cross-section.  The reflection coefficients solve a
// Vandermonde moment system exactly, so derivatives through the matching
// order are continuous across the interface; boundedness in the weighted
// norms is measured, not assumed.

#include <numeric>

#include "covers.hpp"
#include "norms.hpp"

namespace kondra::extension {

using covers::LayerSystem;
using fields::ScalarField;
using geometry::ModelDomain;
using geometry::SingularSet;
using geometry::WeightMode;
using norms::NormParams;
using quadrature::QuadratureRule;

// ---------------------------------------------------------------------------
// Reflection coefficients: sum_k c_k (-k)^j = 1 for j = 0..m, k = 1..m+1.
// A function matched by this rule across a hyperplane keeps continuous
// derivatives through order m.  The rule never sees the weight or the
// integrability exponent: one rule per order serves every norm.

struct ReflectionRule {
  int m = 0;
  std::vector<double> c;  // c[k-1] multiplies the sample at depth k
};

inline ReflectionRule reflection_coefficients(int m) {
  require(m >= 0 && m <= 6, "matching order out of range");
  ReflectionRule rule;
  rule.m = m;
  // Lagrange form over the nodes -1..-(m+1) evaluated at 1, kept in exact
  // integer arithmetic; the products stay tiny (< 8!).
  for (long long k = 1; k <= m + 1; ++k) {
    long long num = 1, den = 1;
    for (long long l = 1; l <= m + 1; ++l) {
      if (l == k) continue;
      num *= 1 + l;
      den *= l - k;
    }
    long long g = std::gcd(num < 0 ? -num : num, den < 0 ? -den : den);
    num /= g;
    den /= g;
    require(den == 1 || den == -1, "moment system is not integral");
    rule.c.push_back((double)(den == 1 ? num : -num));
  }
  return rule;
}

// residual of the j-th moment equation; every term is an exact integer in
// double precision, so a correct rule returns exactly zero
inline double moment_residual(const ReflectionRule& rule, int j) {
  require(j >= 0 && j <= rule.m, "moment order out of range");
  double s = -1;
  for (size_t k = 0; k < rule.c.size(); ++k)
    s += rule.c[k] * std::pow(-(double)(k + 1), (double)j);
  return s;
}

// ---------------------------------------------------------------------------
// Half-space reflection: for x with x[axis] < 0 the extension samples the
// field at depths k|x[axis]| and combines them with the rule weights.  Jets
// transform linearly (a factor (-k)^{alpha_axis} per coefficient), so the
// extended field carries exact derivatives on both sides of the interface.

template <int D>
inline ScalarField<D> extend_halfspace(const ScalarField<D>& u, const ReflectionRule& rule,
                                       int axis = D - 1) {
  require(axis >= 0 && axis < D, "reflection axis out of range");
  auto jfn = [u, rule, axis](const Pt<D>& x, int ord) {
    if (x[axis] >= 0) return u.jet(x, ord);
    Jet<D> out(ord);
    const auto& layout = JetLayout<D>::get();
    for (size_t k = 1; k <= rule.c.size(); ++k) {
      Pt<D> y = x;
      y[axis] = -(double)k * x[axis];
      Jet<D> j = u.jet(y, ord);
      for (int r = 0; r < layout.size(); ++r) {
        if (layout.order_of[r] > ord) continue;
        out.c[r] += rule.c[k - 1] * std::pow(-(double)k, (double)layout.idx[r][axis]) * j.c[r];
      }
    }
    return out;
  };
  auto vfn = [u, rule, axis](const Pt<D>& x) {
    if (x[axis] >= 0) return u.value(x);
    double v = 0;
    for (size_t k = 1; k <= rule.c.size(); ++k) {
      Pt<D> y = x;
      y[axis] = -(double)k * x[axis];
      v += rule.c[k - 1] * u.value(y);
    }
    return v;
  };
  return {jfn, u.label + "@reflected", vfn};
}

template <int D>
inline ScalarField<D> extend_halfspace(const ScalarField<D>& u, int m, int axis = D - 1) {
  return extend_halfspace(u, reflection_coefficients(m), axis);
}

// The operator as an object: rule and axis are fixed once and never consult
// the norm parameters, so a single instance serves a whole (a, p) sweep.
template <int D>
struct HalfspaceOperator {
  ReflectionRule rule;
  int axis = D - 1;
  ScalarField<D> operator()(const ScalarField<D>& u) const {
    return extend_halfspace(u, rule, axis);
  }
};

template <int D>
inline HalfspaceOperator<D> halfspace_operator(int m, int axis = D - 1) {
  return HalfspaceOperator<D>{reflection_coefficients(m), axis};
}

// ---------------------------------------------------------------------------
// One-sided finite-difference jump of the j-th normal derivative across
// {x[axis] = 0}.  Both one-sided stencils interpolate on n nodes, hence are
// exact on polynomials of degree < n; probe fields polynomial in the normal
// coordinate make the jump measurement exact up to rounding.

namespace detail {

// weights w_r with sum_r w_r (r h)^q = delta_{qj} j! for q = 0..n-1
inline std::vector<double> oneside_weights(int j, int n, double h) {
  require(n >= j + 1 && n <= 12, "stencil size out of range");
  std::vector<double> M(n * n), rhs(n, 0.0);
  for (int q = 0; q < n; ++q)
    for (int r = 0; r < n; ++r) M[q * n + r] = std::pow((double)(r + 1), (double)q);
  rhs[j] = factorial(j);
  // dense Gauss with partial pivoting; n <= 12 keeps this trivial
  for (int col = 0; col < n; ++col) {
    int best = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(M[r * n + col]) > std::abs(M[best * n + col])) best = r;
    for (int q = 0; q < n; ++q) std::swap(M[col * n + q], M[best * n + q]);
    std::swap(rhs[col], rhs[best]);
    require(M[col * n + col] != 0, "singular stencil system");
    for (int r = col + 1; r < n; ++r) {
      double f = M[r * n + col] / M[col * n + col];
      for (int q = col; q < n; ++q) M[r * n + q] -= f * M[col * n + q];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> w(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int q = r + 1; q < n; ++q) s -= M[r * n + q] * w[q];
    w[r] = s / M[r * n + r];
  }
  for (int r = 0; r < n; ++r) w[r] /= std::pow(h, (double)j);
  return w;
}

}  // namespace detail

template <int D>
inline double normal_jump(const ScalarField<D>& u, const Pt<D>& base, int axis, int j,
                          double h = 0.05, int n = 6) {
  require(axis >= 0 && axis < D, "probe axis out of range");
  require(base[axis] == 0, "probe base must sit on the interface");
  auto w = detail::oneside_weights(j, n, h);
  double plus = 0, minus = 0;
  for (int r = 0; r < n; ++r) {
    Pt<D> xp = base, xm = base;
    xp[axis] = (r + 1) * h;
    xm[axis] = -(r + 1) * h;
    plus += w[r] * u.value(xp);
    minus += (j % 2 ? -1.0 : 1.0) * w[r] * u.value(xm);
  }
  return std::abs(plus - minus);
}

// ---------------------------------------------------------------------------
// Layer-glued extension for the cone over a square cross-section.  In the
// square-radial chart xi = (x/z, y/z, z) the cone is the slab
// {|xi_1| < w, |xi_2| < w, z > 0}; reflections act on xi_1 and xi_2 with a
// smooth cutoff zeta over the overshoot, first axis then second, and vanish
// outside the reachable slabs and the lower half-space.  The chart never
// touches the radial coordinate, so the unit-layer operator commutes with
// dyadic dilation and T_{-j} E_0 T_j collapses to one formula per layer.

struct ConeExtensionOptions {
  double h_rel = 1e-3;    // finite-difference step relative to |x|
  double slab_frac = 1;   // slab width = slab_frac * w / (m + 1)
  int top_samples = 64;   // support probe resolution near the truncation face
};

template <int D>
struct ConeExtension {
  static_assert(D == 3, "layer gluing is a three-dimensional construction");
  ModelDomain<D> dom;
  ReflectionRule rule;
  LayerSystem<D> layers;
  ScalarField<D> u;
  double s_max = 0;  // angular overshoot reach of the reflections
  ConeExtensionOptions opt;
  std::vector<std::string> gaps;

  // zeta == 1 for overshoots below s_max/2, 0 from s_max on; the flat part
  // keeps the moment matching intact at the face
  double zeta(double s) const { return covers::BumpProfile{}.value(s / s_max); }

  // reflected evaluation of phi_j u in the chart at (xi1, xi2, z)
  double angular(int j, double xi1, double xi2, double z) const {
    const double w = dom.half_width;
    auto sample = [&](double q1, double q2) {
      Pt<D> x{q1 * z, q2 * z, z};
      return layers.member(j, x) * u.value(x);
    };
    auto inner = [&](double q1, double q2) {
      if (std::abs(q1) <= w) return sample(q1, q2);
      double s = std::abs(q1) - w;
      if (s >= s_max) return 0.0;
      double v = 0;
      for (size_t k = 1; k <= rule.c.size(); ++k)
        v += rule.c[k - 1] * sample(std::copysign(w - k * s, q1), q2);
      return zeta(s) * v;
    };
    if (std::abs(xi2) <= w) return inner(xi1, xi2);
    double s = std::abs(xi2) - w;
    if (s >= s_max) return 0.0;
    double v = 0;
    for (size_t k = 1; k <= rule.c.size(); ++k)
      v += rule.c[k - 1] * inner(xi1, std::copysign(w - k * s, xi2));
    return zeta(s) * v;
  }

  // E_j(phi_j u) at x: dilating to the unit layer, extending there, and
  // dilating back cancels the radial factor; only the chart remains
  double layer_value(int j, const Pt<D>& x) const {
    if (x[2] <= 0) return 0.0;
    return angular(j, x[0] / x[2], x[1] / x[2], x[2]);
  }

  double value(const Pt<D>& x) const {
    if (dom.contains(x)) return u.value(x);
    double num = 0, den = 0;
    for (int j = 0; j <= layers.j_max; ++j) {
      double ph = layers.member(j, x);
      if (ph == 0) continue;
      den += ph * ph;
      num += ph * layer_value(j, x);
    }
    return den > 0 ? num / den : 0.0;
  }

  // central-difference jet with the step tied to the local layer pitch
  Jet<D> jet_fd(const Pt<D>& x, int ord) const {
    Jet<D> out(ord);
    const auto& layout = JetLayout<D>::get();
    const double h = opt.h_rel * std::max(kondra::norm(x), 1e-6);
    for (int r = 0; r < layout.size(); ++r) {
      const MultiIdx<D>& al = layout.idx[r];
      if (al.order() > ord) continue;
      double acc = 0;
      std::array<int, D> c{};
      // tensor product of centered differences, one axis at a time
      std::function<void(int, double)> rec = [&](int axis, double wgt) {
        if (axis == D) {
          Pt<D> y = x;
          for (int i = 0; i < D; ++i) y[i] += (c[i] - 0.5 * al[i]) * h;
          acc += wgt * value(y);
          return;
        }
        double bin = 1;
        for (int t = 0; t <= al[axis]; ++t) {
          c[axis] = t;
          double sgn = (al[axis] - t) % 2 ? -1.0 : 1.0;
          rec(axis + 1, wgt * sgn * bin);
          bin *= (double)(al[axis] - t) / (t + 1);
        }
      };
      rec(0, 1.0);
      out.c[r] = acc / std::pow(h, (double)al.order()) / multi_factorial(al);
    }
    return out;
  }

  ScalarField<D> as_field() const {
    auto self = *this;
    return {[self](const Pt<D>& x, int ord) { return self.jet_fd(x, ord); },
            u.label + "@cone-extended",
            [self](const Pt<D>& x) { return self.value(x); }};
  }
};

template <int D>
inline ConeExtension<D> extend_cone_layers(const ScalarField<D>& u, int m,
                                           const LayerSystem<D>& layers,
                                           const ModelDomain<D>& dom,
                                           ConeExtensionOptions opt = {}) {
  static_assert(D == 3, "layer gluing is a three-dimensional construction");
  require(dom.kind == geometry::DomainKind::PolyhedralCone,
          "layer gluing expects the cone over a square cross-section");
  require(layers.mode == WeightMode::Homogeneous && layers.S.prims.size() == 1 &&
              layers.S.prims[0].kind == SingularSet<D>::PrimKind::Point &&
              kondra::norm(layers.S.prims[0].a) == 0,
          "layers must be graded by the plain distance to the vertex");
  ConeExtension<D> ext{dom, reflection_coefficients(m), layers, u};
  ext.opt = opt;
  ext.s_max = opt.slab_frac * dom.half_width / (m + 1);
  require(ext.s_max > 0 && ext.s_max * (m + 1) <= 2 * dom.half_width,
          "reflection slab does not fit the cross-section");

  // the construction has no rule past the truncation face; fields with mass
  // there are extended from their global formula, which is a reported gap
  double top = 0;
  for (int i = 0; i < opt.top_samples; ++i) {
    double a = dom.half_width * (2.0 * (i % 8) / 7.0 - 1.0) * 0.97;
    double b = dom.half_width * (2.0 * (i / 8 % 8) / 7.0 - 1.0) * 0.97;
    double z = 0.97 + 0.025 * (i % 4) / 3.0;
    top = std::max(top, std::abs(u.value({a * z, b * z, z})));
  }
  if (top > 1e-12)
    ext.gaps.push_back(
        "field reaches the truncation face; values above it come from the global formula");
  return ext;
}

// ---------------------------------------------------------------------------
// Boundedness report: both weighted norms, their ratio, the restriction
// residual at sample points, and interface derivative jumps.

template <int D>
struct JumpProbe {
  Pt<D> base{};
  int axis = D - 1;
  double h = 0.05;
  int stencil = 6;
};

struct ExtensionReport {
  NormParams prm;
  double norm_in = 0, norm_out = 0, ratio = 0;
  bool finite_in = false, finite_out = false;
  double restriction_residual = 0;
  std::vector<double> jump;  // max over probes, orders 0..m
};

template <int D>
inline ExtensionReport extension_report(const ScalarField<D>& u, const ScalarField<D>& Eu,
                                        const SingularSet<D>& S, const NormParams& prm,
                                        WeightMode mode, const QuadratureRule<D>& rule_in,
                                        const QuadratureRule<D>& rule_out,
                                        const std::vector<Pt<D>>& restriction_samples,
                                        const std::vector<JumpProbe<D>>& probes = {}) {
  ExtensionReport rep;
  rep.prm = prm;
  auto in = norms::kondratiev_norm<D>(u, S, rule_in, prm, mode);
  auto out = norms::kondratiev_norm<D>(Eu, S, rule_out, prm, mode);
  rep.norm_in = in.value;
  rep.norm_out = out.value;
  rep.finite_in = in.finite;
  rep.finite_out = out.finite;
  rep.ratio = rep.norm_in > 0 ? rep.norm_out / rep.norm_in : 0.0;
  for (const Pt<D>& x : restriction_samples)
    rep.restriction_residual =
        std::max(rep.restriction_residual, std::abs(Eu.value(x) - u.value(x)));
  rep.jump.assign(prm.m + 1, 0.0);
  for (const auto& pr : probes)
    for (int j = 0; j <= prm.m; ++j)
      rep.jump[j] = std::max(rep.jump[j], normal_jump(Eu, pr.base, pr.axis, j, pr.h, pr.stencil));
  return rep;
}

}  // namespace kondra::extension
