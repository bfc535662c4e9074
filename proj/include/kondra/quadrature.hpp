#pragma once

// Domain-adapted quadrature: per-kind charts with exact Jacobians, dyadic
// grading toward the singular set (annuli halve down to the working scale,
// then an extended dyadic tail, then one power-mapped cell closing the gap
// at zero). Dyadic cell structure makes dilation by powers of two act on the
// node set by pure reindexing, which the scaling experiments rely on.

#include "geometry.hpp"

namespace kondra::quadrature {

using geometry::ConeCut;
using geometry::DomainKind;
using geometry::ModelDomain;
using geometry::SingularSet;

template <int D>
struct QuadratureRule {
  std::vector<Pt<D>> nodes;
  std::vector<double> weights;
  double total_weight() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
  }
  size_t size() const { return nodes.size(); }
};

struct RuleOptions {
  int depth = 6;         // dyadic grading levels toward the singular set
  int order = 5;         // Gauss points per cell per axis
  int tail_extra = 16;   // further dyadic levels below the working scale
  int power_exp = 8;     // exponent of the innermost power map
  int inner_order = 12;  // Gauss points on the power cell
  int angular = 8;       // angular cells per pi
  int lateral = 4;       // cells per non-graded unit axis
};

namespace detail {

struct Node1 {
  double u, w;
};

inline void append_gauss(std::vector<Node1>& out, double a, double b, int order) {
  const auto& g = gauss_legendre(order);
  for (int i = 0; i < order; ++i)
    out.push_back({0.5 * (a + b) + 0.5 * (b - a) * g.x[i], 0.5 * (b - a) * g.w[i]});
}

// power-mapped cell covering (base, base+sign*h) with clustering at base
inline void append_power(std::vector<Node1>& out, double base, double h, double sign,
                         int lambda, int order) {
  const auto& g = gauss_legendre(order);
  for (int i = 0; i < order; ++i) {
    double t = 0.5 + 0.5 * g.x[i];  // (0,1)
    double u = base + sign * h * std::pow(t, lambda);
    if (u == base) continue;  // offset below representable resolution; weight ~0
    double w = 0.5 * g.w[i] * lambda * std::pow(t, lambda - 1) * h;
    out.push_back({u, w});
  }
}

// [0, top] graded dyadically toward 0
inline std::vector<Node1> graded_to_zero(double top, const RuleOptions& o) {
  std::vector<Node1> out;
  int levels = o.depth + o.tail_extra;
  for (int k = 0; k < levels; ++k)
    append_gauss(out, top * std::ldexp(1.0, -k - 1), top * std::ldexp(1.0, -k), o.order);
  append_power(out, 0.0, top * std::ldexp(1.0, -levels), +1.0, o.power_exp, o.inner_order);
  return out;
}

inline std::vector<Node1> uniform_axis(double a, double b, int ncells, int order) {
  std::vector<Node1> out;
  for (int k = 0; k < ncells; ++k)
    append_gauss(out, a + (b - a) * k / ncells, a + (b - a) * (k + 1) / ncells, order);
  return out;
}

// [a, b] graded dyadically toward the flagged endpoints
inline std::vector<Node1> graded_interval(double a, double b, bool at_lo, bool at_hi,
                                          const RuleOptions& o) {
  std::vector<Node1> out;
  if (!at_lo && !at_hi) return uniform_axis(a, b, o.lateral, o.order);
  double mid = 0.5 * (a + b);
  auto one_side = [&](double from, double len, double sign) {
    int levels = o.depth + o.tail_extra;
    for (int k = 0; k < levels; ++k) {
      double u0 = from + sign * len * std::ldexp(1.0, -k - 1);
      double u1 = from + sign * len * std::ldexp(1.0, -k);
      append_gauss(out, std::min(u0, u1), std::max(u0, u1), o.order);
    }
    append_power(out, from, len * std::ldexp(1.0, -levels), sign, o.power_exp, o.inner_order);
  };
  if (at_lo && at_hi) {
    one_side(a, mid - a, +1.0);
    one_side(b, b - mid, -1.0);
  } else if (at_lo) {
    one_side(a, b - a, +1.0);
  } else {
    one_side(b, b - a, -1.0);
  }
  return out;
}

template <int CD, int D, typename MapFn>
void assemble(const std::array<std::vector<Node1>, CD>& axes, MapFn&& map,
              QuadratureRule<D>& rule) {
  std::array<double, CD> u;
  std::function<void(int, double)> loop = [&](int axis, double w) {
    if (axis == CD) {
      auto [x, jac] = map(u);
      if (jac <= 0) return;
      rule.nodes.push_back(x);
      rule.weights.push_back(w * jac);
      return;
    }
    for (const auto& n : axes[axis]) {
      u[axis] = n.u;
      loop(axis + 1, w * n.w);
    }
  };
  loop(0, 1.0);
}

// which box ends an axis-aligned bounding interval of S touches
template <int D>
inline std::pair<bool, bool> grading_ends(const SingularSet<D>& S, int axis, double lo,
                                          double hi) {
  using PK = typename SingularSet<D>::PrimKind;
  double smin = std::numeric_limits<double>::infinity(), smax = -smin;
  bool full = false;
  for (const auto& p : S.prims) {
    switch (p.kind) {
      case PK::Point:
        smin = std::min(smin, p.a[axis]);
        smax = std::max(smax, p.a[axis]);
        break;
      case PK::Segment:
        smin = std::min({smin, p.a[axis], p.b[axis]});
        smax = std::max({smax, p.a[axis], p.b[axis]});
        break;
      case PK::Ray:
        smin = std::min(smin, p.a[axis]);
        smax = std::max(smax, p.a[axis]);
        if (std::abs(p.b[axis]) > 1e-12) full = true;
        break;
      case PK::Subspace:
        smin = std::min(smin, p.a[axis]);
        smax = std::max(smax, p.a[axis]);
        for (const auto& t : p.tangent)
          if (std::abs(t[axis]) > 1e-12) full = true;
        break;
    }
  }
  if (full || S.prims.empty()) return {false, false};
  const double tol = 1e-9;
  bool span = smin <= lo + tol && smax >= hi - tol;
  if (span) return {false, false};
  return {smin <= lo + tol, smax >= hi - tol};
}

}  // namespace detail

template <int D>
inline QuadratureRule<D> make_rule(const ModelDomain<D>& dom, const RuleOptions& o) {
  using detail::assemble;
  using detail::graded_interval;
  using detail::graded_to_zero;
  using detail::uniform_axis;
  QuadratureRule<D> rule;

  switch (dom.kind) {
    case DomainKind::SmoothCone2D: {
      if constexpr (D == 2) {
        int ntheta = std::max(2, (int)std::ceil(dom.opening / M_PI * o.angular));
        std::array<std::vector<detail::Node1>, 2> axes{
            graded_to_zero(1.0, o), uniform_axis(0.0, dom.opening, ntheta, o.order)};
        assemble<2, 2>(axes,
                       [](const std::array<double, 2>& u) {
                         Pt<2> x{u[0] * std::cos(u[1]), u[0] * std::sin(u[1])};
                         return std::pair{x, u[0]};
                       },
                       rule);
        return rule;
      }
      break;
    }
    case DomainKind::SmoothCone3D: {
      if constexpr (D == 3) {
        int ntheta = std::max(2, (int)std::ceil(dom.opening / M_PI * o.angular));
        int nphi = 2 * o.angular;
        std::array<std::vector<detail::Node1>, 3> axes{
            graded_to_zero(1.0, o), uniform_axis(0.0, dom.opening, ntheta, o.order),
            uniform_axis(0.0, 2 * M_PI, nphi, o.order)};
        assemble<3, 3>(axes,
                       [](const std::array<double, 3>& u) {
                         double r = u[0], th = u[1], ph = u[2];
                         Pt<3> x{r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph),
                                 r * std::cos(th)};
                         return std::pair{x, r * r * std::sin(th)};
                       },
                       rule);
        return rule;
      }
      break;
    }
    case DomainKind::NonsmoothConeP: {
      double tg = std::tan(dom.opening);
      if constexpr (D == 2) {
        double sign = dom.cut == ConeCut::Inside ? 1.0 : -1.0;
        std::array<std::vector<detail::Node1>, 2> axes{graded_to_zero(1.0, o),
                                                       graded_to_zero(1.0, o)};
        assemble<2, 2>(axes,
                       [tg, sign](const std::array<double, 2>& u) {
                         double xi = u[0], z = u[1];
                         Pt<2> x{sign * xi * z * tg, z};
                         return std::pair{x, z * tg};
                       },
                       rule);
        return rule;
      } else if constexpr (D == 3) {
        double th0 = dom.cut == ConeCut::Inside ? 0.0 : M_PI / 2;
        double th1 = dom.cut == ConeCut::Inside ? M_PI / 2 : 2 * M_PI;
        int ntheta = std::max(2, (int)std::ceil((th1 - th0) / M_PI * o.angular));
        std::array<std::vector<detail::Node1>, 3> axes{
            graded_to_zero(1.0, o), uniform_axis(th0, th1, ntheta, o.order),
            graded_to_zero(1.0, o)};
        assemble<3, 3>(axes,
                       [tg](const std::array<double, 3>& u) {
                         double t = u[0], th = u[1], z = u[2];
                         double R = t * z * tg;
                         Pt<3> x{R * std::cos(th), R * std::sin(th), z};
                         return std::pair{x, z * tg * z * tg * t};
                       },
                       rule);
        return rule;
      }
      break;
    }
    case DomainKind::PolyhedralCone: {
      if constexpr (D == 3) {
        double tau = dom.half_width;
        std::array<std::vector<detail::Node1>, 3> axes{graded_interval(-1.0, 1.0, true, true, o),
                                                       graded_interval(-1.0, 1.0, true, true, o),
                                                       graded_to_zero(1.0, o)};
        assemble<3, 3>(axes,
                       [tau](const std::array<double, 3>& u) {
                         double h = u[2];
                         Pt<3> x{tau * h * u[0], tau * h * u[1], h};
                         return std::pair{x, tau * tau * h * h};
                       },
                       rule);
        return rule;
      }
      break;
    }
    case DomainKind::Dihedral: {
      auto S = dom.singular_set();
      std::array<std::vector<detail::Node1>, D> axes;
      for (int i = 0; i < D; ++i) {
        auto [glo, ghi] = detail::grading_ends<D>(S, i, dom.lo[i], dom.hi[i]);
        axes[i] = graded_interval(dom.lo[i], dom.hi[i], glo, ghi, o);
      }
      assemble<D, D>(axes,
                     [](const std::array<double, D>& u) {
                       Pt<D> x;
                       for (int i = 0; i < D; ++i) x[i] = u[i];
                       return std::pair{x, 1.0};
                     },
                     rule);
      return rule;
    }
    case DomainKind::Box: {
      auto S = dom.singular_set();
      std::array<std::vector<detail::Node1>, D> axes;
      for (int i = 0; i < D; ++i) {
        auto [glo, ghi] = detail::grading_ends<D>(S, i, dom.lo[i], dom.hi[i]);
        axes[i] = graded_interval(dom.lo[i], dom.hi[i], glo, ghi, o);
      }
      assemble<D, D>(axes,
                     [](const std::array<double, D>& u) {
                       Pt<D> x;
                       for (int i = 0; i < D; ++i) x[i] = u[i];
                       return std::pair{x, 1.0};
                     },
                     rule);
      return rule;
    }
    case DomainKind::Complement: {
      // orthant boxes around the puncture, each graded toward it
      auto S = dom.singular_set();
      require(S.prims.size() == 1 &&
                  S.prims[0].kind == SingularSet<D>::PrimKind::Point,
              "complement quadrature needs a single point singularity");
      Pt<D> p = S.prims[0].a;
      for (int mask = 0; mask < (1 << D); ++mask) {
        Pt<D> blo, bhi;
        bool degenerate = false;
        for (int i = 0; i < D; ++i) {
          if (mask & (1 << i)) {
            blo[i] = p[i];
            bhi[i] = dom.hi[i];
          } else {
            blo[i] = dom.lo[i];
            bhi[i] = p[i];
          }
          if (bhi[i] - blo[i] < 1e-12) degenerate = true;
        }
        if (degenerate) continue;
        std::array<std::vector<detail::Node1>, D> axes;
        for (int i = 0; i < D; ++i)
          axes[i] = graded_interval(blo[i], bhi[i], (mask & (1 << i)) != 0,
                                    (mask & (1 << i)) == 0, o);
        assemble<D, D>(axes,
                       [](const std::array<double, D>& u) {
                         Pt<D> x;
                         for (int i = 0; i < D; ++i) x[i] = u[i];
                         return std::pair{x, 1.0};
                       },
                       rule);
      }
      return rule;
    }
  }
  throw std::invalid_argument("no quadrature chart for this domain/dimension");
}

template <int D>
inline QuadratureRule<D> make_rule(const ModelDomain<D>& dom, int depth, int order) {
  RuleOptions o;
  o.depth = depth;
  o.order = order;
  return make_rule<D>(dom, o);
}

// the rule plus its image under x[axis] -> -x[axis], weights kept; covers a
// domain joined with its mirror across that coordinate plane
template <int D>
inline QuadratureRule<D> mirror_axis(const QuadratureRule<D>& rule, int axis) {
  require(axis >= 0 && axis < D, "mirror axis out of range");
  QuadratureRule<D> out = rule;
  for (size_t i = 0; i < rule.size(); ++i) {
    Pt<D> x = rule.nodes[i];
    x[axis] = -x[axis];
    out.nodes.push_back(x);
    out.weights.push_back(rule.weights[i]);
  }
  return out;
}

}  // namespace kondra::quadrature
