#pragma once

// Model domains with distinguished singular sets, exact distance functions,
// and the weight rho used by the weighted norms: clamped min{1, dist(x,S)},
// a C^1 regularized variant psi(dist) with psi(t)=t below 1/2 and psi=1 above
// 2, and the unclamped homogeneous variant dist(x,S) for scaling identities.

#include <optional>
#include <variant>

#include "common.hpp"

namespace kondra::geometry {

using kondra::Jet;
using kondra::MultiIdx;
using kondra::Poly;
using kondra::Pt;

// ---------------------------------------------------------------------------
// Singular sets: unions of points, segments, rays, and affine subspaces.

template <int D>
struct SingularSet {
  enum class PrimKind { Point, Segment, Ray, Subspace };

  struct Prim {
    PrimKind kind;
    Pt<D> a{};                    // point / segment start / ray origin / subspace origin
    Pt<D> b{};                    // segment end / ray direction (unit)
    std::vector<Pt<D>> tangent;   // subspace: orthonormal tangent basis
  };

  std::vector<Prim> prims;

  static SingularSet point(const Pt<D>& c) {
    return SingularSet{{Prim{PrimKind::Point, c, {}, {}}}};
  }
  static SingularSet segment(const Pt<D>& a, const Pt<D>& b) {
    return SingularSet{{Prim{PrimKind::Segment, a, b, {}}}};
  }
  static SingularSet ray(const Pt<D>& origin, Pt<D> dir) {
    double n = kondra::norm(dir);
    require(n > 0, "ray direction must be nonzero");
    for (auto& v : dir) v /= n;
    return SingularSet{{Prim{PrimKind::Ray, origin, dir, {}}}};
  }
  static SingularSet subspace(const Pt<D>& origin, std::vector<Pt<D>> tangent_basis) {
    // Gram-Schmidt so the projection below can assume orthonormality.
    std::vector<Pt<D>> ortho;
    for (auto v : tangent_basis) {
      for (const auto& u : ortho) v = v - dot(v, u) * u;
      double n = kondra::norm(v);
      require(n > 1e-12, "subspace basis is degenerate");
      ortho.push_back((1.0 / n) * v);
    }
    return SingularSet{{Prim{PrimKind::Subspace, origin, {}, std::move(ortho)}}};
  }
  static SingularSet unite(std::vector<SingularSet> parts) {
    SingularSet s;
    for (auto& p : parts)
      for (auto& q : p.prims) s.prims.push_back(std::move(q));
    require(!s.prims.empty(), "empty singular set union");
    return s;
  }

  // Smallest transverse codimension across primitives; governs integrability
  // of rho-power integrands near the set.
  int codim() const {
    int c = D;
    for (const auto& p : prims) {
      int pc = D;
      switch (p.kind) {
        case PrimKind::Point: pc = D; break;
        case PrimKind::Segment:
        case PrimKind::Ray: pc = D - 1; break;
        case PrimKind::Subspace: pc = D - (int)p.tangent.size(); break;
      }
      c = std::min(c, pc);
    }
    return c;
  }

  static double prim_dist(const Prim& p, const Pt<D>& x) {
    switch (p.kind) {
      case PrimKind::Point:
        return kondra::norm(x - p.a);
      case PrimKind::Segment: {
        Pt<D> u = p.b - p.a;
        double len2 = norm2(u);
        double t = std::clamp(dot(x - p.a, u) / len2, 0.0, 1.0);
        return kondra::norm(x - (p.a + t * u));
      }
      case PrimKind::Ray: {
        double t = std::max(dot(x - p.a, p.b), 0.0);
        return kondra::norm(x - (p.a + t * p.b));
      }
      case PrimKind::Subspace: {
        Pt<D> v = x - p.a;
        Pt<D> proj{};
        for (const auto& t : p.tangent) proj = proj + dot(v, t) * t;
        return kondra::norm(v - proj);
      }
    }
    return 0;
  }

  double dist(const Pt<D>& x) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& p : prims) d = std::min(d, prim_dist(p, x));
    return d;
  }

  // Squared distance to one primitive as a jet, following the branch that is
  // active at x (smooth off a measure-zero set of branch interfaces).
  static Jet<D> prim_dist2_jet(const Prim& p, const Pt<D>& x, int ord) {
    auto var = [&](int i) { return Jet<D>::variable(x[i], i, ord); };
    auto sq_diff_point = [&](const Pt<D>& c) {
      Jet<D> s = Jet<D>::constant(0.0, ord);
      for (int i = 0; i < D; ++i) {
        Jet<D> d = var(i) - c[i];
        s += d * d;
      }
      return s;
    };
    auto sq_to_line = [&](const Pt<D>& o, const Pt<D>& u) {
      // perpendicular part of x-o against unit u, squared componentwise;
      // the algebraically equal |x-o|^2 - <x-o,u>^2 cancels catastrophically
      // close to the line and can round to a nonpositive value
      std::vector<Jet<D>> d;
      Jet<D> proj = Jet<D>::constant(0.0, ord);
      for (int i = 0; i < D; ++i) {
        d.push_back(var(i) - o[i]);
        proj += u[i] * d.back();
      }
      Jet<D> s = Jet<D>::constant(0.0, ord);
      for (int i = 0; i < D; ++i) {
        Jet<D> pe = d[i] - u[i] * proj;
        s += pe * pe;
      }
      return s;
    };
    switch (p.kind) {
      case PrimKind::Point:
        return sq_diff_point(p.a);
      case PrimKind::Segment: {
        Pt<D> u = p.b - p.a;
        double len = kondra::norm(u);
        u = (1.0 / len) * u;
        double t = dot(x - p.a, u);
        if (t <= 0) return sq_diff_point(p.a);
        if (t >= len) return sq_diff_point(p.b);
        return sq_to_line(p.a, u);
      }
      case PrimKind::Ray: {
        double t = dot(x - p.a, p.b);
        if (t <= 0) return sq_diff_point(p.a);
        return sq_to_line(p.a, p.b);
      }
      case PrimKind::Subspace: {
        // same componentwise-perpendicular form as sq_to_line
        std::vector<Jet<D>> diff;
        diff.reserve(D);
        for (int i = 0; i < D; ++i) diff.push_back(var(i) - p.a[i]);
        std::vector<Jet<D>> proj;
        for (const auto& t : p.tangent) {
          Jet<D> pr = Jet<D>::constant(0.0, ord);
          for (int i = 0; i < D; ++i) pr += t[i] * diff[i];
          proj.push_back(pr);
        }
        Jet<D> s = Jet<D>::constant(0.0, ord);
        for (int i = 0; i < D; ++i) {
          Jet<D> pe = diff[i];
          for (size_t k = 0; k < p.tangent.size(); ++k) pe -= p.tangent[k][i] * proj[k];
          s += pe * pe;
        }
        return s;
      }
    }
    return Jet<D>::constant(0.0, ord);
  }

  // dist(x, set) as a jet. For unions the active (closest) primitive's branch
  // is used; ties sit on measure-zero interfaces.
  Jet<D> dist_jet(const Pt<D>& x, int ord) const {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int i = 0; i < (int)prims.size(); ++i) {
      double d = prim_dist(prims[i], x);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    require(bd > 0, "distance jet requested on the singular set");
    return jet_sqrt(prim_dist2_jet(prims[best], x, ord));
  }

  // Smooth-min of the primitive distances, (sum d_i^-kappa)^(-1/kappa).
  // Coincides with dist for a single primitive; for unions it lies within the
  // factor n^(1/kappa) below the exact min.
  Jet<D> smooth_dist_jet(const Pt<D>& x, int ord, double kappa) const {
    if (prims.size() == 1) return dist_jet(x, ord);
    Jet<D> acc = Jet<D>::constant(0.0, ord);
    for (const auto& p : prims) {
      require(prim_dist(p, x) > 0, "smooth distance on the singular set");
      acc += jet_pow(prim_dist2_jet(p, x, ord), -kappa / 2.0);
    }
    return jet_pow(acc, -1.0 / kappa);
  }

  double smooth_dist(const Pt<D>& x, double kappa) const {
    if (prims.size() == 1) return dist(x);
    double acc = 0;
    for (const auto& p : prims) acc += std::pow(prim_dist(p, x), -kappa);
    return std::pow(acc, -1.0 / kappa);
  }
};

// ---------------------------------------------------------------------------
// Weight rho

enum class WeightMode {
  Clamped,      // min{1, dist}; values only
  Regularized,  // psi(smooth dist); C^1, derivatives available
  Homogeneous,  // dist itself, no clamp; exact dilation scaling
};

inline constexpr double kSmoothMinKappa = 8.0;

// Monotone clamp: psi(t) = t for t <= 1/2, quintic on (1/2, 2), 1 for t >= 2.
// psi'(t) = (4/9)(2-t)^2 (1 + (4/9)(t-1/2) - (20/27)(t-1/2)^2) on the middle
// piece: positive there, psi' and psi'' vanish at t=2.
struct WeightClampSpline {
  Poly p;   // the quintic middle piece
  Poly dp;  // its derivative
  WeightClampSpline() {
    Poly two_minus_t{{2.0, -1.0}};
    Poly tau{{-0.5, 1.0}};
    Poly q = Poly{{1.0}} + (4.0 / 9.0) * tau + (-20.0 / 27.0) * (tau * tau);
    dp = (4.0 / 9.0) * (two_minus_t * two_minus_t * q);
    p = dp.antiderivative();
    p.c[0] += 0.5 - p(0.5);
  }
  static const WeightClampSpline& get() {
    static const WeightClampSpline s;
    return s;
  }
  double value(double t) const {
    if (t <= 0.5) return t;
    if (t >= 2.0) return 1.0;
    return p(t);
  }
  template <int D>
  Jet<D> apply(const Jet<D>& t) const {
    double t0 = t.value();
    if (t0 <= 0.5) return t;
    if (t0 >= 2.0) return Jet<D>::constant(1.0, t.ord);
    return poly_eval_jet(p, t);
  }
};

template <int D>
inline double weight_value(const SingularSet<D>& S, const Pt<D>& x, WeightMode mode) {
  switch (mode) {
    case WeightMode::Clamped: return std::min(1.0, S.dist(x));
    case WeightMode::Regularized:
      return WeightClampSpline::get().value(S.smooth_dist(x, kSmoothMinKappa));
    case WeightMode::Homogeneous: return S.dist(x);
  }
  return 0;
}

// Weight together with derivatives up to the requested order.
template <int D>
struct WeightEvaluation {
  double value = 0;
  int order = 0;
  std::vector<MultiIdx<D>> indices;
  std::vector<double> derivs;
  double deriv(const MultiIdx<D>& a) const {
    for (size_t i = 0; i < indices.size(); ++i)
      if (indices[i] == a) return derivs[i];
    throw std::invalid_argument("derivative index not tabulated");
  }
};

template <int D>
inline Jet<D> weight_jet(const SingularSet<D>& S, const Pt<D>& x, int ord, WeightMode mode) {
  switch (mode) {
    case WeightMode::Clamped:
      require(ord == 0, "clamped weight has values only; use Regularized for derivatives");
      return Jet<D>::constant(std::min(1.0, S.dist(x)), 0);
    case WeightMode::Regularized:
      return WeightClampSpline::get().apply(S.smooth_dist_jet(x, ord, kSmoothMinKappa));
    case WeightMode::Homogeneous:
      return S.dist_jet(x, ord);
  }
  return Jet<D>::constant(0.0, ord);
}

template <int D>
inline WeightEvaluation<D> regularized_weight(const SingularSet<D>& S, const Pt<D>& x, int ord) {
  require(ord >= 0 && ord <= kMaxJetOrder, "regularized weight order out of range");
  Jet<D> j = weight_jet(S, x, ord, WeightMode::Regularized);
  WeightEvaluation<D> w;
  w.value = j.value();
  w.order = ord;
  w.indices = enumerate_multi_indices<D>(ord);
  for (const auto& a : w.indices) w.derivs.push_back(j.deriv(a));
  return w;
}

// ---------------------------------------------------------------------------
// Model domains

enum class DomainKind {
  Box,             // axis box, no distinguished singular set unless supplied
  SmoothCone2D,    // sector {0<r<1, 0<theta<opening}, vertex singularity
  SmoothCone3D,    // circular cone {0<|x|<1, angle(x,e3)<opening}, vertex
  NonsmoothConeP,  // truncated cone cut by the unit cube, edge singularity
  Dihedral,        // unit cube with the edge {x1=..=x_{d-l}=0}
  PolyhedralCone,  // cone over a square cross-section, edge singularities
  Complement,      // R^d minus the singular set, truncated to a window box
};

enum class ConeCut { Inside, Outside };  // NonsmoothConeP: K cap I vs K minus I

template <int D>
struct ModelDomain {
  DomainKind kind = DomainKind::Box;
  Pt<D> lo{}, hi{};            // Box / Complement window
  double opening = 0;          // cones: opening angle (2D sector: full angle;
                               // 3D circular cone and NonsmoothConeP: half angle)
  ConeCut cut = ConeCut::Inside;
  int edge_dim = 1;            // Dihedral: l
  double half_width = 0.5;     // PolyhedralCone: cross-section half width at height 1

  static ModelDomain box(const Pt<D>& lo, const Pt<D>& hi) {
    ModelDomain m;
    m.kind = DomainKind::Box;
    m.lo = lo;
    m.hi = hi;
    return m;
  }
  static ModelDomain smooth_cone(double opening) {
    ModelDomain m;
    m.kind = D == 2 ? DomainKind::SmoothCone2D : DomainKind::SmoothCone3D;
    if constexpr (D == 2)
      require(opening > 0 && opening <= 2 * M_PI + 1e-12, "sector opening out of range");
    else
      require(opening > 0 && opening < M_PI / 2, "cone half angle out of range");
    m.opening = opening;
    return m;
  }
  static ModelDomain nonsmooth_cone(double half_angle, ConeCut cut) {
    ModelDomain m;
    m.kind = DomainKind::NonsmoothConeP;
    require(half_angle > 0 && half_angle < M_PI / 4, "nonsmooth cone half angle out of range");
    m.opening = half_angle;
    m.cut = cut;
    return m;
  }
  static ModelDomain dihedral(int edge_dim) {
    ModelDomain m;
    m.kind = DomainKind::Dihedral;
    require(edge_dim >= 1 && edge_dim < D, "dihedral edge dimension out of range");
    m.edge_dim = edge_dim;
    for (int i = 0; i < D; ++i) {
      m.lo[i] = 0;
      m.hi[i] = 1;
    }
    return m;
  }
  static ModelDomain polyhedral_cone(double half_width) {
    static_assert(D == 3 || D == 2, "polyhedral cone is a 3D model");
    ModelDomain m;
    m.kind = DomainKind::PolyhedralCone;
    require(half_width > 0 && half_width < 1, "half width out of range");
    m.half_width = half_width;
    return m;
  }
  static ModelDomain complement(const Pt<D>& lo, const Pt<D>& hi) {
    ModelDomain m;
    m.kind = DomainKind::Complement;
    m.lo = lo;
    m.hi = hi;
    return m;
  }

  bool contains(const Pt<D>& x) const {
    switch (kind) {
      case DomainKind::Box:
      case DomainKind::Complement: {
        for (int i = 0; i < D; ++i)
          if (x[i] <= lo[i] || x[i] >= hi[i]) return false;
        return true;
      }
      case DomainKind::SmoothCone2D: {
        double r = kondra::norm(x);
        if (r <= 0 || r >= 1) return false;
        double th = std::atan2(x[1], x[0]);
        if (th < 0) th += 2 * M_PI;
        return th < opening;
      }
      case DomainKind::SmoothCone3D: {
        if constexpr (D == 3) {
          double r = kondra::norm(x);
          if (r <= 0 || r >= 1) return false;
          return std::acos(std::clamp(x[2] / r, -1.0, 1.0)) < opening;
        }
        return false;
      }
      case DomainKind::NonsmoothConeP: {
        double t = std::tan(opening);
        double z = x[D - 1];
        if (z <= 0 || z >= 1) return false;
        if constexpr (D == 2) {
          return cut == ConeCut::Inside ? (x[0] > 0 && x[0] < z * t)
                                        : (x[0] < 0 && x[0] > -z * t);
        } else {
          double r = std::hypot(x[0], x[1]);
          if (r >= z * t) return false;
          bool in_octant = x[0] > 0 && x[1] > 0;
          return cut == ConeCut::Inside ? in_octant : !in_octant;
        }
      }
      case DomainKind::Dihedral: {
        for (int i = 0; i < D; ++i)
          if (x[i] <= 0 || x[i] >= 1) return false;
        return true;
      }
      case DomainKind::PolyhedralCone: {
        if constexpr (D == 3) {
          double z = x[2];
          if (z <= 0 || z >= 1) return false;
          return std::abs(x[0]) < half_width * z && std::abs(x[1]) < half_width * z;
        }
        return false;
      }
    }
    return false;
  }

  double volume() const {
    switch (kind) {
      case DomainKind::Box:
      case DomainKind::Complement: {
        double v = 1;
        for (int i = 0; i < D; ++i) v *= hi[i] - lo[i];
        return v;
      }
      case DomainKind::SmoothCone2D: return opening / 2.0;
      case DomainKind::SmoothCone3D: return 2.0 * M_PI * (1.0 - std::cos(opening)) / 3.0;
      case DomainKind::NonsmoothConeP: {
        double t = std::tan(opening);
        if constexpr (D == 2) return t / 2.0;
        return (cut == ConeCut::Inside ? M_PI / 12.0 : M_PI / 4.0) * t * t;
      }
      case DomainKind::Dihedral: return 1.0;
      case DomainKind::PolyhedralCone: return 4.0 * half_width * half_width / 3.0;
    }
    return 0;
  }

  // The domain's distinguished singular set.
  SingularSet<D> singular_set() const {
    switch (kind) {
      case DomainKind::SmoothCone2D:
      case DomainKind::SmoothCone3D:
        return SingularSet<D>::point(Pt<D>{});
      case DomainKind::NonsmoothConeP: {
        Pt<D> a{}, b{};
        b[D - 1] = 1;
        return SingularSet<D>::segment(a, b);
      }
      case DomainKind::Dihedral: {
        Pt<D> origin{};
        std::vector<Pt<D>> tang;
        for (int i = D - edge_dim; i < D; ++i) {
          Pt<D> e{};
          e[i] = 1;
          tang.push_back(e);
        }
        return SingularSet<D>::subspace(origin, tang);
      }
      case DomainKind::PolyhedralCone: {
        if constexpr (D == 3) {
          std::vector<SingularSet<D>> edges;
          for (int sx : {-1, 1})
            for (int sy : {-1, 1}) {
              Pt<D> corner{sx * half_width, sy * half_width, 1.0};
              edges.push_back(SingularSet<D>::segment(Pt<D>{}, corner));
            }
          return SingularSet<D>::unite(std::move(edges));
        }
        return SingularSet<D>::point(Pt<D>{});
      }
      case DomainKind::Box:
      case DomainKind::Complement:
        return SingularSet<D>::point(Pt<D>{});
    }
    return SingularSet<D>::point(Pt<D>{});
  }

  // Distance to the topological boundary (used by refined-localization norms).
  double boundary_distance(const Pt<D>& x) const {
    switch (kind) {
      case DomainKind::Box:
      case DomainKind::Dihedral: {
        double d = std::numeric_limits<double>::infinity();
        for (int i = 0; i < D; ++i) d = std::min({d, x[i] - lo[i], hi[i] - x[i]});
        return d;
      }
      case DomainKind::SmoothCone2D: {
        double r = kondra::norm(x);
        double th = std::atan2(x[1], x[0]);
        if (th < 0) th += 2 * M_PI;
        double d = 1.0 - r;
        if (opening < 2 * M_PI - 1e-12) {
          d = std::min(d, r * std::sin(std::min(th, M_PI / 2)));
          d = std::min(d, r * std::sin(std::min(opening - th, M_PI / 2)));
        }
        return std::min(d, r);
      }
      default:
        throw std::invalid_argument("boundary distance not provided for this domain kind");
    }
  }

  // Largest angle between a domain point and the cone axis (polyhedral cone).
  double max_axis_angle() const {
    require(kind == DomainKind::PolyhedralCone, "axis angle applies to the polyhedral cone");
    return std::atan(half_width * std::sqrt(2.0));
  }
};

}  // namespace kondra::geometry
