#pragma once

// Dyadic machinery over model domains: Whitney cube covers with a smooth
// partition of unity, the dyadic layer resolution driven by the weight, and
// separated point lattices with clearance from the singular set.

#include <set>
#include <unordered_map>

#include "geometry.hpp"

namespace kondra::covers {

using geometry::ModelDomain;
using geometry::SingularSet;
using geometry::WeightMode;

// ---------------------------------------------------------------------------
// Smooth polynomial step: S(s) = int_0^s w / int_0^1 w with w = (s(1-s))^5.
// S is a degree-11 polynomial with S(0)=0, S(1)=1 and five vanishing
// derivatives at both ends, so pieces glue to C^5 profiles.

struct PolyStep {
  Poly S;
  PolyStep() {
    Poly base = Poly{{0.0, 1.0}} * Poly{{1.0, -1.0}};  // s (1-s)
    Poly p = base;
    for (int i = 1; i < 5; ++i) p = p * base;
    Poly anti = p.antiderivative();
    S = (1.0 / anti(1.0)) * anti;
  }
  static const PolyStep& get() {
    static const PolyStep s;
    return s;
  }
  double operator()(double s) const {
    if (s <= 0) return 0;
    if (s >= 1) return 1;
    return S(s);
  }
};

// 1D bump profile: 1 on [-1/2,1/2], 0 outside (-1,1), polynomial in between.
struct BumpProfile {
  double value(double t) const {
    double a = std::abs(t);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    return PolyStep::get()(2.0 * (1.0 - a));
  }
  template <int D>
  Jet<D> apply(const Jet<D>& t) const {
    double t0 = t.value();
    double a = std::abs(t0);
    if (a <= 0.5) return Jet<D>::constant(1.0, t.ord);
    if (a >= 1.0) return Jet<D>::constant(0.0, t.ord);
    Jet<D> arg = t0 > 0 ? (t * (-2.0) + 2.0) : (t * 2.0 + 2.0);
    return poly_eval_jet(PolyStep::get().S, arg);
  }
};

// Downward step in the layer profile: 1 up to 3/2, 0 from 7/4 on.
struct LayerProfile {
  double value(double t) const {
    if (t <= 1.5) return 1.0;
    if (t >= 1.75) return 0.0;
    return PolyStep::get()(4.0 * (1.75 - t));
  }
  template <int D>
  Jet<D> apply(const Jet<D>& t) const {
    double t0 = t.value();
    if (t0 <= 1.5) return Jet<D>::constant(1.0, t.ord);
    if (t0 >= 1.75) return Jet<D>::constant(0.0, t.ord);
    return poly_eval_jet(PolyStep::get().S, t * (-4.0) + 7.0);
  }
};

// ---------------------------------------------------------------------------
// Dyadic cubes 2^-j ((0,1)^d + k)

template <int D>
struct DyadicCube {
  int j = 0;
  std::array<long, D> k{};

  double side() const { return std::ldexp(1.0, -j); }
  double diam() const { return side() * std::sqrt((double)D); }
  Pt<D> lo() const {
    Pt<D> p;
    for (int i = 0; i < D; ++i) p[i] = k[i] * side();
    return p;
  }
  Pt<D> hi() const {
    Pt<D> p;
    for (int i = 0; i < D; ++i) p[i] = (k[i] + 1) * side();
    return p;
  }
  Pt<D> center() const {
    Pt<D> p;
    for (int i = 0; i < D; ++i) p[i] = (k[i] + 0.5) * side();
    return p;
  }
  // concentric double 2Q
  Pt<D> lo2() const {
    Pt<D> p = center();
    for (int i = 0; i < D; ++i) p[i] -= side();
    return p;
  }
  Pt<D> hi2() const {
    Pt<D> p = center();
    for (int i = 0; i < D; ++i) p[i] += side();
    return p;
  }
  bool contains(const Pt<D>& x) const {
    for (int i = 0; i < D; ++i)
      if (x[i] < k[i] * side() || x[i] > (k[i] + 1) * side()) return false;
    return true;
  }
  bool double_contains(const Pt<D>& x) const {
    auto l = lo2(), h = hi2();
    for (int i = 0; i < D; ++i)
      if (x[i] < l[i] || x[i] > h[i]) return false;
    return true;
  }
  auto operator<=>(const DyadicCube&) const = default;
};

// ---------------------------------------------------------------------------
// Distances from an axis box to boundary pieces

template <int D>
inline double box_point_dist(const Pt<D>& lo, const Pt<D>& hi, const Pt<D>& p) {
  double s = 0;
  for (int i = 0; i < D; ++i) {
    double d = std::max({lo[i] - p[i], p[i] - hi[i], 0.0});
    s += d * d;
  }
  return std::sqrt(s);
}

// distance from a box to {origin + t*dir : t in [t0,t1]}; convex in t
template <int D>
inline double box_path_dist(const Pt<D>& lo, const Pt<D>& hi, const Pt<D>& origin,
                            const Pt<D>& dir, double t0, double t1) {
  auto f = [&](double t) { return box_point_dist<D>(lo, hi, origin + t * dir); };
  for (int it = 0; it < 200; ++it) {
    double m1 = t0 + (t1 - t0) / 3, m2 = t1 - (t1 - t0) / 3;
    if (f(m1) <= f(m2))
      t1 = m2;
    else
      t0 = m1;
  }
  return f(0.5 * (t0 + t1));
}

template <int D>
inline double box_prim_dist(const Pt<D>& lo, const Pt<D>& hi,
                            const typename SingularSet<D>::Prim& p) {
  using PK = typename SingularSet<D>::PrimKind;
  switch (p.kind) {
    case PK::Point:
      return box_point_dist<D>(lo, hi, p.a);
    case PK::Segment:
      return box_path_dist<D>(lo, hi, p.a, p.b - p.a, 0.0, 1.0);
    case PK::Ray: {
      double reach = 0;
      for (int i = 0; i < D; ++i) reach += std::max(std::abs(lo[i]), std::abs(hi[i]));
      return box_path_dist<D>(lo, hi, p.a, p.b, 0.0, reach + kondra::norm(p.a) + 1.0);
    }
    case PK::Subspace: {
      require(p.tangent.size() == 1, "box distance implemented for 1D subspaces only");
      double reach = 1;
      for (int i = 0; i < D; ++i) reach += std::max(std::abs(lo[i]), std::abs(hi[i]));
      return box_path_dist<D>(lo, hi, p.a, p.tangent[0], -reach, reach);
    }
  }
  return 0;
}

template <int D>
inline double box_set_dist(const Pt<D>& lo, const Pt<D>& hi, const SingularSet<D>& S) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : S.prims) d = std::min(d, box_prim_dist<D>(lo, hi, p));
  return d;
}

// Distance from a box to the topological boundary of the domain. Supported
// where the Whitney machinery is exercised: boxes, 2D sectors (including the
// punctured disk), and complements of a singular set.
template <int D>
inline double box_boundary_dist(const ModelDomain<D>& dom, const Pt<D>& lo, const Pt<D>& hi) {
  using geometry::DomainKind;
  switch (dom.kind) {
    case DomainKind::Box:
    case DomainKind::Dihedral: {
      double d = std::numeric_limits<double>::infinity();
      for (int i = 0; i < D; ++i) {
        d = std::min(d, lo[i] - dom.lo[i]);
        d = std::min(d, dom.hi[i] - hi[i]);
      }
      return std::max(d, 0.0);
    }
    case DomainKind::SmoothCone2D: {
      if constexpr (D == 2) {
        double d = std::numeric_limits<double>::infinity();
        if (dom.opening < 2 * M_PI - 1e-12) {
          Pt<2> e0{1, 0};
          Pt<2> e1{std::cos(dom.opening), std::sin(dom.opening)};
          d = std::min(d, box_path_dist<2>(lo, hi, Pt<2>{0, 0}, e0, 0, 1));
          d = std::min(d, box_path_dist<2>(lo, hi, Pt<2>{0, 0}, e1, 0, 1));
        } else {
          d = std::min(d, box_point_dist<2>(lo, hi, Pt<2>{0, 0}));
        }
        // arc r=1: sampled; fine enough for acceptance decisions
        int n = 512;
        for (int i = 0; i <= n; ++i) {
          double th = dom.opening * i / n;
          d = std::min(d, box_point_dist<2>(lo, hi, Pt<2>{std::cos(th), std::sin(th)}));
        }
        return d;
      }
      break;
    }
    case DomainKind::Complement:
      return box_set_dist<D>(lo, hi, dom.singular_set());
    default:
      break;
  }
  throw std::invalid_argument("whitney decomposition not supported for this domain kind");
}

// ---------------------------------------------------------------------------
// Whitney cover: accept Q when diam(Q) <= dist(Q, boundary)/4

template <int D>
struct WhitneyCover {
  std::vector<DyadicCube<D>> cubes;
  int j_max = 0;
  std::unordered_map<int, std::set<std::array<long, D>>> by_level;

  void index() {
    by_level.clear();
    for (const auto& q : cubes) by_level[q.j].insert(q.k);
  }
  bool has(int j, const std::array<long, D>& k) const {
    auto it = by_level.find(j);
    return it != by_level.end() && it->second.count(k) > 0;
  }
  std::vector<int> counts_per_level() const {
    std::vector<int> c(j_max + 1, 0);
    for (const auto& q : cubes) c[q.j]++;
    return c;
  }
  // the accepted cube containing x, if any
  std::optional<DyadicCube<D>> locate(const Pt<D>& x) const {
    for (const auto& [j, keys] : by_level) {
      std::array<long, D> k;
      for (int i = 0; i < D; ++i) k[i] = (long)std::floor(std::ldexp(x[i], j));
      if (keys.count(k)) return DyadicCube<D>{j, k};
    }
    return std::nullopt;
  }
};

namespace detail {

template <int D>
inline bool cube_inside(const ModelDomain<D>& dom, const DyadicCube<D>& q, double bdist) {
  if (bdist <= 0) return false;
  // the cube avoids the boundary, so membership of the center decides
  return dom.contains(q.center());
}

template <int D>
inline void whitney_rec(const ModelDomain<D>& dom, const DyadicCube<D>& q, int j_max,
                        WhitneyCover<D>& out) {
  double bdist = box_boundary_dist<D>(dom, q.lo(), q.hi());
  if (bdist >= q.diam() && !dom.contains(q.center())) return;  // fully outside
  if (cube_inside<D>(dom, q, bdist) && q.diam() <= bdist / 4.0) {
    out.cubes.push_back(q);
    return;
  }
  if (q.j >= j_max) return;  // resolution exhausted; leave the collar uncovered
  for (long bits = 0; bits < (1 << D); ++bits) {
    DyadicCube<D> c;
    c.j = q.j + 1;
    for (int i = 0; i < D; ++i) c.k[i] = 2 * q.k[i] + ((bits >> i) & 1);
    whitney_rec<D>(dom, c, j_max, out);
  }
}

}  // namespace detail

// Root cubes are the level-0 integer cubes meeting the domain's bounding box.
template <int D>
inline WhitneyCover<D> whitney_decompose(const ModelDomain<D>& dom, int j_max) {
  require(j_max >= 0, "j_max must be nonnegative");
  using geometry::DomainKind;
  Pt<D> blo, bhi;
  switch (dom.kind) {
    case DomainKind::Box:
    case DomainKind::Dihedral:
    case DomainKind::Complement:
      blo = dom.lo;
      bhi = dom.hi;
      break;
    case DomainKind::SmoothCone2D:
      for (int i = 0; i < D; ++i) {
        blo[i] = -1;
        bhi[i] = 1;
      }
      break;
    default:
      throw std::invalid_argument("whitney decomposition not supported for this domain kind");
  }
  WhitneyCover<D> cover;
  cover.j_max = j_max;
  std::array<long, D> klo, khi, k;
  for (int i = 0; i < D; ++i) {
    klo[i] = (long)std::floor(blo[i] + 1e-12);
    khi[i] = (long)std::ceil(bhi[i] - 1e-12) - 1;
  }
  std::function<void(int)> loop = [&](int axis) {
    if (axis == D) {
      detail::whitney_rec<D>(dom, DyadicCube<D>{0, k}, j_max, cover);
      return;
    }
    for (long v = klo[axis]; v <= khi[axis]; ++v) {
      k[axis] = v;
      loop(axis + 1);
    }
  };
  loop(0);
  std::sort(cover.cubes.begin(), cover.cubes.end());
  cover.index();
  return cover;
}

// ---------------------------------------------------------------------------
// Partition of unity subordinate to the doubled Whitney cubes

template <int D>
struct WhitneyPou {
  WhitneyCover<D> cover;
  double psi_floor = 1e-9;

  std::vector<DyadicCube<D>> members_at(const Pt<D>& x) const {
    std::vector<DyadicCube<D>> out;
    for (const auto& [j, keys] : cover.by_level) {
      double side = std::ldexp(1.0, -j);
      std::array<long, D> base;
      for (int i = 0; i < D; ++i) base[i] = (long)std::floor(x[i] / side);
      std::array<long, D> k;
      std::function<void(int)> loop = [&](int axis) {
        if (axis == D) {
          if (keys.count(k)) {
            DyadicCube<D> q{j, k};
            if (q.double_contains(x)) out.push_back(q);
          }
          return;
        }
        for (long dk = -1; dk <= 1; ++dk) {
          k[axis] = base[axis] + dk;
          loop(axis + 1);
        }
      };
      loop(0);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  static double bump(const DyadicCube<D>& q, const Pt<D>& x) {
    BumpProfile b;
    Pt<D> c = q.center();
    double v = 1;
    for (int i = 0; i < D; ++i) v *= b.value((x[i] - c[i]) / q.side());
    return v;
  }

  template <typename JetT = Jet<D>>
  static JetT bump_jet(const DyadicCube<D>& q, const Pt<D>& x, int ord) {
    BumpProfile b;
    Pt<D> c = q.center();
    JetT v = JetT::constant(1.0, ord);
    for (int i = 0; i < D; ++i) {
      JetT t = JetT::variable(x[i], i, ord);
      v = v * b.apply((t - c[i]) * (1.0 / q.side()));
    }
    return v;
  }

  // value of the member attached to cube q at x
  double value(const DyadicCube<D>& q, const Pt<D>& x) const {
    if (!q.double_contains(x)) return 0.0;
    double num = bump(q, x);
    if (num == 0) return 0;
    double den = 0;
    for (const auto& m : members_at(x)) den += bump(m, x);
    if (den < psi_floor) return 0.0;
    return num / den;
  }

  Jet<D> jet(const DyadicCube<D>& q, const Pt<D>& x, int ord) const {
    if (!q.double_contains(x)) return Jet<D>::constant(0.0, ord);
    Jet<D> num = bump_jet(q, x, ord);
    Jet<D> den = Jet<D>::constant(0.0, ord);
    for (const auto& m : members_at(x)) den += bump_jet(m, x, ord);
    if (den.value() < psi_floor) return Jet<D>::constant(0.0, ord);
    return num / den;
  }

  double sum(const Pt<D>& x) const {
    double s = 0;
    for (const auto& m : members_at(x)) s += value(m, x);
    return s;
  }
};

template <int D>
inline WhitneyPou<D> whitney_pou(WhitneyCover<D> cover) {
  return WhitneyPou<D>{std::move(cover)};
}

// ---------------------------------------------------------------------------
// Dyadic layer resolution of unity subordinate to the weight: members
// phi_j = phi(2^j rho) - phi(2^(j+1) rho) for j < j_max, and the tail member
// phi(2^j_max rho), so the finite sum telescopes to phi(rho) = 1 wherever
// rho <= 3/2 (always, for the clamped and regularized weights).

template <int D>
struct LayerSystem {
  SingularSet<D> S;
  int j_max = 0;
  WeightMode mode = WeightMode::Regularized;

  double rho(const Pt<D>& x) const { return geometry::weight_value<D>(S, x, mode); }

  double member(int j, const Pt<D>& x) const {
    require(j >= 0 && j <= j_max, "layer index out of range");
    LayerProfile p;
    double r = rho(x);
    double v = p.value(std::ldexp(r, j));
    if (j < j_max) v -= p.value(std::ldexp(r, j + 1));
    return v;
  }

  // member straight from an already-computed weight jet
  Jet<D> member_from(int j, const Jet<D>& rho_jet) const {
    require(j >= 0 && j <= j_max, "layer index out of range");
    LayerProfile p;
    Jet<D> v = p.apply(rho_jet * std::ldexp(1.0, j));
    if (j < j_max) v -= p.apply(rho_jet * std::ldexp(1.0, j + 1));
    return v;
  }

  Jet<D> member_jet(int j, const Pt<D>& x, int ord) const {
    return member_from(j, geometry::weight_jet<D>(S, x, ord, mode));
  }

  // members that can be nonzero at x
  std::vector<int> active(const Pt<D>& x) const {
    std::vector<int> out;
    double r = rho(x);
    for (int j = 0; j <= j_max; ++j) {
      double t = std::ldexp(r, j);
      bool nonzero = j < j_max ? (t < 1.75 && std::ldexp(r, j + 1) > 1.5) : (t < 1.75);
      if (nonzero) out.push_back(j);
    }
    return out;
  }

  double sum(const Pt<D>& x) const {
    double s = 0;
    for (int j = 0; j <= j_max; ++j) s += member(j, x);
    return s;
  }

  // closed support band of member j in units of rho
  std::pair<double, double> support_band(int j) const {
    double up = 1.75 * std::ldexp(1.0, -j);
    double lo = j < j_max ? 0.75 * std::ldexp(1.0, -j) : 0.0;
    return {lo, up};
  }
};

template <int D>
inline LayerSystem<D> dyadic_layer_pou(SingularSet<D> S, int j_max,
                                       WeightMode mode = WeightMode::Regularized) {
  require(j_max >= 0, "j_max must be nonnegative");
  return LayerSystem<D>{std::move(S), j_max, mode};
}

// ---------------------------------------------------------------------------
// Approximate lattice: pitch c1 2^-j grid points inside the window, kept when
// the ball B(x, c2 2^-j) keeps clearance c3 2^-j from the singular set.
// Deterministic lexicographic sweep.

template <int D>
struct Lattice {
  int j = 0;
  double c1 = 1.0, c2 = 0.25, c3 = 0.5;
  std::vector<Pt<D>> points;
  double pitch() const { return c1 * std::ldexp(1.0, -j); }
  double ball_radius() const { return c2 * std::ldexp(1.0, -j); }
};

template <int D>
inline Lattice<D> approximate_lattice(const Pt<D>& lo, const Pt<D>& hi, const SingularSet<D>& S,
                                      int j, double c1 = 1.0, double c2 = 0.25, double c3 = 0.5) {
  require(j >= 0, "lattice level must be nonnegative");
  require(c1 > 0 && c2 > 0 && c3 > 0, "lattice constants must be positive");
  require(2 * c2 < c1 + 1e-15, "need 2 c2 < c1 so same-level balls stay disjoint");
  Lattice<D> lat;
  lat.j = j;
  lat.c1 = c1;
  lat.c2 = c2;
  lat.c3 = c3;
  const double q = lat.pitch();
  const double margin = lat.ball_radius();
  const double clearance = (c2 + c3) * std::ldexp(1.0, -j);
  std::array<long, D> klo, khi, k;
  for (int i = 0; i < D; ++i) {
    klo[i] = (long)std::ceil((lo[i] + margin) / q - 1e-12);
    khi[i] = (long)std::floor((hi[i] - margin) / q + 1e-12);
  }
  std::function<void(int)> loop = [&](int axis) {
    if (axis == D) {
      Pt<D> x;
      for (int i = 0; i < D; ++i) x[i] = k[i] * q;
      if (S.dist(x) >= clearance) lat.points.push_back(x);
      return;
    }
    for (long v = klo[axis]; v <= khi[axis]; ++v) {
      k[axis] = v;
      loop(axis + 1);
    }
  };
  loop(0);
  return lat;
}

}  // namespace kondra::covers
