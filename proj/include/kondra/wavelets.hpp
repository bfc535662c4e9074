#pragma once

// Compactly supported orthonormal wavelets and domain-adapted tensor systems:
// filter construction by spectral factorization, cascade evaluation on dyadic
// grids, member families tied to an approximate lattice with basic/interior/
// boundary taxonomy, coefficient analysis/synthesis, and the two sequence
// norms (level-wise and ball-indicator flavored) attached to such systems.

#include <complex>
#include <cstdint>
#include <unordered_map>

#include "fields.hpp"
#include "geometry.hpp"

namespace kondra::wavelets {

using kondra::operator+;
using kondra::operator-;
using kondra::operator*;
using fields::ScalarField;
using geometry::DomainKind;
using geometry::ModelDomain;
using geometry::SingularSet;

// ---------------------------------------------------------------------------
// Filters

struct WaveletFilter {
  int N = 0;              // vanishing moments; support length 2N
  std::vector<double> h;  // low-pass, phi supported on [0, 2N-1]
  std::vector<double> g;  // high-pass by alternating flip, psi on [1-N, N]
};

namespace detail {

// roots of a real polynomial (ascending coefficients) by simultaneous
// iteration; degrees here never exceed five
inline std::vector<std::complex<double>> poly_roots(const std::vector<double>& c) {
  int deg = (int)c.size() - 1;
  std::vector<std::complex<double>> r(deg);
  std::complex<double> seed(0.4, 0.9);
  for (int i = 0; i < deg; ++i) r[i] = std::pow(seed, i + 1);
  auto eval = [&](std::complex<double> z) {
    std::complex<double> v = c.back();
    for (int k = deg - 1; k >= 0; --k) v = v * z + c[k];
    return v;
  };
  for (int sweep = 0; sweep < 400; ++sweep) {
    double moved = 0;
    for (int i = 0; i < deg; ++i) {
      std::complex<double> num = eval(r[i]) / c.back();
      std::complex<double> den(1, 0);
      for (int k = 0; k < deg; ++k)
        if (k != i) den *= r[i] - r[k];
      std::complex<double> step = num / den;
      r[i] -= step;
      moved = std::max(moved, std::abs(step));
    }
    if (moved < 1e-15) break;
  }
  return r;
}

inline std::vector<std::complex<double>> poly_mul(const std::vector<std::complex<double>>& a,
                                                  const std::vector<std::complex<double>>& b) {
  std::vector<std::complex<double>> out(a.size() + b.size() - 1);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

}  // namespace detail

// Orthonormal filter with N vanishing moments: factor the halfband polynomial
// and keep the root of each quadratic that lies inside the unit circle.
inline WaveletFilter daubechies_filter(int N) {
  require(N >= 1 && N <= 6, "filter order must lie in [1, 6]");
  WaveletFilter f;
  f.N = N;
  if (N == 1) {
    double s = 1.0 / std::sqrt(2.0);
    f.h = {s, s};
  } else {
    // P(y) = sum_k C(N-1+k, k) y^k
    std::vector<double> P(N);
    P[0] = 1;
    for (int k = 1; k < N; ++k) P[k] = P[k - 1] * (N - 1 + k) / (double)k;
    auto yroots = detail::poly_roots(P);
    std::vector<std::complex<double>> H = {{1, 0}};
    for (auto y : yroots) {
      // z^2 - (2 - 4y) z + 1 = 0, pick the root inside the unit circle
      std::complex<double> b = 2.0 - 4.0 * y;
      std::complex<double> disc = std::sqrt(b * b - 4.0);
      std::complex<double> z = 0.5 * (b + disc);
      if (std::abs(z) > 1) z = 0.5 * (b - disc);
      H = detail::poly_mul(H, {-z, {1, 0}});
    }
    for (int k = 0; k < N; ++k) H = detail::poly_mul(H, {{0.5, 0}, {0.5, 0}});
    std::complex<double> at_one = 0;
    for (auto& c : H) at_one += c;
    f.h.resize(H.size());
    for (size_t k = 0; k < H.size(); ++k)
      f.h[k] = std::sqrt(2.0) * (H[k] / at_one).real();
    require((int)f.h.size() == 2 * N, "factorization lost coefficients");
    // orient with the energy-heavy end first
    if (std::abs(f.h.front()) < std::abs(f.h.back()))
      std::reverse(f.h.begin(), f.h.end());
  }
  f.g.resize(2 * N);
  for (int k = 0; k < 2 * N; ++k)
    f.g[k] = (k % 2 ? -1.0 : 1.0) * f.h[2 * N - 1 - k];
  return f;
}

// ---------------------------------------------------------------------------
// Cascade evaluation: fixed-point sweeps of the refinement relation on a
// dyadic grid. phi lives on [0, 2N-1], psi on [1-N, N].

struct CascadeTable {
  WaveletFilter filter;
  int levels = 0;  // grid step 2^{-levels}
  std::vector<double> phi;
  std::vector<double> psi;
  bool converged = false;
  double residual = 0;  // last fixed-point sweep's sup change

  double support_len() const { return 2.0 * filter.N - 1.0; }

  // linear interpolation between dyadic samples; zero outside the support
  double phi_at(double t) const {
    if (t <= 0 || t >= support_len()) return 0;
    double u = std::ldexp(t, levels);
    size_t i = (size_t)u;
    double w = u - (double)i;
    return phi[i] * (1 - w) + phi[i + 1] * w;
  }
  double psi_at(double t) const {
    double lo = 1.0 - filter.N;
    if (t <= lo || t >= filter.N) return 0;
    double u = std::ldexp(t - lo, levels);
    size_t i = (size_t)u;
    double w = u - (double)i;
    return psi[i] * (1 - w) + psi[i + 1] * w;
  }
  double at(int e, double t) const { return e == 0 ? phi_at(t) : psi_at(t); }
};

inline CascadeTable cascade_evaluate(const WaveletFilter& f, int levels) {
  require(levels >= 6, "cascade needs at least six refinement levels");
  CascadeTable tab;
  tab.filter = f;
  tab.levels = levels;
  const int n = f.N;
  const size_t len = ((size_t)(2 * n - 1) << levels) + 1;
  const double step = std::ldexp(1.0, -levels);

  if (n == 1) {  // the fixed point is the half-open indicator; fill directly
    tab.phi.assign(len, 1.0);
    tab.phi.back() = 0.0;
    tab.psi.assign(len, 1.0);
    for (size_t i = len / 2; i + 1 < len; ++i) tab.psi[i] = -1.0;
    tab.psi.back() = 0.0;
    tab.converged = true;
    return tab;
  }

  // start from the hat at the support center and sweep the two-scale map;
  // arguments 2t - k are again dyadic points of the same grid
  std::vector<double> cur(len, 0.0), nxt(len, 0.0);
  double center = 0.5 * (2 * n - 1);
  for (size_t i = 0; i < len; ++i)
    cur[i] = std::max(0.0, 1.0 - std::abs(i * step - center));
  const double rt2 = std::sqrt(2.0);
  double diff = 0;
  for (int sweep = 0; sweep < 80; ++sweep) {
    diff = 0;
    for (size_t i = 0; i < len; ++i) {
      double t2 = 2.0 * (i * step);
      double v = 0;
      for (int k = 0; k < 2 * n; ++k) {
        double arg = t2 - k;
        if (arg <= 0 || arg >= 2 * n - 1) continue;
        double u = std::ldexp(arg, levels);
        v += f.h[k] * cur[(size_t)(u + 0.5)];
      }
      nxt[i] = rt2 * v;
      diff = std::max(diff, std::abs(nxt[i] - cur[i]));
    }
    cur.swap(nxt);
    if (diff < 1e-14) break;
  }
  tab.phi = std::move(cur);
  tab.residual = diff;
  tab.converged = diff <= 1e-8;

  // psi is built on [1-N, N]; the refinement combination itself lives on
  // [0, 2N-1], so evaluate it at t - (1-N)
  tab.psi.assign(len, 0.0);
  for (size_t i = 0; i < len; ++i) {
    double v = 0;
    for (int k = 0; k < 2 * n; ++k) {
      double arg = 2.0 * (i * step) - k;
      if (arg <= 0 || arg >= 2 * n - 1) continue;
      double u = std::ldexp(arg, levels);
      v += f.g[k] * tab.phi[(size_t)(u + 0.5)];
    }
    tab.psi[i] = rt2 * v;
  }
  return tab;
}

// ---------------------------------------------------------------------------
// Domain-adapted tensor systems on a member grid.  A member at level j is
//   2^{jd/2} prod_i 2^{L/2} psi_{e_i}(2^L (2^j x_i - m_i)),
// supported in a cube of side (2N-1) 2^{-j-L} centered at its anchor; the
// anchors form the approximate lattice of the family.

template <int D>
struct WaveletMember {
  int j = 0;
  std::array<int, D> e{};     // 0 = scaling factor, 1 = wavelet factor
  std::array<long, D> m{};    // translation at scale 2^{-j}
  Pt<D> anchor{};             // lattice point x_{j,r}
  int tag = 0;                // 0 basic, 1 interior, 2 boundary
};

struct SystemOptions {
  double c2 = 0.25;   // support-ball radius factor
  double c3 = 0.125;  // boundary clearance factor
  double c4 = 1.0;    // interior/boundary threshold
  int table_levels = 14;
};

template <int D>
struct WaveletSystem {
  ModelDomain<D> dom;
  SingularSet<D> S;
  WaveletFilter filter;
  CascadeTable table;
  int j_max = 0;
  int L = 0;
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  std::vector<std::vector<WaveletMember<D>>> level;  // members grouped by j
  std::vector<long> omitted;                         // rejected per level
  // same-level anchor lookup for ball-indicator evaluations
  std::vector<std::unordered_map<uint64_t, int>> grid;

  size_t total() const {
    size_t n = 0;
    for (const auto& l : level) n += l.size();
    return n;
  }

  double ball_radius(int j) const { return c2 * std::ldexp(1.0, -j); }

  // distance to the effective boundary: window faces plus, for a punctured
  // window, the singular set; cones carry their own boundary metric
  double edge_distance(const Pt<D>& x) const {
    if (dom.kind == DomainKind::SmoothCone2D) return dom.boundary_distance(x);
    require(dom.kind == DomainKind::Box || dom.kind == DomainKind::Dihedral ||
                dom.kind == DomainKind::Complement,
            "member families are built on box-like or punctured windows");
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < D; ++i) d = std::min({d, x[i] - dom.lo[i], dom.hi[i] - x[i]});
    if (dom.kind == DomainKind::Complement) d = std::min(d, S.dist(x));
    return d;
  }

  // center of the factor support within [0, 2N-1] resp. [1-N, N]
  double factor_center(int e) const {
    return e == 0 ? 0.5 * (2 * filter.N - 1) : 0.5;
  }

  Pt<D> anchor_of(int j, const std::array<int, D>& e, const std::array<long, D>& m) const {
    Pt<D> a{};
    for (int i = 0; i < D; ++i)
      a[i] = std::ldexp((double)m[i] + std::ldexp(factor_center(e[i]), -L), -j);
    return a;
  }

  double member_value(const WaveletMember<D>& w, const Pt<D>& x) const {
    double v = std::pow(2.0, 0.5 * (w.j + L) * D);
    for (int i = 0; i < D; ++i) {
      double t = std::ldexp(std::ldexp(x[i], w.j) - (double)w.m[i], L);
      v *= table.at(w.e[i], t);
      if (v == 0) return 0;
    }
    return v;
  }

  static uint64_t pack_key(const std::array<long, D>& m) {
    uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (int i = 0; i < D; ++i) {
      h ^= (uint64_t)(m[i] + (1L << 40));
      h *= 0xff51afd7ed558ccdULL;
    }
    return h;
  }

  const WaveletMember<D>* find(int j, const std::array<long, D>& m) const {
    auto it = grid[j].find(pack_key(m));
    if (it == grid[j].end()) return nullptr;
    return &level[j][it->second];
  }
};

namespace detail {

inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// The factor pattern of an interior member is a deterministic function of its
// grid position, so rebuilding a system never reshuffles the family.
template <int D>
inline std::array<int, D> member_pattern(int j, const std::array<long, D>& m) {
  uint64_t h = detail::mix64((uint64_t)j * 0x94d049bb133111ebULL);
  for (int i = 0; i < D; ++i) h = detail::mix64(h ^ (uint64_t)(m[i] + (1L << 40)));
  uint64_t pick = h % ((1u << D) - 1) + 1;  // nonzero pattern
  std::array<int, D> e{};
  for (int i = 0; i < D; ++i) e[i] = (int)((pick >> i) & 1);
  return e;
}

template <int D>
inline WaveletSystem<D> build_u_wavelet_system(const ModelDomain<D>& dom, int u_smooth,
                                               int j_max, int L,
                                               SystemOptions opt = {}) {
  require(u_smooth >= 0 && u_smooth <= 2, "factor smoothness beyond C^2 needs longer filters");
  require(j_max >= 0 && L >= 1, "system needs j_max >= 0 and L >= 1");
  static const int order_for[3] = {2, 3, 6};
  int N = order_for[u_smooth];

  WaveletSystem<D> sys;
  sys.dom = dom;
  sys.S = dom.singular_set();
  sys.filter = daubechies_filter(N);
  sys.table = cascade_evaluate(sys.filter, opt.table_levels);
  sys.j_max = j_max;
  sys.L = L;
  sys.c2 = opt.c2;
  sys.c3 = opt.c3;
  sys.c4 = opt.c4;
  // same-level anchors of distinct grid positions stay this far apart
  sys.c1 = 1.0 - (N - 1) * std::ldexp(1.0, -L);
  require(2 * opt.c2 < sys.c1, "support balls must be disjoint within a level");
  double half_diam = 0.5 * (2 * N - 1) * std::ldexp(1.0, -L) * std::sqrt((double)D);
  require(half_diam <= opt.c2, "scale offset too small for the ball constraint");

  sys.level.resize(j_max + 1);
  sys.grid.resize(j_max + 1);
  sys.omitted.assign(j_max + 1, 0);
  for (int j = 0; j <= j_max; ++j) {
    double pitch = std::ldexp(1.0, -j);
    std::array<long, D> lo{}, hi{};
    for (int i = 0; i < D; ++i) {
      lo[i] = (long)std::floor(dom.lo[i] / pitch) - 1;
      hi[i] = (long)std::ceil(dom.hi[i] / pitch) + 1;
    }
    std::array<long, D> m = lo;
    while (true) {
      std::array<int, D> e{};
      if (j > 0) e = member_pattern<D>(j, m);
      WaveletMember<D> w;
      w.j = j;
      w.m = m;
      w.e = e;
      w.anchor = sys.anchor_of(j, e, m);
      double gd = sys.edge_distance(w.anchor);
      bool keep = gd >= (opt.c2 + opt.c3) * pitch && dom.contains(w.anchor);
      if (keep) {
        if (j == 0)
          w.tag = 0;
        else if (gd >= opt.c4 * pitch)
          w.tag = 1;
        else {
          w.tag = 2;  // boundary: fall back to the all-wavelet pattern
          for (int i = 0; i < D; ++i) w.e[i] = 1;
          w.anchor = sys.anchor_of(j, w.e, m);
          keep = sys.edge_distance(w.anchor) >= (opt.c2 + opt.c3) * pitch &&
                 dom.contains(w.anchor);
        }
      }
      if (keep) {
        sys.grid[j][WaveletSystem<D>::pack_key(m)] = (int)sys.level[j].size();
        sys.level[j].push_back(w);
      } else {
        ++sys.omitted[j];
      }
      int axis = 0;
      while (axis < D) {
        if (++m[axis] <= hi[axis]) break;
        m[axis] = lo[axis];
        ++axis;
      }
      if (axis == D) break;
    }
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Coefficients

template <int D>
struct CoeffArray {
  std::vector<std::vector<double>> level;            // lambda_{j,r}
  std::vector<std::vector<uint8_t>> flagged;         // per-coefficient warning
  size_t total() const {
    size_t n = 0;
    for (const auto& l : level) n += l.size();
    return n;
  }
  long flag_count() const {
    long n = 0;
    for (const auto& l : flagged)
      for (uint8_t b : l) n += b;
    return n;
  }
};

// lambda_{j,r} = 2^{jd/2} integral of f against the member, by tensor
// trapezoid sums on the dyadic sample grid of the factor tables.  Coarse
// members still overlap fine-scale content of f, so their sampling is deepened
// with the scale gap (capped to keep the per-level cost level).  Comparing
// against the half-resolution sum flags coefficients whose quadrature has not
// settled.
inline constexpr int kAnalyzeDepthCap = 3;

template <int D>
inline CoeffArray<D> analyze(const ScalarField<D>& f, const WaveletSystem<D>& sys,
                             int j_sub = 4, int workers = 1) {
  CoeffArray<D> out;
  out.level.resize(sys.level.size());
  out.flagged.resize(sys.level.size());

  const int N = sys.filter.N;
  const int span = 2 * N - 1;

  for (size_t j = 0; j < sys.level.size(); ++j) {
    const int depth = j_sub + std::min((int)(sys.level.size() - 1 - j), kAnalyzeDepthCap);
    require(depth >= 1 && depth <= sys.table.levels, "sample depth out of range");
    const int per_axis = (span << depth) + 1;
    const double dt = std::ldexp(1.0, -depth);

    // factor samples on the trapezoid grid are exact table entries
    std::array<std::vector<double>, 2> fac;
    for (int e = 0; e < 2; ++e) {
      fac[e].resize(per_axis);
      double lo = e == 0 ? 0.0 : 1.0 - N;
      for (int i = 0; i < per_axis; ++i) fac[e][i] = sys.table.at(e, lo + i * dt);
    }

    out.level[j].assign(sys.level[j].size(), 0.0);
    out.flagged[j].assign(sys.level[j].size(), 0);
    parallel_for((int)sys.level[j].size(), workers, [&](int r) {
      const auto& w = sys.level[j][r];
      double full = 0, half = 0;
      std::array<int, D> idx{};
      while (true) {
        double weight = 1, coarse_w = 1;
        bool on_coarse = true;
        Pt<D> x{};
        for (int i = 0; i < D; ++i) {
          int q = idx[i];
          double t = (w.e[i] == 0 ? 0.0 : 1.0 - N) + q * dt;
          x[i] = std::ldexp((double)w.m[i] + std::ldexp(t, -sys.L), -(int)j);
          double fw = fac[w.e[i]][q] * ((q == 0 || q == per_axis - 1) ? 0.5 : 1.0);
          weight *= fw;
          if (q % 2) on_coarse = false;
          else
            coarse_w *= fac[w.e[i]][q] * ((q == 0 || q == per_axis - 1) ? 0.5 : 1.0);
        }
        if (weight != 0 || on_coarse) {
          double fv = f.value(x);
          full += weight * fv;
          if (on_coarse) half += coarse_w * fv;
        }
        int axis = 0;
        while (axis < D) {
          if (++idx[axis] < per_axis) break;
          idx[axis] = 0;
          ++axis;
        }
        if (axis == D) break;
      }
      // lambda = 2^{jd/2} (f, member) collapses to 2^{-Ld/2} times the
      // t-space trapezoid sum after substituting the support chart
      double lam = std::pow(2.0, -0.5 * sys.L * D) * full * std::pow(dt, D);
      double lam_half =
          std::pow(2.0, -0.5 * sys.L * D) * half * std::pow(2.0 * dt, D);
      out.level[j][r] = lam;
      double scale = std::max({std::abs(lam), std::abs(lam_half), 1e-12});
      if (std::abs(lam - lam_half) > 1e-3 * scale) out.flagged[j][r] = 1;
    });
  }
  return out;
}

// f(x) as represented by the system: sum of lambda 2^{-jd/2} members; only
// the balls containing x contribute
template <int D>
inline double synthesize_at(const CoeffArray<D>& lam, const WaveletSystem<D>& sys,
                            const Pt<D>& x) {
  double v = 0;
  for (size_t j = 0; j < sys.level.size(); ++j) {
    double pitch = std::ldexp(1.0, -(int)j);
    std::array<long, D> base{};
    for (int i = 0; i < D; ++i) base[i] = (long)std::floor(x[i] / pitch);
    std::array<long, D> off{};
    for (int i = 0; i < D; ++i) off[i] = -2;
    while (true) {
      std::array<long, D> m{};
      for (int i = 0; i < D; ++i) m[i] = base[i] + off[i];
      if (const auto* w = sys.find((int)j, m)) {
        int r = sys.grid[j].at(WaveletSystem<D>::pack_key(m));
        double c = lam.level[j][r];
        if (c != 0)
          v += c * std::pow(2.0, -0.5 * (double)j * D) * sys.member_value(*w, x);
      }
      int axis = 0;
      while (axis < D) {
        if (++off[axis] <= 2) break;
        off[axis] = -2;
        ++axis;
      }
      if (axis == D) break;
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Sequence norms

inline constexpr double kSeqInf = std::numeric_limits<double>::infinity();

// level norm: ( sum_j 2^{j(s-d/p)q} ( sum_r |lambda|^p )^{q/p} )^{1/q}
template <int D>
inline double b_norm(const CoeffArray<D>& lam, double s, double p, double q) {
  require(p > 0 && q > 0, "sequence norm exponents must be positive");
  const bool pinf = std::isinf(p), qinf = std::isinf(q);
  double outer = 0;
  for (size_t j = 0; j < lam.level.size(); ++j) {
    double inner = 0;
    for (double v : lam.level[j]) {
      double a = std::abs(v);
      inner = pinf ? std::max(inner, a) : inner + std::pow(a, p);
    }
    if (!pinf) inner = std::pow(inner, 1.0 / p);
    double w = std::pow(2.0, (double)j * (s - (pinf ? 0.0 : (double)D / p)));
    double contrib = w * inner;
    outer = qinf ? std::max(outer, contrib) : outer + std::pow(contrib, q);
  }
  return qinf ? outer : std::pow(outer, 1.0 / q);
}

// ball-indicator norm, exact per-ball form: with disjoint same-level balls
// the L_p integral of the stacked indicator expression reduces to a weighted
// coefficient sum whenever p = q.
template <int D>
inline double f_norm_exact(const CoeffArray<D>& lam, const WaveletSystem<D>& sys, double s,
                           double p) {
  require(p > 0 && !std::isinf(p), "exact ball form needs a finite exponent");
  double vol1 = D == 1 ? 2.0 : (D == 2 ? M_PI : 4.0 * M_PI / 3.0);
  double total = 0;
  for (size_t j = 0; j < lam.level.size(); ++j) {
    double ball = vol1 * std::pow(sys.ball_radius((int)j), D);
    for (double v : lam.level[j])
      total += std::pow(2.0, (double)j * s * p) * std::pow(std::abs(v), p) * ball;
  }
  return std::pow(total, 1.0 / p);
}

// ball-indicator norm by midpoint quadrature on a uniform window grid; the
// general (p, q) entry point
template <int D>
inline double f_norm(const CoeffArray<D>& lam, const WaveletSystem<D>& sys, double s,
                     double p, double q, int grid_per_axis = 128) {
  require(p > 0 && q > 0, "sequence norm exponents must be positive");
  const bool pinf = std::isinf(p), qinf = std::isinf(q);
  Pt<D> lo = sys.dom.lo, hi = sys.dom.hi;
  std::array<int, D> idx{};
  double cell = 1;
  std::array<double, D> step{};
  for (int i = 0; i < D; ++i) {
    step[i] = (hi[i] - lo[i]) / grid_per_axis;
    cell *= step[i];
  }
  double acc = 0;
  while (true) {
    Pt<D> x{};
    for (int i = 0; i < D; ++i) x[i] = lo[i] + (idx[i] + 0.5) * step[i];
    if (sys.dom.contains(x)) {
      double stack = 0;
      for (size_t j = 0; j < sys.level.size(); ++j) {
        double rad2 = sys.ball_radius((int)j);
        rad2 *= rad2;
        double pitch = std::ldexp(1.0, -(int)j);
        std::array<long, D> base{};
        for (int i = 0; i < D; ++i) base[i] = (long)std::floor(x[i] / pitch);
        std::array<long, D> off{};
        for (int i = 0; i < D; ++i) off[i] = -2;
        while (true) {
          std::array<long, D> m{};
          for (int i = 0; i < D; ++i) m[i] = base[i] + off[i];
          if (const auto* w = sys.find((int)j, m)) {
            double d2 = 0;
            for (int i = 0; i < D; ++i)
              d2 += (x[i] - w->anchor[i]) * (x[i] - w->anchor[i]);
            if (d2 < rad2) {
              int r = sys.grid[j].at(WaveletSystem<D>::pack_key(m));
              double term = std::pow(2.0, (double)j * s) * std::abs(lam.level[j][r]);
              stack = qinf ? std::max(stack, term) : stack + std::pow(term, q);
            }
          }
          int axis = 0;
          while (axis < D) {
            if (++off[axis] <= 2) break;
            off[axis] = -2;
            ++axis;
          }
          if (axis == D) break;
        }
      }
      double val = qinf ? stack : std::pow(stack, 1.0 / q);
      acc = pinf ? std::max(acc, val) : acc + std::pow(val, p) * cell;
    }
    int axis = 0;
    while (axis < D) {
      if (++idx[axis] < grid_per_axis) break;
      idx[axis] = 0;
      ++axis;
    }
    if (axis == D) break;
  }
  return pinf ? acc : std::pow(acc, 1.0 / p);
}

// exact cross-level inner products of the underlying univariate family via
// filter cascades: expanding a factor at level j in the level-j' basis turns
// the integral into a finite coefficient lookup
namespace detail {

// coefficients of phi (kind 0) or psi (kind 1) in the basis phi(2^l x - n)
inline std::vector<double> expansion(const WaveletFilter& f, int kind, int l) {
  std::vector<double> c = kind == 0 ? f.h : f.g;
  for (int step = 1; step < l; ++step) {
    std::vector<double> up(2 * c.size() - 1, 0.0);
    for (size_t i = 0; i < c.size(); ++i) up[2 * i] = c[i];
    std::vector<double> nxt(up.size() + f.h.size() - 1, 0.0);
    for (size_t i = 0; i < up.size(); ++i)
      for (size_t k = 0; k < f.h.size(); ++k) nxt[i + k] += up[i] * f.h[k];
    c = std::move(nxt);
  }
  return c;  // unit-normalized: entries are inner products with phi_{l,n}
}

}  // namespace detail

// <kind_a at (j,k), kind_b at (j',k')> for the univariate system, exact up to
// filter roundoff.  kind 0 = scaling, 1 = wavelet, both L-rescaled uniformly,
// translations at their own scale.
inline double factor_inner(const WaveletFilter& f, int kind_a, int j_a, long k_a,
                           int kind_b, int j_b, long k_b) {
  if (j_a > j_b)
    return factor_inner(f, kind_b, j_b, k_b, kind_a, j_a, k_a);
  // psi offset: psi support starts at 1-N, expansion indices below refer to
  // the phi(2x - k) basis of the refinement written on [0, 2N-1]
  if (j_a == j_b) {
    if (kind_a == kind_b) return k_a == k_b ? 1.0 : 0.0;
    return 0.0;  // scaling vs wavelet at one level
  }
  int l = j_b - j_a;
  if (kind_b == 1) return 0.0;  // coarse anything vs finer wavelet
  auto c = detail::expansion(f, kind_a, l);
  long idx = k_b - (k_a << l);
  if (idx < 0 || idx >= (long)c.size()) return 0.0;
  return c[idx];
}

// Gram entry of two tensor members, exact through the univariate identities;
// members carry the common scale offset L which shifts both levels equally.
// A psi factor placed on [1-N, N] is the refinement combination translated by
// 1-N, so its integer translation index picks up that offset.
template <int D>
inline double member_inner(const WaveletSystem<D>& sys, const WaveletMember<D>& a,
                           const WaveletMember<D>& b) {
  auto trans = [&](const WaveletMember<D>& w, int i) {
    return ((long)w.m[i] << sys.L) + (w.e[i] == 1 ? 1 - sys.filter.N : 0);
  };
  double v = 1;
  for (int i = 0; i < D; ++i) {
    v *= factor_inner(sys.filter, a.e[i], a.j + sys.L, trans(a, i), b.e[i], b.j + sys.L,
                      trans(b, i));
    if (v == 0) return 0;
  }
  return v;
}

// Same Gram entry by direct quadrature, independent of the filter identities:
// per-axis trapezoid sums of the factor product over the support overlap.
// The grid lives in the finer factor's argument units; its step is capped so
// the coarser factor's arguments still land on exact table entries.
template <int D>
inline double member_inner_quad(const WaveletSystem<D>& sys, const WaveletMember<D>& a,
                                const WaveletMember<D>& b, int j_ip = 12) {
  const int N = sys.filter.N;
  double v = 1;
  for (int i = 0; i < D; ++i) {
    const int Ja = a.j + sys.L, Jb = b.j + sys.L;
    const int Jf = std::max(Ja, Jb);
    const int Jq = std::min(j_ip, sys.table.levels - std::abs(Ja - Jb));
    require(Jq >= 1, "level gap exceeds table resolution");
    // support and argument map of one factor in u = 2^{Jf} x units
    auto piece = [&](const WaveletMember<D>& w) {
      double k0 = std::ldexp((double)w.m[i], sys.L);
      double sc = std::ldexp(1.0, w.j + sys.L - Jf);
      double lo = w.e[i] == 0 ? 0.0 : 1.0 - N;
      double hi = w.e[i] == 0 ? 2.0 * N - 1.0 : (double)N;
      return std::array<double, 4>{(lo + k0) / sc, (hi + k0) / sc, sc, k0};
    };
    auto pa = piece(a), pb = piece(b);
    const double du = std::ldexp(1.0, -Jq);
    const double ulo = std::max(pa[0], pb[0]), uhi = std::min(pa[1], pb[1]);
    if (uhi - ulo < 0.5 * du) return 0.0;
    const long n = std::lround((uhi - ulo) / du);
    double s = 0;
    for (long q = 0; q <= n; ++q) {
      double u = ulo + q * du;
      double fa = sys.table.at(a.e[i], u * pa[2] - pa[3]);
      double fb = sys.table.at(b.e[i], u * pb[2] - pb[3]);
      s += ((q == 0 || q == n) ? 0.5 : 1.0) * fa * fb;
    }
    v *= std::pow(2.0, 0.5 * (Ja + Jb) - Jf) * s * du;
  }
  return v;
}

}  // namespace kondra::wavelets
