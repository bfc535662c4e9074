#pragma once

// Parameter calculus for interpolation couples: closed-form interpolated
// parameters (affine in smoothness and weight, harmonic in the exponents),
// the sequence-space log-convexity inequality, embedding admissibility
// margins, and sharpness slopes measured on dilated field families.

#include "norms.hpp"

namespace kondra::interp {

using fields::ScalarField;
using geometry::SingularSet;
using geometry::WeightMode;
using norms::kInf;
using norms::NormParams;
using quadrature::QuadratureRule;

struct SpaceParams {
  double s = 0;  // smoothness
  double a = 0;  // weight exponent
  double p = 2;  // integrability
  double q = 2;  // fine index
};

struct InterpQuery {
  SpaceParams P0, P1;
  double theta = 0.5;
};

namespace detail {

// harmonic rule 1/e = (1-theta)/e0 + theta/e1, with 1/inf = 0
inline double harmonic(double e0, double e1, double theta) {
  double inv = (1 - theta) * (std::isinf(e0) ? 0.0 : 1.0 / e0) +
               theta * (std::isinf(e1) ? 0.0 : 1.0 / e1);
  return inv == 0 ? kInf : 1.0 / inv;
}

}  // namespace detail

inline SpaceParams interp_params(const InterpQuery& qu) {
  require(qu.theta > 0 && qu.theta < 1, "couple parameter must lie strictly inside (0,1)");
  for (const SpaceParams* P : {&qu.P0, &qu.P1}) {
    require(P->p > 1 && !std::isinf(P->p), "integrability endpoints must lie in (1, inf)");
    require(P->s >= 0, "smoothness endpoints must be nonnegative");
    require(P->q >= 1, "fine index must be at least one");
  }
  SpaceParams out;
  out.s = (1 - qu.theta) * qu.P0.s + qu.theta * qu.P1.s;
  out.a = (1 - qu.theta) * qu.P0.a + qu.theta * qu.P1.a;
  out.p = detail::harmonic(qu.P0.p, qu.P1.p, qu.theta);
  out.q = detail::harmonic(qu.P0.q, qu.P1.q, qu.theta);
  return out;
}

inline SpaceParams interp_params(const SpaceParams& P0, const SpaceParams& P1, double theta) {
  return interp_params(InterpQuery{P0, P1, theta});
}

// position of s between two integer smoothness levels; the canonical split
// uses m0 = floor(s), m1 = floor(s) + 1 and returns the fractional part
inline double theta_for(double s, int m0, int m1) {
  require((double)m0 < s && s < (double)m1, "smoothness must lie strictly between the endpoints");
  return (s - m0) / (double)(m1 - m0);
}

// norm factor picked up when both legs of a couple are rescaled
inline double scaled_couple_factor(double alpha, double beta, double theta) {
  require(alpha > 0 && beta > 0, "couple scalings must be positive");
  return std::pow(alpha, 1 - theta) * std::pow(beta, theta);
}

// ---------------------------------------------------------------------------
// Weighted sequence norms and the convexity inequality they satisfy along a
// couple: the interpolated norm (harmonic exponent, geometric weights) never
// exceeds the geometric mean of the endpoint norms.

struct SeqWeight {
  double q = 2;
  std::vector<double> w;
};

struct ConvexityReport {
  double norm0 = 0, norm1 = 0;
  double value = 0;  // interpolated-space norm
  double bound = 0;  // norm0^{1-theta} norm1^theta
  double slack = 0;  // (bound - value) / bound
  bool holds = false;
};

inline double weighted_lq(const std::vector<double>& x, const SeqWeight& W) {
  require(x.size() == W.w.size(), "weight vector must match the sequence");
  require(W.q >= 1, "sequence exponent must be at least one");
  double acc = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    require(W.w[i] > 0, "sequence weights must be strictly positive");
    double v = W.w[i] * std::abs(x[i]);
    acc = std::isinf(W.q) ? std::max(acc, v) : acc + std::pow(v, W.q);
  }
  return std::isinf(W.q) ? acc : std::pow(acc, 1.0 / W.q);
}

inline ConvexityReport log_convexity_check(const std::vector<double>& x, const SeqWeight& W0,
                                           const SeqWeight& W1, double theta) {
  require(theta > 0 && theta < 1, "couple parameter must lie strictly inside (0,1)");
  require(W0.w.size() == W1.w.size(), "endpoint weights must share the index set");
  SeqWeight Wt;
  Wt.q = detail::harmonic(W0.q, W1.q, theta);
  Wt.w.resize(W0.w.size());
  for (size_t i = 0; i < Wt.w.size(); ++i)
    Wt.w[i] = std::pow(W0.w[i], 1 - theta) * std::pow(W1.w[i], theta);

  ConvexityReport rep;
  rep.norm0 = weighted_lq(x, W0);
  rep.norm1 = weighted_lq(x, W1);
  rep.value = weighted_lq(x, Wt);
  rep.bound = std::pow(rep.norm0, 1 - theta) * std::pow(rep.norm1, theta);
  rep.slack = rep.bound > 0 ? (rep.bound - rep.value) / rep.bound : 0.0;
  rep.holds = rep.slack >= -1e-12;
  return rep;
}

// ---------------------------------------------------------------------------
// Embedding admissibility: both differential-dimension margins nonnegative
// and the integrability exponents ordered.

struct EmbeddingDecision {
  bool admissible = false;
  double margin_s = 0;  // (s0 - d/p0) - (s1 - d/p1)
  double margin_a = 0;  // (a0 - d/p0) - (a1 - d/p1)
  bool p_ordered = false;
  bool vertical = false;  // same integrability and weight, smoothness drop only
};

inline EmbeddingDecision embedding_admissible(int d, const SpaceParams& P0,
                                              const SpaceParams& P1) {
  require(d >= 1, "dimension must be positive");
  require(P0.p > 1 && !std::isinf(P0.p) && P1.p > 1 && !std::isinf(P1.p),
          "integrability endpoints must lie in (1, inf)");
  EmbeddingDecision dec;
  dec.margin_s = (P0.s - d / P0.p) - (P1.s - d / P1.p);
  dec.margin_a = (P0.a - d / P0.p) - (P1.a - d / P1.p);
  dec.p_ordered = P0.p <= P1.p;
  dec.admissible = dec.p_ordered && dec.margin_s >= 0 && dec.margin_a >= 0;
  dec.vertical = P0.p == P1.p && P0.a == P1.a && P0.s >= P1.s;
  return dec;
}

// ---------------------------------------------------------------------------
// Sharpness measurement: contract a fixed field toward a center and fit the
// growth exponent of the norm ratio against the contraction factor.

enum class SharpnessMode { AtSingularity, RegularPoint };

struct SharpnessOptions {
  double fit_from = 0;        // smallest lambda used in the fit; 0 = mode default
  double residual_tol = 0.1;  // max |log-ratio - fit| before the fit is distrusted
};

struct SharpnessReport {
  std::vector<double> lambda, norm0, norm1, ratio;
  double slope = 0;      // fitted d log(ratio) / d log(lambda)
  double predicted = 0;  // violated-margin exponent for the chosen mode
  double residual = 0;
  bool conclusive = false;
};

// norm of x -> u(c + lambda (x - c)) evaluated by pulling the integral back
// to the fixed support of u: the substitution leaves the derivative jets of
// u in place and sends the weight to the contracted preimage, so one rule
// resolving supp u serves every lambda with no resolution loss.
template <int D>
inline double dilated_norm(const ScalarField<D>& u, const SingularSet<D>& S,
                           const QuadratureRule<D>& rule, const NormParams& prm,
                           WeightMode mode, double lambda, const Pt<D>& center = {}) {
  require(prm.m >= 0 && prm.m <= kMaxJetOrder, "derivative order out of range");
  require(prm.p >= 1, "integrability exponent must be >= 1");
  require(lambda > 0, "contraction factor must be positive");
  const bool sup = norms::is_sup(prm);
  auto idx = enumerate_multi_indices<D>(prm.m);
  std::vector<double> term(idx.size(), 0.0);
  for (size_t n = 0; n < rule.size(); ++n) {
    const Pt<D>& y = rule.nodes[n];
    Pt<D> pre{};
    for (int i = 0; i < D; ++i) pre[i] = center[i] + (y[i] - center[i]) / lambda;
    double rho = geometry::weight_value<D>(S, pre, mode);
    Jet<D> j = u.jet(y, prm.m);
    for (size_t t = 0; t < idx.size(); ++t) {
      int k = idx[t].order();
      double g = std::pow(rho, k - prm.a) * std::pow(lambda, k) * std::abs(j.deriv(idx[t]));
      if (sup)
        term[t] = std::max(term[t], g);
      else
        term[t] += rule.weights[n] * std::pow(g, prm.p);
    }
  }
  double total = 0;
  for (double t : term) total += t;
  return sup ? total : std::pow(total, 1.0 / prm.p) * std::pow(lambda, -(double)D / prm.p);
}

template <int D>
inline SharpnessReport sharpness_exponent(const ScalarField<D>& u,
                                          const std::vector<double>& lambdas,
                                          const NormParams& P0, const NormParams& P1,
                                          SharpnessMode mode, const SingularSet<D>& S,
                                          const QuadratureRule<D>& rule, WeightMode wmode,
                                          const Pt<D>& center = {},
                                          SharpnessOptions opt = {}) {
  require(lambdas.size() >= 2, "slope fit needs at least two contraction factors");
  double fit_from = opt.fit_from > 0
                        ? opt.fit_from
                        : (mode == SharpnessMode::RegularPoint ? 4.0 : 1.0);

  SharpnessReport rep;
  // contracting toward the center raises the ratio like lambda^{violation};
  // at a regular point the weight freezes and the top derivative order takes
  // over the contraction exponent
  rep.predicted = mode == SharpnessMode::AtSingularity
                      ? (P1.a - D / P1.p) - (P0.a - D / P0.p)
                      : (P1.m - D / P1.p) - (P0.m - D / P0.p);

  std::vector<double> lx, ly;
  for (double lam : lambdas) {
    double n0 = dilated_norm<D>(u, S, rule, P0, wmode, lam, center);
    double n1 = dilated_norm<D>(u, S, rule, P1, wmode, lam, center);
    rep.lambda.push_back(lam);
    rep.norm0.push_back(n0);
    rep.norm1.push_back(n1);
    double r = n0 > 0 && std::isfinite(n0) && std::isfinite(n1) ? n1 / n0 : 0.0;
    rep.ratio.push_back(r);
    if (lam >= fit_from && r > 0) {
      lx.push_back(std::log(lam));
      ly.push_back(std::log(r));
    }
  }
  require(lx.size() >= 2, "slope fit needs at least two usable contraction factors");

  double mx = 0, my = 0;
  for (size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
  mx /= (double)lx.size();
  my /= (double)lx.size();
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  rep.slope = sxy / sxx;
  for (size_t i = 0; i < lx.size(); ++i)
    rep.residual = std::max(rep.residual,
                            std::abs(ly[i] - (my + rep.slope * (lx[i] - mx))));
  rep.conclusive = rep.residual <= opt.residual_tol;
  return rep;
}

}  // namespace kondra::interp
