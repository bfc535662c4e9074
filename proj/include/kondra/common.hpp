#pragma once

// Shared small pieces: points, multi-indices, truncated Taylor jets,
// Gauss-Legendre rules, exact rationals, a portable RNG.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace kondra {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

template <int D>
using Pt = std::array<double, static_cast<std::size_t>(D)>;

template <std::size_t N>
inline std::array<double, N> operator+(std::array<double, N> a, const std::array<double, N>& b) {
  for (std::size_t i = 0; i < N; ++i) a[i] += b[i];
  return a;
}
template <std::size_t N>
inline std::array<double, N> operator-(std::array<double, N> a, const std::array<double, N>& b) {
  for (std::size_t i = 0; i < N; ++i) a[i] -= b[i];
  return a;
}
template <std::size_t N>
inline std::array<double, N> operator*(double s, std::array<double, N> a) {
  for (std::size_t i = 0; i < N; ++i) a[i] *= s;
  return a;
}
template <std::size_t N>
inline double dot(const std::array<double, N>& a, const std::array<double, N>& b) {
  double s = 0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}
template <std::size_t N>
inline double norm2(const std::array<double, N>& a) {
  return dot(a, a);
}
template <std::size_t N>
inline double norm(const std::array<double, N>& a) {
  return std::sqrt(norm2(a));
}

// ---------------------------------------------------------------------------
// Multi-indices

template <int D>
struct MultiIdx {
  std::array<int, D> e{};
  int order() const {
    int s = 0;
    for (int i = 0; i < D; ++i) s += e[i];
    return s;
  }
  int operator[](int i) const { return e[i]; }
  int& operator[](int i) { return e[i]; }
  bool operator==(const MultiIdx&) const = default;
  auto operator<=>(const MultiIdx&) const = default;
};

inline double factorial(int n) {
  double r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  double r = 1;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

template <int D>
inline double multi_factorial(const MultiIdx<D>& a) {
  double r = 1;
  for (int i = 0; i < D; ++i) r *= factorial(a[i]);
  return r;
}

// All multi-indices with |alpha| <= ord, graded lexicographic.
template <int D>
inline std::vector<MultiIdx<D>> enumerate_multi_indices(int ord) {
  std::vector<MultiIdx<D>> out;
  for (int total = 0; total <= ord; ++total) {
    MultiIdx<D> a{};
    std::function<void(int, int)> rec = [&](int pos, int rem) {
      if (pos == D - 1) {
        a[pos] = rem;
        out.push_back(a);
        return;
      }
      for (int v = rem; v >= 0; --v) {
        a[pos] = v;
        rec(pos + 1, rem - v);
      }
    };
    rec(0, total);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Truncated Taylor jets up to total order kMaxJetOrder.
//
// Coefficients are Taylor coefficients c_alpha = d^alpha f / alpha!, so the
// product rule is plain coefficient convolution. All jets taking part in one
// expression must share the same truncation order.

inline constexpr int kMaxJetOrder = 4;

template <int D>
struct JetLayout {
  std::vector<MultiIdx<D>> idx;
  std::map<MultiIdx<D>, int> rank;
  // (result, lhs, rhs) triples for coefficient convolution
  std::vector<std::array<int, 3>> prod;
  std::vector<int> order_of;

  static const JetLayout& get() {
    static const JetLayout layout = [] {
      JetLayout l;
      l.idx = enumerate_multi_indices<D>(kMaxJetOrder);
      for (int i = 0; i < (int)l.idx.size(); ++i) l.rank[l.idx[i]] = i;
      for (const auto& a : l.idx) l.order_of.push_back(a.order());
      for (int ia = 0; ia < (int)l.idx.size(); ++ia)
        for (int ib = 0; ib < (int)l.idx.size(); ++ib) {
          if (l.idx[ia].order() + l.idx[ib].order() > kMaxJetOrder) continue;
          MultiIdx<D> c;
          for (int i = 0; i < D; ++i) c[i] = l.idx[ia][i] + l.idx[ib][i];
          l.prod.push_back({l.rank.at(c), ia, ib});
        }
      return l;
    }();
    return layout;
  }

  int size() const { return (int)idx.size(); }
};

template <int D>
struct Jet {
  int ord = kMaxJetOrder;
  std::vector<double> c;

  Jet() : c(JetLayout<D>::get().size(), 0.0) {}
  explicit Jet(int order) : ord(order), c(JetLayout<D>::get().size(), 0.0) {
    require(order >= 0 && order <= kMaxJetOrder, "jet order out of range");
  }

  static Jet constant(double v, int ord) {
    Jet j(ord);
    j.c[0] = v;
    return j;
  }
  // The i-th coordinate as a jet based at x.
  static Jet variable(double xi, int i, int ord) {
    Jet j(ord);
    j.c[0] = xi;
    if (ord >= 1) {
      MultiIdx<D> a{};
      a[i] = 1;
      j.c[JetLayout<D>::get().rank.at(a)] = 1.0;
    }
    return j;
  }

  double value() const { return c[0]; }
  double deriv(const MultiIdx<D>& a) const {
    require(a.order() <= ord, "derivative order exceeds jet order");
    return c[JetLayout<D>::get().rank.at(a)] * multi_factorial(a);
  }

  Jet& operator+=(const Jet& o) {
    for (size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& v : c) v *= s;
    return *this;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator+(Jet a, double s) {
    a.c[0] += s;
    return a;
  }
  friend Jet operator-(Jet a, double s) {
    a.c[0] -= s;
    return a;
  }

  friend Jet operator*(const Jet& a, const Jet& b) {
    const auto& L = JetLayout<D>::get();
    Jet r(std::min(a.ord, b.ord));
    for (const auto& t : L.prod) {
      if (L.order_of[t[1]] + L.order_of[t[2]] > r.ord) continue;
      r.c[t[0]] += a.c[t[1]] * b.c[t[2]];
    }
    return r;
  }
};

// Compose a univariate Taylor series sum_k a[k] * delta^k with a jet whose
// constant term has been absorbed into the series expansion point.
template <int D>
inline Jet<D> compose_series(const Jet<D>& u, const std::vector<double>& a) {
  Jet<D> delta = u;
  delta.c[0] = 0.0;
  int n = std::min<int>((int)a.size() - 1, u.ord);
  Jet<D> r = Jet<D>::constant(a[n], u.ord);
  for (int k = n - 1; k >= 0; --k) r = r * delta + a[k];
  return r;
}

// u^gamma for real gamma; requires u.value() > 0.
template <int D>
inline Jet<D> jet_pow(const Jet<D>& u, double gamma) {
  double u0 = u.value();
  require(u0 > 0, "jet_pow needs a positive base");
  std::vector<double> a(u.ord + 1);
  double coef = std::pow(u0, gamma);
  a[0] = coef;
  for (int k = 1; k <= u.ord; ++k) {
    coef *= (gamma - (k - 1)) / k / u0;
    a[k] = coef;
  }
  return compose_series(u, a);
}

template <int D>
inline Jet<D> jet_sqrt(const Jet<D>& u) {
  return jet_pow(u, 0.5);
}
template <int D>
inline Jet<D> jet_recip(const Jet<D>& u) {
  double u0 = u.value();
  require(u0 != 0, "jet_recip at zero");
  std::vector<double> a(u.ord + 1);
  double coef = 1.0 / u0;
  a[0] = coef;
  for (int k = 1; k <= u.ord; ++k) {
    coef *= -1.0 / u0;
    a[k] = coef;
  }
  return compose_series(u, a);
}
template <int D>
inline Jet<D> operator/(const Jet<D>& a, const Jet<D>& b) {
  return a * jet_recip(b);
}

// ---------------------------------------------------------------------------
// Univariate polynomials (ascending coefficients)

struct Poly {
  std::vector<double> c;  // c[0] + c[1] t + ...
  double operator()(double t) const {
    double r = 0;
    for (int k = (int)c.size() - 1; k >= 0; --k) r = r * t + c[k];
    return r;
  }
  Poly derivative() const {
    if (c.size() <= 1) return Poly{{0.0}};
    Poly d;
    d.c.resize(c.size() - 1);
    for (size_t k = 1; k < c.size(); ++k) d.c[k - 1] = c[k] * (double)k;
    return d;
  }
  Poly antiderivative() const {
    Poly p;
    p.c.assign(c.size() + 1, 0.0);
    for (size_t k = 0; k < c.size(); ++k) p.c[k + 1] = c[k] / (double)(k + 1);
    return p;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    r.c.assign(a.c.size() + b.c.size() - 1, 0.0);
    for (size_t i = 0; i < a.c.size(); ++i)
      for (size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
  }
  friend Poly operator+(Poly a, const Poly& b) {
    if (b.c.size() > a.c.size()) a.c.resize(b.c.size(), 0.0);
    for (size_t i = 0; i < b.c.size(); ++i) a.c[i] += b.c[i];
    return a;
  }
  friend Poly operator*(double s, Poly a) {
    for (double& v : a.c) v *= s;
    return a;
  }
};

template <int D>
inline Jet<D> poly_eval_jet(const Poly& p, const Jet<D>& u) {
  Jet<D> r = Jet<D>::constant(p.c.empty() ? 0.0 : p.c.back(), u.ord);
  for (int k = (int)p.c.size() - 2; k >= 0; --k) r = r * u + p.c[k];
  return r;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules on [-1,1]

struct GaussRule {
  std::vector<double> x, w;
};

inline const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  require(n >= 1 && n <= 32, "gauss order out of range");
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1);
    r.x[i] = x;
    r.w[i] = 2.0 / ((1 - x * x) * dp * dp);
  }
  return cache.emplace(n, std::move(r)).first->second;
}

// ---------------------------------------------------------------------------
// Exact rationals over int64 (small systems only)

struct Rat {
  long long n = 0, d = 1;
  Rat() = default;
  Rat(long long num) : n(num), d(1) {}
  Rat(long long num, long long den) : n(num), d(den) { normalize(); }
  void normalize() {
    require(d != 0, "rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    long long g = std::gcd(std::abs(n), d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
  }
  friend Rat operator+(const Rat& a, const Rat& b) { return Rat(a.n * b.d + b.n * a.d, a.d * b.d); }
  friend Rat operator-(const Rat& a, const Rat& b) { return Rat(a.n * b.d - b.n * a.d, a.d * b.d); }
  friend Rat operator*(const Rat& a, const Rat& b) { return Rat(a.n * b.n, a.d * b.d); }
  friend Rat operator/(const Rat& a, const Rat& b) {
    require(b.n != 0, "rational division by zero");
    return Rat(a.n * b.d, a.d * b.n);
  }
  bool operator==(const Rat& o) const { return n == o.n && d == o.d; }
  double to_double() const { return (double)n / (double)d; }
};

// ---------------------------------------------------------------------------
// Deterministic RNG (bit-stable across platforms: raw mt19937_64 draws)

struct Rng {
  std::uint64_t s[4];
  explicit Rng(std::uint64_t seed) {
    // splitmix64 expansion
    std::uint64_t z = seed;
    for (int i = 0; i < 4; ++i) {
      z += 0x9e3779b97f4a7c15ull;
      std::uint64_t x = z;
      x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
      x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
      s[i] = x ^ (x >> 31);
    }
  }
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t next_u64() {  // xoshiro256**
    std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
  double uniform() { return (double)(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int uniform_int(int a, int b) {  // inclusive
    return a + (int)(next_u64() % (std::uint64_t)(b - a + 1));
  }
};

// ---------------------------------------------------------------------------
// Deterministic parallel map: results indexed by task, reduction by caller in
// task order, so the outcome does not depend on the worker count.

template <typename F>
inline void parallel_for(int n, int workers, F&& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < std::min(workers, n); ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace kondra
