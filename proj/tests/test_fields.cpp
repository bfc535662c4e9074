#include <catch_amalgamated.hpp>

#include "kondra/fields.hpp"
#include "oracles.hpp"

using namespace kondra;
using namespace kondra::fields;
namespace geo = kondra::geometry;

namespace {

void check_jet_against_fd(const ScalarField<2>& f, const Pt<2>& x, double tol = 1e-5) {
  Jet<2> j = f.jet(x, 2);
  auto fn = [&](const Pt<2>& y) { return f.value(y); };
  for (const auto& a : enumerate_multi_indices<2>(2)) {
    if (a.order() == 0) {
      CHECK_THAT(j.value(), Catch::Matchers::WithinAbs(f.value(x), 1e-13));
      continue;
    }
    double fd = oracles::fd_derivative<2>(fn, x, a, 1e-5);
    CHECK_THAT(j.deriv(a), Catch::Matchers::WithinAbs(fd, tol * (1.0 + std::abs(fd))));
  }
}

}  // namespace

TEST_CASE("trig jets match closed forms") {
  Pt<2> x{0.3, -0.7};
  Jet<2> u = Jet<2>::variable(x[0], 0, 3) * 2.0 + Jet<2>::variable(x[1], 1, 3) * 1.0;
  Jet<2> c = jet_cos(u), s = jet_sin(u);
  double t = 2 * x[0] + x[1];
  CHECK_THAT(c.value(), Catch::Matchers::WithinAbs(std::cos(t), 1e-14));
  CHECK_THAT(s.value(), Catch::Matchers::WithinAbs(std::sin(t), 1e-14));
  MultiIdx<2> dx{{1, 0}}, dxy{{1, 1}}, d3{{2, 1}};
  CHECK_THAT(c.deriv(dx), Catch::Matchers::WithinAbs(-2 * std::sin(t), 1e-13));
  CHECK_THAT(c.deriv(dxy), Catch::Matchers::WithinAbs(-2 * std::cos(t), 1e-13));
  CHECK_THAT(c.deriv(d3), Catch::Matchers::WithinAbs(4 * std::sin(t), 1e-13));
  CHECK_THAT(s.deriv(dxy), Catch::Matchers::WithinAbs(-2 * std::sin(t), 1e-13));
}

TEST_CASE("polynomial fields evaluate exactly") {
  // 2 x^2 y - 3 y + 1
  auto f = polynomial_field<2>({{{2, 1}, 2.0}, {{0, 1}, -3.0}, {{0, 0}, 1.0}});
  Pt<2> x{1.5, -0.5};
  CHECK_THAT(f.value(x), Catch::Matchers::WithinAbs(2 * 2.25 * -0.5 + 1.5 + 1.0, 1e-14));
  Jet<2> j = f.jet(x, 3);
  MultiIdx<2> dxx{{2, 0}}, dxxy{{2, 1}};
  CHECK_THAT(j.deriv(dxx), Catch::Matchers::WithinAbs(4 * x[1], 1e-14));
  CHECK_THAT(j.deriv(dxxy), Catch::Matchers::WithinAbs(4.0, 1e-14));
}

TEST_CASE("radial bump is a plateau-free compact profile") {
  auto f = radial_bump<2>({0.2, 0.1}, 0.5);
  CHECK_THAT(f.value({0.2, 0.1}), Catch::Matchers::WithinAbs(1.0, 1e-14));
  CHECK(f.value({0.8, 0.1}) == 0.0);
  CHECK(f.value({0.2, 0.6001}) == 0.0);
  CHECK(f.value({0.4, 0.2}) > 0.0);
  check_jet_against_fd(f, {0.35, 0.25});
  check_jet_against_fd(f, {0.2, 0.1});
  // C^1 across the sphere: derivative tends to zero
  Pt<2> edge{0.2 + 0.5 - 1e-6, 0.1};
  Jet<2> j = f.jet(edge, 1);
  CHECK_THAT(j.deriv(MultiIdx<2>{{1, 0}}), Catch::Matchers::WithinAbs(0.0, 1e-4));
}

TEST_CASE("box cutoff is one on the inner half and vanishes outside") {
  auto f = box_cutoff<2>({-1, 0}, {1, 2});
  CHECK(f.value({0, 1}) == 1.0);
  CHECK(f.value({-0.5, 0.5}) == 1.0);
  CHECK(f.value({-1.01, 1}) == 0.0);
  CHECK(f.value({0, 2.2}) == 0.0);
  double v = f.value({0.8, 1.0});
  CHECK(v > 0.0);
  CHECK(v < 1.0);
  check_jet_against_fd(f, {0.8, 1.7});
}

TEST_CASE("weight powers differentiate like rho^gamma") {
  auto S = geo::SingularSet<2>::point({0, 0});
  auto f = weight_power<2>(S, -0.5, geo::WeightMode::Homogeneous);
  Pt<2> x{0.3, 0.4};  // rho = 0.5
  CHECK_THAT(f.value(x), Catch::Matchers::WithinAbs(std::pow(0.5, -0.5), 1e-13));
  check_jet_against_fd(f, x, 1e-4);

  // regularized mode saturates: far away the power is flat
  auto g = weight_power<2>(S, 2.0, geo::WeightMode::Regularized);
  Pt<2> far{3, 0};
  CHECK_THAT(g.value(far), Catch::Matchers::WithinAbs(1.0, 1e-13));
  Jet<2> j = g.jet(far, 2);
  for (const auto& a : enumerate_multi_indices<2>(2))
    if (a.order() > 0) CHECK_THAT(j.deriv(a), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("field algebra composes jets correctly") {
  auto f = polynomial_field<2>({{{1, 0}, 1.0}});   // x
  auto g = polynomial_field<2>({{{0, 1}, 1.0}});   // y
  auto h = f * g + constant_field<2>(2.0);         // xy + 2
  Pt<2> x{0.7, -1.2};
  CHECK_THAT(h.value(x), Catch::Matchers::WithinAbs(0.7 * -1.2 + 2.0, 1e-14));
  Jet<2> j = h.jet(x, 2);
  CHECK_THAT(j.deriv(MultiIdx<2>{{1, 1}}), Catch::Matchers::WithinAbs(1.0, 1e-14));
  check_jet_against_fd(h, x);
  auto scaled = 3.0 * h;
  CHECK_THAT(scaled.value(x), Catch::Matchers::WithinAbs(3.0 * h.value(x), 1e-14));
}

TEST_CASE("shift operator multiplies by the weight power") {
  auto S = geo::SingularSet<2>::point({0, 0});
  auto u = polynomial_field<2>({{{1, 1}, 1.0}});
  auto shifted = shift_apply<2>(S, 1.5, geo::WeightMode::Regularized, u);
  Pt<2> x{0.12, 0.05};  // dist = 0.13 < 1/2 where the regularized weight is exact
  double rho = std::hypot(x[0], x[1]);
  CHECK_THAT(shifted.value(x),
             Catch::Matchers::WithinAbs(std::pow(rho, 1.5) * x[0] * x[1], 1e-12));
  check_jet_against_fd(shifted, x, 1e-4);
}

TEST_CASE("dilation pulls back values and scales derivatives") {
  auto f = polynomial_field<2>({{{2, 0}, 1.0}, {{0, 1}, 2.0}});  // x^2 + 2y
  double lam = 4.0;
  auto g = dilate<2>(f, lam);
  Pt<2> x{0.25, -0.3};
  CHECK_THAT(g.value(x), Catch::Matchers::WithinAbs(1.0 * 1.0 + 2.0 * lam * x[1], 1e-13));
  Jet<2> j = g.jet(x, 2);
  CHECK_THAT(j.deriv(MultiIdx<2>{{1, 0}}),
             Catch::Matchers::WithinAbs(2.0 * lam * x[0] * lam, 1e-12));
  CHECK_THAT(j.deriv(MultiIdx<2>{{2, 0}}), Catch::Matchers::WithinAbs(2.0 * lam * lam, 1e-12));
  check_jet_against_fd(g, x);

  auto t = translate<2>(f, {1.0, 0.0});
  CHECK_THAT(t.value({1.25, 0.5}), Catch::Matchers::WithinAbs(0.25 * 0.25 + 1.0, 1e-13));
}

TEST_CASE("test families are deterministic and localized") {
  auto S = geo::SingularSet<2>::point({0, 0});
  Pt<2> lo{-1, -1}, hi{1, 1};
  for (int idx = 0; idx < 9; ++idx) {
    auto f = make_test_field<2>(idx, S, lo, hi, geo::WeightMode::Regularized, 42);
    auto g = make_test_field<2>(idx, S, lo, hi, geo::WeightMode::Regularized, 42);
    Rng rng(100 + idx);
    for (int it = 0; it < 20; ++it) {
      Pt<2> x{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
      CHECK(f.value(x) == g.value(x));
      if (std::abs(x[0]) > 1.0 || std::abs(x[1]) > 1.0) CHECK(f.value(x) == 0.0);
    }
    // different seeds give different fields for random families
    if (idx % 3 != 1) {
      auto h = make_test_field<2>(idx, S, lo, hi, geo::WeightMode::Regularized, 43);
      Pt<2> probe{0.31, -0.17};
      CHECK(f.value(probe) != h.value(probe));
    }
  }
  // jets are consistent at a generic interior point away from the singular set
  for (int idx = 0; idx < 6; ++idx) {
    auto f = make_test_field<2>(idx, S, lo, hi, geo::WeightMode::Regularized, 7);
    check_jet_against_fd(f, {0.4, 0.31}, 1e-4);
  }
}
