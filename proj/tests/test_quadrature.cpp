#include <catch_amalgamated.hpp>

#include "kondra/quadrature.hpp"

using namespace kondra;
using namespace kondra::quadrature;
namespace geo = kondra::geometry;

namespace {

template <int D>
double integrate(const QuadratureRule<D>& rule, const std::function<double(const Pt<D>&)>& f) {
  double s = 0;
  for (size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * f(rule.nodes[i]);
  return s;
}

}  // namespace

TEST_CASE("total quadrature weight reproduces the domain volume") {
  RuleOptions small;
  small.depth = 3;
  small.order = 4;
  small.tail_extra = 6;
  small.angular = 4;

  auto check = [&](auto dom, double tol) {
    auto rule = make_rule(dom, small);
    REQUIRE(rule.size() > 0);
    CHECK_THAT(rule.total_weight(), Catch::Matchers::WithinAbs(dom.volume(), tol));
  };

  check(geo::ModelDomain<2>::box({0, 0}, {1, 1}), 1e-11);
  check(geo::ModelDomain<2>::smooth_cone(M_PI / 4), 1e-11);
  check(geo::ModelDomain<2>::smooth_cone(2 * M_PI), 1e-10);
  check(geo::ModelDomain<2>::nonsmooth_cone(M_PI / 6, geo::ConeCut::Inside), 1e-11);
  check(geo::ModelDomain<2>::nonsmooth_cone(M_PI / 6, geo::ConeCut::Outside), 1e-11);
  check(geo::ModelDomain<2>::complement({-1, -1}, {1, 1}), 1e-10);
  check(geo::ModelDomain<3>::smooth_cone(M_PI / 6), 1e-8);
  check(geo::ModelDomain<3>::nonsmooth_cone(M_PI / 6, geo::ConeCut::Inside), 1e-9);
  check(geo::ModelDomain<3>::nonsmooth_cone(M_PI / 6, geo::ConeCut::Outside), 1e-9);
  check(geo::ModelDomain<3>::dihedral(1), 1e-10);
  check(geo::ModelDomain<3>::dihedral(2), 1e-10);
  check(geo::ModelDomain<3>::polyhedral_cone(0.5), 1e-10);
}

TEST_CASE("no quadrature node touches the singular set or leaves the domain") {
  RuleOptions small;
  small.depth = 3;
  small.order = 3;
  small.tail_extra = 4;
  small.angular = 4;

  auto check = [&](auto dom) {
    auto rule = make_rule(dom, small);
    auto S = dom.singular_set();
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& x : rule.nodes) {
      dmin = std::min(dmin, S.dist(x));
      CHECK(dom.contains(x));
    }
    CHECK(dmin > 0);
  };

  check(geo::ModelDomain<2>::smooth_cone(M_PI / 4));
  check(geo::ModelDomain<2>::nonsmooth_cone(M_PI / 6, geo::ConeCut::Outside));
  check(geo::ModelDomain<3>::dihedral(1));
  check(geo::ModelDomain<3>::polyhedral_cone(0.5));
  check(geo::ModelDomain<2>::complement({-1, -1}, {1, 1}));
}

TEST_CASE("polar chart integrates radial powers exactly") {
  auto sector = geo::ModelDomain<2>::smooth_cone(M_PI / 4);
  auto rule = make_rule(sector, 6, 5);
  for (double gamma : {-1.5, -1.0, 0.7}) {
    double exact = (M_PI / 4) / (gamma + 2.0);
    double got = integrate<2>(rule, [gamma](const Pt<2>& x) {
      return std::pow(std::hypot(x[0], x[1]), gamma);
    });
    CHECK_THAT(got / exact, Catch::Matchers::WithinAbs(1.0, 2e-8));  // order-5 plateau on fractional powers
  }
}

TEST_CASE("unit disk integral of 1/|x| hits two pi") {
  auto disk = geo::ModelDomain<2>::smooth_cone(2 * M_PI);
  auto rule = make_rule(disk, 8, 5);
  double got =
      integrate<2>(rule, [](const Pt<2>& x) { return 1.0 / std::hypot(x[0], x[1]); });
  CHECK_THAT(got / (2 * M_PI), Catch::Matchers::WithinAbs(1.0, 1e-8));
}

TEST_CASE("3d cone integrates the inverse-square distance to the solid angle") {
  auto cone = geo::ModelDomain<3>::smooth_cone(M_PI / 6);
  RuleOptions o;
  o.depth = 4;
  o.order = 5;
  o.tail_extra = 8;
  o.angular = 4;
  auto rule = make_rule(cone, o);
  double got = integrate<3>(rule, [](const Pt<3>& x) {
    double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    return 1.0 / r2;
  });
  double exact = 2 * M_PI * (1 - std::cos(M_PI / 6));
  CHECK_THAT(got / exact, Catch::Matchers::WithinAbs(1.0, 1e-7));
}

TEST_CASE("triangle chart integrates edge-distance powers in closed form") {
  double half = M_PI / 6, tg = std::tan(half);
  for (auto cut : {geo::ConeCut::Inside, geo::ConeCut::Outside}) {
    auto dom = geo::ModelDomain<2>::nonsmooth_cone(half, cut);
    auto rule = make_rule(dom, 6, 5);
    for (double gamma : {-0.5, 1.0}) {
      double exact = std::pow(tg, gamma + 1) / ((gamma + 1) * (gamma + 2));
      double got =
          integrate<2>(rule, [gamma](const Pt<2>& x) { return std::pow(std::abs(x[0]), gamma); });
      CHECK_THAT(got / exact, Catch::Matchers::WithinAbs(1.0, 2e-8));  // order-5 plateau on fractional powers
    }
  }
}

TEST_CASE("corner-graded boxes integrate 1/|x| over the unit square") {
  double exact = 2.0 * std::log(1.0 + std::sqrt(2.0));
  auto box = geo::ModelDomain<2>::box({0, 0}, {1, 1});
  auto rule = make_rule(box, 6, 5);
  double got = integrate<2>(rule, [](const Pt<2>& x) { return 1.0 / std::hypot(x[0], x[1]); });
  CHECK_THAT(got / exact, Catch::Matchers::WithinAbs(1.0, 1e-7));

  // punctured window: four such corners
  auto punct = geo::ModelDomain<2>::complement({-1, -1}, {1, 1});
  auto prule = make_rule(punct, 6, 5);
  double pgot =
      integrate<2>(prule, [](const Pt<2>& x) { return 1.0 / std::hypot(x[0], x[1]); });
  CHECK_THAT(pgot / (4 * exact), Catch::Matchers::WithinAbs(1.0, 1e-7));
}

TEST_CASE("dihedral grading integrates edge-distance powers") {
  auto dom = geo::ModelDomain<3>::dihedral(1);
  RuleOptions o;
  o.depth = 5;
  o.order = 5;
  o.tail_extra = 8;
  auto rule = make_rule(dom, o);
  double exact = 2.0 * std::log(1.0 + std::sqrt(2.0));  // in-plane corner integral
  double got =
      integrate<3>(rule, [](const Pt<3>& x) { return 1.0 / std::hypot(x[0], x[1]); });
  CHECK_THAT(got / exact, Catch::Matchers::WithinAbs(1.0, 1e-7));
}

TEST_CASE("refining the grading depth converges on the polyhedral cone") {
  auto dom = geo::ModelDomain<3>::polyhedral_cone(0.5);
  auto S = dom.singular_set();
  auto f = [&](const Pt<3>& x) { return std::pow(S.dist(x), -0.5); };

  RuleOptions o;
  o.order = 4;
  o.tail_extra = 4;
  o.depth = 7;
  double ref = integrate<3>(make_rule(dom, o), f);

  std::vector<double> errs;
  for (int depth : {2, 3, 4}) {
    o.depth = depth;
    errs.push_back(std::abs(integrate<3>(make_rule(dom, o), f) - ref) / std::abs(ref));
  }
  for (size_t i = 1; i < errs.size(); ++i)
    CHECK(errs[i] <= std::max(errs[i - 1] / 1.5, 1e-10));
  CHECK(errs.back() < 1e-4);
}

TEST_CASE("rule sizes stay within the desk budget") {
  auto disk = geo::ModelDomain<2>::smooth_cone(2 * M_PI);
  auto rule = make_rule(disk, 8, 5);
  CHECK(rule.size() < 20000);
  auto cone = geo::ModelDomain<3>::smooth_cone(M_PI / 6);
  RuleOptions o;
  o.depth = 4;
  o.order = 4;
  o.tail_extra = 6;
  o.angular = 4;
  CHECK(make_rule(cone, o).size() < 200000);
}
