#include <cmath>

#include "doctest.h"
#include "hflow/functional.hpp"

using namespace hflow;

namespace {

// Small catalogue used by property tests: every variant on a backend where it
// is defined.
struct CatalogueEntry {
  Functional f;
  double lipschitz;  // 0 when unknown / not Lipschitz
};

std::vector<CatalogueEntry> catalogue_on_line() {
  Space L = Space::line();
  return {
      {Functional::squared_distance(L, Point::scalar(0.3), 1.0), 0.0},
      {Functional::distance_to(L, Point::scalar(-0.4), 1.0), 1.0},
      {Functional::fermat_weber(L, {Point::scalar(-1), Point::scalar(2)}, {0.5, 0.5}, 1), 1.0},
      {Functional::busemann(L, Ray::euclidean(Point::scalar(0), {1.0})), 1.0},
      {Functional::displacement(L, Isometry::euclidean_translation({0.7})), 2.0},
  };
}

std::vector<CatalogueEntry> catalogue_on_tripod() {
  Space T = Space::tripod();
  return {
      {Functional::squared_distance(T, Point::tree_node(1), 1.0), 0.0},
      {Functional::distance_to(T, Point::tree_node(2), 1.0), 1.0},
      {Functional::busemann(T, Ray::tree(T, Point::tree_node(0), 1)), 1.0},
      {Functional::displacement(T, Isometry::tree_automorphism(T, {0, 2, 3, 1})), 2.0},
      {Functional::fermat_weber(
           T, {Point::tree_node(1), Point::tree_node(2), Point::tree_node(3)},
           {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1),
       1.0},
  };
}

Space star100() { return Space::star(100); }

}  // namespace

TEST_CASE("indicator of an interval") {
  Space L = Space::line();
  Functional f = Functional::indicator(L, ConvexSet::interval(0.0, 1.0));
  CHECK(f.eval(Point::scalar(0.5)) == 0.0);
  CHECK(f.eval(Point::scalar(2.0)) == infinity());
}

TEST_CASE("euclidean busemann closed form") {
  Space E = Space::euclidean(2);
  Functional b = Functional::busemann(E, Ray::euclidean(Point::vector({0, 0}), {1.0, 0.0}));
  CHECK(b.eval(Point::vector({3, 4})) == doctest::Approx(-3.0));

  // derived as the limit of d(x, c(t)) - t for large t
  Ray r = Ray::euclidean(Point::vector({0, 0}), {1.0, 0.0});
  double t = 1e7;
  Point far = r.at(E, t);
  double tail = E.distance(Point::vector({3, 4}), far) - t;
  CHECK(b.eval(Point::vector({3, 4})) == doctest::Approx(tail).epsilon(1e-6));
}

TEST_CASE("tree busemann closed form") {
  Space T = Space::tripod();
  Functional b = Functional::busemann(T, Ray::tree(T, Point::tree_node(0), 1));
  CHECK(b.eval(Point::tree_node(1)) == doctest::Approx(-1.0));
  CHECK(b.eval(Point::tree_node(0)) == doctest::Approx(0.0));
  CHECK(b.eval(Point::tree_node(2)) == doctest::Approx(1.0));
  CHECK(b.eval(Point::tree_edge(0, 0.25)) == doctest::Approx(-0.25));
}

TEST_CASE("busemann is rejected off euclidean and tree backends") {
  Space P = Space::spd(2);
  Space H = Space::hyperboloid(2);
  Ray rh = Ray::hyperboloid(H, Point::vector({1, 0, 0}), {0, 1, 0});
  CHECK_THROWS_AS(Functional::busemann(H, rh), UnsupportedVariant);
  CHECK_THROWS_AS(Functional::busemann(P, rh), UnsupportedVariant);
}

TEST_CASE("displacement of a quarter rotation") {
  Space E = Space::euclidean(2);
  Isometry rot = Isometry::euclidean_rigid(Mat(2, {0.0, -1.0, 1.0, 0.0}), {0.0, 0.0});
  Functional f = Functional::displacement(E, rot);
  CHECK(f.eval(Point::vector({1, 0})) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("convexity slack closed-form cases") {
  Space L = Space::line();
  // d(.,0)^2 is 1-strongly convex: equality on the line
  Functional q = Functional::squared_distance(L, Point::scalar(0.0), 2.0);
  CHECK(convexity_slack(q, 1.0, Point::scalar(-1), Point::scalar(1), 0.5) ==
        doctest::Approx(0.0).epsilon(1e-12));

  Functional a = Functional::distance_to(L, Point::scalar(0.0), 1.0);
  CHECK(convexity_slack(a, 0.0, Point::scalar(-1), Point::scalar(1), 0.5) == doctest::Approx(1.0));

  Functional inf_f = Functional::indicator(L, ConvexSet::interval(0, 1));
  CHECK_THROWS_AS(convexity_slack(inf_f, 0.0, Point::scalar(-1), Point::scalar(0.5), 0.5),
                  InvalidInput);
}

TEST_CASE("catalogue functionals are convex along random geodesics") {
  Rng rng(101);
  auto run = [&](const std::vector<CatalogueEntry>& cat, const Space& S) {
    for (const auto& entry : cat) {
      double worst = 0.0;
      for (int trial = 0; trial < 2000; ++trial) {
        Point x = sample_point(S, rng, 2.0), y = sample_point(S, rng, 2.0);
        double slack = convexity_slack(entry.f, 0.0, x, y, rng.uniform());
        worst = std::min(worst, slack);
      }
      CHECK(worst >= -1e-9);
    }
  };
  run(catalogue_on_line(), Space::line());
  run(catalogue_on_tripod(), Space::tripod());
}

TEST_CASE("squared distance is (w/2)-strongly convex") {
  Rng rng(5);
  Space T = Space::tripod();
  for (double w : {0.5, 1.0, 3.0}) {
    Functional f = Functional::squared_distance(T, Point::tree_edge(0, 0.4), w);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      Point x = sample_point(T, rng), y = sample_point(T, rng);
      worst = std::min(worst, convexity_slack(f, 0.5 * w, x, y, rng.uniform()));
    }
    CHECK(worst >= -1e-9);
  }
}

TEST_CASE("lipschitz constants of the catalogue") {
  Rng rng(202);
  auto run = [&](const std::vector<CatalogueEntry>& cat, const Space& S) {
    for (const auto& entry : cat) {
      if (entry.lipschitz == 0.0) continue;
      for (int trial = 0; trial < 500; ++trial) {
        Point x = sample_point(S, rng, 2.0), y = sample_point(S, rng, 2.0);
        double lhs = std::abs(entry.f.eval(x) - entry.f.eval(y));
        CHECK(lhs <= entry.lipschitz * S.distance(x, y) + 1e-9);
      }
    }
  };
  run(catalogue_on_line(), Space::line());
  run(catalogue_on_tripod(), Space::tripod());
}

TEST_CASE("omega tail examples") {
  Space L = Space::line();
  SequenceWindow constant(L, std::vector<Point>(5, Point::scalar(2.0)));
  CHECK(omega_tail(constant, Point::scalar(0.5)) == doctest::Approx(2.25));

  std::vector<Point> alt;
  for (int i = 0; i < 10; ++i) alt.push_back(Point::scalar(i % 2));
  SequenceWindow zigzag(L, alt);
  CHECK(omega_tail(zigzag, Point::scalar(0.5)) == doctest::Approx(0.25));

  Space S = star100();
  std::vector<Point> tips;
  for (int b = 1; b <= 100; ++b) tips.push_back(Point::tree_node(b));
  SequenceWindow star(S, tips);
  CHECK(omega_tail(star, Point::tree_node(0)) == doctest::Approx(1.0));
}

TEST_CASE("omega tail is 1-strongly convex") {
  Space T = Space::tripod();
  Rng rng(7);
  std::vector<Point> pts;
  for (int i = 0; i < 12; ++i) pts.push_back(sample_point(T, rng));
  SequenceWindow window(T, pts);
  Functional omega = Functional::custom(T, [&](const Point& x) { return omega_tail(window, x); });
  double worst = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    Point x = sample_point(T, rng), y = sample_point(T, rng);
    worst = std::min(worst, convexity_slack(omega, 1.0, x, y, rng.uniform()));
  }
  CHECK(worst >= -1e-9);
}

TEST_CASE("weak lower semicontinuity along star-tree weak families") {
  Space S = star100();
  Point center = Point::tree_node(0);
  // tail of a weakly null sequence: tips on branches not hit by any anchor;
  // structural branches (the ray target, early anchors) come before the tail
  std::vector<Point> tail;
  for (int b = 2; b <= 100; ++b) tail.push_back(Point::tree_node(b));
  std::vector<Point> all_tips;
  for (int b = 1; b <= 100; ++b) all_tips.push_back(Point::tree_node(b));

  std::vector<int> perm(101);
  perm[0] = 0;
  for (int b = 1; b <= 100; ++b) perm[b] = 1 + (b % 100);

  std::vector<Functional> fs = {
      Functional::squared_distance(S, center, 2.0),
      Functional::distance_to(S, Point::tree_edge(0, 0.5), 1.0),
      Functional::busemann(S, Ray::tree(S, center, 1)),
      Functional::displacement(S, Isometry::tree_automorphism(S, perm)),
      Functional::indicator(S, ConvexSet::tree_span(all_tips)),
  };
  for (const Functional& f : fs) {
    double tail_min = infinity();
    for (const Point& p : tail) tail_min = std::min(tail_min, f.eval(p));
    CHECK(tail_min >= f.eval(center) - 1e-8);
  }
}

TEST_CASE("fermat weber validates normalized weights") {
  Space L = Space::line();
  CHECK_THROWS_AS(
      Functional::fermat_weber(L, {Point::scalar(0), Point::scalar(1)}, {0.5, 0.6}, 1, true),
      InvalidInput);
  CHECK_NOTHROW(
      Functional::fermat_weber(L, {Point::scalar(0), Point::scalar(1)}, {0.5, 0.6}, 1, false));
}

TEST_CASE("sequence window second half keeps tail indexing") {
  Space L = Space::line();
  std::vector<Point> pts;
  for (int i = 0; i < 8; ++i) pts.push_back(Point::scalar(i));
  SequenceWindow w(L, pts, 10);
  SequenceWindow h = w.second_half();
  CHECK(h.tail_start == 14);
  CHECK(h.points.size() == 4);
  CHECK_THROWS_AS(SequenceWindow(L, {}), InvalidInput);
}
