#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "hflow/geometry.hpp"

namespace hflow {

enum class FunctionalKind {
  SquaredDistance,  // (w/2) d(., a)^2
  Distance,         // w d(., a)
  WeightedSum,
  Indicator,
  Busemann,
  Displacement,
  Custom,
};

inline double infinity() { return std::numeric_limits<double>::infinity(); }

// Convex lsc functional tied to its space. Value-semantic; implementation
// state shared and immutable.
class Functional {
 public:
  static Functional squared_distance(Space S, Point anchor, double w = 1.0);
  static Functional distance_to(Space S, Point anchor, double w = 1.0);
  static Functional weighted_sum(Space S, std::vector<std::pair<Functional, double>> terms,
                                 bool normalized = false);
  static Functional indicator(Space S, ConvexSet C);
  static Functional busemann(Space S, Ray ray);
  static Functional displacement(Space S, Isometry T);
  static Functional custom(Space S, std::function<double(const Point&)> eval,
                           std::function<Point(const Point&, double)> exact_resolvent = nullptr,
                           std::optional<double> lipschitz = std::nullopt);

  // f(x) = sum_n w_n d(x, a_n)^p with p in {1, 2}. When `normalized` the
  // weights must sum to one (median / mean instances).
  static Functional fermat_weber(Space S, std::vector<Point> anchors, Vec weights, int p,
                                 bool normalized = true);

  double eval(const Point& x) const;
  const Space& space() const;
  FunctionalKind kind() const;

  const Point& anchor() const;
  double weight() const;
  const std::vector<std::pair<Functional, double>>& terms() const;
  const ConvexSet& set() const;
  const Ray& ray() const;
  const Isometry& isometry() const;
  const std::function<Point(const Point&, double)>& custom_resolvent() const;
  std::optional<double> lipschitz_bound() const;

  // |grad f|(x) where a closed formula is registered; otherwise nullopt.
  std::optional<double> known_slope(const Point& x) const;
  // Anchors and other structural points, used for probes and solver targets.
  std::vector<Point> structural_points(const Point& x) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// (1-t) f(x) + t f(y) - beta t(1-t) d(x,y)^2 - f(gamma(t)); nonnegative up to
// tolerance exactly when f is beta-strongly convex along [x, y].
double convexity_slack(const Functional& f, double beta, const Point& x, const Point& y, double t);

// Stored tail x_N ... x_M of a sequence, the computable stand-in for its tail
// behavior. All limsup/liminf-style diagnostics run over such windows.
struct SequenceWindow {
  Space space;
  std::vector<Point> points;
  int tail_start = 0;  // index of points.front() in the original sequence

  SequenceWindow(Space S, std::vector<Point> pts, int start = 0)
      : space(std::move(S)), points(std::move(pts)), tail_start(start) {
    if (points.empty()) throw InvalidInput("sequence window: must be nonempty");
  }
  SequenceWindow second_half() const {
    size_t from = points.size() / 2;
    return SequenceWindow(space, std::vector<Point>(points.begin() + from, points.end()),
                          tail_start + static_cast<int>(from));
  }
};

// max over the stored tail of d(x, x_n)^2.
double omega_tail(const SequenceWindow& window, const Point& x);

}  // namespace hflow
