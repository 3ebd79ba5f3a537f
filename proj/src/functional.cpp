#include "hflow/functional.hpp"

#include <algorithm>
#include <cmath>

namespace hflow {

struct Functional::Impl {
  FunctionalKind kind = FunctionalKind::Custom;
  Space space;
  Point anchor;
  double weight = 1.0;
  std::vector<std::pair<Functional, double>> terms;
  std::optional<ConvexSet> set;
  std::optional<Ray> ray;
  std::optional<Isometry> isometry;
  std::function<double(const Point&)> custom_eval;
  std::function<Point(const Point&, double)> custom_resolvent;
  std::optional<double> lipschitz;
  bool normalized = false;

  explicit Impl(Space S) : space(std::move(S)) {}
};

namespace {
const std::function<Point(const Point&, double)> kNoResolvent;
}

Functional Functional::squared_distance(Space S, Point anchor, double w) {
  if (!(w > 0.0)) throw InvalidInput("squared_distance: weight must be positive");
  auto impl = std::make_shared<Impl>(std::move(S));
  impl->kind = FunctionalKind::SquaredDistance;
  impl->anchor = impl->space.canonical(anchor);
  impl->weight = w;
  Functional f;
  f.impl_ = std::move(impl);
  return f;
}

Functional Functional::distance_to(Space S, Point anchor, double w) {
  if (!(w > 0.0)) throw InvalidInput("distance_to: weight must be positive");
  auto impl = std::make_shared<Impl>(std::move(S));
  impl->kind = FunctionalKind::Distance;
  impl->anchor = impl->space.canonical(anchor);
  impl->weight = w;
  Functional f;
  f.impl_ = std::move(impl);
  return f;
}

Functional Functional::weighted_sum(Space S, std::vector<std::pair<Functional, double>> terms,
                                    bool normalized) {
  if (terms.empty()) throw InvalidInput("weighted_sum: needs at least one term");
  double wsum = 0.0;
  for (const auto& [term, w] : terms) {
    if (!(w > 0.0)) throw InvalidInput("weighted_sum: weights must be positive");
    if (!same_structure(term.space(), S)) throw InvalidInput("weighted_sum: term lives on another space");
    wsum += w;
  }
  if (normalized && std::abs(wsum - 1.0) > 1e-9)
    throw InvalidInput("weighted_sum: normalized instance requires weights summing to one");
  auto impl = std::make_shared<Impl>(std::move(S));
  impl->kind = FunctionalKind::WeightedSum;
  impl->terms = std::move(terms);
  impl->normalized = normalized;
  Functional f;
  f.impl_ = std::move(impl);
  return f;
}

Functional Functional::indicator(Space S, ConvexSet C) {
  auto impl = std::make_shared<Impl>(std::move(S));
  impl->kind = FunctionalKind::Indicator;
  impl->set = std::move(C);
  Functional f;
  f.impl_ = std::move(impl);
  return f;
}

Functional Functional::busemann(Space S, Ray ray) {
  if (S.kind() != SpaceKind::Euclidean && S.kind() != SpaceKind::Tree)
    throw UnsupportedVariant("busemann: closed form available on euclidean and tree backends only");
  auto impl = std::make_shared<Impl>(std::move(S));
  impl->kind = FunctionalKind::Busemann;
  impl->ray = std::move(ray);
  Functional f;
  f.impl_ = std::move(impl);
  return f;
}

Functional Functional::displacement(Space S, Isometry T) {
  auto impl = std::make_shared<Impl>(std::move(S));
  impl->kind = FunctionalKind::Displacement;
  impl->isometry = std::move(T);
  Functional f;
  f.impl_ = std::move(impl);
  return f;
}

Functional Functional::custom(Space S, std::function<double(const Point&)> eval,
                              std::function<Point(const Point&, double)> exact_resolvent,
                              std::optional<double> lipschitz) {
  if (!eval) throw InvalidInput("custom: evaluator required");
  auto impl = std::make_shared<Impl>(std::move(S));
  impl->kind = FunctionalKind::Custom;
  impl->custom_eval = std::move(eval);
  impl->custom_resolvent = std::move(exact_resolvent);
  impl->lipschitz = lipschitz;
  Functional f;
  f.impl_ = std::move(impl);
  return f;
}

Functional Functional::fermat_weber(Space S, std::vector<Point> anchors, Vec weights, int p,
                                    bool normalized) {
  if (anchors.empty() || anchors.size() != weights.size())
    throw InvalidInput("fermat_weber: anchors and weights must match and be nonempty");
  if (p != 1 && p != 2) throw InvalidInput("fermat_weber: p must be 1 or 2");
  std::vector<std::pair<Functional, double>> terms;
  terms.reserve(anchors.size());
  for (size_t i = 0; i < anchors.size(); ++i) {
    if (p == 1)
      terms.push_back({distance_to(S, anchors[i], 1.0), weights[i]});
    else
      // (w/2) d^2 with w = 2 makes the term equal d^2
      terms.push_back({squared_distance(S, anchors[i], 2.0), weights[i]});
  }
  return weighted_sum(std::move(S), std::move(terms), normalized);
}

const Space& Functional::space() const { return impl_->space; }
FunctionalKind Functional::kind() const { return impl_->kind; }
const Point& Functional::anchor() const { return impl_->anchor; }
double Functional::weight() const { return impl_->weight; }
const std::vector<std::pair<Functional, double>>& Functional::terms() const { return impl_->terms; }
const ConvexSet& Functional::set() const { return *impl_->set; }
const Ray& Functional::ray() const { return *impl_->ray; }
const Isometry& Functional::isometry() const { return *impl_->isometry; }
const std::function<Point(const Point&, double)>& Functional::custom_resolvent() const {
  return impl_->custom_resolvent ? impl_->custom_resolvent : kNoResolvent;
}
std::optional<double> Functional::lipschitz_bound() const { return impl_->lipschitz; }

namespace {

// Busemann value along a euclidean ray: -<x - base, u>.
double busemann_euclidean(const Ray& r, const Point& x) {
  double s = 0.0;
  for (size_t i = 0; i < x.coords.size(); ++i)
    s -= (x.coords[i] - r.base().coords[i]) * r.direction()[i];
  return s;
}

// On a finite tree the ray runs to a leaf and formally beyond it, so the
// value reduces to d(x, leaf) - d(base, leaf).
double busemann_tree(const Space& S, const Ray& r, const Point& x) {
  Point leaf = Point::tree_node(r.leaf());
  return S.distance(x, leaf) - S.distance(r.base(), leaf);
}

}  // namespace

double Functional::eval(const Point& x) const {
  const Impl& im = *impl_;
  switch (im.kind) {
    case FunctionalKind::SquaredDistance:
      return 0.5 * im.weight * sqr(im.space.distance(x, im.anchor));
    case FunctionalKind::Distance:
      return im.weight * im.space.distance(x, im.anchor);
    case FunctionalKind::WeightedSum: {
      double s = 0.0;
      for (const auto& [term, w] : im.terms) {
        double v = term.eval(x);
        if (v == infinity()) return infinity();
        s += w * v;
      }
      return s;
    }
    case FunctionalKind::Indicator:
      return im.set->contains(im.space, x, 1e-9) ? 0.0 : infinity();
    case FunctionalKind::Busemann:
      if (im.space.kind() == SpaceKind::Euclidean) return busemann_euclidean(*im.ray, x);
      return busemann_tree(im.space, *im.ray, x);
    case FunctionalKind::Displacement:
      return im.space.distance(x, im.isometry->apply(im.space, x));
    case FunctionalKind::Custom:
      return im.custom_eval(x);
  }
  throw InvalidInput("eval: unknown functional kind");
}

std::optional<double> Functional::known_slope(const Point& x) const {
  const Impl& im = *impl_;
  switch (im.kind) {
    case FunctionalKind::SquaredDistance:
      return im.weight * im.space.distance(x, im.anchor);
    case FunctionalKind::Distance: {
      double d = im.space.distance(x, im.anchor);
      return d < 1e-12 ? 0.0 : im.weight;
    }
    case FunctionalKind::Indicator:
      if (im.set->contains(im.space, x, 1e-9)) return 0.0;
      return std::nullopt;
    case FunctionalKind::Busemann: {
      if (im.space.kind() == SpaceKind::Euclidean) return 1.0;
      // on a finite tree the value bottoms out at the leaf
      Point leaf = Point::tree_node(im.ray->leaf());
      return im.space.distance(x, leaf) < 1e-12 ? 0.0 : 1.0;
    }
    default:
      return std::nullopt;
  }
}

std::vector<Point> Functional::structural_points(const Point& x) const {
  const Impl& im = *impl_;
  std::vector<Point> pts;
  switch (im.kind) {
    case FunctionalKind::SquaredDistance:
    case FunctionalKind::Distance:
      pts.push_back(im.anchor);
      break;
    case FunctionalKind::WeightedSum:
      for (const auto& [term, w] : im.terms) {
        (void)w;
        for (Point& p : term.structural_points(x)) pts.push_back(std::move(p));
      }
      break;
    case FunctionalKind::Indicator:
      pts.push_back(im.set->project(im.space, x));
      break;
    case FunctionalKind::Busemann:
      if (im.space.kind() == SpaceKind::Tree)
        pts.push_back(Point::tree_node(im.ray->leaf()));
      else
        pts.push_back(im.ray->at(im.space, 1.0 + im.space.distance(x, im.ray->base())));
      break;
    case FunctionalKind::Displacement:
      pts.push_back(im.isometry->apply(im.space, x));
      if (im.isometry->fixed_point()) pts.push_back(*im.isometry->fixed_point());
      break;
    case FunctionalKind::Custom:
      break;
  }
  return pts;
}

double convexity_slack(const Functional& f, double beta, const Point& x, const Point& y, double t) {
  if (beta < 0.0) throw InvalidInput("convexity_slack: beta must be >= 0");
  if (t < 0.0 || t > 1.0) throw InvalidInput("convexity_slack: t must lie in [0,1]");
  double fx = f.eval(x), fy = f.eval(y);
  if (fx == infinity() || fy == infinity())
    throw InvalidInput("convexity_slack: f must be finite at both endpoints");
  const Space& S = f.space();
  double d = S.distance(x, y);
  double mid = f.eval(S.geodesic(x, y, t));
  return (1.0 - t) * fx + t * fy - beta * t * (1.0 - t) * d * d - mid;
}

double omega_tail(const SequenceWindow& window, const Point& x) {
  double m = 0.0;
  for (const Point& p : window.points) m = std::max(m, sqr(window.space.distance(x, p)));
  return m;
}

}  // namespace hflow
