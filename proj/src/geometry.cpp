#include "hflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace hflow {

namespace {
double clamp01(double t) { return std::min(1.0, std::max(0.0, t)); }
}  // namespace

// ---------------------------------------------------------------------------
// Point

Point Point::vector(Vec c) {
  Point p;
  p.kind = Kind::Vector;
  p.coords = std::move(c);
  return p;
}

Point Point::matrix(Vec rowmajor) {
  Point p;
  p.kind = Kind::Matrix;
  p.coords = std::move(rowmajor);
  return p;
}

Point Point::tree_node(int n) {
  Point p;
  p.kind = Kind::Tree;
  p.node = n;
  return p;
}

Point Point::tree_edge(int e, double off) {
  Point p;
  p.kind = Kind::Tree;
  p.node = -1;
  p.edge = e;
  p.offset = off;
  return p;
}

Point Point::tuple(std::vector<Point> parts) {
  Point p;
  p.kind = Kind::Tuple;
  p.parts = std::move(parts);
  return p;
}

Mat Point::as_mat() const {
  int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(coords.size()))));
  return Mat(n, coords);
}

// ---------------------------------------------------------------------------
// TreeTopology

TreeTopology::TreeTopology(int nnodes, std::vector<TreeEdge> edges)
    : nnodes_(nnodes), edges_(std::move(edges)) {
  if (nnodes_ <= 0) throw InvalidInput("tree: node count must be positive");
  if (static_cast<int>(edges_.size()) != nnodes_ - 1)
    throw InvalidInput("tree: edge count must be node count - 1 (connected acyclic)");
  adj_.assign(nnodes_, {});
  for (size_t e = 0; e < edges_.size(); ++e) {
    const TreeEdge& ed = edges_[e];
    if (ed.u < 0 || ed.u >= nnodes_ || ed.v < 0 || ed.v >= nnodes_ || ed.u == ed.v)
      throw InvalidInput("tree: edge endpoints out of range");
    if (!(ed.len > 0.0)) throw InvalidInput("tree: edge lengths must be positive");
    adj_[ed.u].push_back({static_cast<int>(e), ed.v});
    adj_[ed.v].push_back({static_cast<int>(e), ed.u});
    total_len_ += ed.len;
  }

  ndist_.assign(static_cast<size_t>(nnodes_) * nnodes_, -1.0);
  hop_.assign(static_cast<size_t>(nnodes_) * nnodes_, -1);
  for (int s = 0; s < nnodes_; ++s) {
    std::deque<int> queue{s};
    ndist_[static_cast<size_t>(s) * nnodes_ + s] = 0.0;
    hop_[static_cast<size_t>(s) * nnodes_ + s] = s;
    std::vector<int> parent(nnodes_, -1);
    parent[s] = s;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (auto [e, w] : adj_[u]) {
        if (parent[w] >= 0) continue;
        parent[w] = u;
        ndist_[static_cast<size_t>(s) * nnodes_ + w] =
            ndist_[static_cast<size_t>(s) * nnodes_ + u] + edges_[e].len;
        // first hop from w back toward s
        queue.push_back(w);
      }
    }
    for (int v = 0; v < nnodes_; ++v) {
      if (parent[v] < 0) throw InvalidInput("tree: graph is not connected");
      // next hop from s toward v: walk parents back from v
      int cur = v;
      while (parent[cur] != s && cur != s) cur = parent[cur];
      hop_[static_cast<size_t>(s) * nnodes_ + v] = (v == s) ? s : cur;
    }
  }
}

int TreeTopology::edge_between(int a, int b) const {
  for (auto [e, w] : adj_[a])
    if (w == b) return e;
  throw InvalidInput("tree: nodes are not adjacent");
}

// ---------------------------------------------------------------------------
// Space

Space Space::euclidean(int dim) {
  if (dim <= 0) throw InvalidInput("euclidean: dimension must be positive");
  Space s;
  s.kind_ = SpaceKind::Euclidean;
  s.dim_ = dim;
  return s;
}

Space Space::hyperboloid(int dim) {
  if (dim <= 0) throw InvalidInput("hyperboloid: dimension must be positive");
  Space s;
  s.kind_ = SpaceKind::Hyperboloid;
  s.dim_ = dim;
  return s;
}

Space Space::tree(int nnodes, std::vector<TreeEdge> edges) {
  Space s;
  s.kind_ = SpaceKind::Tree;
  s.tree_ = std::make_shared<const TreeTopology>(nnodes, std::move(edges));
  s.dim_ = nnodes;
  return s;
}

Space Space::star(int legs, double leg) {
  std::vector<TreeEdge> edges;
  for (int i = 1; i <= legs; ++i) edges.push_back({0, i, leg});
  return tree(legs + 1, std::move(edges));
}

Space Space::spd(int order) {
  if (order < 2 || order > 4) throw InvalidInput("spd: order must be in {2,3,4}");
  Space s;
  s.kind_ = SpaceKind::Spd;
  s.dim_ = order;
  return s;
}

Space Space::product(std::vector<Space> factors) {
  if (factors.empty()) throw InvalidInput("product: needs at least one factor");
  Space s;
  s.kind_ = SpaceKind::Product;
  s.dim_ = static_cast<int>(factors.size());
  s.factors_ = std::make_shared<const std::vector<Space>>(std::move(factors));
  return s;
}

const TreeTopology& Space::tree_data() const {
  if (kind_ != SpaceKind::Tree) throw InvalidInput("space: not a tree");
  return *tree_;
}

const std::vector<Space>& Space::factors() const {
  if (kind_ != SpaceKind::Product) throw InvalidInput("space: not a product");
  return *factors_;
}

std::string Space::describe() const {
  switch (kind_) {
    case SpaceKind::Euclidean: return "euclidean(" + std::to_string(dim_) + ")";
    case SpaceKind::Hyperboloid: return "hyperboloid(" + std::to_string(dim_) + ")";
    case SpaceKind::Tree: return "tree(" + std::to_string(tree_->nnodes()) + " nodes)";
    case SpaceKind::Spd: return "spd(" + std::to_string(dim_) + ")";
    case SpaceKind::Product: {
      std::string s = "product(";
      for (size_t i = 0; i < factors_->size(); ++i) s += (i ? ", " : "") + (*factors_)[i].describe();
      return s + ")";
    }
  }
  return "?";
}

bool same_structure(const Space& a, const Space& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case SpaceKind::Euclidean:
    case SpaceKind::Hyperboloid:
    case SpaceKind::Spd:
      return a.dim() == b.dim();
    case SpaceKind::Tree: {
      const auto& ta = a.tree_data();
      const auto& tb = b.tree_data();
      if (ta.nnodes() != tb.nnodes() || ta.edges().size() != tb.edges().size()) return false;
      for (size_t i = 0; i < ta.edges().size(); ++i) {
        const auto& ea = ta.edges()[i];
        const auto& eb = tb.edges()[i];
        if (ea.u != eb.u || ea.v != eb.v || ea.len != eb.len) return false;
      }
      return true;
    }
    case SpaceKind::Product: {
      if (a.factors().size() != b.factors().size()) return false;
      for (size_t i = 0; i < a.factors().size(); ++i)
        if (!same_structure(a.factors()[i], b.factors()[i])) return false;
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Lorentz helpers

double lorentz_form(const Vec& x, const Vec& y) {
  double s = x[0] * y[0];
  for (size_t i = 1; i < x.size(); ++i) s -= x[i] * y[i];
  return s;
}

namespace {

Vec hyper_normalize(Vec x) {
  double q = lorentz_form(x, x);
  if (!(q > 0.0)) throw DomainError("hyperboloid: vector is not timelike");
  double s = 1.0 / std::sqrt(q);
  if (x[0] < 0.0) s = -s;
  for (double& c : x) c *= s;
  return x;
}

double hyper_distance(const Vec& x, const Vec& y) {
  double c = lorentz_form(x, y);
  if (c < 1.0) c = 1.0;  // clamp fp drift below the sheet
  return std::acosh(c);
}

Vec hyper_geodesic(const Vec& x, const Vec& y, double t) {
  double theta = hyper_distance(x, y);
  if (theta < 1e-15) return x;
  double a = std::sinh((1.0 - t) * theta), b = std::sinh(t * theta), s = std::sinh(theta);
  Vec z(x.size());
  for (size_t i = 0; i < x.size(); ++i) z[i] = (a * x[i] + b * y[i]) / s;
  return hyper_normalize(std::move(z));
}

// ---------------------------------------------------------------------------
// Tree helpers

struct TreeEnd {
  int node;
  double off;  // distance from the point to this node
};

void tree_ends(const TreeTopology& T, const Point& p, TreeEnd out[2], int& count) {
  if (p.at_node()) {
    out[0] = {p.node, 0.0};
    count = 1;
  } else {
    const TreeEdge& e = T.edges()[p.edge];
    out[0] = {e.u, p.offset};
    out[1] = {e.v, e.len - p.offset};
    count = 2;
  }
}

double tree_distance(const TreeTopology& T, const Point& a, const Point& b) {
  if (!a.at_node() && !b.at_node() && a.edge == b.edge) return std::abs(a.offset - b.offset);
  TreeEnd ea[2], eb[2];
  int ca, cb;
  tree_ends(T, a, ea, ca);
  tree_ends(T, b, eb, cb);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ca; ++i)
    for (int j = 0; j < cb; ++j)
      best = std::min(best, ea[i].off + T.node_dist(ea[i].node, eb[j].node) + eb[j].off);
  return best;
}

Point tree_canonical(const TreeTopology& T, Point p) {
  if (p.at_node()) {
    if (p.node < 0 || p.node >= T.nnodes()) throw InvalidInput("tree point: node out of range");
    p.edge = -1;
    p.offset = 0.0;
    return p;
  }
  if (p.edge < 0 || p.edge >= static_cast<int>(T.edges().size()))
    throw InvalidInput("tree point: edge out of range");
  const TreeEdge& e = T.edges()[p.edge];
  if (p.offset < -1e-12 * e.len || p.offset > e.len * (1.0 + 1e-12))
    throw InvalidInput("tree point: offset outside [0, edge length]");
  if (p.offset <= 1e-12 * e.len) return Point::tree_node(e.u);
  if (p.offset >= e.len * (1.0 - 1e-12)) return Point::tree_node(e.v);
  return p;
}

// Point at arc length s from a along the unique path to b; assumes s <= d(a,b).
Point tree_walk(const TreeTopology& T, const Point& a, const Point& b, double s) {
  if (s <= 0.0) return a;
  if (!a.at_node() && !b.at_node() && a.edge == b.edge) {
    double dir = (b.offset >= a.offset) ? 1.0 : -1.0;
    return tree_canonical(T, Point::tree_edge(a.edge, a.offset + dir * s));
  }
  TreeEnd ea[2], eb[2];
  int ca, cb;
  tree_ends(T, a, ea, ca);
  tree_ends(T, b, eb, cb);
  double best = std::numeric_limits<double>::infinity();
  TreeEnd exit{}, entry{};
  for (int i = 0; i < ca; ++i)
    for (int j = 0; j < cb; ++j) {
      double d = ea[i].off + T.node_dist(ea[i].node, eb[j].node) + eb[j].off;
      if (d < best) {
        best = d;
        exit = ea[i];
        entry = eb[j];
      }
    }
  // initial partial edge
  if (!a.at_node()) {
    if (s <= exit.off) {
      const TreeEdge& e = T.edges()[a.edge];
      double off = (exit.node == e.u) ? a.offset - s : a.offset + s;
      return tree_canonical(T, Point::tree_edge(a.edge, off));
    }
    s -= exit.off;
  }
  // node-to-node walk
  int cur = exit.node;
  while (cur != entry.node) {
    int nxt = T.next_hop(cur, entry.node);
    int eid = T.edge_between(cur, nxt);
    const TreeEdge& e = T.edges()[eid];
    if (s <= e.len) {
      double off = (cur == e.u) ? s : e.len - s;
      return tree_canonical(T, Point::tree_edge(eid, off));
    }
    s -= e.len;
    cur = nxt;
  }
  // final partial edge into b
  if (b.at_node() || s <= 0.0) return Point::tree_node(cur);
  const TreeEdge& e = T.edges()[b.edge];
  double off = (cur == e.u) ? s : e.len - s;
  return tree_canonical(T, Point::tree_edge(b.edge, off));
}

// ---------------------------------------------------------------------------
// SPD helpers

double spd_distance(const Mat& A, const Mat& B) {
  Mat S = spd_inv_sqrt(A);
  Mat M = symmetrized(mul(mul(S, B), S));
  EigSym e = jacobi_eigen(M);
  double s = 0.0;
  for (double v : e.values) {
    if (!(v > 0.0)) throw DomainError("spd distance: matrix is not positive definite");
    s += sqr(std::log(v));
  }
  return std::sqrt(s);
}

Mat spd_geodesic(const Mat& A, const Mat& B, double t) {
  Mat R = spd_sqrt(A);
  Mat S = spd_inv_sqrt(A);
  Mat M = symmetrized(mul(mul(S, B), S));
  Mat P = spd_pow(M, t);
  return symmetrized(mul(mul(R, P), R));
}

}  // namespace

// ---------------------------------------------------------------------------
// Space core ops

double Space::distance(const Point& x, const Point& y) const {
  switch (kind_) {
    case SpaceKind::Euclidean: {
      if (x.kind != Point::Kind::Vector || y.kind != Point::Kind::Vector ||
          static_cast<int>(x.coords.size()) != dim_ || static_cast<int>(y.coords.size()) != dim_)
        throw InvalidInput("distance: point does not belong to " + describe());
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += sqr(x.coords[i] - y.coords[i]);
      return std::sqrt(s);
    }
    case SpaceKind::Hyperboloid: {
      if (x.kind != Point::Kind::Vector || y.kind != Point::Kind::Vector ||
          static_cast<int>(x.coords.size()) != dim_ + 1 || static_cast<int>(y.coords.size()) != dim_ + 1)
        throw InvalidInput("distance: point does not belong to " + describe());
      return hyper_distance(x.coords, y.coords);
    }
    case SpaceKind::Tree: {
      if (x.kind != Point::Kind::Tree || y.kind != Point::Kind::Tree)
        throw InvalidInput("distance: point does not belong to " + describe());
      return tree_distance(*tree_, tree_canonical(*tree_, x), tree_canonical(*tree_, y));
    }
    case SpaceKind::Spd: {
      if (x.kind != Point::Kind::Matrix || y.kind != Point::Kind::Matrix ||
          static_cast<int>(x.coords.size()) != dim_ * dim_ ||
          static_cast<int>(y.coords.size()) != dim_ * dim_)
        throw InvalidInput("distance: point does not belong to " + describe());
      return spd_distance(x.as_mat(), y.as_mat());
    }
    case SpaceKind::Product: {
      if (x.kind != Point::Kind::Tuple || y.kind != Point::Kind::Tuple ||
          x.parts.size() != factors_->size() || y.parts.size() != factors_->size())
        throw InvalidInput("distance: point does not belong to " + describe());
      double s = 0.0;
      for (size_t i = 0; i < factors_->size(); ++i)
        s += sqr((*factors_)[i].distance(x.parts[i], y.parts[i]));
      return std::sqrt(s);
    }
  }
  throw InvalidInput("distance: unknown space kind");
}

Point Space::geodesic(const Point& x, const Point& y, double t) const {
  if (t < -1e-15 || t > 1.0 + 1e-15) throw InvalidInput("geodesic: t must lie in [0,1]");
  t = clamp01(t);
  switch (kind_) {
    case SpaceKind::Euclidean: {
      Vec z(dim_);
      for (int i = 0; i < dim_; ++i) z[i] = (1.0 - t) * x.coords[i] + t * y.coords[i];
      return Point::vector(std::move(z));
    }
    case SpaceKind::Hyperboloid:
      return Point::vector(hyper_geodesic(x.coords, y.coords, t));
    case SpaceKind::Tree: {
      Point a = tree_canonical(*tree_, x), b = tree_canonical(*tree_, y);
      double d = tree_distance(*tree_, a, b);
      if (d == 0.0) return a;
      if (t >= 1.0) return b;
      return tree_walk(*tree_, a, b, t * d);
    }
    case SpaceKind::Spd:
      return Point::matrix(spd_geodesic(x.as_mat(), y.as_mat(), t).a);
    case SpaceKind::Product: {
      std::vector<Point> parts(factors_->size());
      for (size_t i = 0; i < factors_->size(); ++i)
        parts[i] = (*factors_)[i].geodesic(x.parts[i], y.parts[i], t);
      return Point::tuple(std::move(parts));
    }
  }
  throw InvalidInput("geodesic: unknown space kind");
}

Point Space::canonical(const Point& p) const {
  switch (kind_) {
    case SpaceKind::Euclidean:
      return p;
    case SpaceKind::Hyperboloid:
      return Point::vector(hyper_normalize(p.coords));
    case SpaceKind::Tree:
      return tree_canonical(*tree_, p);
    case SpaceKind::Spd:
      return Point::matrix(symmetrized(p.as_mat()).a);
    case SpaceKind::Product: {
      std::vector<Point> parts(factors_->size());
      for (size_t i = 0; i < factors_->size(); ++i) parts[i] = (*factors_)[i].canonical(p.parts[i]);
      return Point::tuple(std::move(parts));
    }
  }
  return p;
}

void Space::validate(const Point& p) const {
  switch (kind_) {
    case SpaceKind::Euclidean:
      if (p.kind != Point::Kind::Vector || static_cast<int>(p.coords.size()) != dim_)
        throw InvalidInput("point does not match " + describe());
      return;
    case SpaceKind::Hyperboloid: {
      if (p.kind != Point::Kind::Vector || static_cast<int>(p.coords.size()) != dim_ + 1)
        throw InvalidInput("point does not match " + describe());
      double q = lorentz_form(p.coords, p.coords);
      if (std::abs(q - 1.0) > 1e-6 || p.coords[0] <= 0.0)
        throw InvalidInput("hyperboloid point violates the sheet constraint");
      return;
    }
    case SpaceKind::Tree:
      if (p.kind != Point::Kind::Tree) throw InvalidInput("point does not match " + describe());
      tree_canonical(*tree_, p);  // throws on bad node/edge/offset
      return;
    case SpaceKind::Spd: {
      if (p.kind != Point::Kind::Matrix || static_cast<int>(p.coords.size()) != dim_ * dim_)
        throw InvalidInput("point does not match " + describe());
      Mat m = p.as_mat();
      if (max_abs_diff(m, transpose(m)) > 1e-9 * (frob_norm(m) + 1.0))
        throw InvalidInput("spd point is not symmetric");
      require_pd(symmetrized(m), "spd point");
      return;
    }
    case SpaceKind::Product: {
      if (p.kind != Point::Kind::Tuple || p.parts.size() != factors_->size())
        throw InvalidInput("point does not match " + describe());
      for (size_t i = 0; i < factors_->size(); ++i) (*factors_)[i].validate(p.parts[i]);
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Free operations

double distance(const Space& S, const Point& x, const Point& y) { return S.distance(x, y); }

Point geodesic_point(const Space& S, const Point& x, const Point& y, double t) {
  return S.geodesic(x, y, t);
}

Point point_toward(const Space& S, const Point& x, const Point& y, double arc) {
  if (arc <= 0.0) return x;
  double d = S.distance(x, y);
  if (d == 0.0 || arc >= d) return y;
  return S.geodesic(x, y, arc / d);
}

SegmentProjection project_to_segment(const Space& S, const Point& p, const Point& a, const Point& b) {
  SegmentProjection out;
  double len = S.distance(a, b);
  if (len < 1e-15) {
    out.t = 0.0;
    out.q = a;
    out.dist = S.distance(p, a);
    return out;
  }
  switch (S.kind()) {
    case SpaceKind::Euclidean: {  // clamped foot of the perpendicular
      double num = 0.0;
      for (size_t i = 0; i < p.coords.size(); ++i)
        num += (p.coords[i] - a.coords[i]) * (b.coords[i] - a.coords[i]);
      out.t = clamp01(num / (len * len));
      break;
    }
    case SpaceKind::Tree: {  // gate point via the Gromov product, exact on trees
      double da = S.distance(p, a), db = S.distance(p, b);
      out.t = clamp01(0.5 * (da + len - db) / len);
      break;
    }
    default: {
      auto f = [&](double t) { return sqr(S.distance(p, S.geodesic(a, b, t))); };
      GoldenResult g = golden_min(f, 0.0, 1.0, 1e-13, 220);
      out.t = g.t;
      break;
    }
  }
  out.q = S.geodesic(a, b, out.t);
  out.dist = S.distance(p, out.q);
  return out;
}

Point project_to_set(const Space& S, const Point& p, const ConvexSet& C) { return C.project(S, p); }

double set_distance(const Space& S, const Point& p, const ConvexSet& C) { return C.distance_to(S, p); }

AngleEstimate alexandrov_angle(const Space& S, const Point& x, const Point& y, const Point& z, double h) {
  double dy = S.distance(x, y), dz = S.distance(x, z);
  if (dy < 1e-15 || dz < 1e-15) throw InvalidInput("alexandrov_angle: coincident points");
  if (!(h > 0.0) || h > std::min(dy, dz) * (1.0 + 1e-12))
    throw InvalidInput("alexandrov_angle: h must lie in (0, min(d(x,y), d(x,z))]");
  auto comparison = [&](double hh) {
    Point p1 = S.geodesic(x, y, std::min(1.0, hh / dy));
    Point p2 = S.geodesic(x, z, std::min(1.0, hh / dz));
    double a = S.distance(x, p1), b = S.distance(x, p2), c = S.distance(p1, p2);
    if (a < 1e-300 || b < 1e-300) return 0.0;
    double cosang = (a * a + b * b - c * c) / (2.0 * a * b);
    return std::acos(std::min(1.0, std::max(-1.0, cosang)));
  };
  return {comparison(h), comparison(0.5 * h)};
}

double cat0_slack(const Space& S, const Point& p, const Point& a, const Point& b, double t) {
  if (t < 0.0 || t > 1.0) throw InvalidInput("cat0_slack: t must lie in [0,1]");
  double da = S.distance(p, a), db = S.distance(p, b), dab = S.distance(a, b);
  double lhs = sqr(S.distance(p, S.geodesic(a, b, t)));
  double rhs = (1.0 - t) * da * da + t * db * db - t * (1.0 - t) * dab * dab;
  return rhs - lhs;
}

// ---------------------------------------------------------------------------
// ConvexSet

ConvexSet ConvexSet::ball(Point center, double radius) {
  if (!(radius >= 0.0)) throw InvalidInput("ball: radius must be >= 0");
  ConvexSet c;
  c.kind_ = Kind::Ball;
  c.a_ = std::move(center);
  c.r_ = radius;
  return c;
}

ConvexSet ConvexSet::segment(Point a, Point b) {
  ConvexSet c;
  c.kind_ = Kind::Segment;
  c.a_ = std::move(a);
  c.b_ = std::move(b);
  return c;
}

ConvexSet ConvexSet::tree_span(std::vector<Point> pts) {
  if (pts.empty()) throw InvalidInput("tree_span: needs at least one point");
  ConvexSet c;
  c.kind_ = Kind::TreeSpan;
  c.pts_ = std::move(pts);
  return c;
}

ConvexSet ConvexSet::interval(double lo, double hi) {
  if (!(lo <= hi)) throw InvalidInput("interval: lo must be <= hi");
  ConvexSet c;
  c.kind_ = Kind::Interval;
  c.lo_ = lo;
  c.hi_ = hi;
  return c;
}

Point ConvexSet::project(const Space& S, const Point& p) const {
  switch (kind_) {
    case Kind::Ball: {
      double d = S.distance(p, a_);
      if (d <= r_) return p;
      return S.geodesic(p, a_, (d - r_) / d);
    }
    case Kind::Segment:
      return project_to_segment(S, p, a_, b_).q;
    case Kind::TreeSpan: {
      Point best = pts_[0];
      double bd = S.distance(p, best);
      for (size_t i = 0; i < pts_.size(); ++i)
        for (size_t j = i + 1; j < pts_.size(); ++j) {
          SegmentProjection pr = project_to_segment(S, p, pts_[i], pts_[j]);
          if (pr.dist < bd) {
            bd = pr.dist;
            best = pr.q;
          }
        }
      for (const Point& q : pts_) {
        double d = S.distance(p, q);
        if (d < bd) {
          bd = d;
          best = q;
        }
      }
      return best;
    }
    case Kind::Interval: {
      if (S.kind() != SpaceKind::Euclidean || S.dim() != 1)
        throw InvalidInput("interval set lives on the euclidean line");
      double v = std::min(hi_, std::max(lo_, p.coords[0]));
      return Point::scalar(v);
    }
  }
  throw InvalidInput("project: unknown set kind");
}

double ConvexSet::distance_to(const Space& S, const Point& p) const {
  return S.distance(p, project(S, p));
}

bool ConvexSet::contains(const Space& S, const Point& p, double tol) const {
  return distance_to(S, p) <= tol;
}

// ---------------------------------------------------------------------------
// Isometry

Isometry Isometry::euclidean_rigid(Mat Q, Vec v) {
  if (Q.n != static_cast<int>(v.size())) throw InvalidInput("rigid isometry: Q and v sizes differ");
  Mat QtQ = mul(transpose(Q), Q);
  if (max_abs_diff(QtQ, Mat::identity(Q.n)) > 1e-9)
    throw InvalidInput("rigid isometry: Q is not orthogonal");
  Isometry T;
  T.kind_ = Kind::EuclideanRigid;
  T.M_ = std::move(Q);
  T.v_ = std::move(v);
  return T;
}

Isometry Isometry::euclidean_translation(Vec v) {
  const int n = static_cast<int>(v.size());
  return euclidean_rigid(Mat::identity(n), std::move(v));
}

Isometry Isometry::tree_automorphism(const Space& tree, std::vector<int> perm) {
  const TreeTopology& T = tree.tree_data();
  int n = T.nnodes();
  if (static_cast<int>(perm.size()) != n) throw InvalidInput("tree automorphism: permutation size mismatch");
  std::vector<bool> seen(n, false);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[p]) throw InvalidInput("tree automorphism: not a permutation");
    seen[p] = true;
  }
  std::vector<int> edge_image(T.edges().size(), -1);
  for (size_t e = 0; e < T.edges().size(); ++e) {
    const TreeEdge& ed = T.edges()[e];
    int iu = perm[ed.u], iv = perm[ed.v];
    bool found = false;
    for (size_t f = 0; f < T.edges().size(); ++f) {
      const TreeEdge& fd = T.edges()[f];
      if ((fd.u == iu && fd.v == iv) || (fd.u == iv && fd.v == iu)) {
        if (std::abs(fd.len - ed.len) > 1e-12 * std::max(1.0, ed.len))
          throw InvalidInput("tree automorphism: image edge has different length");
        edge_image[e] = static_cast<int>(f);
        found = true;
        break;
      }
    }
    if (!found) throw InvalidInput("tree automorphism: permutation does not preserve edges");
  }
  Isometry T2;
  T2.kind_ = Kind::TreeAutomorphism;
  T2.perm_ = std::move(perm);
  T2.edge_image_ = std::move(edge_image);
  return T2;
}

Isometry Isometry::hyperbolic_lorentz(Mat L) {
  int n = L.n;
  Mat J = Mat::identity(n);
  for (int i = 1; i < n; ++i) J.at(i, i) = -1.0;
  Mat LJL = mul(mul(transpose(L), J), L);
  if (max_abs_diff(LJL, J) > 1e-9) throw InvalidInput("lorentz isometry: L^T J L != J");
  if (L.at(0, 0) <= 0.0) throw InvalidInput("lorentz isometry: must preserve the upper sheet");
  Isometry T;
  T.kind_ = Kind::HyperbolicLorentz;
  T.M_ = std::move(L);
  return T;
}

Isometry Isometry::hyperbolic_rotation_about(const Space& S, const Point& center, const Mat& spatial_rot) {
  int d = S.dim();
  if (spatial_rot.n != d) throw InvalidInput("hyperbolic rotation: spatial block must be d x d");
  // boost taking the apex (1,0,...,0) to the center
  const Vec& c = center.coords;
  Mat B(d + 1);
  B.at(0, 0) = c[0];
  for (int i = 1; i <= d; ++i) {
    B.at(0, i) = c[i];
    B.at(i, 0) = c[i];
    for (int j = 1; j <= d; ++j) B.at(i, j) = (i == j ? 1.0 : 0.0) + c[i] * c[j] / (1.0 + c[0]);
  }
  Mat R(d + 1);
  R.at(0, 0) = 1.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) R.at(i + 1, j + 1) = spatial_rot.at(i, j);
  Isometry T = hyperbolic_lorentz(mul(mul(B, R), inverse(B)));
  T.fixed_ = center;
  return T;
}

Isometry Isometry::spd_congruence(Mat G) {
  if (!is_invertible(G)) throw InvalidInput("spd congruence: G must be invertible");
  Isometry T;
  T.kind_ = Kind::SpdCongruence;
  T.M_ = std::move(G);
  return T;
}

Point Isometry::apply(const Space& S, const Point& x) const {
  switch (kind_) {
    case Kind::EuclideanRigid: {
      Vec y = mul_vec(M_, x.coords);
      for (size_t i = 0; i < y.size(); ++i) y[i] += v_[i];
      return Point::vector(std::move(y));
    }
    case Kind::TreeAutomorphism: {
      const TreeTopology& T = S.tree_data();
      Point p = S.canonical(x);
      if (p.at_node()) return Point::tree_node(perm_[p.node]);
      const TreeEdge& e = T.edges()[p.edge];
      int f = edge_image_[p.edge];
      const TreeEdge& fe = T.edges()[f];
      double off = (fe.u == perm_[e.u]) ? p.offset : fe.len - p.offset;
      return S.canonical(Point::tree_edge(f, off));
    }
    case Kind::HyperbolicLorentz:
      return S.canonical(Point::vector(mul_vec(M_, x.coords)));
    case Kind::SpdCongruence: {
      Mat X = x.as_mat();
      Mat Y = symmetrized(mul(mul(M_, X), transpose(M_)));
      return Point::matrix(Y.a);
    }
  }
  throw InvalidInput("apply: unknown isometry kind");
}

Point apply_isometry(const Space& S, const Isometry& T, const Point& x) { return T.apply(S, x); }

// ---------------------------------------------------------------------------
// Ray

Ray Ray::euclidean(Point base, Vec direction) {
  double n = 0.0;
  for (double v : direction) n += v * v;
  n = std::sqrt(n);
  if (n < 1e-15) throw InvalidInput("ray: zero direction");
  for (double& v : direction) v /= n;
  Ray r;
  r.kind_ = Kind::Euclidean;
  r.base_ = std::move(base);
  r.dir_ = std::move(direction);
  return r;
}

Ray Ray::tree(const Space& S, Point base, int leaf) {
  const TreeTopology& T = S.tree_data();
  if (leaf < 0 || leaf >= T.nnodes() || !T.is_leaf(leaf))
    throw InvalidInput("ray: tree rays must point to a leaf");
  Ray r;
  r.kind_ = Kind::Tree;
  r.base_ = S.canonical(base);
  r.leaf_ = leaf;
  if (r.base_.at_node() && r.base_.node == leaf) throw InvalidInput("ray: base coincides with the leaf");
  return r;
}

Ray Ray::hyperboloid(const Space& S, Point base, Vec tangent) {
  base = S.canonical(base);
  // orthogonalize against the base point and normalize in the Lorentz metric
  double ip = lorentz_form(base.coords, tangent);
  for (size_t i = 0; i < tangent.size(); ++i) tangent[i] -= ip * base.coords[i];
  double q = -lorentz_form(tangent, tangent);
  if (!(q > 1e-30)) throw InvalidInput("ray: degenerate tangent");
  double s = 1.0 / std::sqrt(q);
  for (double& v : tangent) v *= s;
  Ray r;
  r.kind_ = Kind::Hyperboloid;
  r.base_ = std::move(base);
  r.dir_ = std::move(tangent);
  return r;
}

double Ray::tree_ray_reach(const Space& S) const {
  return S.distance(base_, Point::tree_node(leaf_));
}

Point Ray::at(const Space& S, double t) const {
  if (t < 0.0) throw InvalidInput("ray: parameter must be >= 0");
  switch (kind_) {
    case Kind::Euclidean: {
      Vec y = base_.coords;
      for (size_t i = 0; i < y.size(); ++i) y[i] += t * dir_[i];
      return Point::vector(std::move(y));
    }
    case Kind::Tree: {
      double reach = tree_ray_reach(S);
      if (t > reach * (1.0 + 1e-12))
        throw InvalidInput("ray: parameter beyond the finite tree (formal extension)");
      return point_toward(S, base_, Point::tree_node(leaf_), t);
    }
    case Kind::Hyperboloid: {
      Vec y(base_.coords.size());
      double ch = std::cosh(t), sh = std::sinh(t);
      for (size_t i = 0; i < y.size(); ++i) y[i] = ch * base_.coords[i] + sh * dir_[i];
      return S.canonical(Point::vector(std::move(y)));
    }
  }
  throw InvalidInput("ray: unknown kind");
}

// ---------------------------------------------------------------------------
// Sampling

Point sample_point(const Space& S, Rng& rng, double radius) {
  switch (S.kind()) {
    case SpaceKind::Euclidean: {
      Vec x(S.dim());
      for (double& v : x) v = rng.uniform(-radius, radius);
      return Point::vector(std::move(x));
    }
    case SpaceKind::Hyperboloid: {
      int d = S.dim();
      Vec u(d + 1, 0.0);
      double n = 0.0;
      for (int i = 1; i <= d; ++i) {
        u[i] = rng.gauss();
        n += sqr(u[i]);
      }
      n = std::sqrt(n) + 1e-300;
      double r = radius * rng.uniform();
      Vec x(d + 1, 0.0);
      x[0] = std::cosh(r);
      for (int i = 1; i <= d; ++i) x[i] = std::sinh(r) * u[i] / n;
      return S.canonical(Point::vector(std::move(x)));
    }
    case SpaceKind::Tree: {
      const TreeTopology& T = S.tree_data();
      double pick = rng.uniform() * T.total_length();
      for (size_t e = 0; e < T.edges().size(); ++e) {
        if (pick <= T.edges()[e].len || e + 1 == T.edges().size())
          return S.canonical(Point::tree_edge(static_cast<int>(e),
                                              std::min(pick, T.edges()[e].len)));
        pick -= T.edges()[e].len;
      }
      return Point::tree_node(0);
    }
    case SpaceKind::Spd: {
      int n = S.dim();
      Mat sym(n);
      double scale = radius / std::sqrt(2.0);
      for (int i = 0; i < n; ++i) {
        sym.at(i, i) = scale * rng.gauss();
        for (int j = i + 1; j < n; ++j) sym.at(i, j) = sym.at(j, i) = scale * rng.gauss() / 1.4142135623730951;
      }
      return Point::matrix(sym_exp(sym).a);
    }
    case SpaceKind::Product: {
      std::vector<Point> parts;
      parts.reserve(S.factors().size());
      for (const Space& f : S.factors()) parts.push_back(sample_point(f, rng, radius));
      return Point::tuple(std::move(parts));
    }
  }
  throw InvalidInput("sample_point: unknown space kind");
}

// ---------------------------------------------------------------------------
// Tangent toolkit for smooth backends

bool smooth_backend(const Space& S) {
  switch (S.kind()) {
    case SpaceKind::Euclidean:
    case SpaceKind::Hyperboloid:
    case SpaceKind::Spd:
      return true;
    case SpaceKind::Tree:
      return false;
    case SpaceKind::Product:
      for (const Space& f : S.factors())
        if (!smooth_backend(f)) return false;
      return true;
  }
  return false;
}

int tangent_dim(const Space& S) {
  switch (S.kind()) {
    case SpaceKind::Euclidean:
      return S.dim();
    case SpaceKind::Hyperboloid:
      return S.dim();
    case SpaceKind::Spd:
      return S.dim() * (S.dim() + 1) / 2;
    case SpaceKind::Product: {
      int n = 0;
      for (const Space& f : S.factors()) n += tangent_dim(f);
      return n;
    }
    case SpaceKind::Tree:
      return 0;
  }
  return 0;
}

Point tangent_step(const Space& S, const Point& x, int k, double s) {
  switch (S.kind()) {
    case SpaceKind::Euclidean: {
      Vec y = x.coords;
      y[k] += s;
      return Point::vector(std::move(y));
    }
    case SpaceKind::Hyperboloid: {
      // orthonormalize the k-th coordinate direction against the point
      int d = S.dim();
      Vec u(d + 1, 0.0);
      u[k + 1] = 1.0;
      double ip = lorentz_form(x.coords, u);
      for (int i = 0; i <= d; ++i) u[i] -= ip * x.coords[i];
      double q = -lorentz_form(u, u);
      if (q < 1e-30) return x;
      double inv = 1.0 / std::sqrt(q);
      double ch = std::cosh(s), sh = std::sinh(s);
      Vec y(d + 1);
      for (int i = 0; i <= d; ++i) y[i] = ch * x.coords[i] + sh * inv * u[i];
      return S.canonical(Point::vector(std::move(y)));
    }
    case SpaceKind::Spd: {
      int n = S.dim();
      // orthonormal symmetric basis under Frobenius; X^(1/2) transport makes it
      // orthonormal in the affine-invariant metric at x
      Mat B(n);
      int idx = 0;
      for (int i = 0; i < n && idx <= k; ++i)
        for (int j = i; j < n && idx <= k; ++j) {
          if (idx == k) {
            if (i == j)
              B.at(i, i) = s;
            else
              B.at(i, j) = B.at(j, i) = s / 1.4142135623730951;
          }
          ++idx;
        }
      Mat R = spd_sqrt(x.as_mat());
      Mat Y = symmetrized(mul(mul(R, sym_exp(B)), R));
      return Point::matrix(Y.a);
    }
    case SpaceKind::Product: {
      std::vector<Point> parts = x.parts;
      int base = 0;
      for (size_t i = 0; i < S.factors().size(); ++i) {
        int td = tangent_dim(S.factors()[i]);
        if (k < base + td) {
          parts[i] = tangent_step(S.factors()[i], x.parts[i], k - base, s);
          break;
        }
        base += td;
      }
      return Point::tuple(std::move(parts));
    }
    case SpaceKind::Tree:
      throw InvalidInput("tangent_step: trees are not smooth");
  }
  throw InvalidInput("tangent_step: unknown space kind");
}

}  // namespace hflow
