#pragma once

#include <memory>
#include <optional>

#include "hflow/common.hpp"
#include "hflow/smallmat.hpp"

namespace hflow {

enum class SpaceKind { Euclidean, Hyperboloid, Tree, Spd, Product };

struct TreeEdge {
  int u = -1;
  int v = -1;
  double len = 0.0;
};

// Finite metric tree with a precomputed node-to-node distance table and
// next-hop table for path walks. Immutable once built.
class TreeTopology {
 public:
  TreeTopology(int nnodes, std::vector<TreeEdge> edges);

  int nnodes() const { return nnodes_; }
  const std::vector<TreeEdge>& edges() const { return edges_; }
  double node_dist(int a, int b) const { return ndist_[static_cast<size_t>(a) * nnodes_ + b]; }
  int next_hop(int a, int b) const { return hop_[static_cast<size_t>(a) * nnodes_ + b]; }
  int edge_between(int a, int b) const;  // adjacent nodes only
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  bool is_leaf(int v) const { return degree(v) == 1; }
  double total_length() const { return total_len_; }

 private:
  int nnodes_ = 0;
  std::vector<TreeEdge> edges_;
  std::vector<std::vector<std::pair<int, int>>> adj_;  // node -> (edge id, neighbor)
  Vec ndist_;
  std::vector<int> hop_;
  double total_len_ = 0.0;
};

// Tagged point. Exactly the fields matching the owning space kind are used:
// Vector for Euclidean/hyperboloid coordinates, Matrix (row-major) for SPD,
// node/edge+offset for trees, parts for products.
struct Point {
  enum class Kind { Vector, Matrix, Tree, Tuple };
  Kind kind = Kind::Vector;
  Vec coords;
  int node = -1;
  int edge = -1;
  double offset = 0.0;
  std::vector<Point> parts;

  static Point vector(Vec c);
  static Point scalar(double v) { return vector({v}); }
  static Point matrix(Vec rowmajor);
  static Point matrix(const Mat& m) { return matrix(m.a); }
  static Point tree_node(int n);
  static Point tree_edge(int e, double off);
  static Point tuple(std::vector<Point> p);

  bool at_node() const { return node >= 0; }
  Mat as_mat() const;
};

class Space {
 public:
  static Space euclidean(int dim);
  static Space hyperboloid(int dim);
  static Space tree(int nnodes, std::vector<TreeEdge> edges);
  static Space spd(int order);
  static Space product(std::vector<Space> factors);
  static Space line() { return euclidean(1); }
  static Space tripod(double leg = 1.0) { return star(3, leg); }
  static Space star(int legs, double leg = 1.0);

  SpaceKind kind() const { return kind_; }
  int dim() const { return dim_; }  // euclidean dim, hyperboloid dim, spd order
  const TreeTopology& tree_data() const;
  const std::vector<Space>& factors() const;

  double distance(const Point& x, const Point& y) const;
  Point geodesic(const Point& x, const Point& y, double t) const;
  Point canonical(const Point& p) const;
  void validate(const Point& p) const;
  std::string describe() const;

 private:
  SpaceKind kind_ = SpaceKind::Euclidean;
  int dim_ = 0;
  std::shared_ptr<const TreeTopology> tree_;
  std::shared_ptr<const std::vector<Space>> factors_;
};

bool same_structure(const Space& a, const Space& b);

// Iterative solvers report failures with the best iterate they reached.
struct SolverFailure : std::runtime_error {
  SolverFailure(const std::string& msg, Point best_point, double certificate_gap, long iters)
      : std::runtime_error(msg), best(std::move(best_point)), gap(certificate_gap), iterations(iters) {}
  Point best;
  double gap = 0.0;
  long iterations = 0;
};

struct GeodesicSegment {
  Point a;
  Point b;
};

class ConvexSet {
 public:
  enum class Kind { Ball, Segment, TreeSpan, Interval };

  static ConvexSet ball(Point center, double radius);
  static ConvexSet segment(Point a, Point b);
  static ConvexSet tree_span(std::vector<Point> pts);
  static ConvexSet interval(double lo, double hi);

  Kind kind() const { return kind_; }
  Point project(const Space& S, const Point& p) const;
  double distance_to(const Space& S, const Point& p) const;
  bool contains(const Space& S, const Point& p, double tol = 1e-9) const;

  const Point& center() const { return a_; }
  double radius() const { return r_; }
  const Point& seg_a() const { return a_; }
  const Point& seg_b() const { return b_; }
  const std::vector<Point>& span_points() const { return pts_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  Kind kind_ = Kind::Ball;
  Point a_, b_;
  std::vector<Point> pts_;
  double r_ = 0.0, lo_ = 0.0, hi_ = 0.0;
};

class Isometry {
 public:
  enum class Kind { EuclideanRigid, TreeAutomorphism, HyperbolicLorentz, SpdCongruence };

  static Isometry euclidean_rigid(Mat Q, Vec v);
  static Isometry euclidean_translation(Vec v);
  static Isometry tree_automorphism(const Space& tree, std::vector<int> perm);
  static Isometry hyperbolic_lorentz(Mat L);
  // Elliptic isometry fixing `center`: conjugate of a spatial rotation by the
  // boost taking the apex to `center`. Remembers its fixed point.
  static Isometry hyperbolic_rotation_about(const Space& S, const Point& center, const Mat& spatial_rot);
  static Isometry spd_congruence(Mat G);

  Kind kind() const { return kind_; }
  Point apply(const Space& S, const Point& x) const;
  const std::optional<Point>& fixed_point() const { return fixed_; }

  const Mat& Q() const { return M_; }
  const Vec& v() const { return v_; }
  const std::vector<int>& perm() const { return perm_; }
  const Mat& L() const { return M_; }
  const Mat& G() const { return M_; }

 private:
  Kind kind_ = Kind::EuclideanRigid;
  Mat M_;
  Vec v_;
  std::vector<int> perm_;
  std::vector<int> edge_image_;  // tree: edge id -> image edge id
  std::optional<Point> fixed_;
};

class Ray {
 public:
  enum class Kind { Euclidean, Tree, Hyperboloid };

  static Ray euclidean(Point base, Vec direction);
  static Ray tree(const Space& S, Point base, int leaf);
  static Ray hyperboloid(const Space& S, Point base, Vec tangent);

  Kind kind() const { return kind_; }
  Point at(const Space& S, double t) const;  // unit speed; finite trees clamp at the leaf
  const Point& base() const { return base_; }
  const Vec& direction() const { return dir_; }
  int leaf() const { return leaf_; }
  double tree_ray_reach(const Space& S) const;  // d(base, leaf)

 private:
  Kind kind_ = Kind::Euclidean;
  Point base_;
  Vec dir_;
  int leaf_ = -1;
};

// ---- operations ----

double distance(const Space& S, const Point& x, const Point& y);
Point geodesic_point(const Space& S, const Point& x, const Point& y, double t);
// Point at arc length `arc` from x toward y (clamped at y).
Point point_toward(const Space& S, const Point& x, const Point& y, double arc);

struct SegmentProjection {
  double t = 0.0;
  Point q;
  double dist = 0.0;
};
SegmentProjection project_to_segment(const Space& S, const Point& p, const Point& a, const Point& b);

Point project_to_set(const Space& S, const Point& p, const ConvexSet& C);
double set_distance(const Space& S, const Point& p, const ConvexSet& C);

struct AngleEstimate {
  double angle = 0.0;       // comparison angle at scale h
  double angle_half = 0.0;  // same at h/2, convergence indicator
};
AngleEstimate alexandrov_angle(const Space& S, const Point& x, const Point& y, const Point& z, double h);

double cat0_slack(const Space& S, const Point& p, const Point& a, const Point& b, double t);

Point apply_isometry(const Space& S, const Isometry& T, const Point& x);

// Lorentz bilinear form x0*y0 - sum_i xi*yi.
double lorentz_form(const Vec& x, const Vec& y);

Point sample_point(const Space& S, Rng& rng, double radius = 1.0);

// Smooth-backend tangent toolkit (Euclidean, hyperboloid, SPD, products of
// those). Used by derivative-based solvers; trees are not smooth.
bool smooth_backend(const Space& S);
int tangent_dim(const Space& S);

// Orthonormal tangent frame at a point of a smooth backend: exponential-map
// moves and exact log-map coefficients in the frame.
class TangentFrame {
 public:
  static TangentFrame at(const Space& S, const Point& x);
  int dim() const { return dim_; }
  Point move(const Space& S, const Point& x, const Vec& coeffs) const;
  Vec log_coeffs(const Space& S, const Point& x, const Point& target) const;

 private:
  int dim_ = 0;
  std::vector<Vec> basis_;                // hyperboloid: orthonormal spacelike vectors
  Mat sqrt_, inv_sqrt_;                   // spd: X^(1/2), X^(-1/2)
  std::vector<TangentFrame> children_;    // product factors
  SpaceKind kind_ = SpaceKind::Euclidean;
};

struct GoldenResult {
  double t = 0.0;
  double value = 0.0;
  int evals = 0;
};

// Golden-section minimization of a unimodal function on [a, b].
template <typename F>
GoldenResult golden_min(F&& f, double a, double b, double rel_tol = 1e-12, int max_iter = 200) {
  constexpr double invphi = 0.6180339887498948482;
  double c = b - (b - a) * invphi;
  double d = a + (b - a) * invphi;
  double fc = f(c), fd = f(d);
  int evals = 2;
  while ((b - a) > rel_tol * (std::abs(a) + std::abs(b) + 1.0) && evals < max_iter) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * invphi;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * invphi;
      fd = f(d);
    }
    ++evals;
  }
  GoldenResult r;
  r.t = 0.5 * (a + b);
  r.value = f(r.t);
  ++evals;
  if (fc < r.value) {
    r.t = c;
    r.value = fc;
  }
  if (fd < r.value) {
    r.t = d;
    r.value = fd;
  }
  r.evals = evals;
  return r;
}

}  // namespace hflow
