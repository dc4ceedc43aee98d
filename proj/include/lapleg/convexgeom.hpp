#pragma once

// Exact planar convex geometry: rounded polygons, rounded half-plane
// intersections, their support functions and signed distances, and the
// asymptotic / polar cones used to describe unbounded regions.
//
// Sets are P + closed_disk(0, rho) with P polyhedral. Every query is answered
// on the polyhedral core P and then corrected by rho, which keeps Minkowski
// thickening exact.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lapleg/numeric.hpp"

namespace lapleg {

/// {z : dot(z, normal) <= offset}.
struct HalfPlane {
  Complex normal;
  double offset = 0.0;
};

// ---------------------------------------------------------------------------
// Cones
// ---------------------------------------------------------------------------

/// Closed convex cone of R^2 stored by angles. A sector spans the directions
/// [start, start + width] counter-clockwise, width in [0, pi] (0 is a ray, pi a
/// half-plane). {0}, lines and the full plane are separate kinds.
class Cone {
 public:
  enum class Kind { zero, sector, line, full };

  static Cone zero() { return Cone(Kind::zero, 0.0, 0.0); }
  static Cone full() { return Cone(Kind::full, 0.0, 0.0); }
  static Cone line(double angle) { return Cone(Kind::line, std::fmod(wrap_positive(angle), pi), 0.0); }
  static Cone sector(double start, double width) {
    if (!(width >= -1e-15 && width <= pi + 1e-15))
      throw std::invalid_argument("Cone::sector: width must lie in [0, pi]");
    return Cone(Kind::sector, wrap_positive(start), std::clamp(width, 0.0, pi));
  }

  Kind kind() const { return kind_; }
  double start() const { return start_; }
  double width() const { return width_; }
  /// Direction angle of a line cone.
  double angle() const { return start_; }

  bool has_interior() const {
    return kind_ == Kind::full || (kind_ == Kind::sector && width_ > 1e-12);
  }
  bool contains_line() const {
    return kind_ == Kind::full || kind_ == Kind::line ||
           (kind_ == Kind::sector && width_ >= pi - 1e-12);
  }

  bool contains(Complex z, double tol = 1e-12) const {
    const double r = std::abs(z);
    if (r <= tol) return true;
    switch (kind_) {
      case Kind::zero:
        return false;
      case Kind::full:
        return true;
      case Kind::line:
        return std::abs(cross(unit(start_), z)) <= tol * std::max(1.0, r);
      case Kind::sector: {
        double off = wrap_positive(std::arg(z) - start_);
        double ang_tol = tol * std::max(1.0, 1.0 / r);
        return off <= width_ + ang_tol || off >= two_pi - ang_tol;
      }
    }
    return false;
  }

  /// Strict interior membership with an absolute margin on the distance to the
  /// boundary rays.
  bool contains_interior(Complex z, double margin) const {
    switch (kind_) {
      case Kind::zero:
      case Kind::line:
        return false;
      case Kind::full:
        return true;
      case Kind::sector: {
        if (width_ <= 0.0) return false;
        if (!contains(z, 0.0)) return false;
        // Outward normals of the two bounding rays.
        Complex a = unit(start_), b = unit(start_ + width_);
        double d1 = -dot(z, Complex{a.imag(), -a.real()});
        double d2 = -dot(z, Complex{-b.imag(), b.real()});
        return std::min(d1, d2) > margin && std::abs(z) > margin;
      }
    }
    return false;
  }

  /// Half-plane description {dot(z, n_i) <= 0}.
  std::vector<HalfPlane> halfplanes() const {
    switch (kind_) {
      case Kind::full:
        return {};
      case Kind::zero:
        return {{{1, 0}, 0}, {{-1, 0}, 0}, {{0, 1}, 0}, {{0, -1}, 0}};
      case Kind::line: {
        Complex n = rot90(unit(start_));
        return {{n, 0}, {-n, 0}};
      }
      case Kind::sector: {
        Complex a = unit(start_), b = unit(start_ + width_);
        Complex na{a.imag(), -a.real()};
        Complex nb{-b.imag(), b.real()};
        if (width_ >= pi - 1e-15) return {{na, 0}};
        if (width_ <= 0.0) return {{na, 0}, {-na, 0}, {-a, 0}};
        return {{na, 0}, {nb, 0}};
      }
    }
    return {};
  }

  /// Conic generators (extreme rays plus lineality directions).
  std::vector<Complex> generators() const {
    switch (kind_) {
      case Kind::zero:
        return {};
      case Kind::full:
        return {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      case Kind::line:
        return {unit(start_), -unit(start_)};
      case Kind::sector:
        if (width_ <= 0.0) return {unit(start_)};
        if (width_ >= pi - 1e-15) return {unit(start_), unit(start_ + pi / 2), unit(start_ + pi)};
        return {unit(start_), unit(start_ + width_)};
    }
    return {};
  }

  /// Polar for the Euclidean inner product: {y : dot(y, x) <= 0 for x in C}.
  Cone euclidean_polar() const {
    switch (kind_) {
      case Kind::zero:
        return full();
      case Kind::full:
        return zero();
      case Kind::line:
        return line(start_ + pi / 2);
      case Kind::sector:
        return sector(start_ + width_ + pi / 2, pi - width_);
    }
    return zero();
  }

  /// Image under complex conjugation.
  Cone conjugate() const {
    switch (kind_) {
      case Kind::zero:
      case Kind::full:
        return *this;
      case Kind::line:
        return line(-start_);
      case Kind::sector:
        return sector(-start_ - width_, width_);
    }
    return *this;
  }

  /// Same cone up to angular tolerance.
  bool approx_equal(const Cone& o, double tol = 1e-12) const {
    if (kind_ != o.kind_) return false;
    auto close = [tol](double a, double b) { return std::abs(wrap_angle(a - b)) <= tol; };
    switch (kind_) {
      case Kind::zero:
      case Kind::full:
        return true;
      case Kind::line:
        return close(start_, o.start_) || close(start_ + pi, o.start_);
      case Kind::sector:
        return std::abs(width_ - o.width_) <= tol && close(start_, o.start_);
    }
    return false;
  }

 private:
  Cone(Kind k, double s, double w) : kind_(k), start_(s), width_(w) {}
  Kind kind_;
  double start_;
  double width_;
};

/// Conic hull of finitely many vectors (zero vectors ignored).
inline Cone conic_hull(const std::vector<Complex>& vs) {
  std::vector<double> angles;
  for (Complex v : vs)
    if (std::abs(v) > 0.0) angles.push_back(wrap_positive(std::arg(v)));
  if (angles.empty()) return Cone::zero();
  std::sort(angles.begin(), angles.end());
  std::vector<double> distinct;
  for (double a : angles)
    if (distinct.empty() || a - distinct.back() > 1e-13) distinct.push_back(a);
  if (distinct.size() > 1 && two_pi - distinct.back() + distinct.front() <= 1e-13) distinct.pop_back();
  if (distinct.size() == 1) return Cone::sector(distinct[0], 0.0);

  const std::size_t n = distinct.size();
  std::size_t gap_at = 0;  // gap between distinct[gap_at] and its successor
  double largest = -1.0;
  int near_pi = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double next = (k + 1 < n) ? distinct[k + 1] : distinct[0] + two_pi;
    double gap = next - distinct[k];
    if (std::abs(gap - pi) <= 1e-12) ++near_pi;
    if (gap > largest) {
      largest = gap;
      gap_at = k;
    }
  }
  const double after = distinct[(gap_at + 1) % n];
  if (largest > pi + 1e-12) return Cone::sector(after, two_pi - largest);
  if (std::abs(largest - pi) <= 1e-12) {
    if (n == 2 && near_pi == 2) return Cone::line(distinct[0]);
    return Cone::sector(after, pi);
  }
  return Cone::full();
}

// ---------------------------------------------------------------------------
// Polyhedral core shared by bodies and regions
// ---------------------------------------------------------------------------

namespace detail {

struct SegmentPrim {
  Complex a, b;
};
/// Circular arc, sweep > 0 is counter-clockwise.
struct ArcPrim {
  Complex center;
  double radius = 0.0;
  double start = 0.0;
  double sweep = 0.0;
  Complex at(double theta) const { return center + std::polar(radius, theta); }
};
/// Incoming rays are {origin + t dir : t <= 0}, outgoing rays {origin + t dir : t >= 0};
/// either way the boundary is traversed along dir.
struct RayPrim {
  Complex origin, dir;
  bool incoming = false;
};
struct LinePrim {
  Complex point, dir;
};
struct PointPrim {
  Complex p;
};
using BoundaryPrimitive = std::variant<SegmentPrim, ArcPrim, RayPrim, LinePrim, PointPrim>;

/// Outward normal of a boundary traversed along dir with the set on the left.
inline Complex outward_normal(Complex dir) {
  Complex d = dir / std::abs(dir);
  return {d.imag(), -d.real()};
}

inline double dist_to_segment(Complex z, Complex a, Complex b) {
  Complex d = b - a;
  double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(z - a);
  double t = std::clamp(dot(z - a, d) / len2, 0.0, 1.0);
  return std::abs(z - (a + t * d));
}

inline Complex closest_on_segment(Complex z, Complex a, Complex b) {
  Complex d = b - a;
  double len2 = std::norm(d);
  if (len2 == 0.0) return a;
  double t = std::clamp(dot(z - a, d) / len2, 0.0, 1.0);
  return a + t * d;
}

inline Complex closest_on_ray(Complex z, Complex origin, Complex dir, bool incoming) {
  Complex d = dir / std::abs(dir);
  double t = dot(z - origin, d);
  t = incoming ? std::min(t, 0.0) : std::max(t, 0.0);
  return origin + t * d;
}

/// The polyhedral set P of P + disk(rho).
struct PolyCore {
  enum class Shape { plane, slab, bounded, chain };
  Shape shape = Shape::plane;
  /// bounded: CCW polygon (1 vertex = point, 2 = segment). chain: boundary
  /// vertices of an unbounded pointed set in traversal order.
  std::vector<Complex> vertices;
  /// chain: boundary comes in from infinity along in_dir, leaves along out_dir.
  Complex in_dir{0, 0}, out_dir{0, 0};
  /// slab: {lo <= dot(z, m) <= hi}, lo and hi possibly infinite.
  Complex slab_normal{1, 0};
  double slab_lo = -std::numeric_limits<double>::infinity();
  double slab_hi = std::numeric_limits<double>::infinity();
  bool has_interior = true;

  bool bounded() const { return shape == Shape::bounded; }

  /// Edge directions in traversal order (chain: in-ray, segments, out-ray).
  std::vector<Complex> chain_edge_dirs() const {
    std::vector<Complex> dirs{in_dir};
    for (std::size_t k = 0; k + 1 < vertices.size(); ++k) dirs.push_back(vertices[k + 1] - vertices[k]);
    dirs.push_back(out_dir);
    return dirs;
  }

  std::vector<Complex> polygon_edge_dirs() const {
    std::vector<Complex> dirs;
    const std::size_t n = vertices.size();
    if (n < 2) return dirs;
    for (std::size_t k = 0; k < n; ++k) dirs.push_back(vertices[(k + 1) % n] - vertices[k]);
    return dirs;
  }

  /// Recession cone in Euclidean terms.
  Cone recession() const {
    switch (shape) {
      case Shape::plane:
        return Cone::full();
      case Shape::bounded:
        return Cone::zero();
      case Shape::chain: {
        double a = std::arg(out_dir);
        double w = wrap_positive(std::arg(-in_dir) - a);
        if (w > pi) w = 0.0;  // numerically closed ray
        return Cone::sector(a, w);
      }
      case Shape::slab: {
        Complex t = rot90(slab_normal);
        bool lo_inf = std::isinf(slab_lo), hi_inf = std::isinf(slab_hi);
        if (lo_inf && hi_inf) return Cone::full();
        if (!lo_inf && !hi_inf) return Cone::line(std::arg(t));
        if (lo_inf) return Cone::sector(std::arg(t), pi);
        return Cone::sector(std::arg(-t), pi);
      }
    }
    return Cone::zero();
  }

  /// sup over P of dot(z, y).
  ExtReal support(Complex y) const {
    const double tol = 1e-12 * std::abs(y);
    switch (shape) {
      case Shape::plane:
        return std::abs(y) == 0.0 ? ExtReal(0.0) : ExtReal::infinity();
      case Shape::slab: {
        double c = dot(y, slab_normal);
        double e = cross(slab_normal, y);
        if (std::abs(e) > tol) return ExtReal::infinity();
        if (c > 0) return std::isinf(slab_hi) ? ExtReal::infinity() : ExtReal(c * slab_hi);
        if (c < 0) return std::isinf(slab_lo) ? ExtReal::infinity() : ExtReal(c * slab_lo);
        return ExtReal(0.0);
      }
      case Shape::chain:
        if (dot(out_dir / std::abs(out_dir), y) > tol || dot(-in_dir / std::abs(in_dir), y) > tol)
          return ExtReal::infinity();
        [[fallthrough]];
      case Shape::bounded: {
        double best = -std::numeric_limits<double>::infinity();
        for (Complex v : vertices) best = std::max(best, dot(v, y));
        return ExtReal(best);
      }
    }
    return ExtReal::infinity();
  }

  /// A maximizer of dot(., y) over P, when the sup is attained.
  std::optional<Complex> support_point(Complex y) const {
    if (support(y).is_infinite()) return std::nullopt;
    switch (shape) {
      case Shape::plane:
        return Complex{0, 0};
      case Shape::slab: {
        double c = dot(y, slab_normal);
        if (c > 0) return slab_hi * slab_normal;
        if (c < 0) return slab_lo * slab_normal;
        double s = std::isfinite(slab_hi) ? slab_hi : (std::isfinite(slab_lo) ? slab_lo : 0.0);
        return s * slab_normal;
      }
      case Shape::chain:
      case Shape::bounded: {
        std::size_t arg = 0;
        for (std::size_t k = 1; k < vertices.size(); ++k)
          if (dot(vertices[k], y) > dot(vertices[arg], y)) arg = k;
        return vertices[arg];
      }
    }
    return std::nullopt;
  }

  /// Nearest point of P; only for z outside P (or on a lower-dimensional P).
  Complex closest_point(Complex z) const {
    switch (shape) {
      case Shape::plane:
        return z;
      case Shape::slab: {
        double s = dot(z, slab_normal);
        double c = std::clamp(s, slab_lo, slab_hi);
        return z + (c - s) * slab_normal;
      }
      case Shape::bounded: {
        const std::size_t n = vertices.size();
        if (n == 1) return vertices[0];
        Complex best = vertices[0];
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
          Complex c = closest_on_segment(z, vertices[k], vertices[(k + 1) % n]);
          double d = std::abs(z - c);
          if (d < bd) {
            bd = d;
            best = c;
          }
        }
        return best;
      }
      case Shape::chain: {
        Complex best = closest_on_ray(z, vertices.front(), in_dir, true);
        double bd = std::abs(z - best);
        auto consider = [&](Complex c) {
          double d = std::abs(z - c);
          if (d < bd) {
            bd = d;
            best = c;
          }
        };
        for (std::size_t k = 0; k + 1 < vertices.size(); ++k)
          consider(closest_on_segment(z, vertices[k], vertices[k + 1]));
        consider(closest_on_ray(z, vertices.back(), out_dir, false));
        return best;
      }
    }
    return z;
  }

  /// Signed distance to P: negative inside, positive outside.
  double signed_distance(Complex z) const {
    switch (shape) {
      case Shape::plane:
        return -std::numeric_limits<double>::infinity();
      case Shape::slab: {
        double s = dot(z, slab_normal);
        return std::max(s - slab_hi, slab_lo - s);
      }
      case Shape::bounded: {
        const std::size_t n = vertices.size();
        if (n <= 2) return std::abs(z - closest_point(z));
        double inner = std::numeric_limits<double>::infinity();
        bool inside = true;
        for (std::size_t k = 0; k < n; ++k) {
          Complex a = vertices[k], b = vertices[(k + 1) % n];
          double slack = dot(a - z, outward_normal(b - a));
          if (slack < 0) inside = false;
          inner = std::min(inner, slack);
        }
        return inside ? -inner : std::abs(z - closest_point(z));
      }
      case Shape::chain: {
        if (!has_interior) return std::abs(z - closest_point(z));
        auto dirs = chain_edge_dirs();
        double inner = std::numeric_limits<double>::infinity();
        bool inside = true;
        for (std::size_t k = 0; k < dirs.size(); ++k) {
          Complex anchor = vertices[k == 0 ? 0 : k - 1];
          double slack = dot(anchor - z, outward_normal(dirs[k]));
          if (slack < 0) inside = false;
          inner = std::min(inner, slack);
        }
        return inside ? -inner : std::abs(z - closest_point(z));
      }
    }
    return 0.0;
  }

  /// Boundary of P + disk(rho), traversed with the set on the left.
  std::vector<BoundaryPrimitive> boundary(double rho) const {
    std::vector<BoundaryPrimitive> out;
    auto arc_between = [&](Complex v, Complex n_from, Complex n_to) {
      if (rho <= 0.0) return;
      double a0 = std::arg(n_from);
      double sweep = wrap_positive(std::arg(n_to) - a0);
      if (sweep > 1e-15) out.push_back(ArcPrim{v, rho, a0, sweep});
    };
    switch (shape) {
      case Shape::plane:
        break;
      case Shape::slab: {
        Complex m = slab_normal;
        if (std::isfinite(slab_hi)) out.push_back(LinePrim{(slab_hi + rho) * m, rot90(m)});
        if (std::isfinite(slab_lo)) out.push_back(LinePrim{(slab_lo - rho) * m, rot90(-m)});
        break;
      }
      case Shape::bounded: {
        const std::size_t n = vertices.size();
        if (n == 1) {
          if (rho > 0.0)
            out.push_back(ArcPrim{vertices[0], rho, 0.0, two_pi});
          else
            out.push_back(PointPrim{vertices[0]});
          break;
        }
        auto dirs = polygon_edge_dirs();
        for (std::size_t k = 0; k < n; ++k) {
          Complex nk = outward_normal(dirs[k]);
          out.push_back(SegmentPrim{vertices[k] + rho * nk, vertices[(k + 1) % n] + rho * nk});
          arc_between(vertices[(k + 1) % n], nk, outward_normal(dirs[(k + 1) % n]));
        }
        break;
      }
      case Shape::chain: {
        auto dirs = chain_edge_dirs();
        Complex n_in = outward_normal(dirs.front());
        out.push_back(RayPrim{vertices.front() + rho * n_in, in_dir / std::abs(in_dir), true});
        for (std::size_t k = 0; k < vertices.size(); ++k) {
          Complex n_prev = outward_normal(dirs[k]);
          Complex n_next = outward_normal(dirs[k + 1]);
          arc_between(vertices[k], n_prev, n_next);
          if (k + 1 < vertices.size())
            out.push_back(SegmentPrim{vertices[k] + rho * n_next, vertices[k + 1] + rho * n_next});
        }
        Complex n_out = outward_normal(dirs.back());
        out.push_back(RayPrim{vertices.back() + rho * n_out, out_dir / std::abs(out_dir), false});
        break;
      }
    }
    return out;
  }
};

inline PolyCore polygon_core(const std::vector<Complex>& vertices) {
  PolyCore c;
  c.shape = PolyCore::Shape::bounded;
  c.vertices = vertices;
  c.has_interior = vertices.size() >= 3;
  return c;
}

inline PolyCore build_core(const std::vector<HalfPlane>& input) {
  PolyCore core;
  if (input.empty()) {
    core.shape = PolyCore::Shape::plane;
    return core;
  }
  double scale = 1.0;
  std::vector<HalfPlane> hps;
  for (const auto& h : input) {
    double len = std::abs(h.normal);
    if (!(len > 0.0) || !std::isfinite(len) || !std::isfinite(h.offset))
      throw std::invalid_argument("half-plane normal must be a finite nonzero vector");
    hps.push_back({h.normal / len, h.offset / len});
    scale = std::max(scale, std::abs(h.offset / len));
  }
  const double tol = 1e-12 * scale;

  std::vector<Complex> normals;
  for (const auto& h : hps) normals.push_back(h.normal);
  const Cone hull = conic_hull(normals);

  // Normals confined to a line (ray or line hull) leave a lineality direction.
  const bool lineal = hull.kind() == Cone::Kind::line ||
                      (hull.kind() == Cone::Kind::sector && hull.width() <= 0.0);
  if (lineal) {
    core.shape = PolyCore::Shape::slab;
    Complex m = hps[0].normal;
    core.slab_normal = m;
    for (const auto& h : hps) {
      if (dot(h.normal, m) > 0)
        core.slab_hi = std::min(core.slab_hi, h.offset);
      else
        core.slab_lo = std::max(core.slab_lo, -h.offset);
    }
    if (core.slab_lo > core.slab_hi + tol) throw std::invalid_argument("half-plane intersection is empty");
    if (core.slab_lo > core.slab_hi) core.slab_lo = core.slab_hi;
    core.has_interior = core.slab_hi - core.slab_lo > tol;
    return core;
  }

  // Pointed or bounded. Keep the tightest constraint per normal direction.
  std::vector<HalfPlane> uniq;
  for (const auto& h : hps) {
    bool merged = false;
    for (auto& u : uniq) {
      if (std::abs(h.normal - u.normal) <= 1e-13) {
        u.offset = std::min(u.offset, h.offset);
        merged = true;
        break;
      }
    }
    if (!merged) uniq.push_back(h);
  }

  struct Edge {
    Complex normal, foot, dir;
    double offset, lo, hi;
  };
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    Edge e{uniq[i].normal, uniq[i].offset * uniq[i].normal, rot90(uniq[i].normal), uniq[i].offset,
           -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    bool feasible = true;
    for (std::size_t j = 0; j < uniq.size() && feasible; ++j) {
      if (j == i) continue;
      double a = dot(uniq[j].normal, e.dir);
      double b = uniq[j].offset - dot(uniq[j].normal, e.foot);
      if (std::abs(a) < 1e-14) {
        if (b < -tol) feasible = false;
      } else if (a > 0) {
        e.hi = std::min(e.hi, b / a);
      } else {
        e.lo = std::max(e.lo, b / a);
      }
    }
    if (feasible && e.hi - e.lo > tol) edges.push_back(e);
  }

  bool degenerate = edges.empty();
  for (std::size_t i = 0; i < edges.size() && !degenerate; ++i)
    for (std::size_t j = i + 1; j < edges.size(); ++j)
      if (dot(edges[i].normal, edges[j].normal) < -1.0 + 1e-13 &&
          std::abs(edges[i].offset + edges[j].offset) <= tol)
        degenerate = true;

  if (degenerate) {
    std::vector<Complex> pts;
    for (std::size_t i = 0; i < uniq.size(); ++i)
      for (std::size_t j = i + 1; j < uniq.size(); ++j) {
        double det = cross(uniq[i].normal, uniq[j].normal);
        if (std::abs(det) < 1e-14) continue;
        // Solve dot(z, n_i) = d_i, dot(z, n_j) = d_j.
        Complex ni = uniq[i].normal, nj = uniq[j].normal;
        double di = uniq[i].offset, dj = uniq[j].offset;
        Complex z{(di * nj.imag() - dj * ni.imag()) / det, (dj * ni.real() - di * nj.real()) / det};
        bool ok = true;
        for (const auto& h : uniq)
          if (dot(z, h.normal) - h.offset > tol) ok = false;
        if (!ok) continue;
        bool dup = false;
        for (Complex p : pts)
          if (std::abs(p - z) <= tol) dup = true;
        if (!dup) pts.push_back(z);
      }
    if (pts.empty()) throw std::invalid_argument("half-plane intersection is empty");
    Cone rec = hull.euclidean_polar();
    if (rec.kind() == Cone::Kind::zero) {
      // Point or segment: take the two extreme candidates.
      std::size_t a = 0, b = 0;
      double best = -1.0;
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
          if (std::abs(pts[i] - pts[j]) > best) {
            best = std::abs(pts[i] - pts[j]);
            a = i;
            b = j;
          }
      core = best > tol ? polygon_core({pts[a], pts[b]}) : polygon_core({pts[0]});
      return core;
    }
    Complex r = unit(rec.start());
    std::size_t apex = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (dot(pts[i], r) < dot(pts[apex], r)) apex = i;
    core.shape = PolyCore::Shape::chain;
    core.vertices = {pts[apex]};
    core.in_dir = -r;
    core.out_dir = r;
    core.has_interior = false;
    return core;
  }

  if (hull.kind() == Cone::Kind::full) {
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return wrap_positive(std::arg(a.normal)) < wrap_positive(std::arg(b.normal)); });
    core.shape = PolyCore::Shape::bounded;
    for (const auto& e : edges) core.vertices.push_back(e.foot + e.lo * e.dir);
    core.has_interior = true;
    return core;
  }

  auto first = std::find_if(edges.begin(), edges.end(), [](const Edge& e) { return std::isinf(e.lo); });
  if (first == edges.end()) throw std::logic_error("unbounded region without an incoming edge");
  std::iter_swap(edges.begin(), first);
  const double base = std::arg(edges.front().normal);
  std::sort(edges.begin() + 1, edges.end(), [base](const Edge& a, const Edge& b) {
    return wrap_positive(std::arg(a.normal) - base) < wrap_positive(std::arg(b.normal) - base);
  });
  core.shape = PolyCore::Shape::chain;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) core.vertices.push_back(edges[k].foot + edges[k].hi * edges[k].dir);
  core.in_dir = edges.front().dir;
  core.out_dir = edges.back().dir;
  core.has_interior = true;
  return core;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ConvexBody / ConvexRegion
// ---------------------------------------------------------------------------

/// Compact convex set: a strictly convex CCW polygon plus a rounding radius,
/// i.e. conv(vertices) + closed_disk(0, rounding).
class ConvexBody {
 public:
  explicit ConvexBody(std::vector<Complex> vertices, double rounding = 0.0)
      : vertices_(std::move(vertices)), rounding_(rounding) {
    if (vertices_.empty()) throw std::invalid_argument("ConvexBody: at least one vertex required");
    if (!(rounding_ >= 0.0) || !std::isfinite(rounding_))
      throw std::invalid_argument("ConvexBody: rounding must be finite and >= 0");
    for (Complex v : vertices_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw std::invalid_argument("ConvexBody: vertices must be finite");
    const std::size_t n = vertices_.size();
    if (n == 2 && std::abs(vertices_[0] - vertices_[1]) == 0.0)
      throw std::invalid_argument("ConvexBody: repeated vertex");
    if (n >= 3) {
      for (std::size_t k = 0; k < n; ++k) {
        Complex a = vertices_[k], b = vertices_[(k + 1) % n], c = vertices_[(k + 2) % n];
        double scale = std::max({std::abs(b - a), std::abs(c - b), 1e-300});
        if (!(cross(b - a, c - b) > 1e-12 * scale * scale))
          throw std::invalid_argument("ConvexBody: vertices must be strictly convex and counter-clockwise");
      }
      // Strict turns at every vertex still admit a winding polygon.
      double turn = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        Complex a = vertices_[(k + 1) % n] - vertices_[k];
        Complex b = vertices_[(k + 2) % n] - vertices_[(k + 1) % n];
        turn += std::arg(b / a);
      }
      if (std::abs(turn - two_pi) > 1e-6) throw std::invalid_argument("ConvexBody: polygon is not simple");
    }
    core_ = detail::polygon_core(vertices_);
  }

  static ConvexBody point(Complex p) { return ConvexBody({p}, 0.0); }
  static ConvexBody disk(Complex center, double radius) { return ConvexBody({center}, radius); }

  /// Convex hull (monotone chain) of arbitrary points, collinear points dropped.
  static ConvexBody hull(std::vector<Complex> pts, double rounding = 0.0) {
    std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
      return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() <= 2) return ConvexBody(pts, rounding);
    std::vector<Complex> h(2 * pts.size());
    std::size_t k = 0;
    for (Complex p : pts) {
      while (k >= 2 && cross(h[k - 1] - h[k - 2], p - h[k - 2]) <= 0) --k;
      h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
      while (k >= t && cross(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
      h[k++] = pts[i];
    }
    h.resize(k - 1);
    return ConvexBody(h, rounding);
  }

  const std::vector<Complex>& vertices() const { return vertices_; }
  double rounding() const { return rounding_; }
  const detail::PolyCore& core() const { return core_; }
  bool has_interior() const { return rounding_ > 0.0 || vertices_.size() >= 3; }

  /// max |z| over the body.
  double max_modulus() const {
    double m = 0.0;
    for (Complex v : vertices_) m = std::max(m, std::abs(v));
    return m + rounding_;
  }

  friend bool operator==(const ConvexBody& a, const ConvexBody& b) {
    return a.vertices_ == b.vertices_ && a.rounding_ == b.rounding_;
  }

 private:
  std::vector<Complex> vertices_;
  double rounding_;
  detail::PolyCore core_;
};

/// Closed convex set given as an intersection of half-planes, thickened by a
/// rounding radius. May be unbounded.
class ConvexRegion {
 public:
  explicit ConvexRegion(std::vector<HalfPlane> halfplanes, double rounding = 0.0)
      : halfplanes_(std::move(halfplanes)), rounding_(rounding) {
    if (!(rounding_ >= 0.0) || !std::isfinite(rounding_))
      throw std::invalid_argument("ConvexRegion: rounding must be finite and >= 0");
    core_ = detail::build_core(halfplanes_);
  }

  static ConvexRegion whole_plane() { return ConvexRegion({}); }

  /// {apex + z : |arg z - axis| <= half_angle}, half_angle in (0, pi/2].
  static ConvexRegion sector(Complex apex, double axis, double half_angle, double rounding = 0.0) {
    if (!(half_angle > 0.0 && half_angle <= pi / 2))
      throw std::invalid_argument("sector half-angle must lie in (0, pi/2]");
    auto hps = Cone::sector(axis - half_angle, 2 * half_angle).halfplanes();
    for (auto& h : hps) h.offset = dot(apex, h.normal);
    return ConvexRegion(hps, rounding);
  }

  const std::vector<HalfPlane>& halfplanes() const { return halfplanes_; }
  double rounding() const { return rounding_; }
  const detail::PolyCore& core() const { return core_; }

  bool bounded() const { return core_.bounded(); }
  bool contains_line() const { return core_.recession().contains_line(); }
  bool has_interior() const { return rounding_ > 0.0 || core_.has_interior; }

  /// Largest |vertex| of the polyhedral core plus rounding (finite part only).
  double max_vertex_modulus() const {
    double m = 0.0;
    for (Complex v : core_.vertices) m = std::max(m, std::abs(v));
    return m + rounding_;
  }

 private:
  std::vector<HalfPlane> halfplanes_;
  double rounding_;
  detail::PolyCore core_;
};

using Domain = std::variant<ConvexBody, ConvexRegion>;

inline const detail::PolyCore& core_of(const Domain& d) {
  return std::visit([](const auto& s) -> const detail::PolyCore& { return s.core(); }, d);
}
inline double rounding_of(const Domain& d) {
  return std::visit([](const auto& s) { return s.rounding(); }, d);
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// h(w) = sup_{z in set} Re(z w).
inline ExtReal support_function(const ConvexBody& k, Complex w) {
  return k.core().support(std::conj(w)) + ExtReal(k.rounding() * std::abs(w));
}
inline ExtReal support_function(const ConvexRegion& s, Complex w) {
  return s.core().support(std::conj(w)) + ExtReal(s.rounding() * std::abs(w));
}
inline ExtReal support_function(const Domain& d, Complex w) {
  return std::visit([w](const auto& s) { return support_function(s, w); }, d);
}

/// A point of the set where Re(z w) reaches h(w); empty when h(w) = +inf.
inline std::optional<Complex> support_point(const Domain& d, Complex w) {
  auto p = core_of(d).support_point(std::conj(w));
  if (!p) return std::nullopt;
  double a = std::abs(w);
  return a > 0.0 ? *p + rounding_of(d) * std::conj(w) / a : *p;
}

inline ConvexBody thicken(const ConvexBody& k, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("thicken: epsilon must be > 0");
  return ConvexBody(k.vertices(), k.rounding() + eps);
}
inline ConvexRegion thicken(const ConvexRegion& s, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("thicken: epsilon must be > 0");
  return ConvexRegion(s.halfplanes(), s.rounding() + eps);
}
inline Domain thicken(const Domain& d, double eps) {
  return std::visit([eps](const auto& s) -> Domain { return thicken(s, eps); }, d);
}

inline double signed_distance(const ConvexBody& k, Complex z) {
  return k.core().signed_distance(z) - k.rounding();
}
inline double signed_distance(const ConvexRegion& s, Complex z) {
  return s.core().signed_distance(z) - s.rounding();
}
inline double signed_distance(const Domain& d, Complex z) {
  return std::visit([z](const auto& s) { return signed_distance(s, z); }, d);
}

/// Unit gradient of the distance function at a point outside the polyhedral
/// core (the outward normal of the level set through z).
inline Complex distance_gradient(const ConvexBody& k, Complex z) {
  Complex d = z - k.core().closest_point(z);
  double a = std::abs(d);
  if (a == 0.0) throw std::domain_error("distance_gradient: point lies on the polygonal core");
  return d / a;
}

inline Cone asymptotic_cone(const ConvexRegion& s) { return s.core().recession(); }
inline Cone asymptotic_cone(const ConvexBody&) { return Cone::zero(); }

/// {w : Re(z w) <= 0 for all z in c}.
inline Cone polar_cone(const Cone& c) { return c.euclidean_polar().conjugate(); }

/// Unit vector on the angular bisector of a cone with nonempty interior.
inline Complex bisector(const Cone& c) {
  if (c.kind() != Cone::Kind::sector || c.width() <= 0.0)
    throw std::invalid_argument("bisector: cone must have nonempty interior and not be the whole plane");
  return unit(c.start() + c.width() / 2);
}

}  // namespace lapleg
