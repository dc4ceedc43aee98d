#pragma once

// Legendre-Fenchel conjugation of piecewise-linear convex functions
// f(z) = max_i (Re(z b_i) + c_i) restricted to a convex domain.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lapleg/convexgeom.hpp"
#include "lapleg/numeric.hpp"

namespace lapleg {

/// z -> Re(z * gradient) + offset
struct AffinePiece {
  Complex gradient;
  double offset = 0.0;

  double operator()(Complex z) const { return pairing(z, gradient) + offset; }
};

class PLConvexFunction {
 public:
  /// No pieces means the indicator function of the domain.
  PLConvexFunction(std::vector<AffinePiece> pieces, Domain domain)
      : pieces_(std::move(pieces)), domain_(std::move(domain)) {
    for (const auto& p : pieces_)
      if (!std::isfinite(std::abs(p.gradient)) || !std::isfinite(p.offset))
        throw std::invalid_argument("PLConvexFunction: non-finite affine piece");
  }

  static PLConvexFunction indicator(Domain d) { return PLConvexFunction({}, std::move(d)); }

  const std::vector<AffinePiece>& pieces() const { return pieces_; }
  const Domain& domain() const { return domain_; }
  bool is_indicator() const { return pieces_.empty(); }

  bool in_domain(Complex z, double tol = 1e-12) const { return signed_distance(domain_, z) <= tol * (1.0 + std::abs(z)); }

  ExtReal operator()(Complex z) const {
    if (!in_domain(z)) return ExtReal::infinity();
    return finite_part(z);
  }

  /// max_i ell_i(z), ignoring the domain.
  double finite_part(Complex z) const {
    if (pieces_.empty()) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : pieces_) best = std::max(best, p(z));
    return best;
  }

  /// Pieces with duplicate gradients merged (the larger offset wins); the
  /// indicator comes back as the single zero piece.
  std::vector<AffinePiece> distinct_pieces() const {
    if (pieces_.empty()) return {AffinePiece{{0, 0}, 0.0}};
    std::vector<AffinePiece> out;
    for (const auto& p : pieces_) {
      auto it = std::find_if(out.begin(), out.end(), [&](const AffinePiece& q) { return q.gradient == p.gradient; });
      if (it == out.end())
        out.push_back(p);
      else
        it->offset = std::max(it->offset, p.offset);
    }
    return out;
  }

 private:
  std::vector<AffinePiece> pieces_;
  Domain domain_;
};

namespace detail {

inline Complex feasible_point(const Domain& d) {
  const auto& core = core_of(d);
  switch (core.shape) {
    case PolyCore::Shape::plane:
      return {0, 0};
    case PolyCore::Shape::slab: {
      double s = std::isfinite(core.slab_hi) ? core.slab_hi : (std::isfinite(core.slab_lo) ? core.slab_lo : 0.0);
      return s * core.slab_normal;
    }
    default:
      return core.vertices.front();
  }
}

/// {z : dot(z, n) = d}
struct CreaseLine {
  Complex n;
  double d;
};

inline void intersect_line_line(const CreaseLine& l, Complex p, Complex dir, std::vector<Complex>& out) {
  double den = dot(dir, l.n);
  if (std::abs(den) <= 1e-15 * std::abs(dir) * std::abs(l.n)) return;
  out.push_back(p + ((l.d - dot(p, l.n)) / den) * dir);
}

inline void intersect_line_circle(const CreaseLine& l, Complex c, double r, std::vector<Complex>& out) {
  double len = std::abs(l.n);
  Complex nh = l.n / len;
  double s = (l.d / len) - dot(c, nh);
  if (std::abs(s) > r) return;
  double h = std::sqrt(std::max(r * r - s * s, 0.0));
  Complex foot = c + s * nh;
  out.push_back(foot + h * rot90(nh));
  out.push_back(foot - h * rot90(nh));
}

}  // namespace detail

/// f*(w) = sup_{z in dom f} (Re(z w) - f(z)).
///
/// With a_i = conj(w - b_i) the objective is phi(z) = min_i (dot(z, a_i) - c_i),
/// a concave piecewise-linear function. The sup is +inf exactly when phi
/// increases along some recession direction of the domain; otherwise it is
/// attained at one of finitely many candidate points, all of which are
/// enumerated: vertices of the crease arrangement, crease lines against the
/// boundary lines and circles, tangency points on corner arcs, and the
/// vertices of the domain.
inline ExtReal conjugate_at(const PLConvexFunction& f, Complex w) {
  const auto pieces = f.distinct_pieces();
  const Domain& dom = f.domain();
  const std::size_t n = pieces.size();
  std::vector<Complex> a(n);
  std::vector<double> c(n);
  double amax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::conj(w - pieces[i].gradient);
    c[i] = pieces[i].offset;
    amax = std::max(amax, std::abs(a[i]));
  }
  auto phi = [&](Complex z) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::min(m, dot(z, a[i]) - c[i]);
    return m;
  };
  auto slope = [&](Complex r) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::min(m, dot(r, a[i]));
    return m;
  };

  // Unboundedness along the recession cone.
  const Cone rec = core_of(dom).recession();
  if (rec.kind() != Cone::Kind::zero && amax > 0.0) {
    std::vector<Complex> dirs = rec.generators();
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(a[i]) > 0.0) dirs.push_back(a[i] / std::abs(a[i]));
      for (std::size_t j = i + 1; j < n; ++j) {
        Complex t = rot90(a[i] - a[j]);
        if (std::abs(t) > 0.0) {
          dirs.push_back(t / std::abs(t));
          dirs.push_back(-t / std::abs(t));
        }
      }
    }
    const double thresh = 1e-12 * amax;
    for (Complex r : dirs)
      if (rec.contains(r, 1e-13) && slope(r) > thresh) return ExtReal::infinity();
  }

  std::vector<Complex> cand{detail::feasible_point(dom)};
  std::vector<detail::CreaseLine> creases;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      Complex nn = a[i] - a[j];
      if (std::abs(nn) > 1e-14 * std::max(amax, 1.0)) creases.push_back({nn, c[i] - c[j]});
    }
  for (const auto& l : creases) cand.push_back(l.d / std::norm(l.n) * l.n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        Complex n1 = a[i] - a[j], n2 = a[i] - a[k];
        double det = cross(n1, n2);
        if (std::abs(det) <= 1e-14 * std::abs(n1) * std::abs(n2)) continue;
        double d1 = c[i] - c[j], d2 = c[i] - c[k];
        // dot(z, n1) = d1, dot(z, n2) = d2
        cand.push_back({(d1 * n2.imag() - d2 * n1.imag()) / det, (n1.real() * d2 - n2.real() * d1) / det});
      }

  const double rho = rounding_of(dom);
  for (const auto& prim : core_of(dom).boundary(rho)) {
    if (auto s = std::get_if<detail::SegmentPrim>(&prim)) {
      cand.push_back(s->a);
      cand.push_back(s->b);
      for (const auto& l : creases) detail::intersect_line_line(l, s->a, s->b - s->a, cand);
    } else if (auto ar = std::get_if<detail::ArcPrim>(&prim)) {
      cand.push_back(ar->at(ar->start));
      cand.push_back(ar->at(ar->start + ar->sweep));
      for (std::size_t i = 0; i < n; ++i)
        if (std::abs(a[i]) > 0.0) cand.push_back(ar->center + ar->radius * a[i] / std::abs(a[i]));
      for (const auto& l : creases) detail::intersect_line_circle(l, ar->center, ar->radius, cand);
    } else if (auto ry = std::get_if<detail::RayPrim>(&prim)) {
      cand.push_back(ry->origin);
      for (const auto& l : creases) detail::intersect_line_line(l, ry->origin, ry->dir, cand);
    } else if (auto ln = std::get_if<detail::LinePrim>(&prim)) {
      cand.push_back(ln->point);
      for (const auto& l : creases) detail::intersect_line_line(l, ln->point, ln->dir, cand);
    } else if (auto pt = std::get_if<detail::PointPrim>(&prim)) {
      cand.push_back(pt->p);
    }
  }

  double best = -std::numeric_limits<double>::infinity();
  for (Complex z : cand) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) continue;
    if (signed_distance(dom, z) > 1e-10 * (1.0 + std::abs(z))) continue;
    best = std::max(best, phi(z));
  }
  return ExtReal(best);
}

namespace detail {

inline bool is_polygonal_bounded(const Domain& d) { return rounding_of(d) == 0.0 && core_of(d).bounded(); }

}  // namespace detail

/// f* as a piecewise-linear function on the whole plane. Only for bounded
/// polygonal domains (no rounding), where f* = max_k (Re(w z_k) - f(z_k)) over
/// the vertices z_k of the cells on which f is affine.
inline PLConvexFunction conjugate_function(const PLConvexFunction& f) {
  const Domain& dom = f.domain();
  if (!detail::is_polygonal_bounded(dom))
    throw std::invalid_argument("conjugate_function: domain must be a bounded polygon without rounding");
  const auto pieces = f.distinct_pieces();
  const auto& verts = core_of(dom).vertices;
  const std::size_t n = pieces.size(), m = verts.size();

  std::vector<Complex> cand(verts.begin(), verts.end());
  std::vector<detail::CreaseLine> creases;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      // Re(z b_i) + c_i = Re(z b_j) + c_j
      creases.push_back({std::conj(pieces[i].gradient - pieces[j].gradient), pieces[j].offset - pieces[i].offset});
  for (std::size_t k = 0; m >= 2 && k < m; ++k) {
    Complex p = verts[k], q = verts[(k + 1) % m];
    for (const auto& l : creases) {
      double den = dot(q - p, l.n);
      if (den == 0.0) continue;
      double t = (l.d - dot(p, l.n)) / den;
      if (t > 0.0 && t < 1.0) cand.push_back(p + t * (q - p));
    }
  }
  for (std::size_t i = 0; i < creases.size(); ++i)
    for (std::size_t j = i + 1; j < creases.size(); ++j) {
      Complex n1 = creases[i].n, n2 = creases[j].n;
      double det = cross(n1, n2);
      if (std::abs(det) <= 1e-14 * std::abs(n1) * std::abs(n2)) continue;
      double d1 = creases[i].d, d2 = creases[j].d;
      cand.push_back({(d1 * n2.imag() - d2 * n1.imag()) / det, (n1.real() * d2 - n2.real() * d1) / det});
    }

  std::vector<AffinePiece> out;
  for (Complex z : cand) {
    if (signed_distance(dom, z) > 1e-12 * (1.0 + std::abs(z))) continue;
    bool dup = std::any_of(out.begin(), out.end(), [&](const AffinePiece& p) { return std::abs(p.gradient - z) <= 1e-13 * (1.0 + std::abs(z)); });
    if (!dup) out.push_back({z, -f.finite_part(z)});
  }
  return PLConvexFunction(std::move(out), Domain{ConvexRegion::whole_plane()});
}

class NoClosedForm : public std::invalid_argument {
 public:
  NoClosedForm() : std::invalid_argument("no closed form; use conjugate_at") {}
};

/// f*(w) = h_D(w - shift) - offset, with dom°(f*) = (open polar of the
/// recession cone of D) + shift.
struct ConjugateDescriptor {
  Domain domain;
  Complex shift;
  double offset = 0.0;
  /// Closed cone whose interior, translated by shift, is dom°(f*).
  Cone domain_cone = Cone::full();

  ExtReal operator()(Complex w) const { return support_function(domain, w - shift) - offset; }

  bool in_interior_domain(Complex w, double margin = 0.0) const { return domain_cone.contains_interior(w - shift, margin); }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "h_D(w - (" << shift.real() << " + " << shift.imag() << "i))";
    if (offset != 0.0) os << " - " << offset;
    return os.str();
  }
};

inline ConjugateDescriptor symbolic_conjugate(const PLConvexFunction& f) {
  const auto pieces = f.distinct_pieces();
  if (pieces.size() != 1) throw NoClosedForm();
  Cone rec = core_of(f.domain()).recession();
  return {f.domain(), pieces[0].gradient, pieces[0].offset, polar_cone(rec)};
}

struct LegendreDimensions {
  int dim_domain = 0;            ///< dim H(f)
  int dim_conjugate_domain = 0;  ///< dim H(f*)
  int d = 0;                     ///< 2 - dim H(f*)
  bool e_trivial = true;         ///< E(f) = {0}
};

namespace detail {

inline int rank2(const std::vector<Complex>& vs) {
  double scale = 0.0;
  for (Complex v : vs) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0;
  const double tol = 1e-12 * scale * scale;
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j)
      if (std::abs(cross(vs[i], vs[j])) > tol) return 2;
  for (Complex v : vs)
    if (std::abs(v) > 1e-12 * scale) return 1;
  return 0;
}

inline int affine_dimension(const Domain& d) {
  if (rounding_of(d) > 0.0) return 2;
  const auto& core = core_of(d);
  switch (core.shape) {
    case PolyCore::Shape::plane:
      return 2;
    case PolyCore::Shape::slab:
      return core.slab_lo == core.slab_hi ? 1 : 2;
    case PolyCore::Shape::bounded: {
      std::vector<Complex> diffs;
      for (Complex v : core.vertices) diffs.push_back(v - core.vertices.front());
      return rank2(diffs);
    }
    case PolyCore::Shape::chain:
      return core.has_interior ? 2 : 1;
  }
  return 2;
}

}  // namespace detail

/// dom f* = conv{b_i} + polar(rec dom f), so its affine hull is spanned by the
/// differences of the gradients together with that polar cone.
inline LegendreDimensions legendre_dimensions(const PLConvexFunction& f) {
  LegendreDimensions r;
  r.dim_domain = detail::affine_dimension(f.domain());
  const auto pieces = f.distinct_pieces();
  std::vector<Complex> span;
  for (const auto& p : pieces) span.push_back(p.gradient - pieces.front().gradient);
  const Cone polar = polar_cone(core_of(f.domain()).recession());
  for (Complex g : polar.generators()) span.push_back(g);
  r.dim_conjugate_domain = detail::rank2(span);
  r.d = 2 - r.dim_conjugate_domain;
  r.e_trivial = r.d == 0;
  return r;
}

}  // namespace lapleg
