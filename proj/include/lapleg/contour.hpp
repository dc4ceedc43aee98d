#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lapleg/convexgeom.hpp"
#include "lapleg/numeric.hpp"

namespace lapleg {

struct Segment {
  Complex a, b;
};

/// Arc of the circle |z - center| = radius from angle start, swept by sweep
/// radians (positive is counter-clockwise).
struct Arc {
  Complex center;
  double radius = 0.0;
  double start = 0.0;
  double sweep = 0.0;
};

using ContourPiece = std::variant<Segment, Arc>;

inline Complex piece_point(const ContourPiece& p, double t) {
  if (auto s = std::get_if<Segment>(&p)) return s->a + t * (s->b - s->a);
  const auto& a = std::get<Arc>(p);
  return a.center + std::polar(a.radius, a.start + t * a.sweep);
}

inline Complex piece_derivative(const ContourPiece& p, double t) {
  if (auto s = std::get_if<Segment>(&p)) return s->b - s->a;
  const auto& a = std::get<Arc>(p);
  return Complex{0, a.sweep} * std::polar(a.radius, a.start + t * a.sweep);
}

inline double piece_length(const ContourPiece& p) {
  if (auto s = std::get_if<Segment>(&p)) return std::abs(s->b - s->a);
  const auto& a = std::get<Arc>(p);
  return a.radius * std::abs(a.sweep);
}

inline ContourPiece piece_reversed(const ContourPiece& p) {
  if (auto s = std::get_if<Segment>(&p)) return Segment{s->b, s->a};
  const auto& a = std::get<Arc>(p);
  return Arc{a.center, a.radius, a.start + a.sweep, -a.sweep};
}

/// Finite chain of segments and arcs. Consecutive pieces share endpoints.
class OrientedContour {
 public:
  OrientedContour() = default;
  OrientedContour(std::vector<ContourPiece> pieces, bool closed) : pieces_(std::move(pieces)), closed_(closed) {
    if (pieces_.empty()) throw std::invalid_argument("OrientedContour: no pieces");
    for (const auto& p : pieces_) {
      if (auto a = std::get_if<Arc>(&p); a && !(a->radius > 0.0))
        throw std::invalid_argument("OrientedContour: arc radius must be > 0");
      if (!std::isfinite(piece_length(p))) throw std::invalid_argument("OrientedContour: piece is not rectifiable");
    }
    for (std::size_t k = 0; k + 1 < pieces_.size(); ++k) check_join(piece_point(pieces_[k], 1.0), piece_point(pieces_[k + 1], 0.0));
    if (closed_) check_join(end(), start());
  }

  const std::vector<ContourPiece>& pieces() const { return pieces_; }
  bool closed() const { return closed_; }
  Complex start() const { return piece_point(pieces_.front(), 0.0); }
  Complex end() const { return piece_point(pieces_.back(), 1.0); }

  double length() const {
    CompensatedSum<double> s;
    for (const auto& p : pieces_) s.add(piece_length(p));
    return s.value();
  }

  OrientedContour reversed() const {
    std::vector<ContourPiece> r;
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) r.push_back(piece_reversed(*it));
    return OrientedContour(std::move(r), closed_);
  }

  std::size_t segment_count() const {
    return static_cast<std::size_t>(std::count_if(pieces_.begin(), pieces_.end(), [](const ContourPiece& p) {
      return std::holds_alternative<Segment>(p);
    }));
  }
  std::size_t arc_count() const { return pieces_.size() - segment_count(); }

 private:
  static void check_join(Complex a, Complex b) {
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a)))
      throw std::invalid_argument("OrientedContour: consecutive pieces do not share endpoints");
  }

  std::vector<ContourPiece> pieces_;
  bool closed_ = false;
};

/// Counter-clockwise circle, winding number +1 about its center.
inline OrientedContour circle_contour(Complex center, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("circle_contour: radius must be > 0");
  return OrientedContour({Arc{center, r, 0.0, two_pi}}, true);
}

inline ContourPiece to_piece(const detail::BoundaryPrimitive& prim) {
  if (auto s = std::get_if<detail::SegmentPrim>(&prim)) return Segment{s->a, s->b};
  if (auto a = std::get_if<detail::ArcPrim>(&prim)) return Arc{a->center, a->radius, a->start, a->sweep};
  throw std::invalid_argument("boundary primitive is not a finite piece");
}

/// Positively oriented boundary of a compact body with nonempty interior.
inline OrientedContour region_boundary_contour(const ConvexBody& k) {
  if (!k.has_interior()) throw std::invalid_argument("region_boundary_contour: set has empty interior");
  std::vector<ContourPiece> pieces;
  for (const auto& prim : k.core().boundary(k.rounding())) pieces.push_back(to_piece(prim));
  return OrientedContour(std::move(pieces), true);
}

/// Boundary of S intersected with the closed disk of radius R, plus the arc of
/// C(0, R) that closes it counter-clockwise inside S.
struct TruncatedBoundary {
  OrientedContour boundary;
  std::optional<Arc> closing_arc;
  double radius = 0.0;

  OrientedContour closed() const {
    if (!closing_arc) return boundary;
    auto pieces = boundary.pieces();
    pieces.push_back(*closing_arc);
    return OrientedContour(std::move(pieces), true);
  }
};

class TruncationTooSmall : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

/// Parameter t where |origin + t dir| = R on the ray's side of origin.
inline double ray_exit_parameter(Complex origin, Complex dir, double R, bool incoming) {
  double b = dot(origin, dir);
  double disc = b * b - std::norm(origin) + R * R;
  double root = std::sqrt(std::max(disc, 0.0));
  return incoming ? -b - root : -b + root;
}

}  // namespace detail

/// Positively oriented boundary of a region. Unbounded regions need a
/// truncation radius R that strictly contains every vertex and corner arc.
inline TruncatedBoundary region_boundary_contour(const ConvexRegion& s, std::optional<double> R = std::nullopt) {
  if (!s.has_interior()) throw std::invalid_argument("region_boundary_contour: set has empty interior");
  if (s.contains_line()) throw std::invalid_argument("region_boundary_contour: set contains a line");
  const auto prims = s.core().boundary(s.rounding());
  if (s.bounded()) {
    std::vector<ContourPiece> pieces;
    for (const auto& p : prims) pieces.push_back(to_piece(p));
    return {OrientedContour(std::move(pieces), true), std::nullopt, R.value_or(0.0)};
  }
  if (!R || !(*R > 0.0)) throw std::invalid_argument("region_boundary_contour: unbounded set needs a truncation radius");
  const double radius = *R;
  const double guard = radius * (1.0 - 1e-9);
  for (const auto& p : prims) {
    double m = 0.0;
    if (auto sg = std::get_if<detail::SegmentPrim>(&p)) m = std::max(std::abs(sg->a), std::abs(sg->b));
    if (auto ar = std::get_if<detail::ArcPrim>(&p)) m = std::abs(ar->center) + ar->radius;
    if (auto ry = std::get_if<detail::RayPrim>(&p)) m = std::abs(ry->origin);
    if (m >= guard)
      throw TruncationTooSmall("region_boundary_contour: truncation radius " + std::to_string(radius) +
                               " does not clear the finite part of the boundary; increase R");
  }
  std::vector<ContourPiece> pieces;
  Complex entry, exit;
  for (const auto& p : prims) {
    if (auto ry = std::get_if<detail::RayPrim>(&p)) {
      double t = detail::ray_exit_parameter(ry->origin, ry->dir, radius, ry->incoming);
      Complex hit = ry->origin + t * ry->dir;
      if (ry->incoming) {
        entry = hit;
        pieces.push_back(Segment{hit, ry->origin});
      } else {
        exit = hit;
        pieces.push_back(Segment{ry->origin, hit});
      }
    } else {
      pieces.push_back(to_piece(p));
    }
  }
  double a0 = std::arg(exit);
  Arc closing{{0, 0}, radius, a0, wrap_positive(std::arg(entry) - a0)};
  return {OrientedContour(std::move(pieces), false), closing, radius};
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureOptions {
  double abs_tol = 1e-11;
  /// Additional tolerance relative to the integral of |g| |dz| per piece.
  double rel_tol = 0.0;
  int max_depth = 60;
  std::size_t max_intervals = 1u << 20;
  /// Relative noise of one integrand value, in units of machine epsilon.
  double noise = 1.0;
};

struct QuadratureResult {
  Complex value;
  double error = 0.0;
  /// Integral of |g| |dz|, the scale of cancellation in value.
  double magnitude = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

class IrregularIntegrand : public std::runtime_error {
 public:
  IrregularIntegrand(const std::string& msg, QuadratureResult partial)
      : std::runtime_error(msg), partial_(partial) {}
  const QuadratureResult& partial() const { return partial_; }

 private:
  QuadratureResult partial_;
};

namespace detail {

struct PanelEstimate {
  Complex value;
  double l1 = 0.0;
};

template <class F>
PanelEstimate gauss_panel(const ContourPiece& piece, const F& g, double a, double b, std::size_t& evals) {
  const auto& rule = gauss_legendre_15();
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  Complex sum{0, 0};
  double l1 = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double t = mid + half * rule.nodes[i];
    Complex dz = piece_derivative(piece, t);
    Complex term = g(piece_point(piece, t)) * dz;
    sum += rule.weights[i] * term;
    l1 += rule.weights[i] * std::abs(term);
  }
  evals += rule.nodes.size();
  return {sum * half, l1 * std::abs(half)};
}

template <class F>
struct AdaptiveIntegrator {
  const ContourPiece& piece;
  const F& g;
  const QuadratureOptions& opt;
  CompensatedSum<Complex> sum;
  CompensatedSum<double> err;
  CompensatedSum<double> mag;
  std::size_t evals = 0;
  std::size_t intervals = 0;
  bool converged = true;

  void run(double a, double b, PanelEstimate whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    PanelEstimate left = gauss_panel(piece, g, a, m, evals);
    PanelEstimate right = gauss_panel(piece, g, m, b, evals);
    Complex refined = left.value + right.value;
    double e = std::abs(whole.value - refined);
    if (!std::isfinite(e)) {
      converged = false;
      throw IrregularIntegrand("integrand irregular on path: non-finite values", {sum.value(), err.value(), mag.value(), evals, false});
    }
    const double floor = 16.0 * opt.noise * std::numeric_limits<double>::epsilon() * (left.l1 + right.l1);
    if (e <= std::max(tol, floor) || depth >= opt.max_depth) {
      if (depth >= opt.max_depth && e > std::max(tol, floor)) converged = false;
      sum.add(refined);
      err.add(e);
      mag.add(left.l1 + right.l1);
      if (++intervals > opt.max_intervals) {
        converged = false;
        throw IrregularIntegrand("integrand irregular on path: subdivision limit reached",
                                 {sum.value(), err.value(), mag.value(), evals, false});
      }
      return;
    }
    run(a, m, left, 0.5 * tol, depth + 1);
    run(m, b, right, 0.5 * tol, depth + 1);
  }
};

inline int initial_panels(const ContourPiece& p) {
  if (auto a = std::get_if<Arc>(&p)) return std::max(1, static_cast<int>(std::ceil(std::abs(a->sweep) / (pi / 4) - 1e-12)));
  return 1;
}

}  // namespace detail

/// Adaptive 15-point Gauss-Legendre integration of g(z) dz along the contour.
/// Pieces are processed in order and panels left to right, so the result is
/// bitwise reproducible.
template <class F>
QuadratureResult integrate(const OrientedContour& c, const F& g, const QuadratureOptions& opt = {}) {
  const double total_len = c.length();
  CompensatedSum<Complex> value;
  CompensatedSum<double> error;
  CompensatedSum<double> magnitude;
  std::size_t evals = 0;
  bool converged = true;
  for (const auto& piece : c.pieces()) {
    const double len = piece_length(piece);
    if (len == 0.0) continue;
    const int panels = detail::initial_panels(piece);
    detail::AdaptiveIntegrator<F> worker{piece, g, opt, {}, {}, {}, 0, 0, true};
    std::vector<detail::PanelEstimate> first;
    double l1 = 0.0;
    for (int k = 0; k < panels; ++k) {
      first.push_back(detail::gauss_panel(piece, g, double(k) / panels, double(k + 1) / panels, worker.evals));
      l1 += first.back().l1;
    }
    const double piece_tol = std::max(opt.abs_tol * len / total_len, opt.rel_tol * l1);
    try {
      for (int k = 0; k < panels; ++k)
        worker.run(double(k) / panels, double(k + 1) / panels, first[k], piece_tol / panels, 0);
    } catch (const IrregularIntegrand& e) {
      auto partial = e.partial();
      partial.value += value.value();
      partial.evaluations += evals;
      throw IrregularIntegrand(e.what(), partial);
    }
    value.add(worker.sum.value());
    error.add(worker.err.value());
    magnitude.add(worker.mag.value());
    evals += worker.evals;
    converged = converged && worker.converged;
  }
  QuadratureResult r;
  r.value = value.value();
  r.magnitude = magnitude.value();
  r.error = error.value() + opt.noise * std::numeric_limits<double>::epsilon() * r.magnitude;
  r.evaluations = evals;
  r.converged = converged;
  if (!converged) throw IrregularIntegrand("integrand irregular on path: tolerance not reached at maximum depth", r);
  return r;
}

/// Winding number of a closed contour about z (z off the trace).
inline int winding_number(const OrientedContour& c, Complex z) {
  if (!c.closed()) throw std::invalid_argument("winding_number: contour is not closed");
  auto r = integrate(c, [z](Complex s) { return 1.0 / (s - z); });
  return static_cast<int>(std::lround(r.value.imag() / two_pi));
}

}  // namespace lapleg
