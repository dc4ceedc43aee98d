#pragma once

// Positive Laplace transform of forms u(z) dz, realized by contour integrals
// of e^{zw} u(z) dz: around a circle enclosing a compact convex K (Polya), or
// along the boundary of a thickened unbounded convex region (Meril).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "lapleg/contour.hpp"
#include "lapleg/convexgeom.hpp"
#include "lapleg/numeric.hpp"

namespace lapleg {

/// coef * (z - pole)^(-order)
struct PoleTerm {
  Complex pole;
  int order = 1;
  Complex coef{1, 0};
};

/// coef * z^power * e^(rate z). Entire terms model the freedom u -> u + entire
/// allowed in the Meril quotient; they contribute no residue.
struct EntireTerm {
  Complex coef{1, 0};
  int power = 0;
  Complex rate{0, 0};
};

class MeromorphicDatum {
 public:
  MeromorphicDatum() = default;
  explicit MeromorphicDatum(std::vector<PoleTerm> poles, std::vector<EntireTerm> entire = {})
      : poles_(std::move(poles)), entire_(std::move(entire)) {
    for (const auto& t : poles_) {
      if (t.order < 1) throw std::invalid_argument("MeromorphicDatum: pole order must be >= 1");
      if (!std::isfinite(std::abs(t.pole)) || !std::isfinite(std::abs(t.coef)))
        throw std::invalid_argument("MeromorphicDatum: non-finite pole or coefficient");
    }
    for (const auto& t : entire_)
      if (t.power < 0) throw std::invalid_argument("MeromorphicDatum: entire term power must be >= 0");
  }

  static MeromorphicDatum simple_pole(Complex a, Complex coef = {1, 0}) { return MeromorphicDatum({{a, 1, coef}}); }

  Complex operator()(Complex z) const {
    Complex s{0, 0};
    for (const auto& t : poles_) {
      Complex inv = 1.0 / (z - t.pole);
      Complex p = inv;
      for (int k = 1; k < t.order; ++k) p *= inv;
      s += t.coef * p;
    }
    for (const auto& t : entire_) s += t.coef * std::pow(z, t.power) * std::exp(t.rate * z);
    return s;
  }

  const std::vector<PoleTerm>& poles() const { return poles_; }
  const std::vector<EntireTerm>& entire() const { return entire_; }
  bool empty() const { return poles_.empty() && entire_.empty(); }

  double max_pole_modulus() const {
    double m = 0.0;
    for (const auto& t : poles_) m = std::max(m, std::abs(t.pole));
    return m;
  }

  int entire_degree() const {
    int n = 0;
    for (const auto& t : entire_) n = std::max(n, t.power);
    return n;
  }

  MeromorphicDatum scaled(Complex alpha) const {
    MeromorphicDatum r = *this;
    for (auto& t : r.poles_) t.coef *= alpha;
    for (auto& t : r.entire_) t.coef *= alpha;
    return r;
  }

  friend MeromorphicDatum operator+(const MeromorphicDatum& a, const MeromorphicDatum& b) {
    MeromorphicDatum r = a;
    r.poles_.insert(r.poles_.end(), b.poles_.begin(), b.poles_.end());
    r.entire_.insert(r.entire_.end(), b.entire_.begin(), b.entire_.end());
    return r;
  }

 private:
  std::vector<PoleTerm> poles_;
  std::vector<EntireTerm> entire_;
};

/// value = mantissa * exp(exponent); keeps exponential-type values representable.
struct ScaledValue {
  Complex mantissa{0, 0};
  Complex exponent{0, 0};

  Complex value() const { return mantissa * std::exp(exponent); }
  double log_abs() const { return std::log(std::abs(mantissa)) + exponent.real(); }
};

/// coef * w^power * e^(rate w)
struct ExpPolyTerm {
  Complex coef;
  int power = 0;
  Complex rate;
};

/// Finite sum of exponential monomials in w.
class ExpPolynomial {
 public:
  ExpPolynomial() = default;
  explicit ExpPolynomial(std::vector<ExpPolyTerm> terms) : terms_(std::move(terms)) {}

  const std::vector<ExpPolyTerm>& terms() const { return terms_; }

  Complex operator()(Complex w) const { return scaled(w).value(); }

  /// Factors out the dominant exponential so large |w| do not overflow.
  ScaledValue scaled(Complex w) const {
    if (terms_.empty()) return {};
    Complex shift = terms_.front().rate * w;
    for (const auto& t : terms_)
      if ((t.rate * w).real() > shift.real()) shift = t.rate * w;
    Complex s{0, 0};
    for (const auto& t : terms_) s += t.coef * std::pow(w, t.power) * std::exp(t.rate * w - shift);
    return {s, shift};
  }

 private:
  std::vector<ExpPolyTerm> terms_;
};

struct Evaluation {
  Complex value;
  double error = 0.0;
};

enum class Provenance { contour, residue, area_oracle };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::contour:
      return "contour";
    case Provenance::residue:
      return "residue";
    case Provenance::area_oracle:
      return "area-oracle";
  }
  return "?";
}

/// A transformed function v together with how it was produced.
struct TransformResult {
  std::function<Evaluation(Complex)> evaluator;
  /// Same function in scaled form, accurate for large |w|.
  std::function<ScaledValue(Complex)> scaled_evaluator;
  std::function<bool(Complex)> in_domain;
  std::optional<ExpPolynomial> symbolic;
  Provenance provenance = Provenance::contour;

  Complex operator()(Complex w) const { return evaluator(w).value; }
};

// ---------------------------------------------------------------------------
// Residue oracle and symbolic forms
// ---------------------------------------------------------------------------

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

/// Residue sum of e^{zw} u(z) over the poles, as a function of w:
/// 2 pi i sum c_{j,m} w^{m-1} e^{a_j w} / (m-1)!.
inline ExpPolynomial residue_form(const MeromorphicDatum& u) {
  std::vector<ExpPolyTerm> terms;
  for (const auto& t : u.poles()) terms.push_back({two_pi_i * t.coef / factorial(t.order - 1), t.order - 1, t.pole});
  return ExpPolynomial(std::move(terms));
}

inline Complex residue_oracle(const MeromorphicDatum& u, Complex w) {
  Complex s{0, 0};
  for (const auto& t : u.poles()) s += t.coef * std::pow(w, t.order - 1) * std::exp(t.pole * w) / factorial(t.order - 1);
  return two_pi_i * s;
}

/// Wraps a closed-form function of w as a transform result.
inline TransformResult symbolic_result(ExpPolynomial f, Provenance p = Provenance::residue) {
  TransformResult r;
  r.evaluator = [f](Complex w) { return Evaluation{f(w), 0.0}; };
  r.scaled_evaluator = [f](Complex w) { return f.scaled(w); };
  r.in_domain = [](Complex) { return true; };
  r.symbolic = std::move(f);
  r.provenance = p;
  return r;
}

inline TransformResult residue_transform(const MeromorphicDatum& u) { return symbolic_result(residue_form(u)); }

// ---------------------------------------------------------------------------
// Polya transform
// ---------------------------------------------------------------------------

struct PolyaOptions {
  /// C(0, r) must clear K by this fraction of r.
  double clearance = 0.1;
  QuadratureOptions quadrature{};
  /// Thickening of K whose boundary carries the scaled evaluator.
  double scaled_contour_thickening = 0.05;
};

inline double default_polya_radius(const ConvexBody& k) { return 2.0 * (k.max_modulus() + 1.0); }

inline void check_poles_inside(const MeromorphicDatum& u, const Domain& d, const char* where) {
  for (const auto& t : u.poles()) {
    if (!(signed_distance(d, t.pole) < 0.0))
      throw std::invalid_argument(std::string(where) + ": pole (" + std::to_string(t.pole.real()) + ", " +
                                  std::to_string(t.pole.imag()) + ") is not in the interior of the set");
  }
}

/// v(w) = integral over C(0, r)+ of e^{zw} u(z) dz.
inline TransformResult polya_transform(const MeromorphicDatum& u, const ConvexBody& k, double r,
                                       const PolyaOptions& opt = {}) {
  check_poles_inside(u, Domain{k}, "polya_transform");
  if (!(r > 0.0)) throw std::invalid_argument("polya_transform: radius must be > 0");
  if (k.max_modulus() > (1.0 - opt.clearance) * r)
    throw std::invalid_argument("polya_transform: circle of radius " + std::to_string(r) +
                                " does not enclose K with the required clearance");
  const OrientedContour circle = circle_contour({0, 0}, r);
  const ConvexBody outer = thicken(k, opt.scaled_contour_thickening);
  const OrientedContour near = region_boundary_contour(outer);
  const QuadratureOptions quad = opt.quadrature;

  TransformResult res;
  res.provenance = Provenance::contour;
  res.in_domain = [](Complex) { return true; };
  res.evaluator = [u, circle, quad, r](Complex w) {
    QuadratureOptions q0 = quad;
    // e^{zw} carries a phase error of about eps |z| |w|
    q0.noise = std::max(quad.noise, 1.0 + r * std::abs(w));
    auto q = integrate(circle, [&](Complex z) { return std::exp(z * w) * u(z); }, q0);
    return Evaluation{q.value, q.error};
  };
  res.scaled_evaluator = [u, near, outer, quad](Complex w) {
    Complex anchor = *support_point(Domain{outer}, w);
    QuadratureOptions q = quad;
    q.abs_tol = 1e-13;
    q.rel_tol = 1e-12;
    q.noise = std::max(quad.noise, 1.0 + outer.max_modulus() * std::abs(w));
    auto r = integrate(near, [&](Complex z) { return std::exp((z - anchor) * w) * u(z); }, q);
    return ScaledValue{r.value, anchor * w};
  };
  return res;
}

// ---------------------------------------------------------------------------
// Meril transform
// ---------------------------------------------------------------------------

/// 2 pi c R^{N+1} e^{-s delta R}: bound on the arc contribution at radius R.
inline double tail_bound(double R, double c, int N, double delta, double s) {
  if (!(R > 0.0) || !(c > 0.0) || !(delta > 0.0) || !(s > 0.0) || N < 0)
    throw std::invalid_argument("tail_bound: parameters must be positive");
  return std::exp(std::log(two_pi * c) + (N + 1) * std::log(R) - s * delta * R);
}

inline double log_tail_bound(double R, double c, int N, double delta, double s) {
  return std::log(two_pi * c) + (N + 1) * std::log(R) - s * delta * R;
}

struct MerilOptions {
  /// Strictly increasing truncation radii; empty selects the default ladder.
  std::vector<double> radii;
  double tolerance = 1e-12;
  double domain_margin = 1e-9;
  QuadratureOptions quadrature{};
};

struct MerilStep {
  double radius = 0.0;
  Complex value;
  double gap = 0.0;   ///< |value(R_{k+1}) - value(R_k)|
  double tail = 0.0;  ///< tail_bound at R_k
  bool dominated = true;
};

struct MerilEvaluation {
  Complex value;
  ScaledValue scaled;
  double error = 0.0;
  bool converged = false;
  std::vector<MerilStep> steps;
  double c = 0.0;
  int N = 0;
  double delta = 0.0;
  double s = 0.0;
};

class MerilNonConvergence : public std::runtime_error {
 public:
  MerilNonConvergence(const std::string& msg, MerilEvaluation partial)
      : std::runtime_error(msg), partial_(std::move(partial)) {}
  const MerilEvaluation& partial() const { return partial_; }

 private:
  MerilEvaluation partial_;
};

class MerilTransform {
 public:
  MerilTransform(MeromorphicDatum u, ConvexRegion s, double eps, double eps_prime, MerilOptions opt = {})
      : u_(std::move(u)), s_(std::move(s)), thick_(validated_thicken(s_, eps)), eps_(eps), eps_prime_(eps_prime),
        opt_(std::move(opt)), dual_(Cone::zero()) {
    if (s_.bounded()) throw std::invalid_argument("meril_transform: S is bounded; use polya_transform");
    if (s_.contains_line()) throw std::invalid_argument("meril_transform: S contains a line");
    if (!(eps_prime_ > 0.0)) throw std::invalid_argument("meril_transform: epsilon' must be > 0");
    check_poles_inside(u_, Domain{s_}, "meril_transform");
    dual_ = polar_cone(asymptotic_cone(s_));
    xi0_ = bisector(dual_);
    if (opt_.radii.empty()) {
      double r0 = 2.0 * (std::max(u_.max_pole_modulus(), thick_.max_vertex_modulus()) + eps_ + 1.0);
      for (int k = 0; k < 40; ++k) opt_.radii.push_back(r0 * std::pow(1.5, k));
    }
    for (std::size_t k = 1; k < opt_.radii.size(); ++k)
      if (!(opt_.radii[k] > opt_.radii[k - 1])) throw std::invalid_argument("meril_transform: radii must be strictly increasing");
    if (opt_.radii.size() < 2) throw std::invalid_argument("meril_transform: need at least two radii");
    base_ = region_boundary_contour(thick_, opt_.radii.front());
    for (const auto& p : thick_.core().boundary(thick_.rounding()))
      if (auto ray = std::get_if<detail::RayPrim>(&p)) (ray->incoming ? in_ray_ : out_ray_) = *ray;
    fit_growth_constants();
  }

  const Cone& dual_cone() const { return dual_; }
  Complex xi0() const { return xi0_; }
  double epsilon() const { return eps_; }
  double epsilon_prime() const { return eps_prime_; }
  double fitted_c() const { return c_; }
  int fitted_N() const { return N_; }
  const std::vector<double>& radii() const { return opt_.radii; }
  const ConvexRegion& thickened() const { return thick_; }

  /// w in the open cone (S_inf^*)° shifted by eps' xi0.
  bool in_domain(Complex w) const { return dual_.contains_interior(w - eps_prime_ * xi0_, opt_.domain_margin); }

  /// delta and s of the arc estimate for this w.
  std::pair<double, double> decay_constants(Complex w) const {
    Complex shifted = w - eps_prime_ * xi0_;
    double s = std::abs(shifted);
    double d = std::numeric_limits<double>::infinity();
    for (Complex dir : {-in_ray_.dir, out_ray_.dir}) d = std::min(d, -pairing(dir / std::abs(dir), shifted) / s);
    return {std::max(d, 1e-3), s};
  }

  MerilEvaluation evaluate(Complex w) const {
    if (!in_domain(w))
      throw std::domain_error("meril_transform: w = (" + std::to_string(w.real()) + ", " + std::to_string(w.imag()) +
                              ") is outside the shifted open dual cone");
    MerilEvaluation ev;
    ev.c = c_;
    ev.N = N_;
    std::tie(ev.delta, ev.s) = decay_constants(w);

    const Complex anchor = *support_point(Domain{thick_}, w);
    const Complex exponent = anchor * w;
    auto g = [&](Complex z) { return std::exp((z - anchor) * w) * u_(z); };
    QuadratureOptions q = opt_.quadrature;
    q.rel_tol = std::max(q.rel_tol, 1e-13);

    auto first = integrate(base_.boundary, g, q);
    CompensatedSum<Complex> value;
    value.add(first.value);
    double err = first.error;
    const double log_tol = std::log(opt_.tolerance);

    const auto& radii = opt_.radii;
    for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
      Complex gap = ray_piece(in_ray_, radii[k], radii[k + 1], g, q, err) + ray_piece(out_ray_, radii[k], radii[k + 1], g, q, err);
      value.add(gap);
      MerilStep st;
      st.radius = radii[k + 1];
      const double log_gap = std::log(std::abs(gap)) + exponent.real();
      const double log_tail = log_tail_bound(radii[k], ev.c, ev.N, ev.delta, ev.s);
      const double log_val = std::log(std::abs(value.value())) + exponent.real();
      st.value = value.value() * std::exp(exponent);
      st.gap = std::exp(log_gap);
      st.tail = std::exp(log_tail);
      st.dominated = log_gap <= log_tail;
      ev.steps.push_back(st);
      if (log_gap < log_tol + std::max(0.0, log_val) && log_gap <= log_tail) {
        ev.converged = true;
        break;
      }
    }
    ev.scaled = {value.value(), exponent};
    ev.value = ev.scaled.value();
    ev.error = err * std::exp(exponent.real());
    return ev;
  }

  TransformResult as_result() const {
    TransformResult r;
    r.provenance = Provenance::contour;
    auto self = std::make_shared<const MerilTransform>(*this);
    r.in_domain = [self](Complex w) { return self->in_domain(w); };
    r.evaluator = [self](Complex w) {
      auto ev = self->evaluate(w);
      if (!ev.converged) throw MerilNonConvergence("meril_transform: radius schedule exhausted before convergence", ev);
      return Evaluation{ev.value, ev.error};
    };
    r.scaled_evaluator = [self](Complex w) {
      auto ev = self->evaluate(w);
      if (!ev.converged) throw MerilNonConvergence("meril_transform: radius schedule exhausted before convergence", ev);
      return ev.scaled;
    };
    return r;
  }

 private:
  static ConvexRegion validated_thicken(const ConvexRegion& s, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("meril_transform: epsilon must be > 0");
    return thicken(s, eps);
  }

  template <class G>
  static Complex ray_piece(const detail::RayPrim& ray, double r_from, double r_to, const G& g, const QuadratureOptions& q,
                           double& err) {
    double t0 = detail::ray_exit_parameter(ray.origin, ray.dir, r_from, ray.incoming);
    double t1 = detail::ray_exit_parameter(ray.origin, ray.dir, r_to, ray.incoming);
    Complex a = ray.origin + t0 * ray.dir, b = ray.origin + t1 * ray.dir;
    // Incoming rays are traversed from far to near.
    OrientedContour piece({ray.incoming ? Segment{b, a} : Segment{a, b}}, false);
    auto r = integrate(piece, g, q);
    err += r.error;
    return r.value;
  }

  /// c = sup |e^{eps' xi0 z} u(z)| (1 + |z|)^{-N} over the boundary samples.
  void fit_growth_constants() {
    N_ = u_.entire_degree();
    const double r_max = opt_.radii.back();
    double c = 0.0;
    auto sample = [&](Complex z) {
      double v = std::abs(std::exp(eps_prime_ * xi0_ * z) * u_(z)) * std::pow(1.0 + std::abs(z), -N_);
      if (std::isfinite(v)) c = std::max(c, v);
    };
    for (const auto& p : base_.boundary.pieces())
      for (int j = 0; j <= 64; ++j) sample(piece_point(p, j / 64.0));
    for (const auto* ray : {&in_ray_, &out_ray_}) {
      for (int j = 0; j <= 512; ++j) {
        double t = std::pow(r_max + 1.0, j / 512.0) - 1.0;
        sample(ray->origin + (ray->incoming ? -t : t) * ray->dir);
      }
    }
    c_ = std::max(c, 1e-300);
  }

  MeromorphicDatum u_;
  ConvexRegion s_;
  ConvexRegion thick_;
  double eps_;
  double eps_prime_;
  MerilOptions opt_;
  Cone dual_;
  Complex xi0_;
  TruncatedBoundary base_;
  detail::RayPrim in_ray_{}, out_ray_{};
  double c_ = 0.0;
  int N_ = 0;
};

inline TransformResult meril_transform(const MeromorphicDatum& u, const ConvexRegion& s, double eps, double eps_prime,
                                       const MerilOptions& opt = {}) {
  return MerilTransform(u, s, eps, eps_prime, opt).as_result();
}

// ---------------------------------------------------------------------------
// Borel inverse
// ---------------------------------------------------------------------------

/// e^{center w} sum_n coefficients[n] w^n
struct ExpPolynomialGroup {
  Complex center{0, 0};
  std::vector<Complex> coefficients;
};

/// Inverse of the Polya map on exponential polynomials: given v / (2 pi i) as
/// groups e^{a w} sum a_n w^n, returns u = sum a_n n! (z - a)^{-(n+1)}.
inline MeromorphicDatum borel_inverse(const std::vector<ExpPolynomialGroup>& groups) {
  std::vector<PoleTerm> terms;
  for (const auto& g : groups) {
    if (!std::isfinite(std::abs(g.center))) throw std::invalid_argument("borel_inverse: non-finite group center");
    if (g.coefficients.size() > 170) throw std::invalid_argument("borel_inverse: coefficient stream too long to invert");
    for (std::size_t n = 0; n < g.coefficients.size(); ++n) {
      Complex a = g.coefficients[n];
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
        throw std::invalid_argument("borel_inverse: non-finite coefficient");
      if (a == Complex{0, 0}) continue;
      terms.push_back({g.center, static_cast<int>(n) + 1, a * factorial(static_cast<int>(n))});
    }
  }
  return MeromorphicDatum(std::move(terms));
}

inline MeromorphicDatum borel_inverse(const std::vector<Complex>& taylor, Complex center = {0, 0}) {
  return borel_inverse(std::vector<ExpPolynomialGroup>{{center, taylor}});
}

}  // namespace lapleg
