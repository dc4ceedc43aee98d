#pragma once

// Area-integral realization of the transform: with a cutoff psi equal to 0 on
// K_{eps/2} and 1 off K_eps,
//   v(w) = 2i * integral of e^{zw} u(z) d(psi)/d(zbar) dx dy
// over the band K_eps \ K_{eps/2}. By Green's theorem this equals the contour
// integral around any circle enclosing K.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lapleg/convexgeom.hpp"
#include "lapleg/numeric.hpp"
#include "lapleg/transforms.hpp"

namespace lapleg {

enum class Smoothstep { cubic, quintic };

inline double smoothstep(Smoothstep s, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  if (s == Smoothstep::cubic) return t * t * (3.0 - 2.0 * t);
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

inline double smoothstep_derivative(Smoothstep s, double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  if (s == Smoothstep::cubic) return 6.0 * t * (1.0 - t);
  double a = t * (1.0 - t);
  return 30.0 * a * a;
}

/// psi: 0 on K_{eps/2}, 1 outside K_eps, smoothstep of the normalized
/// distance in between.
class CutoffProfile {
 public:
  CutoffProfile(ConvexBody k, double eps, Smoothstep order = Smoothstep::quintic)
      : k_(std::move(k)), eps_(eps), order_(order) {
    if (!(eps_ > 0.0)) throw std::invalid_argument("CutoffProfile: epsilon must be > 0");
  }

  const ConvexBody& base() const { return k_; }
  ConvexBody inner() const { return thicken(k_, eps_ / 2); }
  ConvexBody outer() const { return thicken(k_, eps_); }
  double epsilon() const { return eps_; }
  Smoothstep order() const { return order_; }

  /// Position across the band: 0 at the inner boundary, 1 at the outer.
  double band_coordinate(Complex z) const { return (signed_distance(k_, z) - eps_ / 2) / (eps_ / 2); }

  double operator()(Complex z) const { return smoothstep(order_, band_coordinate(z)); }

  /// d(psi)/d(zbar) = (1/2)(d/dx + i d/dy) psi; exactly zero off the open band.
  Complex dbar(Complex z) const {
    double t = band_coordinate(z);
    if (t <= 0.0 || t >= 1.0) return {0, 0};
    return 0.5 * smoothstep_derivative(order_, t) * (2.0 / eps_) * distance_gradient(k_, z);
  }

 private:
  ConvexBody k_;
  double eps_;
  Smoothstep order_;
};

inline double cutoff_eval(const CutoffProfile& p, Complex z) { return p(z); }

enum class AreaScheme {
  /// level-set coordinates for every body
  automatic,
  level_set,
  cartesian,
};

struct AreaOptions {
  int resolution = 512;
  AreaScheme scheme = AreaScheme::automatic;
  /// Results whose error estimate exceeds this are flagged as under-resolved.
  double target = 1e-4;
};

struct AreaResult {
  Complex value;
  double error = 0.0;  ///< |I_n - I_{n/2}|
  int resolution = 0;
  bool resolved = true;
  Provenance provenance = Provenance::area_oracle;
};

namespace detail {

/// Nodes and complex weights of a product rule for
/// 2i * integral of f(z) dpsi/dzbar dx dy over the band.
struct BandRule {
  std::vector<Complex> nodes;
  std::vector<Complex> weights;
};

/// Band written as {core + t N : t in [rho + eps/2, rho + eps]}: strips
/// z = v_k + l d_k + t n_k (Jacobian 1) along edges, fans z = v_k + t e^{i theta}
/// (Jacobian t) at vertices. The distance gradient is n_k or e^{i theta}.
inline BandRule level_set_rule(const CutoffProfile& p, int n) {
  const auto& core = p.base().core();
  const auto& v = core.vertices;
  const double rho = p.base().rounding(), eps = p.epsilon();
  const double t0 = rho + eps / 2, t1 = rho + eps, ht = (t1 - t0) / n;
  const double tmid = 0.5 * (t0 + t1);

  struct Piece {
    bool fan;
    Complex origin, dir, normal;
    double length;       // edge length
    double a0, sweep;    // fan angles
  };
  std::vector<Piece> pieces;
  if (v.size() == 1) {
    pieces.push_back({true, v[0], {}, {}, 0.0, 0.0, two_pi});
  } else {
    auto dirs = core.polygon_edge_dirs();
    const std::size_t m = v.size();
    for (std::size_t k = 0; k < m; ++k) {
      Complex nk = outward_normal(dirs[k]);
      Complex nn = outward_normal(dirs[(k + 1) % m]);
      pieces.push_back({false, v[k], dirs[k] / std::abs(dirs[k]), nk, std::abs(dirs[k]), 0.0, 0.0});
      double a0 = std::arg(nk);
      pieces.push_back({true, v[(k + 1) % m], {}, {}, 0.0, a0, wrap_positive(std::arg(nn) - a0)});
    }
  }
  double total = 0.0;
  for (const auto& pc : pieces) total += pc.fan ? pc.sweep * tmid : pc.length;

  BandRule rule;
  const Complex two_i{0, 2};
  for (const auto& pc : pieces) {
    double len = pc.fan ? pc.sweep * tmid : pc.length;
    if (len <= 0.0) continue;
    // Gauss-Legendre along the level curves, midpoint across the band.
    int ns = std::max(8, static_cast<int>(std::lround(n * len / total)));
    std::vector<double> xs(ns), ws(ns);
    gauss_legendre_rule(ns, xs.data(), ws.data());
    for (int i = 0; i < n; ++i) {
      double t = t0 + (i + 0.5) * ht;
      double tau = (t - t0) / (eps / 2);
      double radial = 0.5 * smoothstep_derivative(p.order(), tau) * (2.0 / eps);
      if (radial == 0.0) continue;
      for (int j = 0; j < ns; ++j) {
        double x = 0.5 * (xs[j] + 1.0);
        if (pc.fan) {
          Complex e = unit(pc.a0 + x * pc.sweep);
          rule.nodes.push_back(pc.origin + t * e);
          rule.weights.push_back(two_i * radial * e * (t * 0.5 * ws[j] * pc.sweep * ht));
        } else {
          rule.nodes.push_back(pc.origin + x * pc.length * pc.dir + t * pc.normal);
          rule.weights.push_back(two_i * radial * pc.normal * (0.5 * ws[j] * pc.length * ht));
        }
      }
    }
  }
  return rule;
}

/// Midpoint rule on the bounding box of K_eps, masked to the band.
inline BandRule cartesian_rule(const CutoffProfile& p, int n) {
  const auto& v = p.base().vertices();
  const double pad = p.base().rounding() + p.epsilon();
  double x0 = v[0].real(), x1 = x0, y0 = v[0].imag(), y1 = y0;
  for (Complex z : v) {
    x0 = std::min(x0, z.real());
    x1 = std::max(x1, z.real());
    y0 = std::min(y0, z.imag());
    y1 = std::max(y1, z.imag());
  }
  x0 -= pad;
  x1 += pad;
  y0 -= pad;
  y1 += pad;
  const double hx = (x1 - x0) / n, hy = (y1 - y0) / n;
  BandRule rule;
  const Complex two_i{0, 2};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Complex z{x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy};
      Complex d = p.dbar(z);
      if (d == Complex{0, 0}) continue;
      rule.nodes.push_back(z);
      rule.weights.push_back(two_i * d * (hx * hy));
    }
  return rule;
}

}  // namespace detail

/// Area integral for many w at a fixed (u, profile, resolution).
class AreaLaplace {
 public:
  AreaLaplace(const MeromorphicDatum& u, const CutoffProfile& p, const AreaOptions& opt = {}) : opt_(opt) {
    if (opt_.resolution < 4 || opt_.resolution % 2 != 0)
      throw std::invalid_argument("area_laplace: resolution must be even and >= 4");
    const ConvexBody inner = p.inner();
    for (const auto& t : u.poles()) {
      double d = signed_distance(inner, t.pole);
      if (!(d < 0.0))
        throw std::invalid_argument("area_laplace: pole (" + std::to_string(t.pole.real()) + ", " +
                                    std::to_string(t.pole.imag()) + ") is " +
                                    (signed_distance(p.outer(), t.pole) <= 0.0 ? "inside the cutoff band"
                                                                                : "outside K_{eps/2}"));
    }
    AreaScheme scheme = opt_.scheme;
    if (scheme == AreaScheme::automatic) scheme = AreaScheme::level_set;
    auto build = [&](int n) {
      auto rule = scheme == AreaScheme::level_set ? detail::level_set_rule(p, n) : detail::cartesian_rule(p, n);
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) rule.weights[j] *= u(rule.nodes[j]);
      return rule;
    };
    fine_ = build(opt_.resolution);
    coarse_ = build(opt_.resolution / 2);
  }

  AreaResult operator()(Complex w) const {
    AreaResult r;
    r.resolution = opt_.resolution;
    Complex fine = apply(fine_, w), coarse = apply(coarse_, w);
    r.value = fine;
    r.error = std::abs(fine - coarse);
    r.resolved = r.error <= opt_.target;
    return r;
  }

 private:
  static Complex apply(const detail::BandRule& rule, Complex w) {
    CompensatedSum<Complex> s;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) s.add(std::exp(rule.nodes[j] * w) * rule.weights[j]);
    return s.value();
  }

  AreaOptions opt_;
  detail::BandRule fine_, coarse_;
};

inline AreaResult area_laplace(const MeromorphicDatum& u, const CutoffProfile& p, Complex w, const AreaOptions& opt = {}) {
  return AreaLaplace(u, p, opt)(w);
}

/// u = 1/z around the closed unit disk with eps = 1 must give 2 pi i.
inline bool orientation_self_test() {
  CutoffProfile p(ConvexBody::disk({0, 0}, 1.0), 1.0);
  AreaOptions opt;
  opt.resolution = 64;
  auto r = area_laplace(MeromorphicDatum::simple_pole({0, 0}), p, {0, 0}, opt);
  return std::abs(r.value - two_pi_i) < 1e-6;
}

}  // namespace lapleg
