#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lapleg {

/// Points of the plane and of its dual are both carried as complex numbers.
/// The duality pairing is the complex product: Re<z,w> = Re(z*w).
using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr Complex two_pi_i{0.0, 2.0 * std::numbers::pi};

/// Euclidean inner product of z and w viewed as vectors of R^2.
inline double dot(Complex a, Complex b) { return a.real() * b.real() + a.imag() * b.imag(); }

/// z-component of the 2-D cross product.
inline double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

/// Real part of the duality pairing.
inline double pairing(Complex z, Complex w) { return z.real() * w.real() - z.imag() * w.imag(); }

/// Rotation by +90 degrees.
inline Complex rot90(Complex z) { return {-z.imag(), z.real()}; }

inline Complex unit(double angle) { return std::polar(1.0, angle); }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, two_pi);
  if (a <= -pi) a += two_pi;
  return a;
}

/// Wraps an angle into [0, 2 pi).
inline double wrap_positive(double a) {
  a = std::fmod(a, two_pi);
  if (a < 0) a += two_pi;
  if (a >= two_pi) a -= two_pi;
  return a;
}

/// Element of R u {+inf}. Sups over nonempty sets never produce -inf here.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  constexpr ExtReal(double v) : value_(v) {}  // NOLINT: implicit from finite doubles

  static constexpr ExtReal infinity() {
    ExtReal r;
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  double value() const {
    if (infinite_) throw std::domain_error("ExtReal: value() of +inf");
    return value_;
  }

  /// Finite value or IEEE +inf.
  constexpr double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return {a.value_ + b.value_};
  }
  friend ExtReal operator-(ExtReal a, double b) {
    if (a.infinite_) return infinity();
    return {a.value_ - b};
  }
  friend bool operator==(ExtReal a, ExtReal b) {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

 private:
  double value_ = 0.0;
  bool infinite_ = false;
};

inline std::string to_string(ExtReal x) {
  return x.is_finite() ? std::to_string(x.value()) : std::string("+inf");
}

/// Neumaier compensated accumulator. Addition order is the caller's order.
template <class T>
class CompensatedSum {
 public:
  void add(T x) {
    T t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  T value() const { return sum_ + comp_; }

 private:
  T sum_{};
  T comp_{};
};

template <>
inline void CompensatedSum<Complex>::add(Complex x) {
  auto step = [](double& s, double& c, double v) {
    double t = s + v;
    if (std::abs(s) >= std::abs(v))
      c += (s - t) + v;
    else
      c += (v - t) + s;
    s = t;
  };
  double sr = sum_.real(), si = sum_.imag(), cr = comp_.real(), ci = comp_.imag();
  step(sr, cr, x.real());
  step(si, ci, x.imag());
  sum_ = {sr, si};
  comp_ = {cr, ci};
}

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1], by Newton on P_n.
inline void gauss_legendre_rule(int n, double* nodes, double* weights) {
  auto legendre = [n](double x, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    return p1;
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double dx = legendre(x, dp) / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, dp);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    weights[i] = w;
    nodes[n - 1 - i] = x;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussLegendre() { gauss_legendre_rule(static_cast<int>(N), nodes.data(), weights.data()); }
};

inline const GaussLegendre<15>& gauss_legendre_15() {
  static const GaussLegendre<15> rule;
  return rule;
}

}  // namespace lapleg
