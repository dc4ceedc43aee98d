#pragma once

// Numerical evidence for membership in the exponential-type classes: sample
// |v(w)| e^{-h(w) - eps |w|} on rays and watch the per-radius sups.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lapleg/numeric.hpp"
#include "lapleg/transforms.hpp"

namespace lapleg {

enum class Verdict { bounded, unbounded, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::bounded:
      return "bounded";
    case Verdict::unbounded:
      return "unbounded";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "?";
}

inline std::vector<double> geometric_ladder(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw std::invalid_argument("geometric_ladder: need 0 < lo < hi, count >= 2");
  std::vector<double> r;
  for (int k = 0; k < count; ++k) r.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
  return r;
}

struct GrowthOptions {
  std::vector<double> radii = geometric_ladder(1.0, 1e4, 17);
  int rays = 64;
  /// w = base + radius e^{i phi}
  Complex base{0, 0};
  /// Ray angles fill [angle_start, angle_start + angle_width); a width below
  /// 2 pi is sampled at cell midpoints so the rays stay inside an open sector.
  double angle_start = 0.0;
  double angle_width = two_pi;
  /// Replaces the norm |w| by norm_scale |w|.
  double norm_scale = 1.0;
  double bounded_factor = 1.05;
  /// Sups this far below the largest sup count as numerical zero.
  double noise_floor = 1e-10;
};

/// One evaluation of v, shared by every epsilon of a ladder.
struct RawSample {
  Complex w;
  Complex v;
  double log_abs_v = -std::numeric_limits<double>::infinity();
  double h = 0.0;
  int ray = 0;
  double radius = 0.0;
  bool ok = true;
  std::string error;
};

struct GrowthSample {
  Complex w;
  Complex v;
  double h = 0.0;
  double log_ratio = -std::numeric_limits<double>::infinity();
  double ratio = 0.0;
  int ray = 0;
  double radius = 0.0;
};

struct GrowthReport {
  double epsilon = 0.0;
  double norm_scale = 1.0;
  std::vector<GrowthSample> samples;  ///< sorted by (ray, radius)
  std::vector<double> radii;
  std::vector<double> log_sup;  ///< per radius
  Verdict verdict = Verdict::inconclusive;
  double slope = 0.0;  ///< fitted growth exponent of log sup against |w|
  int failing_ray = -1;
  int failed_evaluations = 0;

  double sup() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double l : log_sup) m = std::max(m, l);
    return std::exp(m);
  }
};

using SupportEvaluator = std::function<ExtReal(Complex)>;

inline std::vector<RawSample> sample_transform(const TransformResult& v, const SupportEvaluator& h, const GrowthOptions& opt) {
  if (opt.rays < 1 || opt.radii.empty()) throw std::invalid_argument("growth: empty sample set");
  for (std::size_t k = 1; k < opt.radii.size(); ++k)
    if (!(opt.radii[k] > opt.radii[k - 1])) throw std::invalid_argument("growth: radius ladder must be strictly increasing");
  const bool full = opt.angle_width >= two_pi;
  std::vector<RawSample> out;
  for (int j = 0; j < opt.rays; ++j) {
    double phi = opt.angle_start + opt.angle_width * (full ? j : j + 0.5) / opt.rays;
    Complex dir = unit(phi);
    for (double r : opt.radii) {
      RawSample s;
      s.w = opt.base + r * dir;
      s.ray = j;
      s.radius = r;
      ExtReal hv = h(s.w);
      if (hv.is_infinite()) throw std::invalid_argument("growth: support function is infinite at a sample point");
      s.h = hv.value();
      try {
        ScaledValue sv = v.scaled_evaluator ? v.scaled_evaluator(s.w) : ScaledValue{v.evaluator(s.w).value, 0.0};
        s.v = sv.value();
        s.log_abs_v = std::abs(sv.mantissa) == 0.0 ? -std::numeric_limits<double>::infinity() : sv.log_abs();
      } catch (const std::exception& e) {
        s.ok = false;
        s.error = e.what();
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

namespace detail {

inline double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace detail

/// Classifies one epsilon from shared samples.
///
/// bounded: from the later of the first-quartile radius and the peak radius
/// on, each sup is at most bounded_factor times its predecessor (or below the
/// noise floor), and the peak lies in the first three quarters of the ladder.
/// unbounded: least-squares slope of log sup against |w| over the radii past
/// the first quartile exceeds eps / 2. Anything else is inconclusive.
inline GrowthReport growth_report(const std::vector<RawSample>& raw, double eps, const GrowthOptions& opt) {
  if (raw.empty()) throw std::invalid_argument("growth: empty sample set");
  if (!(eps > 0.0)) throw std::invalid_argument("growth: epsilon must be > 0");
  GrowthReport rep;
  rep.epsilon = eps;
  rep.norm_scale = opt.norm_scale;
  rep.radii = opt.radii;
  const std::size_t n = opt.radii.size();
  const double ninf = -std::numeric_limits<double>::infinity();
  rep.log_sup.assign(n, ninf);
  std::vector<double> wmod(n, 0.0);

  for (const auto& s : raw) {
    GrowthSample g;
    g.w = s.w;
    g.v = s.v;
    g.h = s.h;
    g.ray = s.ray;
    g.radius = s.radius;
    std::size_t k = std::lower_bound(opt.radii.begin(), opt.radii.end(), s.radius) - opt.radii.begin();
    if (!s.ok) {
      ++rep.failed_evaluations;
      g.log_ratio = std::numeric_limits<double>::quiet_NaN();
      g.ratio = std::numeric_limits<double>::quiet_NaN();
    } else {
      g.log_ratio = s.log_abs_v - s.h - eps * opt.norm_scale * std::abs(s.w);
      g.ratio = std::exp(g.log_ratio);
      if (k < n) rep.log_sup[k] = std::max(rep.log_sup[k], g.log_ratio);
    }
    if (k < n) wmod[k] = std::max(wmod[k], std::abs(s.w));
    rep.samples.push_back(g);
  }
  std::stable_sort(rep.samples.begin(), rep.samples.end(), [](const GrowthSample& a, const GrowthSample& b) {
    return a.ray < b.ray || (a.ray == b.ray && a.radius < b.radius);
  });

  double max_log = ninf;
  std::size_t peak = 0;
  for (std::size_t k = 0; k < n; ++k)
    if (rep.log_sup[k] > max_log) {
      max_log = rep.log_sup[k];
      peak = k;
    }
  const std::size_t q = n / 4;

  // failing ray: largest ratio at the largest radius
  double best = ninf;
  for (const auto& g : rep.samples)
    if (g.radius == opt.radii.back() && g.log_ratio > best) {
      best = g.log_ratio;
      rep.failing_ray = g.ray;
    }

  std::vector<double> xs, ys;
  for (std::size_t k = q; k < n; ++k)
    if (std::isfinite(rep.log_sup[k])) {
      xs.push_back(wmod[k]);
      ys.push_back(rep.log_sup[k]);
    }
  rep.slope = detail::lsq_slope(xs, ys);

  if (rep.failed_evaluations > 0) {
    rep.verdict = Verdict::inconclusive;
    return rep;
  }
  if (max_log == ninf) {
    rep.verdict = Verdict::bounded;
    rep.failing_ray = -1;
    return rep;
  }
  const double floor = max_log + std::log(opt.noise_floor);
  const double step = std::log(opt.bounded_factor);
  bool bounded = 4 * peak <= 3 * (n - 1);
  for (std::size_t k = std::max(q, peak); bounded && k + 1 < n; ++k)
    if (!(rep.log_sup[k + 1] <= std::max(rep.log_sup[k] + step, floor))) bounded = false;
  if (bounded) {
    rep.verdict = Verdict::bounded;
    rep.failing_ray = -1;
  } else if (rep.slope > eps / 2) {
    rep.verdict = Verdict::unbounded;
  } else {
    rep.verdict = Verdict::inconclusive;
  }
  return rep;
}

inline GrowthReport growth_ratio_sup(const TransformResult& v, const SupportEvaluator& h, double eps,
                                     const GrowthOptions& opt = {}) {
  return growth_report(sample_transform(v, h, opt), eps, opt);
}

/// Reports for every epsilon of a ladder from a single sampling pass.
inline std::vector<GrowthReport> growth_ladder(const TransformResult& v, const SupportEvaluator& h,
                                               const std::vector<double>& ladder, const GrowthOptions& opt = {}) {
  auto raw = sample_transform(v, h, opt);
  std::vector<GrowthReport> out;
  for (double e : ladder) out.push_back(growth_report(raw, e, opt));
  return out;
}

struct ClassVerdict {
  std::vector<std::pair<double, Verdict>> per_epsilon;
  bool member = false;
  /// bounded at eps implies bounded at every larger eps
  bool monotone = true;
};

inline ClassVerdict exp_class_verdict(const std::vector<GrowthReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("exp_class_verdict: no reports");
  const auto& ref = reports.front();
  for (const auto& r : reports) {
    if (r.samples.size() != ref.samples.size() || r.norm_scale != ref.norm_scale)
      throw std::invalid_argument("exp_class_verdict: reports do not share a sampling lattice");
    for (std::size_t i = 0; i < r.samples.size(); ++i)
      if (r.samples[i].w != ref.samples[i].w)
        throw std::invalid_argument("exp_class_verdict: reports do not share a sampling lattice");
  }
  ClassVerdict cv;
  cv.member = true;
  for (const auto& r : reports) {
    cv.per_epsilon.push_back({r.epsilon, r.verdict});
    if (r.verdict != Verdict::bounded) cv.member = false;
  }
  for (const auto& a : reports)
    for (const auto& b : reports)
      if (b.epsilon > a.epsilon && a.verdict == Verdict::bounded && b.verdict != Verdict::bounded) cv.monotone = false;
  return cv;
}

}  // namespace lapleg
