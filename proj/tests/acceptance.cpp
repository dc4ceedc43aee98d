// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "lapleg/lapleg.hpp"
#include "oracles.hpp"

using namespace lapleg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", x);
  return b;
}

// ---------------------------------------------------------------------------
// shared data: 20 random meromorphic data in the unit disk and a rounded square

struct Datum {
  ConvexBody k;
  std::vector<oracle::Pole> poles;
  MeromorphicDatum u;
};

const std::vector<Complex> square{{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};

std::vector<Datum> acceptance_data() {
  auto g = oracle::rng(20240611);
  std::vector<Datum> out;
  for (int i = 0; i < 20; ++i) {
    bool disk = i % 2 == 0;
    ConvexBody k = disk ? ConvexBody::disk({0, 0}, 1.0) : ConvexBody(square, 0.25);
    Datum d{k, {}, {}};
    int count = 1 + static_cast<int>(oracle::uniform(g, 0, 5));
    std::vector<PoleTerm> terms;
    while (static_cast<int>(d.poles.size()) < count) {
      Complex a{oracle::uniform(g, -1, 1), oracle::uniform(g, -1, 1)};
      // independent interior test
      bool inside = disk ? std::abs(a) < 0.95
                         : std::max(0.0, std::abs(a.real()) - 0.5) * std::max(0.0, std::abs(a.real()) - 0.5) +
                                   std::max(0.0, std::abs(a.imag()) - 0.5) * std::max(0.0, std::abs(a.imag()) - 0.5) <
                               0.2 * 0.2;
      if (!inside) continue;
      int order = 1 + static_cast<int>(oracle::uniform(g, 0, 3));
      Complex c{oracle::uniform(g, -1, 1), oracle::uniform(g, -1, 1)};
      d.poles.push_back({a, order, c});
      terms.push_back({a, order, c});
    }
    d.u = MeromorphicDatum(terms);
    out.push_back(d);
  }
  return out;
}

std::vector<Complex> disk_grid(double radius, int n) {
  std::vector<Complex> ws;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Complex w{-radius + 2 * radius * i / (n - 1), -radius + 2 * radius * j / (n - 1)};
      if (std::abs(w) <= radius) ws.push_back(w);
    }
  return ws;
}

// ---------------------------------------------------------------------------

Outcome polya_residue(const std::vector<Datum>& data) {
  double worst = 0.0;
  std::size_t points = 0;
  for (const auto& d : data) {
    auto v = polya_transform(d.u, d.k, default_polya_radius(d.k));
    for (Complex w : disk_grid(3.0, 21)) {
      Complex ref = oracle::residue_sum(d.poles, w);
      worst = std::max(worst, std::abs(v(w) - ref) / (1.0 + std::abs(ref)));
      ++points;
    }
  }
  return {worst <= 1e-9, "max |contour - residue| / (1 + |residue|) = " + num(worst) + " over " + std::to_string(points) +
                             " points, tol 1e-9"};
}

Outcome contour_independence(const std::vector<Datum>& data) {
  double worst_excess = -1e300, worst_spread = 0.0;
  for (const auto& d : data) {
    double r = default_polya_radius(d.k);
    std::vector<TransformResult> vs;
    for (double f : {1.0, 1.5, 3.0}) vs.push_back(polya_transform(d.u, d.k, f * r));
    for (Complex w : disk_grid(3.0, 21)) {
      std::vector<Evaluation> ev;
      for (const auto& v : vs) ev.push_back(v.evaluator(w));
      for (std::size_t i = 0; i < ev.size(); ++i)
        for (std::size_t j = i + 1; j < ev.size(); ++j) {
          double spread = std::abs(ev[i].value - ev[j].value);
          worst_spread = std::max(worst_spread, spread);
          worst_excess = std::max(worst_excess, spread - (1e-10 + ev[i].error + ev[j].error));
        }
    }
  }
  return {worst_excess <= 0.0, "max spread over r, 1.5r, 3r = " + num(worst_spread) +
                                   ", max excess over 1e-10 + error estimates = " + num(worst_excess)};
}

struct AreaCase {
  ConvexBody k;
  double eps;
  std::vector<PoleTerm> poles;
};

Outcome green_oracle() {
  std::vector<AreaCase> cases{
      {ConvexBody::disk({0, 0}, 1.0), 1.0, {{{0.3, 0}, 1, 1.0}, {{-0.2, 0.4}, 2, {0.5, 1}}}},
      {ConvexBody(square, 0.25), 0.3, {{{0.2, 0.1}, 2, {1, 0.5}}, {{-0.3, -0.2}, 1, 1.0}, {{0.1, -0.4}, 3, {0, -0.3}}}},
      {ConvexBody({{-0.6, -0.6}, {0.7, -0.5}, {0.1, 0.8}}), 0.3, {{{0.05, -0.1}, 1, {1, -1}}, {{-0.2, -0.3}, 2, 0.4}}},
      {ConvexBody({{-0.6, -0.6}, {0.6, -0.6}, {0.6, 0.6}, {-0.6, 0.6}}), 0.4, {{{0.3, 0.3}, 1, 1.0}, {{-0.3, 0.1}, 1, {0, 1}}}},
      {ConvexBody({{0, 0}, {1, 0}, {0.5, 0.8}}, 0.15), 0.4, {{{0.5, 0.3}, 2, {0.7, 0.2}}, {{0.3, 0.1}, 1, {-1, 0}}}},
  };
  std::vector<Complex> ws;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) ws.push_back({std::sqrt(2.0) * (-1 + 0.5 * i), std::sqrt(2.0) * (-1 + 0.5 * j)});
  bool pass = true;
  double worst = 0.0, worst_ratio = 0.0;
  std::string shrink;
  for (const auto& c : cases) {
    MeromorphicDatum u(c.poles);
    CutoffProfile p(c.k, c.eps);
    auto contour = polya_transform(u, c.k, default_polya_radius(thicken(c.k, c.eps)));
    AreaOptions o512, o1024;
    o1024.resolution = 1024;
    AreaLaplace a512(u, p, o512), a1024(u, p, o1024);
    double d512 = 0.0, d1024 = 0.0, mag = 0.0;
    for (Complex w : ws) {
      auto ref = contour.evaluator(w);
      auto a = a512(w);
      double d = std::abs(a.value - ref.value);
      worst = std::max(worst, d);
      worst_ratio = std::max(worst_ratio, d / (a.error + ref.error + 1e-300));
      if (!(d <= 1e-4 && d <= a.error + ref.error + 1e-12)) pass = false;
      d512 = std::max(d512, d);
      d1024 = std::max(d1024, std::abs(a1024(w).value - ref.value));
      mag = std::max(mag, std::abs(ref.value));
    }
    // at roundoff level there is nothing left to shrink
    bool shrinks = d1024 < d512 || std::max(d512, d1024) <= 1e-11 * (1 + mag);
    pass = pass && shrinks;
    shrink += (shrink.empty() ? "" : ", ") + num(d512) + "->" + num(d1024);
  }
  return {pass, "max |area - contour| at 512 = " + num(worst) + " (max ratio to combined error " + num(worst_ratio) +
                    "); discrepancy 512->1024 per set: " + shrink};
}

Outcome legendre_suite() {
  auto g = oracle::rng(77);
  std::string detail;
  bool pass = true;

  // f = max of affine pieces on a hexagon
  std::vector<Complex> hex;
  for (int k = 0; k < 6; ++k) hex.push_back(std::polar(1.2, oracle::PI / 3 * k + 0.2) + Complex(0.1, -0.2));
  std::vector<AffinePiece> pieces{{{1.0, 0.5}, 0.1}, {{-0.7, 0.2}, -0.3}, {{0.2, -1.1}, 0.0}, {{-0.3, 0.9}, 0.25}};
  PLConvexFunction f(pieces, Domain{ConvexBody(hex)});
  auto f_direct = [&](Complex z) {
    double m = -1e300;
    for (const auto& p : pieces) m = std::max(m, oracle::re_pair(z, p.gradient) + p.offset);
    return m;
  };
  auto in_hex = [&](Complex z, double margin) {
    for (int k = 0; k < 6; ++k) {
      Complex a = hex[k], b = hex[(k + 1) % 6];
      double cr = ((b - a).real() * (z - a).imag() - (b - a).imag() * (z - a).real()) / std::abs(b - a);
      if (cr < margin) return false;
    }
    return true;
  };
  auto interior_point = [&]() {
    for (;;) {
      Complex z{oracle::uniform(g, -1.3, 1.5), oracle::uniform(g, -1.5, 1.3)};
      if (in_hex(z, 1e-6)) return z;
    }
  };

  PLConvexFunction fstar = conjugate_function(f);
  double bi = 0.0;
  for (int i = 0; i < 100; ++i) {
    Complex z = interior_point();
    ExtReal ff = conjugate_at(fstar, z);
    bi = std::max(bi, ff.is_finite() ? std::abs(ff.value() - f_direct(z)) : 1e300);
  }
  pass = pass && bi <= 1e-9;
  detail += "f** - f " + num(bi);

  double fy = -1e300;
  for (int i = 0; i < 10000; ++i) {
    Complex z = interior_point();
    Complex w{oracle::uniform(g, -5, 5), oracle::uniform(g, -5, 5)};
    ExtReal s = conjugate_at(f, w);
    if (s.is_finite()) fy = std::max(fy, oracle::re_pair(z, w) - f_direct(z) - s.value());
  }
  pass = pass && fy <= 1e-10;
  detail += "; Fenchel-Young violation " + num(fy);

  // indicator of K_eps, K a rounded triangle
  std::vector<Complex> tri{{-0.5, -0.3}, {0.8, -0.1}, {0.1, 0.9}};
  const double rho = 0.1, eps = 0.3;
  PLConvexFunction ind({}, Domain{thicken(ConvexBody(tri, rho), eps)});
  double th = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Complex w{oracle::uniform(g, -5, 5), oracle::uniform(g, -5, 5)};
    ExtReal s = conjugate_at(ind, w);
    double ref = oracle::rounded_polygon_support(tri, rho, w) + eps * std::abs(w);
    th = std::max(th, s.is_finite() ? std::abs(s.value() - ref) : 1e300);
  }
  pass = pass && th <= 1e-12;
  detail += "; f_{K_eps}* - (h_K + eps|w|) " + num(th);

  // f(z) = Re(z eps' xi0) on S_eps, S the sector |arg z| <= pi/4; xi0 = -1
  const double se = 0.1, sp = 0.2;
  const Complex xi0{-1, 0};
  PLConvexFunction fe({{sp * xi0, 0.0}}, Domain{ConvexRegion::sector({0, 0}, 0.0, oracle::PI / 4, se)});
  auto sym = symbolic_conjugate(fe);
  double sec = 0.0;
  int mismatch = 0, finite = 0;
  for (int i = 0; i < 1000; ++i) {
    Complex w{oracle::uniform(g, -5, 5), oracle::uniform(g, -5, 5)};
    Complex ws = w - sp * xi0;
    double m1 = oracle::re_pair(std::polar(1.0, oracle::PI / 4), ws), m2 = oracle::re_pair(std::polar(1.0, -oracle::PI / 4), ws);
    if (std::abs(m1) < 1e-9 || std::abs(m2) < 1e-9) continue;
    bool in_polar = m1 < 0 && m2 < 0;
    for (ExtReal s : {conjugate_at(fe, w), sym(w)}) {
      if (s.is_finite() != in_polar) ++mismatch;
      else if (in_polar) {
        ++finite;
        sec = std::max(sec, std::abs(s.value() - se * std::abs(ws)));
      }
    }
  }
  pass = pass && sec <= 1e-10 && mismatch == 0 && finite > 0;
  detail += "; f_{eps,eps'}* - h_{S_eps}(w - eps' xi0) " + num(sec) + " (" + std::to_string(mismatch) + " finiteness mismatches)";
  return {pass, detail};
}

const double quarter = oracle::PI / 4;

std::vector<Complex> meril_samples(double eps_prime) {
  // (S_inf^*)° is the open sector of arguments (3 pi / 4, 5 pi / 4)
  std::vector<Complex> ws;
  const double angles[] = {0.8, 0.9, 1.0, 1.1, 1.2};
  for (int i = 0; i < 10; ++i) ws.push_back(eps_prime * Complex(-1, 0) + (0.5 + 0.3 * i) * std::polar(1.0, angles[i % 5] * oracle::PI));
  return ws;
}

Outcome meril_convergence() {
  std::vector<oracle::Pole> pole{{{1, 0}, 1, 1.0}};
  MerilTransform t(MeromorphicDatum::simple_pole(1.0), ConvexRegion::sector({0, 0}, 0.0, quarter), 0.1, 0.2);
  double worst = 0.0;
  int violations = 0, checked = 0, unconverged = 0;
  for (Complex w : meril_samples(0.2)) {
    auto ev = t.evaluate(w);
    if (!ev.converged) ++unconverged;
    worst = std::max(worst, std::abs(ev.value - oracle::residue_sum(pole, w)));
    for (std::size_t k = 1; k < ev.steps.size(); ++k) {
      ++checked;
      double gap = std::abs(ev.steps[k].value - ev.steps[k - 1].value);
      double r_k = ev.steps[k - 1].radius;
      if (!(gap <= tail_bound(r_k, ev.c, ev.N, ev.delta, ev.s))) ++violations;
    }
  }
  return {worst <= 1e-8 && violations == 0 && unconverged == 0 && checked > 0,
          "max |truncated - residue| = " + num(worst) + " over 10 w; " + std::to_string(violations) + " of " +
              std::to_string(checked) + " gaps above tail_bound(c = " + num(t.fitted_c()) + ", N = " +
              std::to_string(t.fitted_N()) + ")"};
}

Outcome meril_robustness() {
  auto u = MeromorphicDatum::simple_pole(1.0);
  auto s = ConvexRegion::sector({0, 0}, 0.0, quarter);
  auto ws = meril_samples(0.2);
  double eps_spread = 0.0, prime_spread = 0.0;
  bool ok = true;
  std::vector<std::vector<Complex>> vals;
  for (double e : {0.05, 0.1, 0.2}) {
    MerilTransform t(u, s, e, 0.2);
    vals.emplace_back();
    for (Complex w : ws) {
      auto ev = t.evaluate(w);
      ok = ok && ev.converged;
      vals.back().push_back(ev.value);
    }
  }
  for (std::size_t i = 0; i < ws.size(); ++i)
    for (std::size_t a = 1; a < vals.size(); ++a) eps_spread = std::max(eps_spread, std::abs(vals[a][i] - vals[0][i]));
  MerilTransform full(u, s, 0.1, 0.2), half(u, s, 0.1, 0.1);
  for (Complex w : ws) {
    ok = ok && full.in_domain(w) && half.in_domain(w);
    auto a = full.evaluate(w), b = half.evaluate(w);
    ok = ok && a.converged && b.converged;
    prime_spread = std::max(prime_spread, std::abs(a.value - b.value));
  }
  return {ok && eps_spread <= 1e-8 && prime_spread <= 1e-8,
          "spread over eps {0.05, 0.1, 0.2} = " + num(eps_spread) + ", over eps' {0.2, 0.1} = " + num(prime_spread)};
}

Outcome growth_classification(const std::vector<Datum>& data) {
  GrowthOptions o;
  o.rays = 16;
  o.radii = geometric_ladder(1.0, 1e3, 13);
  const std::vector<double> ladder{0.5, 0.25, 0.1};
  int members = 0, failed_evals = 0;
  for (const auto& d : data) {
    auto v = polya_transform(d.u, d.k, default_polya_radius(d.k));
    auto reps = growth_ladder(v, [&](Complex w) { return support_function(d.k, w); }, ladder, o);
    for (const auto& r : reps) failed_evals += r.failed_evaluations;
    members += exp_class_verdict(reps).member;
  }

  // Meril output on the sector; a thin contour keeps large |w| cheap
  auto s = ConvexRegion::sector({0, 0}, 0.0, quarter);
  MerilTransform t(MeromorphicDatum::simple_pole(1.0), s, 0.05, 0.2);
  GrowthOptions om = o;
  om.rays = 8;
  om.base = 0.2 * t.xi0();
  om.angle_start = t.dual_cone().start();
  om.angle_width = t.dual_cone().width();
  auto mreps = growth_ladder(t.as_result(), [&](Complex w) { return support_function(s, w); }, ladder, om);
  bool meril_member = exp_class_verdict(mreps).member;

  // planted e^{2w}: dist(2, unit disk) = 1 > 0.5
  auto k = ConvexBody::disk({0, 0}, 1.0);
  auto planted = symbolic_result(ExpPolynomial({{1.0, 0, {2, 0}}}));
  auto prep = growth_ratio_sup(planted, [&](Complex w) { return support_function(k, w); }, 0.5, o);
  bool rejected = prep.verdict != Verdict::bounded;

  return {members == static_cast<int>(data.size()) && meril_member && rejected,
          std::to_string(members) + "/" + std::to_string(data.size()) + " polya outputs member (" +
              std::to_string(failed_evals) + " failed evaluations); meril output " + (meril_member ? "member" : "non-member") +
              "; planted e^{2w} at eps 0.5 " + to_string(prep.verdict) + ", failing ray " + std::to_string(prep.failing_ray)};
}

Outcome borel_round_trip() {
  auto g = oracle::rng(5);
  double worst = 0.0;
  for (int deg = 0; deg <= 6; ++deg) {
    std::vector<Complex> a;
    for (int n = 0; n <= deg; ++n) a.push_back({oracle::uniform(g, -1, 1), oracle::uniform(g, -1, 1)});
    auto u = borel_inverse(a);
    auto k = ConvexBody::disk({0, 0}, 0.5);
    auto v = polya_transform(u, k, default_polya_radius(k));
    for (Complex w : disk_grid(2.0, 11)) {
      Complex p = 0, wn = 1;
      for (Complex c : a) {
        p += c * wn;
        wn *= w;
      }
      worst = std::max(worst, std::abs(v(w) - Complex(0, 2 * oracle::PI) * p));
    }
  }
  return {worst <= 1e-9, "max |polya(borel_inverse(v)) - v| = " + num(worst) + " over degrees 0..6, |w| <= 2"};
}

int run_cli(const std::string& scenario, const fs::path& out) {
  std::string cmd = std::string("\"") + LAPLEG_CLI_PATH + "\" run \"" + LAPLEG_SCENARIO_DIR + "/" + scenario + "\" --out-dir \"" +
                    out.string() + "\" > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome cli_determinism() {
  fs::path base = fs::temp_directory_path() / "lapleg_acceptance";
  fs::remove_all(base);
  int a = run_cli("polya_reference.json", base / "a");
  int b = run_cli("polya_reference.json", base / "b");
  std::string x = slurp(base / "a" / "samples.csv"), y = slurp(base / "b" / "samples.csv");
  int planted = run_cli("polya_planted.json", base / "p");
  int malformed = run_cli("malformed.json", base / "m");
  bool same = !x.empty() && x == y;
  return {a == 0 && b == 0 && same && planted == 1 && malformed == 2,
          std::string("samples.csv ") + (same ? "identical" : "differs") + " (" + std::to_string(x.size()) +
              " bytes); exit codes reference " + std::to_string(a) + ", planted " + std::to_string(planted) +
              ", malformed " + std::to_string(malformed)};
}

}  // namespace

int main() {
  std::vector<Datum> data;
  int failures = 0;
  auto run = [&](int id, const char* name, double budget, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass && secs < budget;
    failures += !pass;
    std::printf("criterion %d %s: %s | %s | %.2f s (budget %.0f s)\n", id, pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs,
                budget);
    std::fflush(stdout);
  };

  data = acceptance_data();
  run(1, "polya-residue equivalence", 30, [&] { return polya_residue(data); });
  run(2, "contour independence", 10, [&] { return contour_independence(data); });
  run(3, "green/dolbeault oracle", 120, green_oracle);
  run(4, "legendre suite", 10, legendre_suite);
  run(5, "meril convergence with tail control", 60, meril_convergence);
  run(6, "meril eps and eps' robustness", 60, meril_robustness);
  run(7, "growth classification", 30, [&] { return growth_classification(data); });
  run(8, "borel round trip", 5, borel_round_trip);
  run(9, "cli determinism and exit codes", 10, cli_determinism);
  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
