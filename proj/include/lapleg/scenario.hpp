#pragma once

// Declarative scenarios: a JSON document names a set, a function, a kind of
// transform and a list of checks. run_scenario executes the checks and writes
// report.txt, samples.csv and plot.svg.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lapleg/convexgeom.hpp"
#include "lapleg/dolbeault.hpp"
#include "lapleg/growth.hpp"
#include "lapleg/legendre.hpp"
#include "lapleg/transforms.hpp"

namespace lapleg {

using ordered_json = nlohmann::ordered_json;

/// Configuration problem; maps to exit status 2.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { polya, meril, legendre, oracle };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::polya:
      return "polya";
    case ScenarioKind::meril:
      return "meril";
    case ScenarioKind::legendre:
      return "legendre";
    case ScenarioKind::oracle:
      return "oracle";
  }
  return "?";
}

struct GrowthSpec {
  std::vector<double> ladder{0.5, 0.25, 0.1};
  int rays = 16;
  double r_min = 1.0;
  double r_max = 1000.0;
  int count = 13;
  double norm_scale = 1.0;
};

struct AreaSpec {
  double epsilon = 0.3;
  int resolution = 512;
  Smoothstep order = Smoothstep::quintic;
  AreaScheme scheme = AreaScheme::automatic;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::polya;
  Domain set{ConvexBody::point({0, 0})};
  MeromorphicDatum u;
  std::vector<AffinePiece> pieces;
  bool planted = false;
  Complex planted_coef{1, 0};
  Complex planted_rate{0, 0};
  double radius = 0.0;
  std::vector<double> radius_factors{1.0, 1.5, 3.0};
  double epsilon = 0.1;
  double epsilon_prime = 0.2;
  std::vector<Complex> w_samples;
  GrowthSpec growth;
  AreaSpec area;
  int random_samples = 1000;
  std::map<std::string, double> tolerance;
  std::vector<std::string> checks;
  /// every setting after defaults, echoed into the report
  ordered_json resolved;
};

namespace detail {

using json = nlohmann::json;

inline std::string key_path(const std::string& base, const std::string& key) { return base + "." + key; }
inline std::string index_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

inline void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw ScenarioError(key_path(path, it.key()) + ": unknown key");
  }
}

inline const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ScenarioError(path + ": expected an object");
  return j;
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ScenarioError(path + ": expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw ScenarioError(path + ": expected a finite number");
  return v;
}

inline double positive(const json& j, const std::string& path) {
  double v = as_number(j, path);
  if (!(v > 0.0)) throw ScenarioError(path + ": must be > 0");
  return v;
}

inline int as_int(const json& j, const std::string& path, int lo) {
  if (!j.is_number_integer()) throw ScenarioError(path + ": expected an integer");
  long long v = j.get<long long>();
  if (v < lo || v > 1000000) throw ScenarioError(path + ": out of range");
  return static_cast<int>(v);
}

/// [x, y] or a bare real number.
inline Complex as_point(const json& j, const std::string& path) {
  if (j.is_number()) return {as_number(j, path), 0.0};
  if (!j.is_array() || j.size() != 2) throw ScenarioError(path + ": expected [x, y]");
  return {as_number(j[0], index_path(path, 0)), as_number(j[1], index_path(path, 1))};
}

inline ordered_json point_json(Complex z) { return ordered_json::array({z.real(), z.imag()}); }

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline std::string fmt(Complex z) { return "(" + fmt(z.real()) + ", " + fmt(z.imag()) + ")"; }

inline Domain parse_set(const json& j, const std::string& path, ordered_json& echo) {
  require_object(j, path);
  if (!j.contains("type")) throw ScenarioError(key_path(path, "type") + ": missing");
  if (!j["type"].is_string()) throw ScenarioError(key_path(path, "type") + ": expected a string");
  const std::string type = j["type"];
  echo["type"] = type;
  auto rounding = [&]() {
    double r = j.contains("rounding") ? as_number(j["rounding"], key_path(path, "rounding")) : 0.0;
    if (r < 0.0) throw ScenarioError(key_path(path, "rounding") + ": must be >= 0");
    echo["rounding"] = r;
    return r;
  };
  if (type == "disk") {
    allow_keys(j, path, {"type", "center", "radius"});
    Complex c = j.contains("center") ? as_point(j["center"], key_path(path, "center")) : Complex{0, 0};
    if (!j.contains("radius")) throw ScenarioError(key_path(path, "radius") + ": missing");
    double r = as_number(j["radius"], key_path(path, "radius"));
    if (r < 0.0) throw ScenarioError(key_path(path, "radius") + ": must be >= 0");
    echo["center"] = point_json(c);
    echo["radius"] = r;
    return ConvexBody::disk(c, r);
  }
  if (type == "point") {
    allow_keys(j, path, {"type", "at"});
    Complex c = j.contains("at") ? as_point(j["at"], key_path(path, "at")) : Complex{0, 0};
    echo["at"] = point_json(c);
    return ConvexBody::point(c);
  }
  if (type == "polygon") {
    allow_keys(j, path, {"type", "vertices", "rounding"});
    const std::string vp = key_path(path, "vertices");
    if (!j.contains("vertices") || !j["vertices"].is_array() || j["vertices"].empty())
      throw ScenarioError(vp + ": expected a non-empty array of points");
    std::vector<Complex> vs;
    ordered_json ve = ordered_json::array();
    for (std::size_t i = 0; i < j["vertices"].size(); ++i) {
      vs.push_back(as_point(j["vertices"][i], index_path(vp, i)));
      ve.push_back(point_json(vs.back()));
    }
    echo["vertices"] = ve;
    double r = rounding();
    return ConvexBody(vs, r);
  }
  if (type == "sector") {
    allow_keys(j, path, {"type", "apex", "axis", "half_angle", "rounding"});
    Complex apex = j.contains("apex") ? as_point(j["apex"], key_path(path, "apex")) : Complex{0, 0};
    double axis = j.contains("axis") ? as_number(j["axis"], key_path(path, "axis")) : 0.0;
    if (!j.contains("half_angle")) throw ScenarioError(key_path(path, "half_angle") + ": missing");
    double ha = as_number(j["half_angle"], key_path(path, "half_angle"));
    if (!(ha > 0.0 && ha <= pi / 2)) throw ScenarioError(key_path(path, "half_angle") + ": must lie in (0, pi/2]");
    echo["apex"] = point_json(apex);
    echo["axis"] = axis;
    echo["half_angle"] = ha;
    double r = rounding();
    return ConvexRegion::sector(apex, axis, ha, r);
  }
  if (type == "halfplanes") {
    allow_keys(j, path, {"type", "halfplanes", "rounding"});
    const std::string hp = key_path(path, "halfplanes");
    if (!j.contains("halfplanes") || !j["halfplanes"].is_array()) throw ScenarioError(hp + ": expected an array");
    std::vector<HalfPlane> hs;
    ordered_json he = ordered_json::array();
    for (std::size_t i = 0; i < j["halfplanes"].size(); ++i) {
      const auto& h = j["halfplanes"][i];
      const std::string p = index_path(hp, i);
      require_object(h, p);
      allow_keys(h, p, {"normal", "offset"});
      if (!h.contains("normal")) throw ScenarioError(key_path(p, "normal") + ": missing");
      Complex n = as_point(h["normal"], key_path(p, "normal"));
      if (n == Complex{0, 0}) throw ScenarioError(key_path(p, "normal") + ": must be nonzero");
      double off = h.contains("offset") ? as_number(h["offset"], key_path(p, "offset")) : 0.0;
      hs.push_back({n, off});
      he.push_back({{"normal", point_json(n)}, {"offset", off}});
    }
    echo["halfplanes"] = he;
    double r = rounding();
    try {
      return ConvexRegion(hs, r);
    } catch (const std::exception& e) {
      throw ScenarioError(path + ": " + e.what());
    }
  }
  throw ScenarioError(key_path(path, "type") + ": unknown set type '" + type + "'");
}

inline MeromorphicDatum parse_function(const json& j, const std::string& path, ordered_json& echo) {
  require_object(j, path);
  allow_keys(j, path, {"poles", "entire"});
  std::vector<PoleTerm> poles;
  std::vector<EntireTerm> entire;
  echo["poles"] = ordered_json::array();
  if (j.contains("poles")) {
    const std::string pp = key_path(path, "poles");
    if (!j["poles"].is_array()) throw ScenarioError(pp + ": expected an array");
    for (std::size_t i = 0; i < j["poles"].size(); ++i) {
      const auto& t = j["poles"][i];
      const std::string p = index_path(pp, i);
      require_object(t, p);
      allow_keys(t, p, {"at", "order", "coef"});
      if (!t.contains("at")) throw ScenarioError(key_path(p, "at") + ": missing");
      PoleTerm term;
      term.pole = as_point(t["at"], key_path(p, "at"));
      term.order = t.contains("order") ? as_int(t["order"], key_path(p, "order"), 1) : 1;
      term.coef = t.contains("coef") ? as_point(t["coef"], key_path(p, "coef")) : Complex{1, 0};
      poles.push_back(term);
      echo["poles"].push_back({{"at", point_json(term.pole)}, {"order", term.order}, {"coef", point_json(term.coef)}});
    }
  }
  if (j.contains("entire")) {
    const std::string ep = key_path(path, "entire");
    if (!j["entire"].is_array()) throw ScenarioError(ep + ": expected an array");
    echo["entire"] = ordered_json::array();
    for (std::size_t i = 0; i < j["entire"].size(); ++i) {
      const auto& t = j["entire"][i];
      const std::string p = index_path(ep, i);
      require_object(t, p);
      allow_keys(t, p, {"coef", "power", "rate"});
      EntireTerm term;
      term.coef = t.contains("coef") ? as_point(t["coef"], key_path(p, "coef")) : Complex{1, 0};
      term.power = t.contains("power") ? as_int(t["power"], key_path(p, "power"), 0) : 0;
      term.rate = t.contains("rate") ? as_point(t["rate"], key_path(p, "rate")) : Complex{0, 0};
      entire.push_back(term);
      echo["entire"].push_back({{"coef", point_json(term.coef)}, {"power", term.power}, {"rate", point_json(term.rate)}});
    }
  }
  return MeromorphicDatum(std::move(poles), std::move(entire));
}

inline const std::vector<std::string>& known_checks(ScenarioKind k) {
  static const std::vector<std::string> polya{"oracle", "contour-independence", "growth"};
  static const std::vector<std::string> meril{"oracle", "tail", "epsilon-robustness", "growth"};
  static const std::vector<std::string> legendre{"biconjugate", "fenchel-young", "closed-form"};
  static const std::vector<std::string> oracle{"self-test", "green", "refinement"};
  switch (k) {
    case ScenarioKind::polya:
      return polya;
    case ScenarioKind::meril:
      return meril;
    case ScenarioKind::legendre:
      return legendre;
    case ScenarioKind::oracle:
      return oracle;
  }
  return polya;
}

inline std::map<std::string, double> default_tolerances(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::polya:
      return {{"oracle", 1e-9}, {"contour-independence", 1e-10}};
    case ScenarioKind::meril:
      return {{"oracle", 1e-8}, {"epsilon-robustness", 1e-8}};
    case ScenarioKind::legendre:
      return {{"biconjugate", 1e-9}, {"fenchel-young", 1e-10}, {"closed-form", 1e-10}};
    case ScenarioKind::oracle:
      return {{"green", 1e-4}};
  }
  return {};
}

inline std::string pole_text(const PoleTerm& t) { return "pole " + fmt(t.pole); }

}  // namespace detail

namespace detail {

inline Scenario parse_document(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("$: malformed JSON: ") + e.what());
  }
  detail::require_object(doc, "$");
  detail::allow_keys(doc, "$",
                     {"kind", "set", "function", "pieces", "planted", "radius", "radius_factors", "epsilon",
                      "epsilon_prime", "w_grid", "w_samples", "growth", "area", "random_samples", "tolerances",
                      "checks", "description"});
  Scenario s;
  ordered_json& out = s.resolved;

  if (!doc.contains("kind") || !doc["kind"].is_string()) throw ScenarioError("$.kind: expected one of polya, meril, legendre, oracle");
  const std::string kind = doc["kind"];
  if (kind == "polya") s.kind = ScenarioKind::polya;
  else if (kind == "meril") s.kind = ScenarioKind::meril;
  else if (kind == "legendre") s.kind = ScenarioKind::legendre;
  else if (kind == "oracle") s.kind = ScenarioKind::oracle;
  else throw ScenarioError("$.kind: unknown kind '" + kind + "'");
  out["kind"] = kind;

  if (!doc.contains("set")) throw ScenarioError("$.set: missing");
  ordered_json set_echo;
  s.set = detail::parse_set(doc["set"], "$.set", set_echo);
  out["set"] = set_echo;
  const bool body = std::holds_alternative<ConvexBody>(s.set);
  if ((s.kind == ScenarioKind::polya || s.kind == ScenarioKind::oracle) && !body)
    throw ScenarioError("$.set: a " + kind + " scenario needs a compact set (disk, point or polygon)");
  if (s.kind == ScenarioKind::meril) {
    if (body) throw ScenarioError("$.set: a meril scenario needs an unbounded region (sector or halfplanes)");
    const auto& r = std::get<ConvexRegion>(s.set);
    if (r.contains_line()) throw ScenarioError("$.set: the region contains a line");
    if (r.bounded()) throw ScenarioError("$.set: the region is bounded; use a polya scenario");
  }

  ordered_json fn;
  if (doc.contains("function")) s.u = detail::parse_function(doc["function"], "$.function", fn);
  else fn["poles"] = ordered_json::array();
  if (s.kind != ScenarioKind::legendre) out["function"] = fn;

  if (doc.contains("planted")) {
    if (s.kind != ScenarioKind::polya) throw ScenarioError("$.planted: only polya scenarios take a planted term");
    const auto& p = detail::require_object(doc["planted"], "$.planted");
    detail::allow_keys(p, "$.planted", {"coef", "rate"});
    if (!p.contains("rate")) throw ScenarioError("$.planted.rate: missing");
    s.planted = true;
    s.planted_rate = detail::as_point(p["rate"], "$.planted.rate");
    s.planted_coef = p.contains("coef") ? detail::as_point(p["coef"], "$.planted.coef") : Complex{1, 0};
    out["planted"] = {{"coef", detail::point_json(s.planted_coef)}, {"rate", detail::point_json(s.planted_rate)}};
  }

  if (s.kind == ScenarioKind::legendre) {
    ordered_json pe = ordered_json::array();
    if (doc.contains("pieces")) {
      if (!doc["pieces"].is_array()) throw ScenarioError("$.pieces: expected an array");
      for (std::size_t i = 0; i < doc["pieces"].size(); ++i) {
        const auto& pj = doc["pieces"][i];
        const std::string p = detail::index_path("$.pieces", i);
        detail::require_object(pj, p);
        detail::allow_keys(pj, p, {"gradient", "offset"});
        if (!pj.contains("gradient")) throw ScenarioError(p + ".gradient: missing");
        AffinePiece a{detail::as_point(pj["gradient"], p + ".gradient"),
                      pj.contains("offset") ? detail::as_number(pj["offset"], p + ".offset") : 0.0};
        s.pieces.push_back(a);
        pe.push_back({{"gradient", detail::point_json(a.gradient)}, {"offset", a.offset}});
      }
    }
    out["pieces"] = pe;
  } else if (doc.contains("pieces")) {
    throw ScenarioError("$.pieces: only legendre scenarios take affine pieces");
  }

  // poles must sit in the interior of the set
  for (const auto& t : s.u.poles())
    if (!(signed_distance(s.set, t.pole) < 0.0))
      throw ScenarioError("$.function: " + detail::pole_text(t) + " is not in the interior of the set");

  if (doc.contains("epsilon")) s.epsilon = detail::positive(doc["epsilon"], "$.epsilon");
  if (doc.contains("epsilon_prime")) s.epsilon_prime = detail::positive(doc["epsilon_prime"], "$.epsilon_prime");
  if (s.kind == ScenarioKind::meril) {
    out["epsilon"] = s.epsilon;
    out["epsilon_prime"] = s.epsilon_prime;
  }

  if (s.kind == ScenarioKind::polya) {
    const ConvexBody& k = std::get<ConvexBody>(s.set);
    s.radius = doc.contains("radius") ? detail::positive(doc["radius"], "$.radius") : default_polya_radius(k);
    if (k.max_modulus() > 0.9 * s.radius)
      throw ScenarioError("$.radius: circle of radius " + detail::fmt(s.radius) + " does not clear the set by 10%");
    out["radius"] = s.radius;
    if (doc.contains("radius_factors")) {
      const auto& rf = doc["radius_factors"];
      if (!rf.is_array() || rf.size() < 2) throw ScenarioError("$.radius_factors: expected at least two numbers");
      s.radius_factors.clear();
      for (std::size_t i = 0; i < rf.size(); ++i) {
        double f = detail::positive(rf[i], detail::index_path("$.radius_factors", i));
        if (k.max_modulus() > 0.9 * f * s.radius)
          throw ScenarioError(detail::index_path("$.radius_factors", i) + ": circle does not clear the set by 10%");
        s.radius_factors.push_back(f);
      }
    }
    out["radius_factors"] = s.radius_factors;
  }

  // w sample points
  if (s.kind != ScenarioKind::legendre) {
    if (doc.contains("w_samples")) {
      const auto& ws = doc["w_samples"];
      if (!ws.is_array() || ws.empty()) throw ScenarioError("$.w_samples: expected a non-empty array of points");
      for (std::size_t i = 0; i < ws.size(); ++i) s.w_samples.push_back(detail::as_point(ws[i], detail::index_path("$.w_samples", i)));
    } else if (s.kind == ScenarioKind::meril) {
      // rays inside the shifted dual cone
      Cone dual = polar_cone(asymptotic_cone(std::get<ConvexRegion>(s.set)));
      Complex base = s.epsilon_prime * bisector(dual);
      for (double f : {0.25, 0.5, 0.75})
        for (double m : {0.5, 1.5, 3.0}) s.w_samples.push_back(base + m * unit(dual.start() + f * dual.width()));
    } else {
      double extent = 2.0;
      int n = 5;
      if (doc.contains("w_grid")) {
        const auto& g = detail::require_object(doc["w_grid"], "$.w_grid");
        detail::allow_keys(g, "$.w_grid", {"extent", "points"});
        if (g.contains("extent")) extent = detail::positive(g["extent"], "$.w_grid.extent");
        if (g.contains("points")) n = detail::as_int(g["points"], "$.w_grid.points", 2);
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          s.w_samples.push_back({-extent + 2 * extent * i / (n - 1), -extent + 2 * extent * j / (n - 1)});
    }
    if (s.kind == ScenarioKind::meril) {
      MerilTransform probe(s.u, std::get<ConvexRegion>(s.set), s.epsilon, s.epsilon_prime);
      for (Complex w : s.w_samples)
        if (!probe.in_domain(w)) throw ScenarioError("$.w_samples: w = " + detail::fmt(w) + " is outside the shifted dual cone");
    }
    ordered_json we = ordered_json::array();
    for (Complex w : s.w_samples) we.push_back(detail::point_json(w));
    out["w_samples"] = we;
  }

  if (doc.contains("growth")) {
    const auto& g = detail::require_object(doc["growth"], "$.growth");
    detail::allow_keys(g, "$.growth", {"epsilons", "rays", "r_min", "r_max", "radii", "norm_scale"});
    if (g.contains("epsilons")) {
      if (!g["epsilons"].is_array() || g["epsilons"].empty()) throw ScenarioError("$.growth.epsilons: expected a non-empty array");
      s.growth.ladder.clear();
      for (std::size_t i = 0; i < g["epsilons"].size(); ++i)
        s.growth.ladder.push_back(detail::positive(g["epsilons"][i], detail::index_path("$.growth.epsilons", i)));
    }
    if (g.contains("rays")) s.growth.rays = detail::as_int(g["rays"], "$.growth.rays", 1);
    if (g.contains("r_min")) s.growth.r_min = detail::positive(g["r_min"], "$.growth.r_min");
    if (g.contains("r_max")) s.growth.r_max = detail::positive(g["r_max"], "$.growth.r_max");
    if (g.contains("radii")) s.growth.count = detail::as_int(g["radii"], "$.growth.radii", 2);
    if (g.contains("norm_scale")) s.growth.norm_scale = detail::positive(g["norm_scale"], "$.growth.norm_scale");
    if (!(s.growth.r_max > s.growth.r_min)) throw ScenarioError("$.growth.r_max: must exceed r_min");
  }

  if (s.kind == ScenarioKind::oracle) {
    if (doc.contains("area")) {
      const auto& a = detail::require_object(doc["area"], "$.area");
      detail::allow_keys(a, "$.area", {"epsilon", "resolution", "smoothstep", "scheme"});
      if (a.contains("epsilon")) s.area.epsilon = detail::positive(a["epsilon"], "$.area.epsilon");
      if (a.contains("resolution")) {
        s.area.resolution = detail::as_int(a["resolution"], "$.area.resolution", 4);
        if (s.area.resolution % 2 != 0) throw ScenarioError("$.area.resolution: must be even");
      }
      if (a.contains("smoothstep")) {
        if (a["smoothstep"] == "cubic") s.area.order = Smoothstep::cubic;
        else if (a["smoothstep"] == "quintic") s.area.order = Smoothstep::quintic;
        else throw ScenarioError("$.area.smoothstep: expected cubic or quintic");
      }
      if (a.contains("scheme")) {
        if (a["scheme"] == "automatic") s.area.scheme = AreaScheme::automatic;
        else if (a["scheme"] == "level_set") s.area.scheme = AreaScheme::level_set;
        else if (a["scheme"] == "cartesian") s.area.scheme = AreaScheme::cartesian;
        else throw ScenarioError("$.area.scheme: expected automatic, level_set or cartesian");
      }
    }
    const ConvexBody inner = thicken(std::get<ConvexBody>(s.set), s.area.epsilon / 2);
    for (const auto& t : s.u.poles())
      if (!(signed_distance(inner, t.pole) < 0.0))
        throw ScenarioError("$.function: " + detail::pole_text(t) + " is not inside K_{eps/2}");
    static const char* schemes[] = {"automatic", "level_set", "cartesian"};
    out["area"] = {{"epsilon", s.area.epsilon},
                   {"resolution", s.area.resolution},
                   {"smoothstep", s.area.order == Smoothstep::cubic ? "cubic" : "quintic"},
                   {"scheme", schemes[static_cast<int>(s.area.scheme)]}};
  } else if (doc.contains("area")) {
    throw ScenarioError("$.area: only oracle scenarios take area settings");
  }

  if (s.kind == ScenarioKind::legendre) {
    if (doc.contains("random_samples")) s.random_samples = detail::as_int(doc["random_samples"], "$.random_samples", 1);
    out["random_samples"] = s.random_samples;
  }

  s.tolerance = detail::default_tolerances(s.kind);
  if (doc.contains("tolerances")) {
    const auto& t = detail::require_object(doc["tolerances"], "$.tolerances");
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (!s.tolerance.count(it.key())) throw ScenarioError("$.tolerances." + it.key() + ": no tolerance of that name");
      s.tolerance[it.key()] = detail::positive(it.value(), "$.tolerances." + it.key());
    }
  }
  ordered_json te;
  for (const auto& [k, v] : s.tolerance) te[k] = v;
  out["tolerances"] = te;

  const auto& known = detail::known_checks(s.kind);
  if (doc.contains("checks")) {
    const auto& c = doc["checks"];
    if (!c.is_array() || c.empty()) throw ScenarioError("$.checks: expected a non-empty array of names");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const std::string p = detail::index_path("$.checks", i);
      if (!c[i].is_string()) throw ScenarioError(p + ": expected a string");
      std::string name = c[i];
      if (std::find(known.begin(), known.end(), name) == known.end())
        throw ScenarioError(p + ": unknown check '" + name + "' for kind " + kind);
      if (!seen.insert(name).second) throw ScenarioError(p + ": duplicate check '" + name + "'");
      s.checks.push_back(name);
    }
  } else {
    s.checks = known;
  }
  out["checks"] = s.checks;

  bool uses_growth = std::find(s.checks.begin(), s.checks.end(), "growth") != s.checks.end();
  if (uses_growth)
    out["growth"] = {{"epsilons", s.growth.ladder}, {"rays", s.growth.rays},     {"r_min", s.growth.r_min},
                     {"r_max", s.growth.r_max},     {"radii", s.growth.count},   {"norm_scale", s.growth.norm_scale}};

  if (s.kind == ScenarioKind::legendre && std::find(s.checks.begin(), s.checks.end(), "biconjugate") != s.checks.end() &&
      !detail::is_polygonal_bounded(s.set))
    throw ScenarioError("$.set: the biconjugate check needs a bounded polygonal domain (no rounding)");
  return s;
}

}  // namespace detail

/// Parses and validates a scenario document. Throws ScenarioError with a JSON
/// path for schema problems and with the offending value for semantic ones.
inline Scenario parse_scenario(const std::string& text) {
  try {
    return detail::parse_document(text);
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("$: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

struct RunOptions {
  std::filesystem::path out_dir = ".";
  double tolerance_scale = 1.0;
  std::uint64_t seed = 0;
  std::string source = "<scenario>";
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunOutcome {
  std::vector<CheckResult> checks;
  std::vector<GrowthSample> samples;  ///< growth samples at the first ladder epsilon
  std::vector<double> radii;
  int exit_code = 0;
};

namespace detail {

inline ScaledValue add_scaled(ScaledValue a, ScaledValue b) {
  if (a.mantissa == Complex{0, 0}) return b;
  if (b.mantissa == Complex{0, 0}) return a;
  Complex shift = a.exponent.real() >= b.exponent.real() ? a.exponent : b.exponent;
  return {a.mantissa * std::exp(a.exponent - shift) + b.mantissa * std::exp(b.exponent - shift), shift};
}

inline std::string growth_detail(const std::vector<GrowthReport>& reps, const ClassVerdict& cv) {
  std::string d = cv.member ? "member" : "non-member";
  for (const auto& r : reps) {
    d += "; eps=" + fmt(r.epsilon) + " " + to_string(r.verdict) + " (sup " + fmt(r.sup()) + ", slope " + fmt(r.slope);
    if (r.verdict != Verdict::bounded && r.failing_ray >= 0) d += ", failing ray " + std::to_string(r.failing_ray);
    if (r.failed_evaluations > 0) d += ", " + std::to_string(r.failed_evaluations) + " failed evaluations";
    d += ")";
  }
  return d;
}

inline CheckResult growth_check(RunOutcome& out, const TransformResult& v, const SupportEvaluator& h, const GrowthSpec& g,
                                GrowthOptions opt) {
  opt.rays = g.rays;
  opt.radii = geometric_ladder(g.r_min, g.r_max, g.count);
  opt.norm_scale = g.norm_scale;
  auto reps = growth_ladder(v, h, g.ladder, opt);
  auto cv = exp_class_verdict(reps);
  out.samples = reps.front().samples;
  out.radii = reps.front().radii;
  return {"growth", cv.member, growth_detail(reps, cv)};
}

inline void run_polya(const Scenario& s, double scale, RunOutcome& out) {
  const ConvexBody& k = std::get<ConvexBody>(s.set);
  const bool has_poles = !s.u.poles().empty();
  for (const auto& name : s.checks) {
    if (name == "oracle") {
      auto v = polya_transform(s.u, k, s.radius);
      double tol = s.tolerance.at("oracle") * scale, worst = 0.0;
      for (Complex w : s.w_samples) {
        Complex ref = residue_oracle(s.u, w);
        worst = std::max(worst, std::abs(v(w) - ref) / (1.0 + std::abs(ref)));
      }
      out.checks.push_back({name, worst <= tol,
                            "max |contour - residue| / (1 + |residue|) = " + fmt(worst) + " (tol " + fmt(tol) + ") over " +
                                std::to_string(s.w_samples.size()) + " points"});
    } else if (name == "contour-independence") {
      std::vector<TransformResult> vs;
      for (double f : s.radius_factors) vs.push_back(polya_transform(s.u, k, f * s.radius));
      double tol = s.tolerance.at("contour-independence") * scale, worst = 0.0;
      bool pass = true;
      for (Complex w : s.w_samples) {
        std::vector<Evaluation> ev;
        for (const auto& v : vs) ev.push_back(v.evaluator(w));
        for (std::size_t i = 1; i < ev.size(); ++i) {
          double d = std::abs(ev[i].value - ev[0].value);
          worst = std::max(worst, d);
          if (!(d <= tol + ev[i].error + ev[0].error)) pass = false;
        }
      }
      std::string radii;
      for (double f : s.radius_factors) radii += (radii.empty() ? "" : ", ") + fmt(f * s.radius);
      out.checks.push_back({name, pass, "max spread " + fmt(worst) + " across radii {" + radii + "} (tol " + fmt(tol) + " + error estimates)"});
    } else if (name == "growth") {
      TransformResult v;
      if (has_poles) v = polya_transform(s.u, k, s.radius);
      else v = symbolic_result(ExpPolynomial{});
      if (s.planted) {
        ExpPolynomial planted({{s.planted_coef, 0, s.planted_rate}});
        auto base = v;
        v.evaluator = [base, planted](Complex w) {
          auto e = base.evaluator(w);
          return Evaluation{e.value + planted(w), e.error};
        };
        v.scaled_evaluator = [base, planted](Complex w) { return add_scaled(base.scaled_evaluator(w), planted.scaled(w)); };
        v.symbolic.reset();
      }
      out.checks.push_back(growth_check(out, v, [k](Complex w) { return support_function(k, w); }, s.growth, {}));
    }
  }
}

inline void run_meril(const Scenario& s, double scale, RunOutcome& out) {
  const ConvexRegion& region = std::get<ConvexRegion>(s.set);
  MerilTransform t(s.u, region, s.epsilon, s.epsilon_prime);
  std::vector<MerilEvaluation> evs;
  for (Complex w : s.w_samples) evs.push_back(t.evaluate(w));
  for (const auto& name : s.checks) {
    if (name == "oracle") {
      double tol = s.tolerance.at("oracle") * scale, worst = 0.0;
      int unconverged = 0;
      for (std::size_t i = 0; i < evs.size(); ++i) {
        if (!evs[i].converged) ++unconverged;
        worst = std::max(worst, std::abs(evs[i].value - residue_oracle(s.u, s.w_samples[i])));
      }
      out.checks.push_back({name, unconverged == 0 && worst <= tol,
                            "max |truncated - residue| = " + fmt(worst) + " (tol " + fmt(tol) + "), " +
                                std::to_string(unconverged) + " unconverged of " + std::to_string(evs.size())});
    } else if (name == "tail") {
      int violations = 0, steps = 0;
      for (const auto& ev : evs)
        for (std::size_t k = 1; k < ev.steps.size(); ++k) {
          ++steps;
          if (!ev.steps[k].dominated) ++violations;
        }
      out.checks.push_back({name, violations == 0,
                            std::to_string(violations) + " of " + std::to_string(steps) +
                                " truncation gaps exceed the tail bound (c = " + fmt(t.fitted_c()) +
                                ", N = " + std::to_string(t.fitted_N()) + ")"});
    } else if (name == "epsilon-robustness") {
      double tol = s.tolerance.at("epsilon-robustness") * scale, worst = 0.0;
      MerilTransform other_eps(s.u, region, s.epsilon / 2, s.epsilon_prime);
      MerilTransform half_prime(s.u, region, s.epsilon, s.epsilon_prime / 2);
      bool ok = true;
      for (std::size_t i = 0; i < evs.size(); ++i) {
        Complex w = s.w_samples[i];
        auto a = other_eps.evaluate(w);
        ok = ok && a.converged;
        worst = std::max(worst, std::abs(a.value - evs[i].value));
        // the eps'/2 domain contains the eps' domain
        auto b = half_prime.evaluate(w);
        ok = ok && b.converged;
        worst = std::max(worst, std::abs(b.value - evs[i].value));
      }
      out.checks.push_back({name, ok && worst <= tol,
                            "max spread under eps -> eps/2 and eps' -> eps'/2 = " + fmt(worst) + " (tol " + fmt(tol) + ")"});
    } else if (name == "growth") {
      GrowthOptions o;
      o.base = s.epsilon_prime * t.xi0();
      o.angle_start = t.dual_cone().start();
      o.angle_width = t.dual_cone().width();
      out.checks.push_back(growth_check(out, t.as_result(), [region](Complex w) { return support_function(region, w); },
                                        s.growth, o));
    }
  }
}

inline void run_legendre(const Scenario& s, double scale, std::uint64_t seed, RunOutcome& out) {
  PLConvexFunction f(s.pieces, s.set);
  std::mt19937_64 gen(seed);
  const double box = 2.0 * (std::holds_alternative<ConvexBody>(s.set) ? std::get<ConvexBody>(s.set).max_modulus()
                                                                       : std::get<ConvexRegion>(s.set).max_vertex_modulus()) +
                     2.0;
  std::uniform_real_distribution<double> coord(-box, box), wcoord(-4.0, 4.0);
  auto interior_points = [&](int count) {
    std::vector<Complex> pts;
    for (int tries = 0; static_cast<int>(pts.size()) < count && tries < 1000 * count; ++tries) {
      Complex z{coord(gen), coord(gen)};
      if (signed_distance(s.set, z) < -1e-9) pts.push_back(z);
    }
    return pts;
  };
  for (const auto& name : s.checks) {
    if (name == "biconjugate") {
      double tol = s.tolerance.at("biconjugate") * scale, worst = 0.0;
      PLConvexFunction g = conjugate_function(f);
      auto pts = interior_points(std::min(s.random_samples, 100));
      for (Complex z : pts) {
        ExtReal ff = conjugate_at(g, z);
        worst = std::max(worst, ff.is_finite() ? std::abs(ff.value() - f.finite_part(z)) : INFINITY);
      }
      out.checks.push_back({name, !pts.empty() && worst <= tol,
                            "max |f** - f| = " + fmt(worst) + " (tol " + fmt(tol) + ") at " + std::to_string(pts.size()) +
                                " interior points"});
    } else if (name == "fenchel-young") {
      double tol = s.tolerance.at("fenchel-young") * scale, worst = -INFINITY;
      auto pts = interior_points(s.random_samples);
      for (Complex z : pts) {
        Complex w{wcoord(gen), wcoord(gen)};
        ExtReal fs = conjugate_at(f, w);
        if (fs.is_infinite()) continue;
        worst = std::max(worst, pairing(z, w) - f.finite_part(z) - fs.value());
      }
      out.checks.push_back({name, worst <= tol,
                            "max Re<z,w> - f(z) - f*(w) = " + fmt(worst) + " (tol " + fmt(tol) + ") over " +
                                std::to_string(pts.size()) + " pairs"});
    } else if (name == "closed-form") {
      double tol = s.tolerance.at("closed-form") * scale, worst = 0.0;
      try {
        auto d = symbolic_conjugate(f);
        int mismatched_domain = 0;
        for (int i = 0; i < s.random_samples; ++i) {
          Complex w{wcoord(gen), wcoord(gen)};
          ExtReal a = d(w), b = conjugate_at(f, w);
          if (a.is_infinite() != b.is_infinite()) ++mismatched_domain;
          else if (a.is_finite()) worst = std::max(worst, std::abs(a.value() - b.value()));
        }
        out.checks.push_back({name, mismatched_domain == 0 && worst <= tol,
                              d.describe() + "; max |closed form - conjugate_at| = " + fmt(worst) + " (tol " + fmt(tol) +
                                  "), " + std::to_string(mismatched_domain) + " domain mismatches"});
      } catch (const NoClosedForm& e) {
        out.checks.push_back({name, false, e.what()});
      }
    }
  }
}

inline void run_oracle(const Scenario& s, double scale, RunOutcome& out) {
  const ConvexBody& k = std::get<ConvexBody>(s.set);
  CutoffProfile p(k, s.area.epsilon, s.area.order);
  AreaOptions opt;
  opt.resolution = s.area.resolution;
  opt.scheme = s.area.scheme;
  auto contour = polya_transform(s.u, k, default_polya_radius(thicken(k, s.area.epsilon)));
  std::vector<Evaluation> refs;
  for (Complex w : s.w_samples) refs.push_back(contour.evaluator(w));
  for (const auto& name : s.checks) {
    if (name == "self-test") {
      out.checks.push_back({name, orientation_self_test(), "u = 1/z on the closed unit disk, eps = 1, w = 0 gives 2 pi i"});
    } else if (name == "green") {
      AreaLaplace area(s.u, p, opt);
      double tol = s.tolerance.at("green") * scale, worst = 0.0, worst_err = 0.0;
      bool pass = true;
      for (std::size_t i = 0; i < s.w_samples.size(); ++i) {
        auto a = area(s.w_samples[i]);
        double d = std::abs(a.value - refs[i].value);
        worst = std::max(worst, d);
        worst_err = std::max(worst_err, a.error + refs[i].error);
        if (!(d <= tol && d <= a.error + refs[i].error + 1e-12)) pass = false;
      }
      out.checks.push_back({name, pass,
                            "max |area - contour| = " + fmt(worst) + ", max combined error " + fmt(worst_err) + " (tol " +
                                fmt(tol) + ") at resolution " + std::to_string(opt.resolution)});
    } else if (name == "refinement") {
      AreaOptions fine = opt;
      fine.resolution = 2 * opt.resolution;
      AreaLaplace a1(s.u, p, opt), a2(s.u, p, fine);
      double d1 = 0.0, d2 = 0.0, mag = 0.0;
      for (std::size_t i = 0; i < s.w_samples.size(); ++i) {
        d1 = std::max(d1, std::abs(a1(s.w_samples[i]).value - refs[i].value));
        d2 = std::max(d2, std::abs(a2(s.w_samples[i]).value - refs[i].value));
        mag = std::max(mag, std::abs(refs[i].value));
      }
      // both discrepancies at roundoff level also counts as converged
      const double roundoff = 1e-11 * (1.0 + mag);
      bool pass = d2 < d1 || std::max(d1, d2) <= roundoff;
      out.checks.push_back({name, pass,
                            "max discrepancy " + fmt(d1) + " at " + std::to_string(opt.resolution) + ", " + fmt(d2) + " at " +
                                std::to_string(fine.resolution)});
    }
  }
}

inline std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string samples_csv(const std::vector<GrowthSample>& samples) {
  std::string out = "w_re,w_im,v_re,v_im,h,ratio,ray_index,radius\r\n";
  for (const auto& g : samples) {
    out += csv_number(g.w.real()) + "," + csv_number(g.w.imag()) + "," + csv_number(g.v.real()) + "," +
           csv_number(g.v.imag()) + "," + csv_number(g.h) + "," + csv_number(g.ratio) + "," + std::to_string(g.ray) + "," +
           csv_number(g.radius) + "\r\n";
  }
  return out;
}

/// log10 ratio against log10 radius, one polyline per ray.
inline std::string plot_svg(const std::vector<GrowthSample>& samples, const std::string& title) {
  const double W = 640, H = 400, M = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& g : samples) {
    if (!(g.ratio > 0.0) || !std::isfinite(g.ratio)) continue;
    x0 = std::min(x0, std::log10(g.radius));
    x1 = std::max(x1, std::log10(g.radius));
    y0 = std::min(y0, std::log10(g.ratio));
    y1 = std::max(y1, std::log10(g.ratio));
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << M << "\" y=\"20\" font-size=\"13\">" << title << "</text>\n";
  os << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n";
  if (std::isfinite(x0)) {
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double x) { return M + (x - x0) / (x1 - x0) * (W - 2 * M); };
    auto py = [&](double y) { return H - M - (y - y0) / (y1 - y0) * (H - 2 * M); };
    os << "<text x=\"" << M << "\" y=\"" << H - 15 << "\" font-size=\"11\">log10 radius " << fmt(x0) << " .. " << fmt(x1)
       << "</text>\n";
    os << "<text x=\"5\" y=\"" << M - 8 << "\" font-size=\"11\">log10 ratio " << fmt(y0) << " .. " << fmt(y1) << "</text>\n";
    int ray = -1;
    std::string pts;
    auto flush = [&]() {
      if (!pts.empty())
        os << "<polyline fill=\"none\" stroke=\"hsl(" << (ray * 47) % 360 << ",70%,40%)\" points=\"" << pts << "\"/>\n";
      pts.clear();
    };
    for (const auto& g : samples) {
      if (g.ray != ray) {
        flush();
        ray = g.ray;
      }
      if (!(g.ratio > 0.0) || !std::isfinite(g.ratio)) continue;
      pts += fmt(px(std::log10(g.radius))) + "," + fmt(py(std::log10(g.ratio))) + " ";
    }
    flush();
  }
  os << "</svg>\n";
  return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

}  // namespace detail

/// Runs every listed check and writes the artifacts. exit_code is 0 when all
/// checks pass, 1 otherwise.
inline RunOutcome run_scenario(const Scenario& s, const RunOptions& opt = {}) {
  RunOutcome out;
  const double scale = opt.tolerance_scale;
  auto run_all = [&]() {
    switch (s.kind) {
      case ScenarioKind::polya:
        detail::run_polya(s, scale, out);
        break;
      case ScenarioKind::meril:
        detail::run_meril(s, scale, out);
        break;
      case ScenarioKind::legendre:
        detail::run_legendre(s, scale, opt.seed, out);
        break;
      case ScenarioKind::oracle:
        detail::run_oracle(s, scale, out);
        break;
    }
  };
  std::string failure;
  try {
    run_all();
  } catch (const std::exception& e) {
    failure = e.what();
  }
  // checks that never ran still get a line
  for (const auto& name : s.checks) {
    bool seen = false;
    for (const auto& c : out.checks) seen = seen || c.name == name;
    if (!seen) out.checks.push_back({name, false, failure.empty() ? "not run" : "aborted: " + failure});
  }
  std::stable_sort(out.checks.begin(), out.checks.end(), [&](const CheckResult& a, const CheckResult& b) {
    auto ia = std::find(s.checks.begin(), s.checks.end(), a.name), ib = std::find(s.checks.begin(), s.checks.end(), b.name);
    return ia < ib;
  });

  int passed = 0;
  for (const auto& c : out.checks) passed += c.pass;
  out.exit_code = passed == static_cast<int>(out.checks.size()) ? 0 : 1;

  std::ostringstream rep;
  rep << "scenario: " << opt.source << "\n";
  rep << "kind: " << to_string(s.kind) << "\n";
  rep << "seed: " << opt.seed << "\n";
  rep << "tolerance-scale: " << detail::fmt(scale) << "\n";
  rep << "settings:\n" << s.resolved.dump(2) << "\n";
  rep << "checks:\n";
  for (const auto& c : out.checks) rep << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
  rep << "result: " << (out.exit_code == 0 ? "PASS" : "FAIL") << " (" << passed << "/" << out.checks.size() << ")\n";

  std::filesystem::create_directories(opt.out_dir);
  detail::write_file(opt.out_dir / "report.txt", rep.str());
  detail::write_file(opt.out_dir / "samples.csv", detail::samples_csv(out.samples));
  if (!out.samples.empty())
    detail::write_file(opt.out_dir / "plot.svg",
                       detail::plot_svg(out.samples, std::string("growth ratio per ray, eps = ") +
                                                         detail::fmt(s.growth.ladder.front())));
  return out;
}

}  // namespace lapleg
