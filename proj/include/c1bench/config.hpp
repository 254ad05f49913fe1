#pragma once

// Experiment configuration: JSON documents describing one job or a list of
// jobs plus an assertion block. Loading validates every job and fills in
// defaults, so a loaded config echoes back exactly what will run.

#include "c1bench/functions.hpp"
#include "c1bench/manifold.hpp"
#include "c1bench/rng.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace c1bench {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

inline const std::vector<std::string>& job_kinds() {
  static const std::vector<std::string> k = {"theorem1", "estimate1d", "euclidean", "scaling",    "morrey",
                                             "interior", "harmonic_radius", "lifting", "divergence", "convergence"};
  return k;
}

struct ManifoldEntry {
  std::string kind;
  std::string parameters;
};

inline const std::vector<ManifoldEntry>& manifold_catalog() {
  static const std::vector<ManifoldEntry> c = {
      {"euclidean", "dim (2)"},
      {"sphere", "dim (2), rho (1)"},
      {"hyperbolic", "dim (2), rho (1)"},
      {"flat_torus", "periods (required, one per axis)"},
      {"warped_product", "warp {kind: power_cusp, p (0.5), t_min (-0.5), t_max (1024)} or {kind: sine, rho (1)}, "
                         "base_t (0); dimension 2"},
  };
  return c;
}

struct JobSpec {
  std::string id;
  std::string kind;
  Json params;  // normalized: every option present, including kind and id
};

struct Assertion {
  std::string job;  // job id, or "aggregates"
  std::string metric;  // dotted path into the job result
  std::string op;   // <, <=, >, >=, ==, !=, near
  Json value;
  double tol = 0.0;  // for near
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  std::vector<JobSpec> jobs;
  std::vector<Assertion> assertions;

  Json to_json() const;
};

namespace detail {

[[noreturn]] inline void config_error(Errc code, const std::string& ctx, const std::string& msg) {
  throw Error(code, ctx.empty() ? msg : ctx + ": " + msg);
}

// Reads options from one JSON object and rejects keys nobody asked for.
class Params {
 public:
  Params(const Json& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
    if (!j_.is_object()) config_error(Errc::validation, ctx_, "expected an object");
  }

  const std::string& ctx() const { return ctx_; }
  bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }

  /// The value under k, or null; either way k counts as known.
  Json optional(const std::string& k) {
    used_.insert(k);
    return has(k) ? j_.at(k) : Json();
  }

  const Json& raw(const std::string& k) {
    used_.insert(k);
    if (!has(k)) config_error(Errc::missing_field, ctx_, "missing required field '" + k + "'");
    return j_.at(k);
  }

  double number(const std::string& k) {
    const Json& v = raw(k);
    if (!v.is_number()) config_error(Errc::validation, ctx_, "'" + k + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) config_error(Errc::validation, ctx_, "'" + k + "' must be finite");
    return d;
  }
  double number(const std::string& k, double def) { return has(k) ? number(k) : (used_.insert(k), def); }

  double positive(const std::string& k) {
    const double d = number(k);
    if (!(d > 0.0)) config_error(Errc::validation, ctx_, "'" + k + "' must be > 0");
    return d;
  }
  double positive(const std::string& k, double def) { return has(k) ? positive(k) : (used_.insert(k), def); }

  long integer(const std::string& k, long def, long lo, long hi) {
    used_.insert(k);
    if (!has(k)) return def;
    const Json& v = j_.at(k);
    if (!v.is_number_integer()) config_error(Errc::validation, ctx_, "'" + k + "' must be an integer");
    const long i = v.get<long>();
    if (i < lo || i > hi) {
      std::ostringstream os;
      os << "'" << k << "' must lie in [" << lo << ", " << hi << "]";
      config_error(Errc::validation, ctx_, os.str());
    }
    return i;
  }

  std::uint64_t seed(const std::string& k, std::uint64_t def) {
    used_.insert(k);
    if (!has(k)) return def;
    const Json& v = j_.at(k);
    if (!v.is_number_unsigned()) config_error(Errc::validation, ctx_, "'" + k + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& k, bool def) {
    used_.insert(k);
    if (!has(k)) return def;
    if (!j_.at(k).is_boolean()) config_error(Errc::validation, ctx_, "'" + k + "' must be true or false");
    return j_.at(k).get<bool>();
  }

  std::string string(const std::string& k) {
    const Json& v = raw(k);
    if (!v.is_string()) config_error(Errc::validation, ctx_, "'" + k + "' must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& k, const std::string& def) { return has(k) ? string(k) : (used_.insert(k), def); }

  std::vector<double> numbers(const std::string& k) {
    const Json& v = raw(k);
    if (!v.is_array()) config_error(Errc::validation, ctx_, "'" + k + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) config_error(Errc::validation, ctx_, "'" + k + "' must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Vec vec(const std::string& k, int m) {
    const auto v = numbers(k);
    if (static_cast<int>(v.size()) != m) {
      std::ostringstream os;
      os << "'" << k << "' must have " << m << " entries";
      config_error(Errc::validation, ctx_, os.str());
    }
    return Eigen::Map<const Vec>(v.data(), m);
  }
  Vec vec(const std::string& k, const Vec& def) { return has(k) ? vec(k, static_cast<int>(def.size())) : (used_.insert(k), def); }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) config_error(Errc::validation, ctx_, "unknown option '" + k + "'");
  }

 private:
  const Json& j_;
  std::string ctx_;
  std::set<std::string> used_;
};

inline Json to_json(const Vec& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vec to_vec(const Json& a) {
  Vec v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Manifolds

/// Accepts "sphere" or {"kind": "sphere", ...}; returns the filled object.
inline Json normalize_manifold(const Json& spec, const std::string& ctx) {
  using detail::config_error;
  const Json obj = spec.is_string() ? Json{{"kind", spec}} : spec;
  detail::Params p(obj, ctx + ".manifold");
  const std::string kind = p.string("kind");
  Json out{{"kind", kind}};
  auto dim = [&](long def) { return p.integer("dim", def, 1, kMaxDim); };
  if (kind == "euclidean") {
    out["dim"] = dim(2);
  } else if (kind == "sphere" || kind == "hyperbolic") {
    out["dim"] = dim(2);
    out["rho"] = p.positive("rho", 1.0);
  } else if (kind == "flat_torus") {
    const auto per = p.numbers("periods");
    if (per.empty() || per.size() > static_cast<std::size_t>(kMaxDim))
      config_error(Errc::validation, p.ctx(), "'periods' must have 1 to 4 entries");
    for (double d : per)
      if (!(d > 0.0)) config_error(Errc::validation, p.ctx(), "periods must be > 0");
    out["periods"] = per;
  } else if (kind != "warped_product") {
    config_error(Errc::unknown_manifold, p.ctx(), "unknown manifold kind '" + kind + "'");
  }
  if (kind == "warped_product") {
    const Json wraw = p.optional("warp");
    const Json wobj = wraw.is_null() ? Json::object() : wraw.is_string() ? Json{{"kind", wraw}} : wraw;
    detail::Params w(wobj, p.ctx() + ".warp");
    const std::string wk = w.string("kind", "power_cusp");
    Json wo{{"kind", wk}};
    if (wk == "power_cusp") {
      wo["p"] = w.positive("p", 0.5);
      wo["t_min"] = w.number("t_min", -0.5);
      wo["t_max"] = w.number("t_max", 1024.0);
      if (!(wo["t_max"].get<double>() > wo["t_min"].get<double>()))
        config_error(Errc::validation, w.ctx(), "t_max must exceed t_min");
    } else if (wk == "sine") {
      wo["rho"] = w.positive("rho", 1.0);
    } else {
      config_error(Errc::unknown_manifold, w.ctx(), "unknown warp kind '" + wk + "'");
    }
    w.finish();
    out["warp"] = wo;
    out["dim"] = p.integer("dim", 2, 2, 2);
    out["base_t"] = p.number("base_t", 0.0);
  }
  p.finish();
  return out;
}

inline ModelManifold make_manifold(const Json& n) {
  const std::string kind = n.at("kind").get<std::string>();
  if (kind == "euclidean") return euclidean(n.at("dim").get<int>());
  if (kind == "sphere") return sphere(n.at("dim").get<int>(), n.at("rho").get<double>());
  if (kind == "hyperbolic") return hyperbolic(n.at("dim").get<int>(), n.at("rho").get<double>());
  if (kind == "flat_torus") return flat_torus(detail::to_vec(n.at("periods")));
  if (kind == "warped_product") {
    const Json& w = n.at("warp");
    const WarpFunction f = w.at("kind") == "sine"
                               ? sine_warp(w.at("rho").get<double>())
                               : power_cusp_warp(w.at("p").get<double>(), w.at("t_min").get<double>(),
                                                 w.at("t_max").get<double>());
    return warped_product(f, n.at("base_t").get<double>());
  }
  throw Error(Errc::unknown_manifold, "unknown manifold kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Closed-form fields

inline const std::vector<std::string>& field_names() {
  static const std::vector<std::string> f = {
      "const", "x1",        "x2",          "x3",           "x4",          "cos_r",        "cosh_r",
      "quadratic", "quarter_r2", "x1x2",    "trig_mix",     "bump",        "slab_bump",    "decay",
      "bump_potential", "bump_density", "random_trig"};
  return f;
}

/// Accepts "x1" or {"name": "bump", ...}; m is the ambient dimension.
inline Json normalize_field(const Json& spec, int m, const std::string& ctx) {
  using detail::config_error;
  const Json obj = spec.is_string() ? Json{{"name", spec}} : spec;
  detail::Params p(obj, ctx + ".field");
  const std::string name = p.string("name");
  Json out{{"name", name}};
  if (name == "const") {
    out["c"] = p.number("c", 1.0);
  } else if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '4') {
    if (name[1] - '0' > m) config_error(Errc::validation, p.ctx(), "coordinate exceeds the dimension");
  } else if (name == "cos_r" || name == "cosh_r") {
    out["s"] = p.positive("s", 1.0);
  } else if (name == "bump") {
    out["center"] = detail::to_json(p.vec("center", Vec(Vec::Zero(m))));
    out["radius"] = p.positive("radius", 1.0);
  } else if (name == "slab_bump") {
    out["c"] = p.number("c", 0.0);
    out["w"] = p.positive("w", 1.0);
  } else if (name == "random_trig") {
    out["seed"] = p.seed("seed", 0);
    out["terms"] = p.integer("terms", 3, 1, 64);
    out["amp"] = p.positive("amp", 1.0);
    out["freq"] = p.positive("freq", 2.0);
  } else if (name == "x1x2" || name == "quadratic" || name == "trig_mix") {
    if (m < 2) config_error(Errc::validation, p.ctx(), "'" + name + "' needs dimension >= 2");
  } else if (std::find(field_names().begin(), field_names().end(), name) == field_names().end()) {
    config_error(Errc::validation, p.ctx(), "unknown field '" + name + "'");
  }
  p.finish();
  return out;
}

inline ClosedForm make_field(const Json& n, int m) {
  const std::string name = n.at("name").get<std::string>();
  if (name == "const") return fields::constant(n.at("c").get<double>());
  if (name.size() == 2 && name[0] == 'x') return fields::coordinate(name[1] - '1');
  if (name == "cos_r") return fields::radial_cos(n.at("s").get<double>());
  if (name == "cosh_r") return fields::radial_cosh(n.at("s").get<double>());
  if (name == "quadratic") return fields::quadratic();
  if (name == "quarter_r2") return fields::quarter_r2();
  if (name == "x1x2") return fields::product_x1x2();
  if (name == "trig_mix") return fields::trig_mix();
  if (name == "bump") return fields::compact_bump(detail::to_vec(n.at("center")), n.at("radius").get<double>());
  if (name == "slab_bump") return fields::slab_bump(n.at("c").get<double>(), n.at("w").get<double>());
  if (name == "decay") return fields::inverse_square_decay();
  if (name == "bump_potential") return fields::bump_potential();
  if (name == "bump_density") return fields::bump_density();
  if (name == "random_trig") {
    Rng rng(n.at("seed").get<std::uint64_t>());
    return fields::random_trig(rng, m, n.at("terms").get<int>(), n.at("amp").get<double>(),
                               n.at("freq").get<double>());
  }
  throw Error(Errc::validation, "unknown field '" + name + "'");
}

// ---------------------------------------------------------------------------
// Jobs

namespace detail {

struct JobContext {
  Params& p;
  Json& out;

  ModelManifold manifold() {
    out["manifold"] = normalize_manifold(p.raw("manifold"), p.ctx());
    try {
      return make_manifold(out["manifold"]);
    } catch (const Error& e) {
      config_error(Errc::validation, p.ctx() + ".manifold", e.what());
    }
  }
  void field(int m, const char* def = nullptr) {
    const Json f = def ? p.optional("field") : p.raw("field");
    out["field"] = normalize_field(f.is_null() ? Json(def) : f, m, p.ctx());
  }
  void point(const std::string& k, const ModelManifold& M) {
    const Vec x = p.vec(k, M.base_point);
    if (!M.chart.contains(x)) config_error(Errc::validation, p.ctx(), "'" + k + "' lies outside the chart");
    out[k] = to_json(x);
  }
  void epsilon() { out["epsilon"] = p.positive("epsilon", kDefaultEpsilon); }
};

inline void normalize_kind(const std::string& kind, Params& p, Json& out) {
  JobContext c{p, out};
  if (kind == "theorem1" || kind == "scaling") {
    const auto M = c.manifold();
    c.point("x", M);
    const double R0 = p.positive("R0");
    out["R0"] = R0;
    c.field(M.dim, "x1");
    c.epsilon();
    out["h"] = p.positive("h", R0 / 64.0);
    out["sampling_nodes_per_axis"] = p.integer("sampling_nodes_per_axis", 33, 3, 257);
    out["sampling_planes_per_point"] = p.integer("sampling_planes_per_point", 16, 1, 1024);
    if (kind == "scaling") {
      out["lambda"] = p.positive("lambda");
      const double l = out["lambda"].get<double>();
      if (l < 0.25 || l > 4.0) config_error(Errc::validation, p.ctx(), "'lambda' must lie in [0.25, 4]");
    }
  } else if (kind == "euclidean") {
    const int m = static_cast<int>(p.integer("dim", 2, 1, kMaxDim));
    out["dim"] = m;
    out["x"] = to_json(p.vec("x", Vec(Vec::Zero(m))));
    const double R0 = p.positive("R0");
    out["R0"] = R0;
    c.field(m, "x1");
    out["h"] = p.positive("h", R0 / 64.0);
  } else if (kind == "estimate1d") {
    out["count"] = p.integer("count", 1000, 1, 100000000);
    out["n_samples"] = p.integer("n_samples", 10000, 1, 100000000);
  } else if (kind == "morrey") {
    const int m = static_cast<int>(p.integer("dim", 2, 1, 3));
    out["dim"] = m;
    out["p"] = p.positive("p");
    if (!(out["p"].get<double>() > m)) config_error(Errc::validation, p.ctx(), "'p' must exceed the dimension");
    out["omega_radius"] = p.positive("omega_radius", 2.0);
    out["R"] = p.positive("R", 1.0);
    if (2.0 * out["R"].get<double>() > out["omega_radius"].get<double>())
      config_error(Errc::validation, p.ctx(), "B(2R) must lie inside Omega");
    out["h"] = p.positive("h", 1.0 / 16.0);
    if (p.has("field")) {
      c.field(m);
      out["count"] = 1;
      p.integer("count", 1, 1, 1);
    } else {
      out["count"] = p.integer("count", 16, 1, 100000);
    }
  } else if (kind == "interior") {
    const int m = static_cast<int>(p.integer("dim", 2, 1, 3));
    out["dim"] = m;
    out["q"] = p.number("q", 2.0);
    if (!(out["q"].get<double>() >= 1.0)) config_error(Errc::validation, p.ctx(), "'q' must be >= 1");
    out["h"] = p.positive("h", 1.0 / 16.0);
    c.field(m, m >= 2 ? "x1x2" : "x1");
    Json a = Json::array();
    const Json raw = p.optional("a");
    if (!raw.is_null()) {
      bool ok = raw.is_array() && static_cast<int>(raw.size()) == m;
      for (int i = 0; ok && i < m; ++i) {
        ok = raw[i].is_array() && static_cast<int>(raw[i].size()) == m;
        for (int j = 0; ok && j < m; ++j) ok = raw[i][j].is_number();
      }
      if (!ok) config_error(Errc::validation, p.ctx(), "'a' must be an m x m array of numbers");
      a = raw;
    }
    if (a.empty())
      for (int i = 0; i < m; ++i) {
        Json row = Json::array();
        for (int j = 0; j < m; ++j) row.push_back(i == j ? 1.0 : 0.0);
        a.push_back(row);
      }
    out["a"] = a;
    out["b"] = p.number("b", 0.0);
  } else if (kind == "harmonic_radius") {
    const auto M = c.manifold();
    c.point("x", M);
    out["p"] = p.number("p", M.dim + 1.0);
    if (!(out["p"].get<double>() > M.dim)) config_error(Errc::validation, p.ctx(), "'p' must exceed the dimension");
    out["Q"] = p.number("Q", 4.0);
    if (!(out["Q"].get<double>() > 1.0)) config_error(Errc::validation, p.ctx(), "'Q' must exceed 1");
    out["r_max"] = p.positive("r_max", std::min(1.0, 0.99 * M.inj_radius_at(detail::to_vec(out["x"]))));
    out["bisection_steps"] = p.integer("bisection_steps", 12, 0, 40);
    out["cells_per_radius"] = p.integer("cells_per_radius", 32, 4, 512);
    out["C"] = p.has("C") ? Json(p.positive("C")) : p.optional("C");
  } else if (kind == "lifting") {
    const auto M = c.manifold();
    c.point("x", M);
    out["R"] = p.positive("R");
    out["R0"] = p.number("R0", 0.0);
    c.epsilon();
    out["nodes_per_axis"] = p.integer("nodes_per_axis", 17, 2, 129);
    out["n_rays"] = p.integer("n_rays", 8, 1, 1024);
    out["n_curves"] = p.integer("n_curves", 4, 0, 1024);
    out["n_radii"] = p.integer("n_radii", 16, 1, 1024);
  } else if (kind == "divergence") {
    const auto M = c.manifold();
    c.point("o", M);
    c.field(M.dim);
    const auto radii = p.numbers("radii");
    if (radii.size() < 4) config_error(Errc::validation, p.ctx(), "'radii' needs at least 4 entries");
    for (std::size_t k = 0; k < radii.size(); ++k)
      if (!(radii[k] > 0.0) || (k && !(radii[k] > radii[k - 1])))
        config_error(Errc::validation, p.ctx(), "'radii' must be positive and increasing");
    out["radii"] = radii;
    out["h"] = p.positive("h", 0.1);
    out["tolerance"] = p.positive("tolerance", 1e-3);
    const Json t = p.optional("targets");
    Params tp(t.is_null() ? Json::object() : t, p.ctx() + ".targets");
    out["targets"] = {{"alpha", tp.number("alpha", 0.5)},
                      {"beta", tp.number("beta", 0.0)},
                      {"gamma", tp.number("gamma", 0.0)},
                      {"delta", tp.number("delta", 0.0)}};
    tp.finish();
  } else if (kind == "convergence") {
    const auto M = c.manifold();
    c.point("x", M);
    const double R0 = p.positive("R0");
    out["R0"] = R0;
    c.field(M.dim, "quadratic");
    const std::vector<double> h =
        p.has("spacings") ? p.numbers("spacings") : (p.optional("spacings"), std::vector<double>{R0 / 16, R0 / 32, R0 / 64});
    if (h.size() < 2) config_error(Errc::validation, p.ctx(), "'spacings' needs at least 2 entries");
    for (double v : h)
      if (!(v > 0.0 && v <= R0 / 4)) config_error(Errc::validation, p.ctx(), "spacings must lie in (0, R0/4]");
    out["spacings"] = h;
  } else {
    config_error(Errc::validation, p.ctx(), "unknown job kind '" + kind + "'");
  }
}

}  // namespace detail

inline JobSpec normalize_job(const Json& j, std::size_t index) {
  std::ostringstream ctx;
  ctx << "jobs[" << index << "]";
  detail::Params p(j, ctx.str());
  JobSpec s;
  s.kind = p.string("kind");
  std::ostringstream def;
  def << s.kind << "_" << index;
  s.id = p.string("id", def.str());
  if (s.id.empty() || s.id == "aggregates") detail::config_error(Errc::validation, p.ctx(), "invalid job id");
  Json out{{"kind", s.kind}, {"id", s.id}};
  if (p.has("seed")) out["seed"] = p.seed("seed", 0);
  detail::normalize_kind(s.kind, p, out);
  p.finish();
  s.params = std::move(out);
  return s;
}

inline Assertion normalize_assertion(const Json& j, std::size_t index) {
  std::ostringstream ctx;
  ctx << "assertions[" << index << "]";
  detail::Params p(j, ctx.str());
  Assertion a;
  a.job = p.string("job");
  a.metric = p.string("metric");
  a.op = p.string("op");
  static const std::set<std::string> ops = {"<", "<=", ">", ">=", "==", "!=", "near"};
  if (!ops.count(a.op)) detail::config_error(Errc::validation, p.ctx(), "unknown operator '" + a.op + "'");
  a.value = p.raw("value");
  if (!a.value.is_number() && !a.value.is_boolean() && !a.value.is_string())
    detail::config_error(Errc::validation, p.ctx(), "'value' must be a number, boolean or string");
  a.tol = a.op == "near" ? p.positive("tol") : p.number("tol", 0.0);
  p.finish();
  return a;
}

inline Json ExperimentConfig::to_json() const {
  Json j{{"name", name}, {"seed", seed}, {"jobs", Json::array()}, {"assertions", Json::array()}};
  for (const auto& s : jobs) j["jobs"].push_back(s.params);
  for (const auto& a : assertions) {
    Json e{{"job", a.job}, {"metric", a.metric}, {"op", a.op}, {"value", a.value}};
    if (a.op == "near") e["tol"] = a.tol;
    j["assertions"].push_back(e);
  }
  return j;
}

/// A document is either a single job (it has "kind") or an object with a
/// "jobs" array and optional name, seed and assertions.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << source << ":" << line << ":" << col << ": invalid JSON";
    const std::string what = e.what();
    const auto colon = what.rfind(": ");
    if (colon != std::string::npos) os << " (" << what.substr(colon + 2) << ")";
    throw Error(Errc::parse, os.str());
  }
  if (!doc.is_object()) throw Error(Errc::validation, source + ": top level must be an object");
  Json top = doc;
  if (doc.contains("kind")) top = Json{{"jobs", Json::array({doc})}};
  detail::Params p(top, "");
  ExperimentConfig c;
  c.name = p.string("name", "experiment");
  c.seed = p.seed("seed", 0);
  const Json& jobs = p.raw("jobs");
  if (!jobs.is_array() || jobs.empty()) throw Error(Errc::validation, "'jobs' must be a nonempty array");
  std::set<std::string> ids;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    c.jobs.push_back(normalize_job(jobs[k], k));
    if (!ids.insert(c.jobs.back().id).second)
      throw Error(Errc::validation, "duplicate job id '" + c.jobs.back().id + "'");
  }
  if (p.has("assertions")) {
    const Json& as = p.raw("assertions");
    if (!as.is_array()) throw Error(Errc::validation, "'assertions' must be an array");
    for (std::size_t k = 0; k < as.size(); ++k) {
      c.assertions.push_back(normalize_assertion(as[k], k));
      if (c.assertions.back().job != "aggregates" && !ids.count(c.assertions.back().job))
        throw Error(Errc::validation, "assertion refers to unknown job '" + c.assertions.back().job + "'");
    }
  }
  p.optional("assertions");
  p.finish();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::io, "cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace c1bench
