#pragma once

// Executes a loaded ExperimentConfig. Jobs run independently (optionally on
// several threads); the report is assembled afterwards in config order, with
// sorted keys and no timing data, so a fixed seed gives byte-identical JSON.

#include "c1bench/config.hpp"
#include "c1bench/divergence.hpp"
#include "c1bench/estimates.hpp"
#include "c1bench/harmonic.hpp"
#include "c1bench/lifting.hpp"
#include "c1bench/poisson.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <mutex>
#include <thread>

namespace c1bench {

struct Table {
  std::string name;  // file name inside the output directory
  std::string csv;
};

struct JobOutcome {
  std::string id;
  std::string kind;
  bool ok = false;
  Json result;  // job result, or {"code", "message"} on failure
  std::vector<Table> tables;
  double seconds = 0.0;
};

struct RunOptions {
  int jobs = 1;
  std::optional<std::uint64_t> seed;  // overrides the config seed
};

struct RunReport {
  Json report;
  std::vector<JobOutcome> outcomes;
  std::vector<Table> tables;  // per-job tables plus suite tables
  bool assertions_passed = true;
  double seconds = 0.0;

  std::string dump() const { return report.dump(2) + "\n"; }
};

namespace detail {

inline Json to_json(const CurvatureBounds& b) {
  return {{"sigma", b.sigma}, {"rho", b.rho},         {"a1", b.a1},
          {"a2", b.a2},       {"epsilon", b.epsilon}, {"sample_points", b.sample_points},
          {"sampled", b.sampled}};
}

inline Json to_json(const EstimateReport& r) {
  Json j{{"kind", r.kind},         {"manifold", r.manifold},   {"field", r.field},
         {"x", to_json(r.x)},      {"R0", r.R0},               {"epsilon", r.epsilon},
         {"h", r.h},               {"lhs", r.lhs},             {"rhs_f", r.rhs_f},
         {"rhs_psi", r.rhs_psi},   {"factor", r.factor},       {"c_emp", r.c_emp},
         {"lhs_nodes", r.lhs_nodes}, {"rhs_nodes", r.rhs_nodes}};
  if (r.kind == "theorem1") j["bounds"] = to_json(r.bounds);
  return j;
}

inline Json to_json(const GrowthSeries& s) {
  return {{"label", s.label},
          {"radii", s.radii},
          {"values", s.values},
          {"fitted_exponent", s.fitted_exponent},
          {"fit_intercept", s.fit_intercept},
          {"fit_residual", s.fit_residual},
          {"alpha_target", s.alpha_target},
          {"compliance_constant", s.compliance_constant},
          {"compliant", s.compliant}};
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline Theorem1Options theorem1_options(const Json& p, std::uint64_t seed) {
  Theorem1Options o;
  o.epsilon = p.at("epsilon").get<double>();
  o.h = p.at("h").get<double>();
  o.sampling.nodes_per_axis = p.at("sampling_nodes_per_axis").get<int>();
  o.sampling.planes_per_point = p.at("sampling_planes_per_point").get<int>();
  o.sampling.seed = seed;
  return o;
}

inline std::vector<double> get_numbers(const Json& a) { return a.get<std::vector<double>>(); }

inline void run_kind(const JobSpec& job, std::uint64_t seed, JobOutcome& out) {
  const Json& p = job.params;
  Json& r = out.result;
  auto manifold = [&] { return make_manifold(p.at("manifold")); };
  auto field = [&](int m) { return make_field(p.at("field"), m); };

  if (job.kind == "theorem1") {
    const auto M = manifold();
    r = to_json(theorem1_check(M, to_vec(p.at("x")), p.at("R0").get<double>(), field(M.dim),
                               theorem1_options(p, seed)));
  } else if (job.kind == "euclidean") {
    const int m = p.at("dim").get<int>();
    r = to_json(estimate_euclidean(field(m), to_vec(p.at("x")), p.at("R0").get<double>(), p.at("h").get<double>()));
  } else if (job.kind == "scaling") {
    const auto M = manifold();
    const auto s = scaling_invariance(M, to_vec(p.at("x")), p.at("R0").get<double>(), field(M.dim),
                                      p.at("lambda").get<double>(), theorem1_options(p, seed));
    r = {{"lambda", s.lambda},
         {"c_emp", s.c_emp},
         {"c_emp_scaled", s.c_emp_scaled},
         {"relative_difference", s.relative_difference},
         {"base", to_json(s.base)},
         {"scaled", to_json(s.scaled)}};
  } else if (job.kind == "estimate1d") {
    const auto c = estimate_1d_corpus(seed, p.at("count").get<std::size_t>(), p.at("n_samples").get<int>());
    r = {{"count", c.count},   {"n_samples", c.n_samples}, {"max_ratio", c.max_ratio},
         {"bound", c.bound},   {"violations", c.violations}};
  } else if (job.kind == "morrey") {
    const int m = p.at("dim").get<int>();
    const int count = p.at("count").get<int>();
    Rng rng(seed);
    double worst = 0.0, sum = 0.0, alpha = 0.0;
    bool sampled = false;
    std::vector<double> ratios;
    for (int k = 0; k < count; ++k) {
      const auto u = p.contains("field") ? field(m) : fields::random_trig(rng, m);
      const auto res = morrey_ratio(u, m, p.at("p").get<double>(), p.at("omega_radius").get<double>(),
                                    p.at("R").get<double>(), p.at("h").get<double>());
      worst = std::max(worst, res.ratio);
      sum += res.ratio;
      alpha = res.alpha;
      sampled = sampled || res.sampled;
      ratios.push_back(res.ratio);
    }
    r = {{"alpha", alpha},     {"count", count},         {"max_ratio", worst},
         {"mean_ratio", sum / count}, {"ratios", ratios}, {"sampled", sampled}};
  } else if (job.kind == "interior") {
    const int m = p.at("dim").get<int>();
    Mat A(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) A(i, j) = p.at("a")[i][j].get<double>();
    const double b = p.at("b").get<double>();
    const auto res = interior_estimate_ratio([A](const Vec&) { return A; }, [b](const Vec&) { return b; }, field(m), m,
                                             p.at("q").get<double>(), p.at("h").get<double>());
    r = {{"w2q_b1", res.w2q_b1},   {"pu_lq_b2", res.pu_lq_b2}, {"u_l2_b2", res.u_l2_b2},
         {"ratio", res.ratio},     {"min_ellipticity", res.min_ellipticity}};
  } else if (job.kind == "harmonic_radius") {
    const auto M = manifold();
    const Vec x = to_vec(p.at("x"));
    HarmonicRadiusOptions o;
    o.bisection_steps = p.at("bisection_steps").get<int>();
    o.cells_per_radius = p.at("cells_per_radius").get<double>();
    const double pp = p.at("p").get<double>(), Q = p.at("Q").get<double>();
    const auto res = estimate_harmonic_radius(M, x, pp, Q, p.at("r_max").get<double>(), o);
    std::vector<int> passed(res.passed.begin(), res.passed.end());
    r = {{"radius", res.radius},
         {"tested", res.tested},
         {"passed", passed},
         {"max_harmonic_residual", res.max_harmonic_residual}};
    if (!p.at("C").is_null()) {
      const auto ac = anderson_cheeger_ratio(M, x, pp, Q, p.at("C").get<double>(), o);
      r["anderson_cheeger"] = {{"radius", ac.radius},
                               {"numerator", ac.numerator},
                               {"denominator", ac.denominator},
                               {"ratio", ac.ratio},
                               {"ricci_min", ac.ricci_min}};
    }
  } else if (job.kind == "lifting") {
    const auto M = manifold();
    PullbackGridSpec spec;
    spec.nodes_per_axis = p.at("nodes_per_axis").get<int>();
    spec.R0 = p.at("R0").get<double>();
    spec.epsilon = p.at("epsilon").get<double>();
    const auto pm = build_pullback(M, to_vec(p.at("x")), p.at("R").get<double>(), spec);
    double node_min = kInf, base_dev = 0.0;
    for (double j : pm.jacobi_nodes) node_min = std::min(node_min, j);
    base_dev = (pm.gbar.metric(Vec::Zero(M.dim)) - Mat::Identity(M.dim, M.dim)).cwiseAbs().maxCoeff();
    r = {{"R", pm.R},
         {"R0", pm.R0},
         {"bounds", to_json(pm.bounds)},
         {"nodes", pm.nodes.size()},
         {"base_deviation", base_dev},
         {"node_min_jacobi", node_min},
         {"radial_deviation", verify_radial_distance(pm, p.at("n_rays").get<int>(), seed)},
         {"isometry_mismatch", p.at("n_curves").get<int>() > 0
                                   ? Json(verify_local_isometry(pm, p.at("n_curves").get<int>(), seed))
                                   : Json()},
         {"min_jacobi", conjugate_point_scan(pm, p.at("n_rays").get<int>(), p.at("n_radii").get<int>(), seed)},
         {"image_ball_excess",
          M.kind == ManifoldKind::warped_product ? Json() : Json(image_ball_excess(pm, 32, seed))}};
    std::ostringstream os;
    write_pullback_csv(os, pm);
    out.tables.push_back({job.id + "_pullback.csv", os.str()});
  } else if (job.kind == "divergence") {
    const auto M = manifold();
    const Json& t = p.at("targets");
    const CorollaryTargets targets{t.at("alpha").get<double>(), t.at("beta").get<double>(),
                                   t.at("gamma").get<double>(), t.at("delta").get<double>()};
    const auto v = corollary_suite(M, field(M.dim), to_vec(p.at("o")), targets, get_numbers(p.at("radii")),
                                   p.at("h").get<double>(), p.at("tolerance").get<double>());
    r = {{"annulus_volume", to_json(v.annulus_volume)},
         {"sectional_sup", to_json(v.sectional_sup)},
         {"u_sup", to_json(v.u_sup)},
         {"laplacian_sup", to_json(v.laplacian_sup)},
         {"mean_value",
          {{"series", to_json(v.mean_value.series)},
           {"tolerance", v.mean_value.tolerance},
           {"decreasing", v.mean_value.decreasing},
           {"converged", v.mean_value.converged},
           {"last", v.mean_value.series.values.back()}}},
         {"exponent_sum", v.exponent_sum},
         {"degenerate", v.degenerate},
         {"hypotheses_hold", v.hypotheses_hold},
         {"conclusion_holds", v.conclusion_holds}};
    std::ostringstream os;
    os << "R,annulus_volume,sectional_sup,u_sup,laplacian_sup,laplacian_integral\n";
    for (std::size_t k = 0; k < v.mean_value.series.radii.size(); ++k)
      os << fmt(v.mean_value.series.radii[k]) << "," << fmt(v.annulus_volume.values[k]) << ","
         << fmt(v.sectional_sup.values[k]) << "," << fmt(v.u_sup.values[k]) << ","
         << fmt(v.laplacian_sup.values[k]) << "," << fmt(v.mean_value.series.values[k]) << "\n";
    out.tables.push_back({job.id + "_series.csv", os.str()});
  } else if (job.kind == "convergence") {
    const auto M = manifold();
    const auto s = convergence_study(M, to_vec(p.at("x")), p.at("R0").get<double>(), field(M.dim),
                                     get_numbers(p.at("spacings")));
    double min_order = kInf, max_res = 0.0;
    for (double o : s.orders) min_order = std::min(min_order, o);
    for (double v : s.residuals) max_res = std::max(max_res, v);
    r = {{"manifold", s.manifold}, {"field", s.field},     {"radius", s.radius},
         {"spacings", s.spacings}, {"errors", s.errors},   {"orders", s.orders},
         {"residuals", s.residuals}, {"nodes", s.nodes},  {"min_order", min_order},
         {"max_residual", max_res}};
    std::ostringstream os;
    os << "h,nodes,error,residual,order\n";
    for (std::size_t k = 0; k < s.spacings.size(); ++k)
      os << fmt(s.spacings[k]) << "," << s.nodes[k] << "," << fmt(s.errors[k]) << "," << fmt(s.residuals[k]) << ","
         << (k ? fmt(s.orders[k - 1]) : "") << "\n";
    out.tables.push_back({job.id + "_convergence.csv", os.str()});
  } else {
    throw Error(Errc::validation, "unknown job kind '" + job.kind + "'");
  }
}

inline JobOutcome run_job(const JobSpec& job, std::uint64_t seed) {
  JobOutcome out;
  out.id = job.id;
  out.kind = job.kind;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    run_kind(job, seed, out);
    out.ok = true;
  } catch (const Error& e) {
    out.ok = false;
    out.result = {{"code", to_string(e.code())}, {"message", e.what()}};
    out.tables.clear();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Dotted lookup ("mean_value.converged", "orders.0"); null when absent.
inline Json lookup(const Json& root, const std::string& path) {
  const Json* cur = &root;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    const std::size_t dot = std::min(path.find('.', pos), path.size());
    const std::string key = path.substr(pos, dot - pos);
    if (cur->is_object() && cur->contains(key)) {
      cur = &cur->at(key);
    } else if (cur->is_array() && !key.empty() && key.find_first_not_of("0123456789") == std::string::npos &&
               std::stoul(key) < cur->size()) {
      cur = &cur->at(std::stoul(key));
    } else {
      return Json();
    }
    pos = dot + 1;
  }
  return *cur;
}

inline bool compare(const Json& actual, const std::string& op, const Json& value, double tol) {
  if (actual.is_null()) return false;
  if (actual.is_number() && value.is_number()) {
    const double a = actual.get<double>(), v = value.get<double>();
    if (op == "<") return a < v;
    if (op == "<=") return a <= v;
    if (op == ">") return a > v;
    if (op == ">=") return a >= v;
    if (op == "==") return a == v;
    if (op == "!=") return a != v;
    if (op == "near") return std::abs(a - v) <= tol;
    return false;
  }
  if (op == "==") return actual == value;
  if (op == "!=") return actual != value;
  return false;
}

inline Json aggregates(const std::vector<JobOutcome>& outs) {
  std::size_t ok = 0;
  double max_c = 0.0, min_order = kInf, max_res = 0.0, max_ratio1d = 0.0;
  bool have_c = false, have_order = false, have_1d = false;
  Json failed = Json::array();
  for (const auto& o : outs) {
    if (!o.ok) {
      failed.push_back(o.id);
      continue;
    }
    ++ok;
    if (o.kind == "theorem1" || o.kind == "euclidean") {
      max_c = std::max(max_c, o.result.at("c_emp").get<double>());
      have_c = true;
    }
    if (o.kind == "convergence") {
      min_order = std::min(min_order, o.result.at("min_order").get<double>());
      max_res = std::max(max_res, o.result.at("max_residual").get<double>());
      have_order = true;
    }
    if (o.kind == "harmonic_radius") max_res = std::max(max_res, o.result.at("max_harmonic_residual").get<double>());
    if (o.kind == "estimate1d") {
      max_ratio1d = std::max(max_ratio1d, o.result.at("max_ratio").get<double>());
      have_1d = true;
    }
  }
  return {{"jobs_total", outs.size()},
          {"jobs_ok", ok},
          {"jobs_failed", failed},
          {"max_c_emp", have_c ? Json(max_c) : Json()},
          {"min_convergence_order", have_order ? Json(min_order) : Json()},
          {"max_estimate1d_ratio", have_1d ? Json(max_ratio1d) : Json()},
          {"solver", {{"max_residual", max_res}}}};
}

inline std::string theorem1_table(const std::vector<JobOutcome>& outs) {
  std::ostringstream os;
  os << "id,kind,manifold,field,R0,h,epsilon,lhs,rhs_f,rhs_psi,factor,c_emp\n";
  for (const auto& o : outs) {
    if (!o.ok || (o.kind != "theorem1" && o.kind != "euclidean")) continue;
    const Json& r = o.result;
    os << o.id << "," << o.kind << ",\"" << r.at("manifold").get<std::string>() << "\","
       << r.at("field").get<std::string>() << "," << fmt(r.at("R0").get<double>()) << ","
       << fmt(r.at("h").get<double>()) << "," << fmt(r.at("epsilon").get<double>()) << ","
       << fmt(r.at("lhs").get<double>()) << "," << fmt(r.at("rhs_f").get<double>()) << ","
       << fmt(r.at("rhs_psi").get<double>()) << "," << fmt(r.at("factor").get<double>()) << ","
       << fmt(r.at("c_emp").get<double>()) << "\n";
  }
  return os.str();
}

inline std::string jobs_table(const std::vector<JobOutcome>& outs) {
  std::ostringstream os;
  os << "id,kind,status,error_code\n";
  for (const auto& o : outs)
    os << o.id << "," << o.kind << "," << (o.ok ? "ok" : "error") << ","
       << (o.ok ? "" : o.result.at("code").get<std::string>()) << "\n";
  return os.str();
}

}  // namespace detail

/// Per-job seed: the job's own "seed" if given, else config seed + index.
inline std::uint64_t job_seed(const ExperimentConfig& c, std::size_t index) {
  const Json& p = c.jobs[index].params;
  return p.contains("seed") ? p.at("seed").get<std::uint64_t>() : c.seed + index;
}

inline RunReport run(ExperimentConfig config, const RunOptions& opt = {}) {
  if (opt.seed) config.seed = *opt.seed;
  require(opt.jobs >= 1, Errc::parameter, "--jobs must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = config.jobs.size();
  RunReport rep;
  rep.outcomes.resize(n);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < n;) rep.outcomes[k] = detail::run_job(config.jobs[k], job_seed(config, k));
  };
  const int threads = static_cast<int>(std::min<std::size_t>(opt.jobs, n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  Json jobs = Json::array();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& o = rep.outcomes[k];
    Json e{{"id", o.id}, {"kind", o.kind}, {"seed", job_seed(config, k)}, {"status", o.ok ? "ok" : "error"}};
    e[o.ok ? "result" : "error"] = o.result;
    jobs.push_back(e);
    for (const auto& t : o.tables) rep.tables.push_back(t);
  }
  const Json agg = detail::aggregates(rep.outcomes);

  Json checks = Json::array();
  for (const auto& a : config.assertions) {
    Json actual;
    if (a.job == "aggregates") {
      actual = detail::lookup(agg, a.metric);
    } else {
      for (const auto& o : rep.outcomes)
        if (o.id == a.job && o.ok) actual = detail::lookup(o.result, a.metric);
    }
    const bool pass = detail::compare(actual, a.op, a.value, a.tol);
    rep.assertions_passed = rep.assertions_passed && pass;
    Json e{{"job", a.job}, {"metric", a.metric}, {"op", a.op}, {"value", a.value}, {"actual", actual}, {"pass", pass}};
    if (a.op == "near") e["tol"] = a.tol;
    checks.push_back(e);
  }

  rep.report = {{"schema_version", kReportSchemaVersion},
                {"config", config.to_json()},
                {"jobs", jobs},
                {"aggregates", agg},
                {"assertions", checks},
                {"passed", rep.assertions_passed}};
  rep.tables.push_back({"jobs.csv", detail::jobs_table(rep.outcomes)});
  rep.tables.push_back({"estimates.csv", detail::theorem1_table(rep.outcomes)});
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Writes report.json, the CSV tables and timings.csv into dir.
inline void write_outputs(const RunReport& rep, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir + ": " + ec.message());
  auto put = [&](const std::string& name, const std::string& text) {
    const auto path = (fs::path(dir) / name).string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(Errc::io, "cannot open " + path);
    os << text;
    if (!os) throw Error(Errc::io, "cannot write " + path);
  };
  put("report.json", rep.dump());
  for (const auto& t : rep.tables) put(t.name, t.csv);
  std::ostringstream tm;
  tm << "id,kind,seconds\n";
  for (const auto& o : rep.outcomes) tm << o.id << "," << o.kind << "," << detail::fmt(o.seconds) << "\n";
  put("timings.csv", tm.str());
}

}  // namespace c1bench
