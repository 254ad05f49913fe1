#include "c1bench/runner.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace c1bench;
using c1bench::testing::error_code;

namespace {

const std::string kSource = C1BENCH_SOURCE_DIR;

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string message_of(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::optional<Errc> parse_code(const std::string& text) {
  return error_code([&] { parse_config(text); });
}

int cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(C1BENCH_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSuite1d = R"({"seed": 7, "jobs": [
  {"id": "a", "kind": "estimate1d", "count": 50, "n_samples": 500},
  {"id": "b", "kind": "estimate1d", "count": 50, "n_samples": 500, "seed": 3},
  {"id": "c", "kind": "morrey", "p": 3, "count": 2, "h": 0.25}
]})";

}  // namespace

TEST(LoadConfig, MinimalTheorem1GetsDefaults) {
  const auto c = load_config(kSource + "/configs/minimal_theorem1.json");
  ASSERT_EQ(c.jobs.size(), 1u);
  const Json& p = c.jobs[0].params;
  EXPECT_EQ(c.seed, 0u);
  EXPECT_EQ(p.at("kind"), "theorem1");
  EXPECT_EQ(p.at("manifold").at("kind"), "sphere");
  EXPECT_EQ(p.at("manifold").at("dim"), 2);
  EXPECT_DOUBLE_EQ(p.at("manifold").at("rho").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(p.at("epsilon").get<double>(), 1e-6);
  EXPECT_DOUBLE_EQ(p.at("h").get<double>(), 1.0 / 64);
  EXPECT_EQ(p.at("x"), Json::array({0.0, 0.0}));
  EXPECT_EQ(p.at("field").at("name"), "x1");
  // normalization is idempotent
  const auto again = parse_config(c.to_json().dump());
  EXPECT_EQ(again.to_json(), c.to_json());
}

TEST(LoadConfig, DistinctErrorCodes) {
  EXPECT_EQ(parse_code(R"({"kind": "theorem1", "manifold": {"kind": "klein_bottle"}, "R0": 1})"),
            Errc::unknown_manifold);
  EXPECT_EQ(parse_code(R"({"kind": "theorem1", "manifold": "sphere", "R0": 1, "epsilon": -1})"), Errc::validation);
  EXPECT_EQ(parse_code(R"({"kind": "theorem1", "manifold": "sphere"})"), Errc::missing_field);
  EXPECT_EQ(parse_code(R"({"kind": "theorem1", "R0": 1})"), Errc::missing_field);
  EXPECT_EQ(parse_code("{\"kind\": \"theorem1\",\n \"R0\": 1,\n \"manifold\": }"), Errc::parse);
  EXPECT_EQ(error_code([] { load_config("/nonexistent/c1bench.json"); }), Errc::io);
}

TEST(LoadConfig, ParseErrorCarriesLine) {
  const auto msg = message_of("{\n  \"kind\": \"theorem1\",\n  \"R0\": 1,,\n}");
  EXPECT_NE(msg.find("cfg.json:3:11:"), std::string::npos) << msg;
}

TEST(LoadConfig, ValidationErrors) {
  const std::vector<std::string> bad = {
      R"({"kind": "theorem1", "manifold": "sphere", "R0": 1, "typo": 2})",
      R"({"kind": "warp_drive"})",
      R"({"kind": "theorem1", "manifold": {"kind": "sphere", "rho": 0}, "R0": 1})",
      R"({"kind": "theorem1", "manifold": "sphere", "R0": 1, "field": "klein"})",
      R"({"kind": "scaling", "manifold": "sphere", "R0": 1, "lambda": 8})",
      R"({"kind": "theorem1", "manifold": "sphere", "R0": 1, "x": [0, 0, 0]})",
      R"({"kind": "morrey", "p": 2})",
      R"({"kind": "divergence", "manifold": "euclidean", "field": "x1", "radii": [1, 2, 2, 4]})",
      R"({"jobs": [{"id": "a", "kind": "estimate1d"}, {"id": "a", "kind": "estimate1d"}]})",
      R"({"jobs": [{"kind": "estimate1d"}], "assertions": [{"job": "zz", "metric": "m", "op": "<", "value": 1}]})",
      R"({"jobs": [{"kind": "estimate1d"}], "assertions": [{"job": "aggregates", "metric": "m", "op": "~", "value": 1}]})",
      R"({"jobs": []})",
      R"([1, 2])",
  };
  for (const auto& t : bad) EXPECT_EQ(parse_code(t), Errc::validation) << t;
  EXPECT_EQ(parse_code(R"({"kind": "lifting", "manifold": {"kind": "warped_product", "warp": "gauss"}, "R": 1})"),
            Errc::unknown_manifold);
}

TEST(LoadConfig, EveryKindNormalizes) {
  const auto c = parse_config(R"({"jobs": [
    {"kind": "theorem1", "manifold": "hyperbolic", "R0": 1},
    {"kind": "estimate1d"},
    {"kind": "euclidean", "dim": 3, "R0": 2},
    {"kind": "scaling", "manifold": "euclidean", "R0": 1, "lambda": 0.5},
    {"kind": "morrey", "p": 4},
    {"kind": "interior", "q": 3},
    {"kind": "harmonic_radius", "manifold": "sphere", "C": 2},
    {"kind": "lifting", "manifold": {"kind": "flat_torus", "periods": [2, 2]}, "R": 3},
    {"kind": "divergence", "manifold": "warped_product", "field": "decay", "radii": [1, 2, 4, 8]},
    {"kind": "convergence", "manifold": {"kind": "sphere", "dim": 3}, "R0": 1, "field": "cos_r"}
  ]})");
  ASSERT_EQ(c.jobs.size(), job_kinds().size());
  for (std::size_t k = 0; k < c.jobs.size(); ++k) EXPECT_EQ(c.jobs[k].kind, job_kinds()[k]);
  EXPECT_EQ(c.jobs[0].id, "theorem1_0");
  EXPECT_DOUBLE_EQ(c.jobs[2].params.at("h").get<double>(), 2.0 / 64);
  EXPECT_EQ(c.jobs[1].params.at("count"), 1000);
  EXPECT_EQ(c.jobs[1].params.at("n_samples"), 10000);
  EXPECT_DOUBLE_EQ(c.jobs[6].params.at("p").get<double>(), 3.0);
  EXPECT_DOUBLE_EQ(c.jobs[6].params.at("r_max").get<double>(), 1.0);
  EXPECT_EQ(c.jobs[8].params.at("manifold").at("warp").at("kind"), "power_cusp");
  EXPECT_EQ(c.jobs[8].params.at("o"), Json::array({0.0, 0.0}));
  EXPECT_EQ(c.jobs[9].params.at("spacings").size(), 3u);
  EXPECT_EQ(c.jobs[9].params.at("x").size(), 3u);
}

TEST(Run, DeterministicAndThreadIndependent) {
  const auto c = parse_config(kSuite1d);
  const auto a = run(c);
  const auto b = run(c);
  EXPECT_EQ(a.dump(), b.dump());
  RunOptions par;
  par.jobs = 3;
  EXPECT_EQ(run(c, par).dump(), a.dump());
  EXPECT_EQ(a.report.at("schema_version"), kReportSchemaVersion);
  EXPECT_EQ(a.report.at("jobs").size(), 3u);
  EXPECT_EQ(a.report.at("jobs")[0].at("seed"), 7);
  EXPECT_EQ(a.report.at("jobs")[1].at("seed"), 3);
  EXPECT_EQ(a.report.at("jobs")[2].at("seed"), 9);
  EXPECT_EQ(a.report.at("jobs")[0].at("result").at("violations"), 0);
  // no wall-clock data in the report
  EXPECT_EQ(a.dump().find("seconds"), std::string::npos);
}

TEST(Run, SeedOverride) {
  const auto c = parse_config(kSuite1d);
  RunOptions o;
  o.seed = 11;
  const auto r = run(c, o);
  EXPECT_EQ(r.report.at("config").at("seed"), 11);
  EXPECT_EQ(r.report.at("jobs")[0].at("seed"), 11);
  EXPECT_EQ(r.report.at("jobs")[1].at("seed"), 3);  // explicit job seed wins
  const auto base = run(c);
  EXPECT_NE(r.report.at("jobs")[0].at("result"), base.report.at("jobs")[0].at("result"));
  EXPECT_EQ(r.report.at("jobs")[1].at("result"), base.report.at("jobs")[1].at("result"));
}

TEST(Run, JobFailuresAreCaptured) {
  const auto r = run(parse_config(R"({"jobs": [
    {"id": "bad", "kind": "theorem1", "manifold": "sphere", "R0": 3.5},
    {"id": "good", "kind": "euclidean", "R0": 1, "h": 0.125}
  ], "assertions": [
    {"job": "bad", "metric": "c_emp", "op": ">=", "value": 0},
    {"job": "good", "metric": "lhs", "op": "near", "value": 1, "tol": 1e-9},
    {"job": "aggregates", "metric": "jobs_ok", "op": "==", "value": 1}
  ]})"));
  const Json& jobs = r.report.at("jobs");
  EXPECT_EQ(jobs[0].at("status"), "error");
  EXPECT_EQ(jobs[0].at("error").at("code"), "chart");
  EXPECT_EQ(jobs[1].at("status"), "ok");
  EXPECT_EQ(r.report.at("aggregates").at("jobs_failed"), Json::array({"bad"}));
  const Json& checks = r.report.at("assertions");
  EXPECT_FALSE(checks[0].at("pass").get<bool>());
  EXPECT_TRUE(checks[0].at("actual").is_null());
  EXPECT_TRUE(checks[1].at("pass").get<bool>());
  EXPECT_TRUE(checks[2].at("pass").get<bool>());
  EXPECT_FALSE(r.assertions_passed);
  EXPECT_FALSE(r.report.at("passed").get<bool>());
}

TEST(Run, AssertionOperatorsAndPaths) {
  const auto r = run(parse_config(R"({"jobs": [
    {"id": "cv", "kind": "convergence", "manifold": "euclidean", "R0": 1, "field": "trig_mix",
     "spacings": [0.25, 0.125]}
  ], "assertions": [
    {"job": "cv", "metric": "orders.0", "op": ">", "value": 1.5},
    {"job": "cv", "metric": "orders.1", "op": "<", "value": 1},
    {"job": "cv", "metric": "field", "op": "==", "value": "trig_mix"},
    {"job": "cv", "metric": "manifold", "op": "!=", "value": "sphere"},
    {"job": "aggregates", "metric": "min_convergence_order", "op": ">=", "value": 1.5}
  ]})"));
  const Json& checks = r.report.at("assertions");
  EXPECT_TRUE(checks[0].at("pass").get<bool>());
  EXPECT_FALSE(checks[1].at("pass").get<bool>());
  EXPECT_TRUE(checks[1].at("actual").is_null());
  EXPECT_TRUE(checks[2].at("pass").get<bool>());
  EXPECT_TRUE(checks[3].at("pass").get<bool>());
  EXPECT_TRUE(checks[4].at("pass").get<bool>());
  EXPECT_FALSE(r.assertions_passed);
}

TEST(Run, Theorem1SuiteStableUnderRefinement) {
  auto suite = [](double h) {
    std::ostringstream os;
    os << R"({"jobs": [)"
       << R"({"kind": "theorem1", "manifold": "euclidean", "R0": 1, "field": "x1", "h": )" << h << "},"
       << R"({"kind": "theorem1", "manifold": "sphere", "R0": 1, "field": "cos_r", "h": )" << h << "},"
       << R"({"kind": "theorem1", "manifold": "hyperbolic", "R0": 1, "field": "quadratic", "h": )" << h << "}"
       << "]}";
    return run(parse_config(os.str())).report.at("aggregates").at("max_c_emp").get<double>();
  };
  const double a = suite(1.0 / 32), b = suite(1.0 / 64);
  EXPECT_LT(std::abs(a - b) / std::max(a, b), 0.1);
}

TEST(Run, WritesReportAndTables) {
  const auto dir = (std::filesystem::temp_directory_path() / "c1bench_test_out").string();
  std::filesystem::remove_all(dir);
  const auto r = run(parse_config(R"({"jobs": [
    {"id": "e", "kind": "euclidean", "R0": 1, "h": 0.125},
    {"id": "cv", "kind": "convergence", "manifold": "euclidean", "R0": 1, "field": "trig_mix", "spacings": [0.25, 0.125]}
  ]})"));
  write_outputs(r, dir);
  EXPECT_EQ(read_file(dir + "/report.json"), r.dump());
  auto header = [&](const std::string& f) {
    std::istringstream is(read_file(dir + "/" + f));
    std::string line;
    std::getline(is, line);
    return line;
  };
  EXPECT_EQ(header("jobs.csv"), "id,kind,status,error_code");
  EXPECT_EQ(header("estimates.csv"), "id,kind,manifold,field,R0,h,epsilon,lhs,rhs_f,rhs_psi,factor,c_emp");
  EXPECT_EQ(header("cv_convergence.csv"), "h,nodes,error,residual,order");
  EXPECT_EQ(header("timings.csv"), "id,kind,seconds");
  std::filesystem::remove_all(dir);
}

TEST(Golden, DefaultSuiteMatchesCommittedReport) {
  const auto c = load_config(kSource + "/configs/default.json");
  const auto first = run(c);
  const auto second = run(c);
  EXPECT_EQ(first.dump(), second.dump());
  EXPECT_TRUE(first.assertions_passed);
  const std::string golden = read_file(kSource + "/tests/golden/default_report.json");
  ASSERT_FALSE(golden.empty());
  EXPECT_TRUE(first.dump() == golden) << "regenerate with: c1bench run configs/default.json --out DIR";
}

TEST(Cli, ExitCodes) {
  const std::string cfg = kSource + "/configs/";
  const auto dir = (std::filesystem::temp_directory_path() / "c1bench_cli_out").string();
  const auto tmp = std::filesystem::temp_directory_path() / "c1bench_cli_cfg.json";
  auto with = [&](const std::string& text) {
    std::ofstream(tmp) << text;
    return tmp.string();
  };
  EXPECT_EQ(cli("list-manifolds"), 0);
  EXPECT_EQ(cli("validate " + cfg + "minimal_theorem1.json"), 0);
  EXPECT_EQ(cli("run " + cfg + "default.json --out " + dir + " --jobs 2"), 0);
  EXPECT_EQ(read_file(dir + "/report.json"), read_file(kSource + "/tests/golden/default_report.json"));
  EXPECT_EQ(cli("run " + with(R"({"kind": "estimate1d", "count": 5})") + " --out " + dir), 0);
  EXPECT_EQ(cli("run " + with(R"({"jobs": [{"id": "e", "kind": "estimate1d", "count": 5}],
    "assertions": [{"job": "e", "metric": "max_ratio", "op": ">", "value": 2}]})") + " --out " + dir), 1);
  EXPECT_EQ(cli("validate " + with("{\"kind\": ")), 2);
  EXPECT_EQ(cli("validate " + with(R"({"kind": "theorem1", "manifold": "klein_bottle", "R0": 1})")), 3);
  EXPECT_EQ(cli("validate " + with(R"({"kind": "theorem1", "manifold": "sphere"})")), 4);
  EXPECT_EQ(cli("validate " + with(R"({"kind": "theorem1", "manifold": "sphere", "R0": 1, "epsilon": -1})")), 5);
  EXPECT_EQ(cli("validate /nonexistent.json"), 6);
  // C1BENCH_OUT supplies the default output directory
  const auto env_dir = (std::filesystem::temp_directory_path() / "c1bench_env_out").string();
  std::filesystem::remove_all(env_dir);
  EXPECT_EQ(cli("run " + with(R"({"kind": "estimate1d", "count": 5})"), "C1BENCH_OUT=" + env_dir), 0);
  EXPECT_TRUE(std::filesystem::exists(env_dir + "/report.json"));
  std::filesystem::remove_all(env_dir);
  std::filesystem::remove_all(dir);
  std::filesystem::remove(tmp);
}
