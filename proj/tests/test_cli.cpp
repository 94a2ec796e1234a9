#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"

using namespace lincf;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lincf-cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("lincf_test_" + name);
  std::ofstream(p) << text;
  return p;
}

const char* kChain = R"({
  "variables": ["W", "X", "Y"],
  "edges": [{"from": "W", "to": "X", "coeff": 0.5}, {"from": "X", "to": "Y", "coeff": 2.0},
            {"from": "W", "to": "Y", "coeff": 1.0}],
  "disturbances": {"var": 1.0},
  "partition": {"treatments": ["X"], "plan_w": ["W"], "response": "Y"},
  "plan": {"x": [2.0]}
})";

Json parse(const std::string& s) { return Json::parse(s); }

}  // namespace

TEST(Io, ModelRoundTripIsBitExact) {
  for (const auto& fx : fixtures::fleet()) {
    const Json j = model_to_json(fx.sem);
    const LinearSem back = parse_model(parse_json_text(dump_report(j)));
    EXPECT_EQ(back.names, fx.sem.names);
    EXPECT_EQ(back.coeffs, fx.sem.coeffs) << fx.name;
    EXPECT_EQ(back.intercepts, fx.sem.intercepts) << fx.name;
    EXPECT_EQ(back.dist_cov, fx.sem.dist_cov) << fx.name;
  }
}

TEST(Io, EvidenceParsing) {
  const Json in = parse(R"({"evidence": {"point": {"W": 1}, "box": {"Y": ["-inf", 2.5]}}})");
  const auto sem = fixtures::fleet()[0].sem;
  const Evidence ev = parse_evidence(in, sem);
  EXPECT_EQ(ev.point_indices(), (IndexList{0}));
  EXPECT_EQ(ev.box_indices(), (IndexList{2}));
  EXPECT_TRUE(std::isinf(ev.intervals[1].lo));
  EXPECT_THROW(parse_evidence(parse(R"({"evidence": {"box": {"Y": [3, 1]}}})"), sem), Error);
  EXPECT_THROW(parse_evidence(parse(R"({"evidence": {"point": {"Q": 1}}})"), sem), Error);
}

TEST(Io, ReportUsesSeventeenDigits) {
  const Json j = {{"v", 0.1}, {"third", 1.0 / 3.0}};
  const std::string s = dump_report(j);
  EXPECT_NE(s.find("0.10000000000000001"), std::string::npos);
  EXPECT_NE(s.find("0.33333333333333331"), std::string::npos);
  EXPECT_NE(dump_table(j).find("0.333333"), std::string::npos);
  EXPECT_EQ(dump_table(j).find("0.3333333"), std::string::npos);
}

TEST(Cli, ValidateChain) {
  const auto p = temp_file("chain.json", kChain);
  const auto r = run_cli({"validate", "--model", p.string(), "--format", "json"});
  EXPECT_EQ(r.code, 0) << r.err;
  const Json j = parse(r.out);
  EXPECT_EQ(j["stability"]["rho_full"].get<double>(), 0.0);
  EXPECT_TRUE(j["stability"]["stable"].get<bool>());
}

TEST(Cli, UnstableModelExitsNumerical) {
  const auto p = temp_file("unstable.json", R"({"variables": ["X", "Y"], "edges": [["X", "Y", 1.1], ["Y", "X", 1.0]],
    "disturbances": {"var": 1}})");
  const auto r = run_cli({"validate", "--model", p.string(), "--format", "json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NEAR(parse(r.out)["stability"]["rho_full"].get<double>(), std::sqrt(1.1), 1e-12);
  EXPECT_EQ(run_cli({"moments", "--model", p.string()}).code, 2);
}

TEST(Cli, CounterfactualMatchesEffects) {
  const auto p = temp_file("chain_cf.json", kChain);
  const auto cf = run_cli({"counterfactual", "--model", p.string(), "--format", "json"});
  const auto ef = run_cli({"effects", "--model", p.string(), "--format", "json"});
  const auto mo = run_cli({"moments", "--model", p.string(), "--format", "json"});
  ASSERT_EQ(cf.code, 0) << cf.err;
  const double tau = parse(ef.out)["tau_sx"][0][0].get<double>();
  const Json m = parse(mo.out);
  const double mu_y = m["mean"][2].get<double>(), mu_x = m["mean"][1].get<double>();
  EXPECT_NEAR(parse(cf.out)["mean"][0].get<double>(), mu_y + tau * (2.0 - mu_x), 1e-12);
}

TEST(Cli, OptimalPlanTarget) {
  const auto p = temp_file("chain_opt.json", kChain);
  const auto r = run_cli({"optimal-plan", "--model", p.string(), "--target-y", "4", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = parse(r.out);
  EXPECT_NEAR(j["b_star"][0][0].get<double>(), -0.5, 1e-14);
  EXPECT_NEAR(j["x"][0].get<double>(), 2.0, 1e-14);
  EXPECT_NEAR(j["var_y"].get<double>(), 1.0, 1e-14);
  EXPECT_NEAR(j["mean_y"].get<double>(), 4.0, 1e-14);
}

TEST(Cli, GainFromFile) {
  const auto p = temp_file("mediator.json", R"({
    "variables": ["W", "X", "M", "Y"],
    "edges": [["W", "X", 0.5], ["X", "M", 0.8], ["M", "Y", 1.2], ["X", "Y", 0.3]],
    "disturbances": {"var": 1},
    "partition": {"treatments": ["X"], "plan_f": ["M"], "plan_w": ["W"], "response": "Y"}})");
  const auto a = temp_file("gain.json", R"({"a": [[0.25]]})");
  const auto r = run_cli({"optimal-plan", "--model", p.string(), "--gain-a", a.string(), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(parse(r.out)["a"][0][0].get<double>(), 0.25);
  const auto bad = temp_file("gain_bad.json", R"({"a": [[5.0]]})");
  EXPECT_EQ(run_cli({"optimal-plan", "--model", p.string(), "--gain-a", bad.string()}).code, 2);
}

TEST(Cli, StructuredOutputIsByteStable) {
  const auto p = temp_file("chain_sim.json", kChain);
  const std::vector<std::string> args = {"simulate", "--model", p.string(), "--samples", "20000", "--seed", "42",
                                         "--format", "json"};
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SeedPrecedence) {
  const auto p = temp_file("chain_seed.json", std::string(kChain).replace(1, 0, "\"seed\": 9,"));
  const auto file = run_cli({"simulate", "--model", p.string(), "--samples", "5000", "--format", "json"});
  const auto flag = run_cli({"simulate", "--model", p.string(), "--samples", "5000", "--seed", "3", "--format", "json"});
  EXPECT_EQ(parse(file.out)["seed"].get<std::uint64_t>(), 9u);
  EXPECT_EQ(parse(flag.out)["seed"].get<std::uint64_t>(), 3u);
  const auto q = temp_file("chain_noseed.json", kChain);
  ::setenv("LINCF_SEED", "17", 1);
  const auto env = run_cli({"simulate", "--model", q.string(), "--samples", "5000", "--format", "json"});
  ::unsetenv("LINCF_SEED");
  EXPECT_EQ(parse(env.out)["seed"].get<std::uint64_t>(), 17u);
}

TEST(Cli, CompareExitCodes) {
  const auto p = temp_file("chain_cmp.json", kChain);
  const auto ok = run_cli({"compare", "--model", p.string(), "--samples", "200000", "--seed", "1", "--format", "json"});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_TRUE(parse(ok.out)["pass"].get<bool>());
  // an absurd tolerance forces a comparison failure
  const auto bad = run_cli({"compare", "--model", p.string(), "--samples", "200000", "--k-sigma", "1e-9"});
  EXPECT_EQ(bad.code, 3);
}

TEST(Cli, ValidationErrorsHavePayloads) {
  const auto p = temp_file("selfloop.json", R"({"variables": ["X"], "edges": [["X", "X", 0.5]],
    "disturbances": {"var": 1}})");
  const auto r = run_cli({"validate", "--model", p.string()});
  EXPECT_EQ(r.code, 1);
  const Json e = parse(r.err);
  EXPECT_EQ(e["error"], "SelfLoop");
  EXPECT_EQ(e["entity"], "X->X");
  EXPECT_EQ(run_cli({"validate", "--model", "/nonexistent/model.json"}).code, 1);
  const auto junk = temp_file("junk.json", "{ not json");
  const auto j = run_cli({"validate", "--model", junk.string()});
  EXPECT_EQ(j.code, 1);
  EXPECT_EQ(parse(j.err)["error"], "ParseError");
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"validate"}).code, 1);
}

TEST(Cli, DiscreteDisjunctive) {
  const auto p = temp_file("tab.json", R"({"discrete": {
    "treatment": {"name": "X", "domain": [0, 1]}, "outcome": {"name": "Y", "domain": [0, 1]},
    "parents": [{"name": "P", "domain": [0, 1]}], "pr_parents": [0.5, 0.5],
    "pr_x_given_pa": [[0.8, 0.2], [0.2, 0.8]],
    "pr_y_given_x_pa": [[[0.7, 0.3], [0.4, 0.6]], [[0.5, 0.5], [0.1, 0.9]]],
    "region": [1], "y": 1}})");
  const auto r = run_cli({"discrete-disjunctive", "--model", p.string(), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(parse(r.out)["effect"].get<double>(), 0.75, 1e-15);
}

TEST(Cli, OutFileAndTable) {
  const auto p = temp_file("chain_out.json", kChain);
  const fs::path out = fs::temp_directory_path() / "lincf_test_report.txt";
  const auto r = run_cli({"effects", "--model", p.string(), "--out", out.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find("tau_sx"), std::string::npos);
}
