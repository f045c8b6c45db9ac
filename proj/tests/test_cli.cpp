#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "qpw/cli.hpp"

using namespace qpw;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(is.good());
    return std::string((std::istreambuf_iterator<char>(is)),
                       std::istreambuf_iterator<char>());
}

fs::path temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("qpw_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kVaractorConfig = R"({
  "problem": {"d": 1, "g": [0,0,1],
              "f": [{"mode":[0],"re":1.0,"im":0.0},
                    {"mode":[1],"re":1.0,"im":0.0},
                    {"mode":[-1],"re":1.0,"im":0.0}],
              "omega": [1.0], "c0_guess": 1.0},
  "series": {"K": 6},
  "resum": {"L": 2, "M": 2, "eps": 0.05, "t0": 0.0, "t1": 2.0, "dt": 0.5,
            "remainder": {"t": 0.0, "N_min": 2, "N_max": 4,
                          "eps_min": 1e-3, "eps_max": 1e-2, "eps_count": 3}},
  "freq": {"n_max": 4, "tau": 1.0, "dioph_N": 30},
  "dynamics": {"eps": 0.05, "T": 20.0, "sample_dt": 1.0,
               "probe": {"n_samples": 2, "seed": 7, "T_end": 50.0,
                         "converge_tol": 1e-2}},
  "output_dir": "OUTDIR"
})";

std::string config_with_outdir(const std::string& base, const fs::path& dir) {
    std::string text = base;
    std::string key = "OUTDIR";
    text.replace(text.find(key), key.size(), dir.string());
    return text;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("config validation rejects unknown keys and bad values") {
    CHECK_THROWS_AS(parse_config("{\"bogus\": 1}"), ConfigError);
    CHECK_THROWS_AS(parse_config("{\"series\": {\"K\": 4, \"zzz\": 1}}"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("{\"series\": {\"K\": \"ten\"}}"),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_config("{\"problem\": {\"d\": 2, \"omega\": [1.0]}}"),
        ConfigError);
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    RunConfig defaults = parse_config("{}");
    CHECK(defaults.K == 10);
    CHECK(defaults.d == 1);
}

TEST_CASE("series command writes golden first orders") {
    fs::path dir = temp_dir("series");
    RunConfig cfg =
        parse_config(config_with_outdir(kVaractorConfig, dir));
    REQUIRE(cmd_series(cfg) == 0);
    std::string series = slurp(dir / "series.json");
    CHECK(series.find("\"c0\": 1.0") != std::string::npos);
    CHECK(slurp(dir / "growth.csv").find("k,sup_coeff,slack,a1,eps2") == 0);
    CHECK(fs::exists(dir / "resolved_config.json"));
}

TEST_CASE("series command is byte-deterministic") {
    fs::path d1 = temp_dir("det1"), d2 = temp_dir("det2");
    RunConfig c1 = parse_config(config_with_outdir(kVaractorConfig, d1));
    RunConfig c2 = parse_config(config_with_outdir(kVaractorConfig, d2));
    REQUIRE(cmd_series(c1) == 0);
    REQUIRE(cmd_series(c2) == 0);
    CHECK(slurp(d1 / "series.json") == slurp(d2 / "series.json"));
    CHECK(slurp(d1 / "growth.csv") == slurp(d2 / "growth.csv"));
}

TEST_CASE("bryuno command writes summaries") {
    fs::path dir = temp_dir("bryuno");
    std::string text = config_with_outdir(kVaractorConfig, dir);
    RunConfig cfg = parse_config(text);
    REQUIRE(cmd_bryuno(cfg) == 0);
    CHECK(slurp(dir / "bryuno.json").find("\"alphas\"") != std::string::npos);
    CHECK(slurp(dir / "diophantine.json").find("\"revalidated\": true") !=
          std::string::npos);
}

TEST_CASE("resum command writes tables") {
    fs::path dir = temp_dir("resum");
    RunConfig cfg = parse_config(config_with_outdir(kVaractorConfig, dir));
    REQUIRE(cmd_resum(cfg) == 0);
    CHECK(slurp(dir / "resum.csv").find(
              "t,truncated,resummed,quad_err,pole_warning") == 0);
    CHECK(slurp(dir / "remainder.csv").find("N,eps,remainder,q_N") == 0);
}

TEST_CASE("degenerate equilibrium exits with the numerical code") {
    fs::path dir = temp_dir("degen");
    std::string text = config_with_outdir(kVaractorConfig, dir);
    // f0 = 0 puts the root of x^2 at 0 where g' vanishes
    text.replace(text.find("{\"mode\":[0],\"re\":1.0"),
                 std::string("{\"mode\":[0],\"re\":1.0").size(),
                 "{\"mode\":[0],\"re\":0.0");
    fs::path cfg_path = dir / "cfg.json";
    std::ofstream(cfg_path) << text;
    int rc = run_cli({"series", "--config", cfg_path.string()});
    CHECK(rc == 3);
}

TEST_CASE("rational frequency ratio exits with the numerical code") {
    fs::path dir = temp_dir("rational");
    std::string text = R"({
      "problem": {"d": 2, "g": [0,0,1],
                  "f": [{"mode":[0,0],"re":1.0,"im":0.0}],
                  "omega": [1.0, 0.5], "c0_guess": 1.0},
      "output_dir": "OUTDIR"})";
    text = config_with_outdir(text, dir);
    fs::path cfg_path = dir / "cfg.json";
    std::ofstream(cfg_path) << text;
    CHECK(run_cli({"bryuno", "--config", cfg_path.string()}) == 3);
}

TEST_CASE("verify command writes reports for a light check subset") {
    fs::path dir = temp_dir("verify");
    std::string text = config_with_outdir(kVaractorConfig, dir);
    text.insert(text.rfind('}'),
                R"(, "verify": {"checks": ["hand_orders", "borel_propagator"],
                               "heavy": false})");
    RunConfig cfg = parse_config(text);
    REQUIRE(cmd_verify(cfg) == 0);
    std::string verify = slurp(dir / "verify.json");
    CHECK(verify.find("\"all_pass\": true") != std::string::npos);
    CHECK(verify.find("hand_orders") != std::string::npos);
    CHECK(slurp(dir / "trajectory.csv").find("t,x,v") == 0);
    std::string probe = slurp(dir / "probe.json");
    CHECK(probe.find("\"applicable\": true") != std::string::npos);
    CHECK(probe.find("\"n_converged\": 2") != std::string::npos);
}

TEST_CASE("verify command mutation hook fails the tree oracle") {
    fs::path dir = temp_dir("verify_mut");
    std::string text = config_with_outdir(kVaractorConfig, dir);
    text.insert(text.rfind('}'),
                R"(, "verify": {"checks": ["tree_oracle_d1"],
                               "vertex_factor": 1.0, "heavy": false})");
    RunConfig cfg = parse_config(text);
    CHECK(cmd_verify(cfg) == 4);
    CHECK(slurp(dir / "verify.json").find("\"all_pass\": false") !=
          std::string::npos);
}

TEST_CASE("cli flag handling") {
    CHECK(run_cli({}) == 2);
    CHECK(run_cli({"series"}) == 2);
    CHECK(run_cli({"nope", "--config", "x.json"}) == 2);
    CHECK(run_cli({"series", "--config", "/nonexistent/q.json"}) == 2);
}

TEST_SUITE_END();
