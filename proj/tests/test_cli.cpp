#include "run.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sle;
using namespace sle::cli;

namespace {

bool mentions(const std::vector<std::string>& errs, const std::string& s)
{
    for (const auto& e : errs)
        if (e.find(s) != std::string::npos) return true;
    return false;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("minimal sl2 config derives tau")
{
    auto r = parse_config_text(R"({"case": "sl2", "kappa": 2})", Suite::drift_test);
    REQUIRE(r.config);
    CHECK(r.errors.empty());
    CHECK(r.config->path.sl2_tau() == doctest::Approx(1.0));
    CHECK(r.config->scalar_mode == "complex");
    auto obs = resolve_observables(*r.config);
    CHECK(obs.size() == 17);  // sixteen sl2 observables and the BB one
    CHECK(resolved_config(*r.config)["tau"] == 1.0);
}

TEST_CASE("heisenberg weight beyond the annihilator bound is rejected")
{
    auto r = parse_config_text(R"({"case": "heisenberg", "kappa": 4, "lambda": 0.8})", Suite::simulate);
    CHECK_FALSE(r.config);
    CHECK(mentions(r.errors, "lambda"));
}

TEST_CASE("empty config lists the required keys")
{
    auto r = parse_config_text("{}", Suite::drift_test);
    CHECK_FALSE(r.config);
    CHECK(mentions(r.errors, "'case'"));
    CHECK(mentions(r.errors, "'kappa'"));
    // nothing is required for the exact suites
    CHECK(parse_config_text("{}", Suite::algebra_verify).config);
    CHECK(parse_config_text("{}", Suite::symmetry_verify).config);
}

TEST_CASE("unknown keys and keys from other suites are rejected")
{
    auto r = parse_config_text(R"({"case": "sl2", "kappa": 2, "kapa": 3})", Suite::simulate);
    CHECK_FALSE(r.config);
    CHECK(mentions(r.errors, "kapa"));
    CHECK_FALSE(parse_config_text(R"({"degree": 3})", Suite::symmetry_verify).config);
    CHECK_FALSE(parse_config_text(R"({"d_max": 3})", Suite::algebra_verify).config);
    CHECK_FALSE(parse_config_text(R"({"suite": "simulate"})", Suite::algebra_verify).config);
}

TEST_CASE("all errors are reported together")
{
    auto r = parse_config_text(R"({"case": "sl2", "kappa": "two", "dt": -1, "n_paths": 0, "probes": [1.0], "zz": 1})",
                               Suite::drift_test);
    CHECK_FALSE(r.config);
    CHECK(r.errors.size() >= 5);
    CHECK(mentions(r.errors, "kappa"));
    CHECK(mentions(r.errors, "dt"));
    CHECK(mentions(r.errors, "n_paths"));
    CHECK(mentions(r.errors, "zz"));
    CHECK(mentions(r.errors, "probe"));
}

TEST_CASE("malformed json is a config error, not an exception")
{
    auto r = parse_config_text("{\"case\": ", Suite::simulate);
    CHECK_FALSE(r.config);
    CHECK_FALSE(r.errors.empty());
    CHECK_FALSE(parse_config_file("/nonexistent/cfg.json", Suite::simulate).config);
}

TEST_CASE("tau inconsistent with kappa needs intentional_violation")
{
    CHECK_FALSE(parse_config_text(R"({"case": "sl2", "kappa": 2, "tau": 2})", Suite::drift_test).config);
    auto r = parse_config_text(R"({"case": "sl2", "kappa": 2, "tau": 2, "intentional_violation": true})",
                               Suite::drift_test);
    REQUIRE(r.config);
    CHECK(r.config->path.sl2_tau() == 2.0);
}

TEST_CASE("hash and artifacts are deterministic")
{
    const char* text = R"({"case": "sl2", "kappa": 2, "n_paths": 4, "T": 0.01, "dt": 0.001,
                           "sample_times": [0.005, 0.01], "observables": ["sl2"]})";
    auto a = parse_config_text(text, Suite::simulate);
    REQUIRE(a.config);
    auto b = *a.config;
    CHECK(config_hash(*a.config) == config_hash(b));
    b.path.seed = 2;
    CHECK(config_hash(*a.config) != config_hash(b));

    auto dir = std::filesystem::temp_directory_path() / "sle_lab_cli_test";
    std::filesystem::remove_all(dir);
    std::ostringstream log;
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
        ExperimentConfig c = *a.config;
        c.out_dir = (dir / std::to_string(rep)).string();
        RunManifest m = run_suite(c, log);
        CHECK(m.pass());
        REQUIRE(m.files.size() == 1);
        std::string csv = slurp(std::filesystem::path(c.out_dir) / m.files[0]);
        CHECK(csv.rfind("path,sample_time,observable_id,probe,value_re,value_im\n", 0) == 0);
        if (rep == 0) first = csv;
        else CHECK(csv == first);
        CHECK(std::filesystem::exists(std::filesystem::path(c.out_dir) / "manifest.json"));
    }
    std::filesystem::remove_all(dir);
}
