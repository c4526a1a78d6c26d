#include "run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    using namespace sle::cli;
    CLI::App app{"sle-lab: martingale observables of SLE coupled to WZW and free-boson models"};
    std::string suite_arg, config_path, out_dir, sign;
    std::optional<std::uint64_t> seed;
    app.add_option("suite", suite_arg, "algebra-verify | simulate | drift-test | symmetry-verify")->required();
    app.add_option("--config", config_path, "JSON configuration file")->required();
    app.add_option("--seed", seed, "overrides the config seed");
    app.add_option("--out", out_dir, "output directory (default: config output_dir or ./out)");
    app.add_option("--sign-convention", sign, "appC | sec5")->check(CLI::IsMember({"appC", "sec5"}));
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    auto suite = parse_suite(suite_arg);
    if (!suite) {
        std::cerr << "unknown suite '" << suite_arg << "'\n";
        return 2;
    }
    ParseResult pr = parse_config_file(config_path, *suite);
    if (!pr.config) {
        std::cerr << "invalid configuration " << config_path << ":\n";
        for (const auto& e : pr.errors) std::cerr << "  " << e << "\n";
        return 2;
    }
    ExperimentConfig cfg = *pr.config;
    if (seed) {
        cfg.path.seed = *seed;
        cfg.symmetry.seed = static_cast<unsigned>(*seed);
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!sign.empty()) cfg.path.sign = sign == "sec5" ? sle::SignConvention::sec5 : sle::SignConvention::appC;

    try {
        RunManifest m = run_suite(cfg, std::cout);
        std::cout << (m.pass() ? "PASS" : "FAIL") << " " << suite_name(cfg.suite) << "  manifest "
                  << cfg.out_dir << "/manifest.json\n";
        return m.pass() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
