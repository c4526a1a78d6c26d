#pragma once

#include "sle/sde.hpp"
#include "sle/verify.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace sle::cli {

enum class Suite { algebra_verify, simulate, drift_test, symmetry_verify };

const char* suite_name(Suite s);
std::optional<Suite> parse_suite(const std::string& s);

struct ExperimentConfig {
    Suite suite = Suite::algebra_verify;
    PathConfig path;
    // simulate / drift-test
    std::size_t n_paths = 1000;
    std::vector<double> sample_times;  // 0 is prepended for drift tests
    std::vector<Complex> probes{Complex(4.0, 0.0)};
    std::vector<std::string> observables;  // groups or explicit ids
    double threshold = 3.0;
    bool residue_identity = false;
    // algebra-verify
    int degree = 4;
    int depth = 4;
    // symmetry-verify
    SymmetryOptions symmetry;
    std::string scalar_mode = "exact";
    std::string out_dir = "out";
    nlohmann::json raw;  // the parsed file, for the manifest echo
};

struct ParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;
};

// Every problem is reported, not just the first.
ParseResult parse_config_text(const std::string& text, Suite suite);
ParseResult parse_config_file(const std::string& path, Suite suite);

// Observable specs for the configured case and probes.
std::vector<ObservableSpec> resolve_observables(const ExperimentConfig& cfg, std::vector<std::string>* errors = nullptr);

} // namespace sle::cli
