#pragma once

#include "config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sle::cli {

struct RunManifest {
    std::string hash;  // of suite, resolved config and version
    nlohmann::json config;  // resolved
    nlohmann::json input;   // as read from the file
    std::uint64_t seed = 0;
    std::string version;
    double wall_seconds = 0;
    std::vector<std::pair<std::string, bool>> suites;
    std::vector<std::string> files;
    bool pass() const;
    nlohmann::json to_json() const;
};

// Resolved configuration as JSON, including derived values such as tau.
nlohmann::json resolved_config(const ExperimentConfig& c);
std::string config_hash(const ExperimentConfig& c);

// Runs the suite, writes artifacts and manifest.json into c.out_dir. Progress
// and failures go to `log`. Throws std::runtime_error on I/O failures.
RunManifest run_suite(const ExperimentConfig& c, std::ostream& log);

} // namespace sle::cli
