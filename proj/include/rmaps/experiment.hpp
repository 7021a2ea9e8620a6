#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rmaps/config.hpp"
#include "rmaps/escape.hpp"
#include "rmaps/metastable.hpp"

namespace rmaps {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunOptions {
    std::string out_dir;  // overrides [output] dir when non-empty
    int jobs = 1;
    std::optional<std::uint64_t> seed;  // overrides [mc] seed
};

struct Assertion {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double limit = 0.0;
};

struct RunManifest {
    std::string version;
    std::string config_hash;
    std::string created;
    std::string out_dir;
    std::vector<std::string> outputs;  // relative paths, manifest included
    std::vector<Assertion> assertions;

    bool all_pass() const {
        for (const auto& a : assertions)
            if (!a.pass) return false;
        return true;
    }
};

// Build the pieces an escape experiment needs from a parsed config.
PiecewiseMap map_from_config(const ExperimentConfig& cfg);
HoleFamily holes_from_config(const ExperimentConfig& cfg);
std::function<NoiseModel(double)> noise_builder_from_config(const ExperimentConfig& cfg);
EscapeFixture fixture_from_config(const ExperimentConfig& cfg);

// Robust plateau height: median density over cells further than `margin` from
// every hole, the boundary b and the domain endpoints.
std::pair<double, double> plateau_heights(const MetastableReport& rep,
                                          const PerturbedFamily& family, const NoiseModel& noise,
                                          double margin = 0.05);

RunManifest run_escape(const ExperimentConfig& cfg, const RunOptions& opts);
RunManifest run_metastable(const ExperimentConfig& cfg, const RunOptions& opts);
RunManifest run_mc(const ExperimentConfig& cfg, const RunOptions& opts);
RunManifest run_dump_operator(const ExperimentConfig& cfg, const RunOptions& opts,
                              const std::string& kind, const std::string& format);

void write_manifest_json(const RunManifest& manifest, const std::string& path);

}  // namespace rmaps
