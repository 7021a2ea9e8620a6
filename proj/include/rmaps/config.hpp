#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rmaps {

// Flat sectioned experiment description, hand-editable. Unknown sections or
// keys are rejected with file:line locations.
struct MapBlock {
    std::string family = "doubling";  // doubling | metastable | affine
    double c = 1.0;                   // metastable asymmetry
    double omega = 0.0;               // fixed perturbation for standalone maps
    std::string branches;             // affine form "lo:hi:slope:intercept;..."
    double expansion_bound = 0.0;
    std::string context = "open";  // open | metastable
    bool circle = false;
};

struct NoiseBlock {
    std::string kind = "uniform";  // uniform | conditionC | deterministic
    std::optional<double> epsilon;
    int L = 4;
    std::optional<double> upsilon;
};

struct HolesBlock {
    std::string kind = "symmetric";  // symmetric | right_sided
    double z = 0.5;
    bool circle = false;
};

struct GridBlock {
    int N = 1 << 14;
    bool allow_unaligned = false;
    int orbit_depth = 48;
};

struct SweepBlock {
    std::vector<double> eps;
    std::vector<double> c;  // metastable cells
};

struct QkBlock {
    double eps = 0.0;
    int k_max = 10;
};

struct McBlock {
    std::int64_t n_traj = 1000000;
    std::int64_t n_steps = 200;
    std::int64_t burn_in = 10000;
    int bins = 1 << 12;
    std::uint64_t seed = 0;
    std::optional<double> eps;  // defaults to the largest sweep eps
    std::optional<double> c;    // metastable histogram cell
};

struct OutputBlock {
    std::string dir = "out";
};

struct ExperimentConfig {
    MapBlock map;
    std::optional<NoiseBlock> noise;
    std::optional<HolesBlock> holes;
    GridBlock grid;
    std::optional<SweepBlock> sweep;
    std::optional<QkBlock> qk;
    std::optional<McBlock> mc;
    OutputBlock output;
    std::map<std::string, double> acceptance;  // named numeric limits
};

// Parse from text; `origin` names the source in error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "config");
ExperimentConfig load_config(const std::string& path);

// Canonical serialization: fixed section and key order, %.17g numbers.
// parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const ExperimentConfig& cfg);

// FNV-1a over the canonical serialization; stable under re-serialization.
std::string config_hash(const ExperimentConfig& cfg);

// Structural checks shared by every subcommand (positive decreasing eps list,
// known family names, ...). Throws ConfigError naming the field.
void validate_config(const ExperimentConfig& cfg);

}  // namespace rmaps
