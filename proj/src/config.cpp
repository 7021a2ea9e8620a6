#include "rmaps/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rmaps/errors.hpp"

namespace rmaps {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Cursor {
    std::string origin;
    int line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
    }
};

double parse_double(const Cursor& at, const std::string& v) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') at.fail("expected a number, got '" + v + "'");
    return x;
}

std::int64_t parse_int(const Cursor& at, const std::string& v) {
    char* end = nullptr;
    long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') at.fail("expected an integer, got '" + v + "'");
    return x;
}

bool parse_bool(const Cursor& at, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    at.fail("expected true/false, got '" + v + "'");
}

std::vector<double> parse_list(const Cursor& at, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(at, item));
    }
    if (out.empty()) at.fail("expected a comma-separated list of numbers");
    return out;
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        s += fmt(xs[i]);
    }
    return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    Cursor at{origin, 0};
    std::string section;
    bool saw_noise = false, saw_holes = false, saw_sweep = false, saw_qk = false, saw_mc = false;

    std::stringstream ss(text);
    std::string raw;
    while (std::getline(ss, raw)) {
        ++at.line;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') at.fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            static const char* known[] = {"map", "noise", "holes", "grid",      "sweep",
                                          "qk",  "mc",    "output", "acceptance"};
            if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
                    return section == k;
                }) == std::end(known))
                at.fail("unknown section [" + section + "]");
            if (section == "noise") {
                cfg.noise.emplace();
                saw_noise = true;
            } else if (section == "holes") {
                cfg.holes.emplace();
                saw_holes = true;
            } else if (section == "sweep") {
                cfg.sweep.emplace();
                saw_sweep = true;
            } else if (section == "qk") {
                cfg.qk.emplace();
                saw_qk = true;
            } else if (section == "mc") {
                cfg.mc.emplace();
                saw_mc = true;
            }
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) at.fail("expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (section.empty()) at.fail("key '" + key + "' outside any section");
        if (value.empty()) at.fail("empty value for key '" + key + "'");

        if (section == "map") {
            if (key == "family")
                cfg.map.family = value;
            else if (key == "c")
                cfg.map.c = parse_double(at, value);
            else if (key == "omega")
                cfg.map.omega = parse_double(at, value);
            else if (key == "branches")
                cfg.map.branches = value;
            else if (key == "expansion_bound")
                cfg.map.expansion_bound = parse_double(at, value);
            else if (key == "context")
                cfg.map.context = value;
            else if (key == "circle")
                cfg.map.circle = parse_bool(at, value);
            else
                at.fail("unknown key '" + key + "' in [map]");
        } else if (section == "noise") {
            if (key == "kind")
                cfg.noise->kind = value;
            else if (key == "epsilon")
                cfg.noise->epsilon = parse_double(at, value);
            else if (key == "L")
                cfg.noise->L = static_cast<int>(parse_int(at, value));
            else if (key == "upsilon")
                cfg.noise->upsilon = parse_double(at, value);
            else
                at.fail("unknown key '" + key + "' in [noise]");
        } else if (section == "holes") {
            if (key == "kind")
                cfg.holes->kind = value;
            else if (key == "z")
                cfg.holes->z = parse_double(at, value);
            else if (key == "circle")
                cfg.holes->circle = parse_bool(at, value);
            else
                at.fail("unknown key '" + key + "' in [holes]");
        } else if (section == "grid") {
            if (key == "N")
                cfg.grid.N = static_cast<int>(parse_int(at, value));
            else if (key == "allow_unaligned")
                cfg.grid.allow_unaligned = parse_bool(at, value);
            else if (key == "orbit_depth")
                cfg.grid.orbit_depth = static_cast<int>(parse_int(at, value));
            else
                at.fail("unknown key '" + key + "' in [grid]");
        } else if (section == "sweep") {
            if (key == "eps")
                cfg.sweep->eps = parse_list(at, value);
            else if (key == "c")
                cfg.sweep->c = parse_list(at, value);
            else
                at.fail("unknown key '" + key + "' in [sweep]");
        } else if (section == "qk") {
            if (key == "eps")
                cfg.qk->eps = parse_double(at, value);
            else if (key == "k_max")
                cfg.qk->k_max = static_cast<int>(parse_int(at, value));
            else
                at.fail("unknown key '" + key + "' in [qk]");
        } else if (section == "mc") {
            if (key == "n_traj")
                cfg.mc->n_traj = parse_int(at, value);
            else if (key == "n_steps")
                cfg.mc->n_steps = parse_int(at, value);
            else if (key == "burn_in")
                cfg.mc->burn_in = parse_int(at, value);
            else if (key == "bins")
                cfg.mc->bins = static_cast<int>(parse_int(at, value));
            else if (key == "seed")
                cfg.mc->seed = static_cast<std::uint64_t>(parse_int(at, value));
            else if (key == "eps")
                cfg.mc->eps = parse_double(at, value);
            else if (key == "c")
                cfg.mc->c = parse_double(at, value);
            else
                at.fail("unknown key '" + key + "' in [mc]");
        } else if (section == "output") {
            if (key == "dir")
                cfg.output.dir = value;
            else
                at.fail("unknown key '" + key + "' in [output]");
        } else if (section == "acceptance") {
            cfg.acceptance[key] = parse_double(at, value);
        }
    }
    (void)saw_noise;
    (void)saw_holes;
    (void)saw_sweep;
    (void)saw_qk;
    (void)saw_mc;
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string s;
    s += "[map]\n";
    s += "family = " + cfg.map.family + "\n";
    if (cfg.map.family == "metastable") {
        s += "c = " + fmt(cfg.map.c) + "\n";
        s += "omega = " + fmt(cfg.map.omega) + "\n";
    }
    if (cfg.map.family == "affine") {
        s += "branches = " + cfg.map.branches + "\n";
        s += "expansion_bound = " + fmt(cfg.map.expansion_bound) + "\n";
        s += "context = " + cfg.map.context + "\n";
        s += std::string("circle = ") + (cfg.map.circle ? "true" : "false") + "\n";
    }
    if (cfg.noise) {
        s += "[noise]\n";
        s += "kind = " + cfg.noise->kind + "\n";
        if (cfg.noise->epsilon) s += "epsilon = " + fmt(*cfg.noise->epsilon) + "\n";
        s += "L = " + std::to_string(cfg.noise->L) + "\n";
        if (cfg.noise->upsilon) s += "upsilon = " + fmt(*cfg.noise->upsilon) + "\n";
    }
    if (cfg.holes) {
        s += "[holes]\n";
        s += "kind = " + cfg.holes->kind + "\n";
        s += "z = " + fmt(cfg.holes->z) + "\n";
        s += std::string("circle = ") + (cfg.holes->circle ? "true" : "false") + "\n";
    }
    s += "[grid]\n";
    s += "N = " + std::to_string(cfg.grid.N) + "\n";
    s += std::string("allow_unaligned = ") + (cfg.grid.allow_unaligned ? "true" : "false") + "\n";
    s += "orbit_depth = " + std::to_string(cfg.grid.orbit_depth) + "\n";
    if (cfg.sweep) {
        s += "[sweep]\n";
        if (!cfg.sweep->eps.empty()) s += "eps = " + join(cfg.sweep->eps) + "\n";
        if (!cfg.sweep->c.empty()) s += "c = " + join(cfg.sweep->c) + "\n";
    }
    if (cfg.qk) {
        s += "[qk]\n";
        s += "eps = " + fmt(cfg.qk->eps) + "\n";
        s += "k_max = " + std::to_string(cfg.qk->k_max) + "\n";
    }
    if (cfg.mc) {
        s += "[mc]\n";
        s += "n_traj = " + std::to_string(cfg.mc->n_traj) + "\n";
        s += "n_steps = " + std::to_string(cfg.mc->n_steps) + "\n";
        s += "burn_in = " + std::to_string(cfg.mc->burn_in) + "\n";
        s += "bins = " + std::to_string(cfg.mc->bins) + "\n";
        s += "seed = " + std::to_string(cfg.mc->seed) + "\n";
        if (cfg.mc->eps) s += "eps = " + fmt(*cfg.mc->eps) + "\n";
        if (cfg.mc->c) s += "c = " + fmt(*cfg.mc->c) + "\n";
    }
    s += "[output]\n";
    s += "dir = " + cfg.output.dir + "\n";
    if (!cfg.acceptance.empty()) {
        s += "[acceptance]\n";
        for (const auto& [k, v] : cfg.acceptance) s += k + " = " + fmt(v) + "\n";
    }
    return s;
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::string canon = serialize_config(cfg);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void validate_config(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (cfg.map.family != "doubling" && cfg.map.family != "metastable" &&
        cfg.map.family != "affine")
        fail("[map] family must be doubling, metastable or affine (got '" + cfg.map.family + "')");
    if (cfg.map.family == "metastable" && cfg.map.c < 0.0) fail("[map] c must be >= 0");
    if (cfg.noise) {
        const auto& n = *cfg.noise;
        if (n.kind != "uniform" && n.kind != "conditionC" && n.kind != "deterministic")
            fail("[noise] kind must be uniform, conditionC or deterministic");
        if (n.kind == "conditionC" && (!n.upsilon || *n.upsilon <= 1.0))
            fail("[noise] conditionC requires upsilon > 1");
        if (n.L < 1) fail("[noise] L must be >= 1");
        if (n.epsilon && !(*n.epsilon > 0.0)) fail("[noise] epsilon must be positive");
    }
    if (cfg.holes) {
        if (cfg.holes->kind != "symmetric" && cfg.holes->kind != "right_sided")
            fail("[holes] kind must be symmetric or right_sided");
        if (cfg.holes->z < 0.0 || cfg.holes->z >= 1.0) fail("[holes] z must lie in [0,1)");
    }
    if (cfg.grid.N < 2) fail("[grid] N must be >= 2");
    if (cfg.grid.orbit_depth < 0) fail("[grid] orbit_depth must be >= 0");
    if (cfg.sweep) {
        for (double e : cfg.sweep->eps)
            if (!(e > 0.0)) fail("[sweep] eps entries must be positive");
        for (std::size_t i = 1; i < cfg.sweep->eps.size(); ++i)
            if (!(cfg.sweep->eps[i] < cfg.sweep->eps[i - 1]))
                fail("[sweep] eps must be strictly decreasing (entry " + std::to_string(i + 1) +
                     ")");
        for (double c : cfg.sweep->c)
            if (c < 0.0) fail("[sweep] c entries must be >= 0");
    }
    if (cfg.qk && !(cfg.qk->eps > 0.0)) fail("[qk] eps must be positive");
    if (cfg.qk && cfg.qk->k_max < 0) fail("[qk] k_max must be >= 0");
    if (cfg.mc) {
        if (cfg.mc->n_traj < 1) fail("[mc] n_traj must be >= 1");
        if (cfg.mc->n_steps < 1) fail("[mc] n_steps must be >= 1");
        if (cfg.mc->bins < 2) fail("[mc] bins must be >= 2");
    }
    if (cfg.output.dir.empty()) fail("[output] dir must not be empty");
}

}  // namespace rmaps
