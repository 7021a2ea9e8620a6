#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "rmaps/config.hpp"
#include "rmaps/errors.hpp"
#include "rmaps/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int jobs = 1;
    std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides [output] dir)");
    cmd->add_option("--jobs", args.jobs, "worker threads for independent cells");
    cmd->add_option("--seed", args.seed, "override the [mc] seed");
}

rmaps::RunOptions options_of(const CommonArgs& args) {
    rmaps::RunOptions opts;
    opts.out_dir = args.out_dir;
    opts.jobs = args.jobs;
    if (args.seed >= 0) opts.seed = static_cast<std::uint64_t>(args.seed);
    return opts;
}

int report(const rmaps::RunManifest& manifest) {
    for (const auto& a : manifest.assertions)
        std::printf("%s %s: value=%.6g limit=%.6g\n", a.pass ? "PASS" : "FAIL", a.name.c_str(),
                    a.value, a.limit);
    std::printf("outputs: %zu file(s) in %s\n", manifest.outputs.size(),
                manifest.out_dir.c_str());
    return manifest.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"escape rates and metastable densities for randomly perturbed interval maps"};
    app.require_subcommand(1);

    CommonArgs escape_args, qk_args, meta_args, mc_args, dump_args, validate_args;
    std::string dump_kind = "open", dump_format = "both";

    CLI::App* escape = app.add_subcommand("escape", "eps-sweep of the open-system escape ratio");
    add_common(escape, escape_args);
    CLI::App* qk = app.add_subcommand("qk", "q_k correction terms at one eps");
    add_common(qk, qk_args);
    CLI::App* meta = app.add_subcommand("metastable", "stationary-density limit per (c, eps)");
    add_common(meta, meta_args);
    CLI::App* mc = app.add_subcommand("mc", "Monte Carlo oracle (survival or histogram)");
    add_common(mc, mc_args);
    CLI::App* dump = app.add_subcommand("dump-operator", "export the sparse Ulam matrix");
    add_common(dump, dump_args);
    dump->add_option("--kind", dump_kind, "closed | open | averaged");
    dump->add_option("--format", dump_format, "bin | mtx | both");
    CLI::App* validate = app.add_subcommand("validate", "parse and validate a config");
    validate->add_option("--config", validate_args.config_path, "experiment config file")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            rmaps::ExperimentConfig cfg = rmaps::load_config(validate_args.config_path);
            rmaps::validate_config(cfg);
            std::printf("ok: %s (hash %s)\n", validate_args.config_path.c_str(),
                        rmaps::config_hash(cfg).c_str());
            return 0;
        }
        if (escape->parsed() || qk->parsed()) {
            const CommonArgs& args = escape->parsed() ? escape_args : qk_args;
            rmaps::ExperimentConfig cfg = rmaps::load_config(args.config_path);
            return report(rmaps::run_escape(cfg, options_of(args)));
        }
        if (meta->parsed()) {
            rmaps::ExperimentConfig cfg = rmaps::load_config(meta_args.config_path);
            return report(rmaps::run_metastable(cfg, options_of(meta_args)));
        }
        if (mc->parsed()) {
            rmaps::ExperimentConfig cfg = rmaps::load_config(mc_args.config_path);
            return report(rmaps::run_mc(cfg, options_of(mc_args)));
        }
        if (dump->parsed()) {
            rmaps::ExperimentConfig cfg = rmaps::load_config(dump_args.config_path);
            return report(rmaps::run_dump_operator(cfg, options_of(dump_args), dump_kind,
                                                   dump_format));
        }
    } catch (const rmaps::ConfigError& ex) {
        std::fprintf(stderr, "config error: %s\n", ex.what());
        return 2;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 3;
    }
    return 0;
}
