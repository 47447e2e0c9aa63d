// Command-line front end. Talks to the library only through the C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "shpo/shpo.h"

namespace {

constexpr int exit_verify_failed = 1;
constexpr int exit_error = 2;

struct Flags {
    std::string config;
    std::string out = ".";
    std::uint64_t seed = 0;
    unsigned parallel = 0;
    CLI::Option* seed_option = nullptr;
};

bool read_text(const std::string& path, std::string& text)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
    return true;
}

int report(shpo_status status, char* output, bool print)
{
    if (status != SHPO_OK) {
        std::cerr << "error: " << shpo_last_error() << '\n';
        return exit_error;
    }
    if (print && output) std::cout << output;
    shpo_string_free(output);
    return 0;
}

void add_common(CLI::App* cmd, Flags& flags, bool needs_config)
{
    auto* config = cmd->add_option("--config", flags.config, "JSON config file");
    if (needs_config) config->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", flags.out, "output directory")->capture_default_str();
    flags.seed_option = cmd->add_option("--seed", flags.seed, "seed override");
    cmd->add_option("--parallel", flags.parallel, "worker count (overrides the config)")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral hyperparameter optimization over the Boolean hypercube"};
    app.set_version_flag("--version", std::string(shpo_version()));
    app.require_subcommand(1);

    Flags optimize_flags, recover_flags, sweep_flags, verify_flags, gen_flags;
    auto* optimize = app.add_subcommand("optimize", "run an optimizer on an objective");
    add_common(optimize, optimize_flags, true);
    auto* recover = app.add_subcommand("recover", "sparse recovery of an objective's low-degree expansion");
    add_common(recover, recover_flags, true);
    auto* sweep = app.add_subcommand("sweep-noise", "recovery error across noise levels");
    add_common(sweep, sweep_flags, true);
    auto* verify = app.add_subcommand("verify", "recompute summary.json from evaluations.csv");
    verify->add_option("--out", verify_flags.out, "run directory")->capture_default_str();
    auto* gen = app.add_subcommand("gen-objective", "write the full spec of a generated objective");
    add_common(gen, gen_flags, true);

    CLI11_PARSE(app, argc, argv);

    auto options_of = [](const Flags& flags) {
        shpo_options options{};
        options.has_seed = flags.seed_option && flags.seed_option->count() > 0;
        options.seed = flags.seed;
        options.parallel = flags.parallel;
        return options;
    };
    auto config_of = [](const Flags& flags, std::string& text) {
        if (read_text(flags.config, text)) return true;
        std::cerr << "error: cannot read " << flags.config << '\n';
        return false;
    };

    std::string text;
    char* output = nullptr;
    if (optimize->parsed()) {
        if (!config_of(optimize_flags, text)) return exit_error;
        const auto options = options_of(optimize_flags);
        const shpo_status status = shpo_run_experiment(text.c_str(), optimize_flags.out.c_str(), &options, &output);
        return report(status, output, true);
    }
    if (recover->parsed()) {
        if (!config_of(recover_flags, text)) return exit_error;
        const auto options = options_of(recover_flags);
        const shpo_status status = shpo_recover(text.c_str(), recover_flags.out.c_str(), &options, &output);
        return report(status, output, true);
    }
    if (sweep->parsed()) {
        if (!config_of(sweep_flags, text)) return exit_error;
        const auto options = options_of(sweep_flags);
        const shpo_status status = shpo_sweep_noise(text.c_str(), sweep_flags.out.c_str(), &options, &output);
        return report(status, output, true);
    }
    if (verify->parsed()) {
        int ok = 0;
        const shpo_status status = shpo_verify(verify_flags.out.c_str(), &ok, &output);
        const int code = report(status, output, true);
        if (code != 0) return code;
        return ok ? 0 : exit_verify_failed;
    }
    if (gen->parsed()) {
        if (!config_of(gen_flags, text)) return exit_error;
        const auto options = options_of(gen_flags);
        const shpo_status status = shpo_gen_objective(text.c_str(), gen_flags.out.c_str(), &options, &output);
        return report(status, output, false);
    }
    return exit_error;
}
