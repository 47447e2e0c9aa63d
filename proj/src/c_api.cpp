#include "shpo/shpo.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "shpo/error.hpp"
#include "shpo/experiment.hpp"

struct shpo_objective {
    shpo::BuiltObjective built;
};

namespace {

thread_local std::string last_error;

shpo_status fail(shpo_status status, const char* message)
{
    last_error = message;
    return status;
}

template <class Fn>
shpo_status guarded(Fn&& fn)
{
    try {
        last_error.clear();
        fn();
        return SHPO_OK;
    } catch (const shpo::Error& e) {
        return fail(static_cast<shpo_status>(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(SHPO_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SHPO_INTERNAL, e.what());
    }
}

char* duplicate(const std::string& text)
{
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

void require(const void* p, const char* name)
{
    if (!p) throw shpo::InputError(std::string(name) + " must not be null");
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw shpo::IoError("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace

extern "C" {

const char* shpo_version(void) { return "1.0.0"; }

const char* shpo_last_error(void) { return last_error.c_str(); }

void shpo_string_free(char* s) { std::free(s); }

shpo_status shpo_objective_from_config(const char* config_json, shpo_objective** out)
{
    return guarded([&] {
        require(config_json, "config_json");
        require(out, "out");
        *out = nullptr;
        auto handle = std::make_unique<shpo_objective>();
        handle->built = shpo::build_objective(shpo::parse_objective_config(config_json));
        *out = handle.release();
    });
}

shpo_status shpo_objective_from_spec(const char* spec_json, shpo_objective** out)
{
    return guarded([&] {
        require(spec_json, "spec_json");
        require(out, "out");
        *out = nullptr;
        auto handle = std::make_unique<shpo_objective>();
        handle->built = shpo::load_objective_spec(spec_json);
        *out = handle.release();
    });
}

void shpo_objective_destroy(shpo_objective* objective) { delete objective; }

shpo_status shpo_objective_dimension(const shpo_objective* objective, size_t* out)
{
    return guarded([&] {
        require(objective, "objective");
        require(out, "out");
        *out = objective->built.objective->dimension();
    });
}

shpo_status shpo_objective_evaluate(const shpo_objective* objective, const int8_t* x, size_t n, uint64_t seed,
                                    int fidelity, double* out)
{
    return guarded([&] {
        require(objective, "objective");
        require(out, "out");
        if (n > 0) require(x, "x");
        std::vector<shpo::Sign> values(x, x + n);
        *out = objective->built.objective->evaluate(shpo::Configuration(std::move(values)), seed, fidelity);
    });
}

shpo_status shpo_objective_spec(const shpo_objective* objective, char** out)
{
    return guarded([&] {
        require(objective, "objective");
        require(out, "out");
        *out = duplicate(objective->built.spec_json);
    });
}

shpo_status shpo_run_experiment(const char* config_json, const char* out_dir, const shpo_options* options,
                                char** summary_json)
{
    return guarded([&] {
        require(config_json, "config_json");
        require(out_dir, "out_dir");
        auto config = shpo::parse_experiment_config(config_json);
        if (options && options->has_seed) config.optimizer.seed = options->seed;
        if (options && options->parallel) config.parallel = options->parallel;
        const auto summary = shpo::run_experiment(config, out_dir);
        if (summary_json) *summary_json = duplicate(summary.json);
    });
}

shpo_status shpo_recover(const char* config_json, const char* out_dir, const shpo_options* options,
                         char** recovery_json)
{
    return guarded([&] {
        require(config_json, "config_json");
        require(out_dir, "out_dir");
        auto config = shpo::parse_recover_config(config_json);
        if (options && options->has_seed) config.psr.seed = options->seed;
        if (options && options->parallel) config.parallel = options->parallel;
        const std::string text = shpo::run_recover(config, out_dir);
        if (recovery_json) *recovery_json = duplicate(text);
    });
}

shpo_status shpo_sweep_noise(const char* config_json, const char* out_dir, const shpo_options* options,
                             char** fit_json)
{
    return guarded([&] {
        require(config_json, "config_json");
        require(out_dir, "out_dir");
        auto config = shpo::parse_sweep_config(config_json);
        if (options && options->has_seed) config.psr.seed = options->seed;
        if (options && options->parallel) config.parallel = options->parallel;
        shpo::noise_sweep(config, out_dir);
        if (fit_json) *fit_json = duplicate(read_file(std::filesystem::path(out_dir) / "fit.json"));
    });
}

shpo_status shpo_verify(const char* out_dir, int* ok, char** report_json)
{
    return guarded([&] {
        require(out_dir, "out_dir");
        const auto report = shpo::verify_run(out_dir);
        if (ok) *ok = report.ok ? 1 : 0;
        if (report_json) *report_json = duplicate(report.json());
    });
}

shpo_status shpo_gen_objective(const char* config_json, const char* out_dir, const shpo_options* options,
                               char** spec_json)
{
    return guarded([&] {
        require(config_json, "config_json");
        require(out_dir, "out_dir");
        auto config = shpo::parse_objective_config(config_json);
        if (options && options->has_seed) config.seed = options->seed;
        const std::string text = shpo::gen_objective(config, out_dir);
        if (spec_json) *spec_json = duplicate(text);
    });
}

} // extern "C"
