#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shpo/harmonica.hpp"
#include "shpo/objectives.hpp"

namespace shpo {

struct ObjectiveConfig {
    enum class Kind { hierarchical, sparse, tree, spec_file };

    Kind kind = Kind::hierarchical;
    std::size_t n = 14;
    double noise = 0.0;
    std::uint64_t seed = 0;
    // sparse
    std::size_t sparsity = 5;
    std::size_t degree = 3;
    double coeff_low = 1.0;
    double coeff_high = 2.0;
    // tree
    std::size_t depth = 3;
    double leaf_range = 1.0;
    bool boolean_leaves = true;
    // spec_file
    std::string path;

    friend bool operator==(const ObjectiveConfig&, const ObjectiveConfig&) = default;
};

struct OptimizerConfig {
    enum class Kind { random, successive_halving, hyperband, harmonica_1, harmonica };

    Kind kind = Kind::harmonica;
    std::uint64_t seed = 0;
    // random
    std::size_t budget = 200;
    // successive halving
    SuccessiveHalvingParams halving;
    int max_resource = 8;
    // hyperband
    HyperbandParams hyperband;
    // harmonica-1 and harmonica
    PsrParams psr;
    FillRule fill = FillRule::all_plus;
    int stages = 3;
    std::size_t restriction_size = 4;
    std::size_t collapse_cap = 64;
    BaseOptimizerSpec base;

    friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

struct ExperimentConfig {
    ObjectiveConfig objective;
    OptimizerConfig optimizer;
    std::size_t replications = 1;
    unsigned parallel = 1;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ParseError naming the line (syntax) or the field path (schema).
ExperimentConfig parse_experiment_config(std::string_view json_text);
std::string serialize_experiment_config(const ExperimentConfig& config);

ObjectiveConfig parse_objective_config(std::string_view json_text);

/// A constructed objective plus its full generated spec as JSON text.
struct BuiltObjective {
    ObjectivePtr objective;
    std::string spec_json;
    /// Noiseless polynomial the recovery is measured against, when one exists
    /// (stage-1 vector for hierarchical, ground truth for sparse).
    std::optional<SparsePolynomial> clean_target;
};

BuiltObjective build_objective(const ObjectiveConfig& config);
/// Rebuilds an objective from JSON produced by build_objective.
BuiltObjective load_objective_spec(std::string_view spec_json);

struct ReplicationSummary {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    double best_value = 0.0;
    Configuration best_config;
    std::size_t total_evaluations = 0;
    long long total_resource = 0;
    double wall_time_seconds = 0.0;
};

struct RunSummary {
    std::string optimizer;
    double best_value = 0.0;
    Configuration best_config;
    std::size_t total_evaluations = 0;
    long long total_resource = 0;
    double wall_time_seconds = 0.0;
    double aggregate_min = 0.0;
    double aggregate_mean = 0.0;
    std::vector<ReplicationSummary> replications;
    /// summary.json text as written.
    std::string json;
};

/// Runs the optimizer for every replication and writes evaluations.csv,
/// summary.json and, for staged runs, stages.json into out_dir.
RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Seed of replication r for a master seed.
inline std::uint64_t replication_seed(std::uint64_t master, std::size_t r)
{
    return derive_seed(master, seed_tag::replication, r);
}

inline constexpr const char* evaluations_header = "replication,stage,sample_index,resource,config,value";

struct RecoverConfig {
    ObjectiveConfig objective;
    PsrParams psr;
    unsigned parallel = 1;
};

RecoverConfig parse_recover_config(std::string_view json_text);

/// Bare recovery: writes samples.csv and recovery.json; returns the JSON.
std::string run_recover(const RecoverConfig& config, const std::filesystem::path& out_dir);

struct SweepConfig {
    ObjectiveConfig objective;
    PsrParams psr;
    std::vector<double> levels{0.0, 0.5, 1.0, 2.0, 4.0};
    std::size_t seeds = 10;
    unsigned parallel = 1;
};

SweepConfig parse_sweep_config(std::string_view json_text);

struct SweepRow {
    double noise = 0.0;
    std::size_t seed = 0;
    double error = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double correlation = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    /// Mean error per level, in level order.
    std::vector<double> mean_error;
    /// Least-squares fit of mean error against noise level.
    LineFit fit;
};

inline constexpr std::size_t max_sweep_dimension = 20;

/// For every level and seed: recovery on the clean target plus uniform
/// noise, error = sqrt(hypercube mean of (g - target)^2) computed
/// exhaustively. Writes sweep.csv and fit.json when out_dir is non-empty.
SweepResult noise_sweep(const SweepConfig& config, const std::filesystem::path& out_dir = {});

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct VerifyReport {
    bool ok = true;
    std::vector<std::string> problems;
    std::string json() const;
};

/// Recomputes every number of summary.json from evaluations.csv.
VerifyReport verify_run(const std::filesystem::path& out_dir);

/// Writes objective.json (the full generated spec) and returns its text.
std::string gen_objective(const ObjectiveConfig& config, const std::filesystem::path& out_dir);

} // namespace shpo
