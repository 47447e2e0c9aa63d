#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "shpo/base_optimizers.hpp"
#include "shpo/hypercube.hpp"
#include "shpo/psr.hpp"

namespace shpo {

inline constexpr std::size_t max_enumeration_variables = 25;

struct SurrogateMinimizer {
    PartialAssignment assignment;
    double value = 0.0;
};

/// The t lowest-valued assignments of g over J by exhaustive enumeration,
/// ascending, ties in lexicographic order with +1 first. Returns all 2^|J|
/// assignments when there are fewer than t. Throws LimitError when
/// |J| > 25 and InputError when g uses a variable outside J.
std::vector<SurrogateMinimizer> minimize_sparse_poly(const SparsePolynomial& g, std::span<const Index> fixed,
                                                     std::size_t t);

enum class BaseKind { random, successive_halving, hyperband, exhaustive };

struct BaseOptimizerSpec {
    BaseKind kind = BaseKind::random;
    /// Random search evaluation count.
    std::size_t budget = 200;
    SuccessiveHalvingParams halving;
    /// Fidelity cap R for successive halving.
    int max_resource = 8;
    HyperbandParams hyperband;

    friend bool operator==(const BaseOptimizerSpec&, const BaseOptimizerSpec&) = default;
};

/// Runs the base optimizer on f, wrapping it in a FidelityObjective for the
/// multi-fidelity kinds.
SearchResult run_base_optimizer(const ObjectivePtr& f, const BaseOptimizerSpec& spec, std::uint64_t seed,
                                unsigned width = 1);

enum class FillRule { all_plus, all_minus };

struct HarmonicaParams {
    int stages = 3;
    /// Shared per-stage settings. The seed field is ignored; stage seeds
    /// derive from `seed`.
    PsrParams psr;
    /// Optional per-stage overrides, indexed by 0-based stage.
    std::vector<PsrParams> stage_psr;
    std::size_t restriction_size = 4;
    BaseOptimizerSpec base;
    std::uint64_t seed = 0;
    /// Upper bound on candidate tuples tried when collapsing restrictions.
    std::size_t collapse_cap = 64;

    const PsrParams& stage_params(std::size_t stage) const
    {
        return stage < stage_psr.size() ? stage_psr[stage] : psr;
    }
    void validate() const;
};

/// One true-objective evaluation (or resource-r estimate for
/// multi-fidelity base optimizers) at a full configuration.
struct EvaluationRecord {
    int stage = 0;
    std::uint64_t sample_index = 0;
    int resource = 1;
    Configuration config;
    double value = 0.0;
};

struct StageTrace {
    int stage = 0;
    /// Recovery in the stage's local coordinates.
    PsrResult psr;
    /// Selected monomials in global coordinates.
    std::vector<WeightedMonomial> features;
    /// Fixed variables J in global coordinates.
    std::vector<Index> fixed;
    /// Best t surrogate minimizers, global coordinates.
    std::vector<SurrogateMinimizer> minimizers;
    std::size_t evaluations = 0;
};

struct HarmonicaTrace {
    std::vector<StageTrace> stages;
    /// Global indices left free for the base optimizer.
    std::vector<Index> free_variables;
    SearchResult base;
    std::vector<EvaluationRecord> evaluations;
    Configuration best;
    double best_value = 0.0;
    std::size_t total_evaluations = 0;
    long long total_resource = 0;
};

struct HarmonicaResult {
    Configuration best;
    double value = 0.0;
    HarmonicaTrace trace;
};

/// Single PSR pass, best surrogate minimizer on J, remaining variables set
/// by `fill`, one true evaluation at the result.
HarmonicaResult harmonica_1(const ObjectivePtr& f, const PsrParams& params, FillRule fill = FillRule::all_plus,
                            unsigned width = 1);

/// Staged search: q rounds of recovery and restriction to the t best
/// surrogate minimizers, then the base optimizer on the remaining free
/// variables, then a final pass over candidate tuples on the true objective.
/// The reported value is the best single true evaluation logged.
HarmonicaResult harmonica_q(const ObjectivePtr& f, const HarmonicaParams& params, unsigned width = 1);

/// Mean of f over T fresh uniform samples.
double stage_average_error(const Objective& f, std::size_t samples, std::uint64_t seed, unsigned width = 1);

} // namespace shpo
