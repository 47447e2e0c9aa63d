#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "shpo/hypercube.hpp"

namespace shpo {

/// Multi-fidelity view of a fidelity-free objective: evaluating at resource
/// r returns the mean of r independent draws, so the estimate's variance
/// shrinks as r grows. Resource `max_resource` is the highest fidelity.
class FidelityObjective final : public Objective {
public:
    FidelityObjective(ObjectivePtr inner, int max_resource);

    std::size_t dimension() const override { return inner_->dimension(); }
    int max_fidelity() const override { return max_resource_; }
    double noise_half_width() const override { return inner_->noise_half_width(); }
    std::size_t root_dimension() const override { return inner_->root_dimension(); }
    /// Configuration queried by the first of the averaged draws.
    Configuration lift(const Configuration& x, std::uint64_t seed) const override;

    static std::uint64_t draw_seed(std::uint64_t seed, int draw);

protected:
    double do_evaluate(const Configuration& x, std::uint64_t seed, int fidelity) const override;

private:
    ObjectivePtr inner_;
    int max_resource_;
};

/// One arm evaluation. For random search bracket and rung are 0.
struct ArmEvaluation {
    int bracket = 0;
    int rung = 0;
    std::size_t arm = 0;
    int resource = 1;
    std::uint64_t seed = 0;
    Configuration config;
    double value = 0.0;
};

struct SearchResult {
    std::string optimizer;
    Configuration best;
    double value = 0.0;
    std::vector<ArmEvaluation> log;

    long long total_resource() const;
};

/// B uniform configurations at the objective's maximum fidelity.
SearchResult random_search(const Objective& f, std::size_t budget, std::uint64_t seed, unsigned width = 1);

struct SuccessiveHalvingParams {
    std::size_t arms = 8;
    int eta = 2;
    int min_resource = 1;

    friend bool operator==(const SuccessiveHalvingParams&, const SuccessiveHalvingParams&) = default;
};

/// Rung k evaluates ceil(n0 / eta^k) arms at min(r_min * eta^k, R) resource,
/// where R is the objective's max fidelity. Survivors are the smallest
/// estimates, ties by arm index. Ends when one arm remains or when a rung
/// has run at R; the winner is the best arm of the last rung.
SearchResult successive_halving(const Objective& f, const SuccessiveHalvingParams& params, std::uint64_t seed,
                                unsigned width = 1);

struct HyperbandParams {
    int max_resource = 27;
    int eta = 3;

    friend bool operator==(const HyperbandParams&, const HyperbandParams&) = default;
};

struct HyperbandBracket {
    int s = 0;
    std::size_t arms = 0;
    int min_resource = 1;
};

/// Brackets s = s_max..0 with s_max = floor(log_eta R),
/// n0 = ceil((s_max + 1) eta^s / (s + 1)), r_min = floor(R / eta^s).
std::vector<HyperbandBracket> hyperband_brackets(int max_resource, int eta);

/// Runs each bracket's successive halving on a FidelityObjective-style
/// objective whose max fidelity is at least R; returns the best winner.
SearchResult hyperband(const Objective& f, const HyperbandParams& params, std::uint64_t seed, unsigned width = 1);

/// Every point of a small free space (n <= 20), evaluated at max fidelity.
SearchResult exhaustive_search(const Objective& f, std::uint64_t seed, unsigned width = 1);

} // namespace shpo
