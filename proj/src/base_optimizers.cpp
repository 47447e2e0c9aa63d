#include "shpo/base_optimizers.hpp"

#include <algorithm>
#include <numeric>

#include "shpo/error.hpp"
#include "shpo/objectives.hpp"
#include "shpo/parallel.hpp"
#include "shpo/psr.hpp"
#include "shpo/rng.hpp"

namespace shpo {

FidelityObjective::FidelityObjective(ObjectivePtr inner, int max_resource)
    : inner_(std::move(inner)), max_resource_(max_resource)
{
    if (max_resource_ < 1) throw InputError("max resource must be a positive integer");
}

std::uint64_t FidelityObjective::draw_seed(std::uint64_t seed, int draw)
{
    return derive_seed(seed, seed_tag::fidelity, static_cast<std::uint64_t>(draw));
}

double FidelityObjective::do_evaluate(const Configuration& x, std::uint64_t seed, int fidelity) const
{
    double sum = 0.0;
    for (int k = 0; k < fidelity; ++k) sum += inner_->evaluate(x, draw_seed(seed, k));
    return sum / fidelity;
}

Configuration FidelityObjective::lift(const Configuration& x, std::uint64_t seed) const
{
    return inner_->lift(x, draw_seed(seed, 0));
}

long long SearchResult::total_resource() const
{
    long long total = 0;
    for (const auto& e : log) total += e.resource;
    return total;
}

namespace {

// Index of the smallest value, ties to the lowest position.
template <class Range, class Key>
std::size_t argmin(const Range& range, Key key)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < range.size(); ++i) {
        if (key(range[i]) < key(range[best])) best = i;
    }
    return best;
}

SearchResult finish(std::string name, std::vector<ArmEvaluation> log)
{
    SearchResult result;
    result.optimizer = std::move(name);
    const std::size_t best = argmin(log, [](const ArmEvaluation& e) { return e.value; });
    result.best = log[best].config;
    result.value = log[best].value;
    result.log = std::move(log);
    return result;
}

SearchResult run_halving(const Objective& f, const SuccessiveHalvingParams& params, std::uint64_t seed,
                         unsigned width, int bracket, std::size_t first_arm_id)
{
    if (params.arms < 1) throw InputError("successive halving needs at least one arm");
    if (params.eta < 2) throw InputError("successive halving needs eta >= 2");
    if (params.min_resource < 1) throw InputError("successive halving needs r_min >= 1");

    const std::size_t n = f.dimension();
    const int cap = f.max_fidelity();
    std::vector<Configuration> arms(params.arms);
    for (std::size_t a = 0; a < params.arms; ++a) {
        arms[a] = random_configuration(n, derive_seed(seed, seed_tag::arm, a));
    }

    std::vector<std::size_t> survivors(params.arms);
    std::iota(survivors.begin(), survivors.end(), std::size_t{0});
    std::vector<ArmEvaluation> log;
    std::size_t keep_divisor = 1;
    long long resource = params.min_resource;

    for (int rung = 0;; ++rung) {
        const int r = static_cast<int>(std::min<long long>(resource, cap));
        std::vector<ArmEvaluation> rung_log(survivors.size());
        parallel_for(survivors.size(), width, [&](std::size_t k) {
            const std::size_t a = survivors[k];
            ArmEvaluation& e = rung_log[k];
            e.bracket = bracket;
            e.rung = rung;
            e.arm = first_arm_id + a;
            e.resource = r;
            e.seed = derive_seed(seed, seed_tag::evaluation, a, static_cast<std::uint64_t>(rung));
            e.config = arms[a];
            e.value = f.evaluate(arms[a], e.seed, r);
        });
        log.insert(log.end(), rung_log.begin(), rung_log.end());

        if (survivors.size() == 1 || r >= cap) {
            const std::size_t best = argmin(rung_log, [](const ArmEvaluation& e) { return e.value; });
            SearchResult result;
            result.optimizer = "sh";
            result.best = rung_log[best].config;
            result.value = rung_log[best].value;
            result.log = std::move(log);
            return result;
        }

        keep_divisor *= static_cast<std::size_t>(params.eta);
        const std::size_t keep = std::max<std::size_t>(1, (params.arms + keep_divisor - 1) / keep_divisor);
        std::vector<std::size_t> order(survivors.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return rung_log[x].value < rung_log[y].value;
        });
        std::vector<std::size_t> next;
        for (std::size_t k = 0; k < std::min(keep, order.size()); ++k) next.push_back(survivors[order[k]]);
        std::sort(next.begin(), next.end());
        survivors = std::move(next);
        resource *= params.eta;
    }
}

} // namespace

SearchResult random_search(const Objective& f, std::size_t budget, std::uint64_t seed, unsigned width)
{
    if (budget < 1) throw InputError("random search budget must be at least 1");
    const std::size_t n = f.dimension();
    const int fidelity = f.max_fidelity();
    std::vector<ArmEvaluation> log(budget);
    parallel_for(budget, width, [&](std::size_t i) {
        ArmEvaluation& e = log[i];
        e.arm = i;
        e.resource = fidelity;
        e.seed = sample_seed(seed, i);
        e.config = random_configuration(n, e.seed);
        e.value = f.evaluate(e.config, e.seed, fidelity);
    });
    return finish("random", std::move(log));
}

SearchResult successive_halving(const Objective& f, const SuccessiveHalvingParams& params, std::uint64_t seed,
                                unsigned width)
{
    return run_halving(f, params, seed, width, 0, 0);
}

std::vector<HyperbandBracket> hyperband_brackets(int max_resource, int eta)
{
    if (eta < 2) throw InputError("hyperband needs eta >= 2");
    if (max_resource < eta) throw InputError("hyperband needs R >= eta");
    int s_max = 0;
    for (long long p = eta; p <= max_resource; p *= eta) ++s_max;

    std::vector<HyperbandBracket> brackets;
    for (int s = s_max; s >= 0; --s) {
        long long eta_s = 1;
        for (int k = 0; k < s; ++k) eta_s *= eta;
        const long long numerator = static_cast<long long>(s_max + 1) * eta_s;
        const auto arms = static_cast<std::size_t>((numerator + s) / (s + 1));
        const int r_min = static_cast<int>(std::max<long long>(1, max_resource / eta_s));
        brackets.push_back({s, arms, r_min});
    }
    return brackets;
}

SearchResult hyperband(const Objective& f, const HyperbandParams& params, std::uint64_t seed, unsigned width)
{
    const auto brackets = hyperband_brackets(params.max_resource, params.eta);
    if (f.max_fidelity() < params.max_resource) {
        throw InputError("hyperband objective supports fidelity up to " + std::to_string(f.max_fidelity()) +
                         ", below R=" + std::to_string(params.max_resource));
    }

    SearchResult result;
    result.optimizer = "hyperband";
    bool have_best = false;
    std::size_t arm_offset = 0;
    for (const auto& b : brackets) {
        SuccessiveHalvingParams sh{b.arms, params.eta, b.min_resource};
        SearchResult bracket = run_halving(f, sh, derive_seed(seed, seed_tag::bracket, static_cast<std::uint64_t>(b.s)),
                                           width, b.s, arm_offset);
        arm_offset += b.arms;
        if (!have_best || bracket.value < result.value) {
            result.best = bracket.best;
            result.value = bracket.value;
            have_best = true;
        }
        result.log.insert(result.log.end(), bracket.log.begin(), bracket.log.end());
    }
    return result;
}

SearchResult exhaustive_search(const Objective& f, std::uint64_t seed, unsigned width)
{
    const std::size_t n = f.dimension();
    if (n > max_bruteforce_dimension) {
        throw LimitError("exhaustive search limited to n <= " + std::to_string(max_bruteforce_dimension));
    }
    const std::size_t points = std::size_t{1} << n;
    const int fidelity = f.max_fidelity();
    std::vector<ArmEvaluation> log(points);
    parallel_for(points, width, [&](std::size_t rank) {
        ArmEvaluation& e = log[rank];
        e.arm = rank;
        e.resource = fidelity;
        e.seed = sample_seed(seed, rank);
        e.config = Configuration::from_lex_rank(rank, n);
        e.value = f.evaluate(e.config, e.seed, fidelity);
    });
    return finish("exhaustive", std::move(log));
}

} // namespace shpo
