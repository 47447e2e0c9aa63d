#include "shpo/harmonica.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "shpo/error.hpp"
#include "shpo/parallel.hpp"
#include "shpo/rng.hpp"

namespace shpo {

std::vector<SurrogateMinimizer> minimize_sparse_poly(const SparsePolynomial& g, std::span<const Index> fixed,
                                                     std::size_t t)
{
    const std::size_t m = fixed.size();
    if (m > max_enumeration_variables) {
        throw LimitError("surrogate minimization over " + std::to_string(m) + " variables exceeds cap " +
                         std::to_string(max_enumeration_variables));
    }
    if (t < 1) throw InputError("restriction size must be at least 1");
    for (std::size_t k = 1; k < m; ++k) {
        if (fixed[k - 1] >= fixed[k]) throw InputError("fixed variable set must be strictly increasing");
    }

    // Each term becomes a bitmask over rank positions; position k of J is
    // rank bit (m - 1 - k), so rank order is lexicographic with +1 first.
    double constant = 0.0;
    std::vector<std::pair<std::uint64_t, double>> terms;
    for (const auto& [s, c] : g.terms()) {
        if (s.empty()) {
            constant += c;
            continue;
        }
        std::uint64_t mask = 0;
        for (Index v : s.members()) {
            auto it = std::lower_bound(fixed.begin(), fixed.end(), v);
            if (it == fixed.end() || *it != v) {
                throw InputError("surrogate uses variable " + std::to_string(v) + " outside the fixed set");
            }
            mask |= std::uint64_t{1} << (m - 1 - static_cast<std::size_t>(it - fixed.begin()));
        }
        terms.emplace_back(mask, c);
    }

    using Entry = std::pair<double, std::uint64_t>; // (value, rank), compared lexicographically
    std::vector<Entry> heap; // max-heap of the best t so far
    const std::uint64_t points = std::uint64_t{1} << m;
    for (std::uint64_t rank = 0; rank < points; ++rank) {
        double value = constant;
        for (const auto& [mask, c] : terms) value += (std::popcount(rank & mask) & 1) ? -c : c;
        const Entry entry{value, rank};
        if (heap.size() < t) {
            heap.push_back(entry);
            std::push_heap(heap.begin(), heap.end());
        } else if (entry < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = entry;
            std::push_heap(heap.begin(), heap.end());
        }
    }
    std::sort_heap(heap.begin(), heap.end());

    std::vector<SurrogateMinimizer> out;
    out.reserve(heap.size());
    for (const auto& [value, rank] : heap) {
        const Configuration local = Configuration::from_lex_rank(rank, m);
        out.push_back({PartialAssignment(fixed, local.values()), value});
    }
    return out;
}

SearchResult run_base_optimizer(const ObjectivePtr& f, const BaseOptimizerSpec& spec, std::uint64_t seed,
                                unsigned width)
{
    switch (spec.kind) {
    case BaseKind::random:
        return random_search(*f, spec.budget, seed, width);
    case BaseKind::successive_halving: {
        FidelityObjective fidelity(f, spec.max_resource);
        return successive_halving(fidelity, spec.halving, seed, width);
    }
    case BaseKind::hyperband: {
        FidelityObjective fidelity(f, spec.hyperband.max_resource);
        return hyperband(fidelity, spec.hyperband, seed, width);
    }
    case BaseKind::exhaustive:
        return exhaustive_search(*f, seed, width);
    }
    throw Error(ErrorCode::internal, "unknown base optimizer kind");
}

void HarmonicaParams::validate() const
{
    if (stages < 0) throw InputError("number of stages must be non-negative");
    if (restriction_size < 1) throw InputError("restriction size must be at least 1");
    if (collapse_cap < 1) throw InputError("collapse cap must be at least 1");
}

namespace {

// Base-optimizer log entries as evaluation records over the root space.
void append_base_records(HarmonicaTrace& trace, const Objective& lifted, int stage)
{
    for (std::size_t i = 0; i < trace.base.log.size(); ++i) {
        const auto& e = trace.base.log[i];
        trace.evaluations.push_back({stage, i, e.resource, lifted.lift(e.config, e.seed), e.value});
    }
}

void finalize(HarmonicaTrace& trace)
{
    trace.total_evaluations = trace.evaluations.size();
    trace.total_resource = 0;
    bool have_best = false;
    for (const auto& r : trace.evaluations) {
        trace.total_resource += r.resource;
        if (r.resource != 1) continue;
        if (!have_best || r.value < trace.best_value) {
            trace.best = r.config;
            trace.best_value = r.value;
            have_best = true;
        }
    }
    if (!have_best) throw Error(ErrorCode::internal, "no single true-objective evaluation was logged");
}

std::vector<WeightedMonomial> to_global(const std::vector<WeightedMonomial>& local, std::span<const Index> global_of)
{
    std::vector<WeightedMonomial> out;
    out.reserve(local.size());
    for (const auto& term : local) {
        std::vector<Index> members;
        for (Index v : term.monomial.members()) members.push_back(global_of[v]);
        std::sort(members.begin(), members.end());
        out.push_back({ParityIndex(std::move(members)), term.weight});
    }
    return out;
}

PartialAssignment to_global(const PartialAssignment& local, std::span<const Index> global_of)
{
    std::vector<PartialAssignment::Entry> entries;
    for (const auto& [v, s] : local.entries()) entries.emplace_back(global_of[v], s);
    std::sort(entries.begin(), entries.end());
    return PartialAssignment(std::move(entries));
}

} // namespace

HarmonicaResult harmonica_1(const ObjectivePtr& f, const PsrParams& params, FillRule fill, unsigned width)
{
    HarmonicaResult result;
    HarmonicaTrace& trace = result.trace;
    const std::size_t n = f->dimension();

    StageTrace stage;
    stage.stage = 1;
    stage.psr = psr(*f, params, width);
    for (const auto& s : stage.psr.samples) trace.evaluations.push_back({1, s.index, 1, s.x, s.value});
    stage.evaluations = stage.psr.samples.size();
    stage.features = stage.psr.selected;
    stage.fixed = stage.psr.variables;
    stage.minimizers = minimize_sparse_poly(stage.psr.surrogate, stage.fixed, 1);

    std::vector<Sign> values(n, fill == FillRule::all_plus ? Sign{1} : Sign{-1});
    for (const auto& [v, s] : stage.minimizers.front().assignment.entries()) values[v] = s;
    Configuration x(std::move(values));
    const std::uint64_t seed = derive_seed(params.seed, seed_tag::collapse);
    const double value = f->evaluate(x, seed, f->max_fidelity());
    trace.evaluations.push_back({2, 0, 1, x, value});
    trace.stages.push_back(std::move(stage));

    for (Index i = 0; i < n; ++i) {
        if (!std::binary_search(trace.stages.front().fixed.begin(), trace.stages.front().fixed.end(), i)) {
            trace.free_variables.push_back(i);
        }
    }
    finalize(trace);
    result.best = std::move(x);
    result.value = value;
    return result;
}

HarmonicaResult harmonica_q(const ObjectivePtr& f, const HarmonicaParams& params, unsigned width)
{
    params.validate();
    const std::size_t n = f->dimension();

    HarmonicaResult result;
    HarmonicaTrace& trace = result.trace;
    ObjectivePtr current = f;
    std::vector<Index> global_of(n);
    std::iota(global_of.begin(), global_of.end(), Index{0});

    for (int i = 0; i < params.stages; ++i) {
        if (current->dimension() == 0) break;
        PsrParams stage_params = params.stage_params(static_cast<std::size_t>(i));
        stage_params.seed = derive_seed(params.seed, seed_tag::stage, static_cast<std::uint64_t>(i));
        stage_params.degree = std::min(stage_params.degree, current->dimension());

        StageTrace stage;
        stage.stage = i + 1;
        stage.psr = psr(*current, stage_params, width);
        for (const auto& s : stage.psr.samples) {
            trace.evaluations.push_back({stage.stage, s.index, 1, current->lift(s.x, s.seed), s.value});
        }
        stage.evaluations = stage.psr.samples.size();

        if (stage.psr.selected.empty()) {
            trace.stages.push_back(std::move(stage));
            break;
        }

        const std::vector<Index>& local_fixed = stage.psr.variables;
        auto minimizers = minimize_sparse_poly(stage.psr.surrogate, local_fixed, params.restriction_size);

        RestrictionLayer layer;
        layer.fixed = local_fixed;
        layer.stage = stage.stage;
        for (const auto& m : minimizers) layer.assignments.push_back(m.assignment);

        stage.features = to_global(stage.psr.selected, global_of);
        for (Index v : local_fixed) stage.fixed.push_back(global_of[v]);
        std::sort(stage.fixed.begin(), stage.fixed.end());
        for (const auto& m : minimizers) stage.minimizers.push_back({to_global(m.assignment, global_of), m.value});

        auto restricted = std::make_shared<RestrictedObjective>(
            current, std::move(layer), derive_seed(params.seed, seed_tag::restriction, static_cast<std::uint64_t>(i)));
        std::vector<Index> next_global;
        for (Index v : restricted->free_indices()) next_global.push_back(global_of[v]);
        global_of = std::move(next_global);
        current = std::move(restricted);
        trace.stages.push_back(std::move(stage));
    }

    std::size_t layers = 0;
    for (const auto& s : trace.stages) layers += s.minimizers.empty() ? 0 : 1;
    const int base_stage = static_cast<int>(trace.stages.size()) + 1;
    trace.free_variables = global_of;

    const std::uint64_t base_seed = derive_seed(params.seed, seed_tag::base);
    trace.base = run_base_optimizer(current, params.base, base_seed, width);
    if (params.base.kind == BaseKind::successive_halving || params.base.kind == BaseKind::hyperband) {
        const int r = params.base.kind == BaseKind::hyperband ? params.base.hyperband.max_resource
                                                              : params.base.max_resource;
        append_base_records(trace, FidelityObjective(current, r), base_stage);
    } else {
        append_base_records(trace, *current, base_stage);
    }

    const bool single_draw_base = params.base.kind == BaseKind::random || params.base.kind == BaseKind::exhaustive;
    if (layers > 0 || !single_draw_base) {
        // Candidate tuples: the top c assignments of every layer, with c the
        // largest count keeping c^layers within the cap.
        std::size_t per_layer = 1;
        if (layers > 0) {
            while (true) {
                const double next = std::pow(static_cast<double>(per_layer + 1), static_cast<double>(layers));
                if (next > static_cast<double>(params.collapse_cap) || per_layer + 1 > params.restriction_size) break;
                ++per_layer;
            }
        }
        std::vector<const StageTrace*> restricting;
        for (const auto& s : trace.stages) {
            if (!s.minimizers.empty()) restricting.push_back(&s);
        }
        std::vector<std::size_t> radix;
        std::size_t combos = 1;
        for (const auto* s : restricting) {
            radix.push_back(std::min(per_layer, s->minimizers.size()));
            combos *= radix.back();
        }

        std::vector<Sign> base_values(n, 0);
        for (std::size_t k = 0; k < trace.free_variables.size(); ++k) {
            base_values[trace.free_variables[k]] = trace.base.best[k];
        }
        std::vector<EvaluationRecord> collapse(combos);
        parallel_for(combos, width, [&](std::size_t c) {
            std::vector<Sign> values = base_values;
            std::size_t rest = c;
            for (std::size_t l = restricting.size(); l-- > 0;) {
                const std::size_t pick = rest % radix[l];
                rest /= radix[l];
                for (const auto& [v, s] : restricting[l]->minimizers[pick].assignment.entries()) values[v] = s;
            }
            Configuration x(std::move(values));
            const std::uint64_t seed = derive_seed(params.seed, seed_tag::collapse, c);
            const double value = f->evaluate(x, seed, f->max_fidelity());
            collapse[c] = {base_stage + 1, c, 1, std::move(x), value};
        });
        trace.evaluations.insert(trace.evaluations.end(), collapse.begin(), collapse.end());
    }

    finalize(trace);
    result.best = trace.best;
    result.value = trace.best_value;
    return result;
}

double stage_average_error(const Objective& f, std::size_t samples, std::uint64_t seed, unsigned width)
{
    if (samples < 1) throw InputError("stage average needs at least one sample");
    const auto drawn = draw_samples(f, samples, seed, width);
    double sum = 0.0;
    for (const auto& s : drawn) sum += s.value;
    return sum / static_cast<double>(samples);
}

} // namespace shpo
