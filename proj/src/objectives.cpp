#include "shpo/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shpo/error.hpp"
#include "shpo/fourier.hpp"
#include "shpo/rng.hpp"

namespace shpo {

namespace {

std::vector<Index> random_subset(Stream& stream, std::size_t n, std::size_t k)
{
    std::vector<Index> members;
    members.reserve(k);
    while (members.size() < k) {
        const auto candidate = static_cast<Index>(stream.below(n));
        if (std::find(members.begin(), members.end(), candidate) == members.end()) members.push_back(candidate);
    }
    std::sort(members.begin(), members.end());
    return members;
}

} // namespace

GeneratedSparse gen_sparse_polynomial_objective(const SparseObjectiveSpec& spec)
{
    if (spec.degree > spec.dimension) throw InputError("sparse objective degree exceeds dimension");
    if (!(spec.coeff_low > 0.0) || !(spec.coeff_high >= spec.coeff_low)) {
        throw InputError("sparse objective needs 0 < coeff_low <= coeff_high");
    }
    const auto count = count_monomials(spec.dimension, spec.degree);
    if (!count || spec.sparsity > *count - 1) {
        throw InputError("cannot place " + std::to_string(spec.sparsity) + " distinct non-constant monomials of degree <= " +
                         std::to_string(spec.degree) + " in dimension " + std::to_string(spec.dimension));
    }

    const MonomialBasis basis = enumerate_monomials(spec.dimension, spec.degree);
    Stream stream(derive_seed(spec.seed, seed_tag::generator));
    SparsePolynomial truth(spec.dimension);
    while (truth.sparsity() < spec.sparsity) {
        const std::size_t j = 1 + static_cast<std::size_t>(stream.below(basis.size() - 1));
        if (truth.coefficient(basis.monomials[j]) != 0.0) continue;
        const double magnitude = stream.uniform(spec.coeff_low, spec.coeff_high);
        truth.set(basis.monomials[j], stream.coin() ? -magnitude : magnitude);
    }
    return {std::make_shared<PolynomialObjective>(truth, spec.noise), truth};
}

double SparseVector::evaluate(const Configuration& x) const
{
    double sum = 0.0;
    for (const auto& t : terms) sum += t.weight * evaluate_parity(t.monomial, x);
    return sum;
}

std::size_t SparseVector::code(const Configuration& x) const
{
    std::size_t c = 0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        if (evaluate_parity(terms[k].monomial, x) > 0) c |= std::size_t{1} << k;
    }
    return c;
}

std::pair<double, double> hierarchical_weight_interval(std::size_t stage)
{
    if (stage < 1 || stage > hierarchical_stages) throw InputError("hierarchical stage must be 1, 2 or 3");
    const double i = static_cast<double>(stage);
    return {10.0 + std::pow(10.0, 1.0 - i), 10.0 + std::pow(10.0, 3.0 - i)};
}

bool operator==(const HierarchicalSpec& a, const HierarchicalSpec& b)
{
    if (a.dimension != b.dimension || a.noise != b.noise || a.seed != b.seed) return false;
    for (std::size_t i = 0; i < hierarchical_stages; ++i) {
        if (a.stages[i].size() != b.stages[i].size()) return false;
        for (std::size_t j = 0; j < a.stages[i].size(); ++j) {
            if (a.stages[i][j].terms != b.stages[i][j].terms) return false;
        }
    }
    return true;
}

HierarchicalSpec generate_hierarchical_spec(std::size_t n, double noise, std::uint64_t seed)
{
    if (n < 3) throw InputError("hierarchical objective needs n >= 3");
    if (!(noise >= 0.0)) throw InputError("noise half-width must be non-negative");

    HierarchicalSpec spec;
    spec.dimension = n;
    spec.noise = noise;
    spec.seed = seed;
    std::size_t vectors = 1;
    for (std::size_t stage = 0; stage < hierarchical_stages; ++stage, vectors *= hierarchical_fanout) {
        const auto [lo, hi] = hierarchical_weight_interval(stage + 1);
        spec.stages[stage].resize(vectors);
        for (std::size_t j = 0; j < vectors; ++j) {
            Stream stream(derive_seed(seed, seed_tag::generator, stage, j));
            auto& vec = spec.stages[stage][j];
            for (std::size_t k = 0; k < hierarchical_terms; ++k) {
                // Degree uniform in {1, 2, 3}; monomials distinct within a vector.
                for (;;) {
                    const std::size_t degree = 1 + static_cast<std::size_t>(stream.below(3));
                    ParityIndex m(random_subset(stream, n, degree));
                    const bool duplicate = std::any_of(vec.terms.begin(), vec.terms.begin() + static_cast<std::ptrdiff_t>(k),
                                                       [&](const WeightedMonomial& t) { return t.monomial == m; });
                    if (duplicate) continue;
                    vec.terms[k] = {std::move(m), stream.uniform(lo, hi)};
                    break;
                }
            }
        }
    }
    return spec;
}

HierarchicalObjective::HierarchicalObjective(HierarchicalSpec spec) : spec_(std::move(spec))
{
    std::size_t expected = 1;
    for (std::size_t i = 0; i < hierarchical_stages; ++i, expected *= hierarchical_fanout) {
        if (spec_.stages[i].size() != expected) {
            throw InputError("hierarchical stage " + std::to_string(i + 1) + " must hold " +
                             std::to_string(expected) + " sparse vectors");
        }
        for (const auto& vec : spec_.stages[i]) {
            for (const auto& t : vec.terms) {
                if (t.monomial.degree() > 3) throw InputError("hierarchical monomial degree exceeds 3");
                if (!t.monomial.empty() && t.monomial.members().back() >= spec_.dimension) {
                    throw DimensionError("hierarchical monomial exceeds dimension");
                }
            }
        }
    }
}

double HierarchicalObjective::clean_value(const Configuration& x) const
{
    const SparseVector& first = spec_.stages[0][0];
    const std::size_t c1 = first.code(x);
    const SparseVector& second = spec_.stages[1][c1];
    const std::size_t c2 = second.code(x);
    const SparseVector& third = spec_.stages[2][c1 * hierarchical_fanout + c2];
    return first.evaluate(x) + second.evaluate(x) + third.evaluate(x);
}

SparsePolynomial HierarchicalObjective::stage_one_polynomial() const
{
    SparsePolynomial p(spec_.dimension);
    for (const auto& t : spec_.stages[0][0].terms) p.set(t.monomial, t.weight);
    return p;
}

double HierarchicalObjective::do_evaluate(const Configuration& x, std::uint64_t seed, int) const
{
    return clean_value(x) + draw_noise(seed, spec_.noise);
}

std::shared_ptr<const HierarchicalObjective> gen_hierarchical_objective(std::size_t n, double noise,
                                                                        std::uint64_t seed)
{
    return std::make_shared<HierarchicalObjective>(generate_hierarchical_spec(n, noise, seed));
}

std::size_t DecisionTreeSpec::leaf_count() const
{
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const Node& node) { return node.variable < 0; }));
}

std::vector<Index> DecisionTreeSpec::variables() const
{
    std::vector<Index> vars;
    for (const auto& node : nodes) {
        if (node.variable >= 0) vars.push_back(static_cast<Index>(node.variable));
    }
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

double DecisionTreeSpec::evaluate(const Configuration& x) const
{
    if (x.dimension() != dimension) throw DimensionError("decision tree evaluated at wrong dimension");
    std::size_t at = 0;
    while (nodes[at].variable >= 0) {
        at = x[static_cast<std::size_t>(nodes[at].variable)] > 0 ? nodes[at].plus : nodes[at].minus;
    }
    return nodes[at].value;
}

DecisionTreeSpec generate_decision_tree_spec(std::size_t n, std::size_t depth, double leaf_range,
                                             bool boolean_leaves, std::uint64_t seed)
{
    if (depth > n) throw InputError("decision tree depth " + std::to_string(depth) + " exceeds dimension " + std::to_string(n));
    if (depth > 20) throw LimitError("decision tree depth above 20");
    if (!(leaf_range >= 0.0)) throw InputError("leaf range must be non-negative");

    DecisionTreeSpec spec;
    spec.dimension = n;
    spec.depth = depth;
    spec.seed = seed;
    Stream stream(derive_seed(seed, seed_tag::generator));

    // Depth-first construction; `path` holds the variables tested above.
    std::vector<Index> path;
    auto build = [&](auto&& self, std::size_t level) -> std::size_t {
        const std::size_t id = spec.nodes.size();
        spec.nodes.emplace_back();
        if (level == depth) {
            double value = boolean_leaves ? (stream.coin() ? -leaf_range : leaf_range)
                                          : stream.uniform(-leaf_range, leaf_range);
            spec.nodes[id].value = value;
            return id;
        }
        Index var;
        do {
            var = static_cast<Index>(stream.below(n));
        } while (std::find(path.begin(), path.end(), var) != path.end());
        spec.nodes[id].variable = static_cast<int>(var);
        path.push_back(var);
        const std::size_t plus = self(self, level + 1);
        const std::size_t minus = self(self, level + 1);
        path.pop_back();
        spec.nodes[id].plus = plus;
        spec.nodes[id].minus = minus;
        return id;
    };
    build(build, 0);
    return spec;
}

DecisionTreeObjective::DecisionTreeObjective(DecisionTreeSpec spec) : spec_(std::move(spec))
{
    if (spec_.nodes.empty()) throw InputError("decision tree has no nodes");
    for (const auto& node : spec_.nodes) {
        if (node.variable >= static_cast<int>(spec_.dimension)) throw DimensionError("decision tree variable out of range");
        if (node.variable >= 0 && (node.plus >= spec_.nodes.size() || node.minus >= spec_.nodes.size())) {
            throw InputError("decision tree child index out of range");
        }
    }
}

std::pair<Configuration, double> global_min_bruteforce(const Objective& f)
{
    const std::size_t n = f.dimension();
    if (n > max_bruteforce_dimension) {
        throw LimitError("brute-force minimum limited to n <= " + std::to_string(max_bruteforce_dimension) +
                         ", got " + std::to_string(n));
    }
    const std::uint64_t points = std::uint64_t{1} << n;
    std::uint64_t best_rank = 0;
    double best = f.evaluate(Configuration::from_lex_rank(0, n), 0);
    for (std::uint64_t rank = 1; rank < points; ++rank) {
        const double v = f.evaluate(Configuration::from_lex_rank(rank, n), 0);
        if (v < best) {
            best = v;
            best_rank = rank;
        }
    }
    return {Configuration::from_lex_rank(best_rank, n), best};
}

} // namespace shpo
