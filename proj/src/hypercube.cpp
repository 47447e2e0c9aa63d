#include "shpo/hypercube.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "shpo/error.hpp"
#include "shpo/rng.hpp"

namespace shpo {

Configuration::Configuration(std::vector<Sign> values) : values_(std::move(values))
{
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] != 1 && values_[i] != -1) {
            throw InputError("configuration entry " + std::to_string(i) + " is not +1 or -1");
        }
    }
}

Configuration Configuration::filled(std::size_t n, Sign value)
{
    return Configuration(std::vector<Sign>(n, value));
}

Configuration Configuration::parse(std::string_view text)
{
    std::vector<Sign> values;
    values.reserve(text.size());
    for (char c : text) {
        if (c == '+') values.push_back(1);
        else if (c == '-') values.push_back(-1);
        else throw ParseError(std::string("unexpected character '") + c + "' in configuration string");
    }
    return Configuration(std::move(values));
}

Configuration Configuration::from_lex_rank(std::uint64_t rank, std::size_t n)
{
    std::vector<Sign> values(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if ((rank >> (n - 1 - i)) & 1U) values[i] = -1;
    }
    Configuration c;
    c.values_ = std::move(values);
    return c;
}

std::string Configuration::to_string() const
{
    std::string s(values_.size(), '+');
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] < 0) s[i] = '-';
    }
    return s;
}

bool lex_less(const Configuration& a, const Configuration& b)
{
    // +1 before -1 is the reverse of numeric order.
    return std::lexicographical_compare(a.values().begin(), a.values().end(),
                                        b.values().begin(), b.values().end(),
                                        [](Sign l, Sign r) { return l > r; });
}

ParityIndex::ParityIndex(std::initializer_list<Index> members)
    : ParityIndex(std::vector<Index>(members))
{}

ParityIndex::ParityIndex(std::vector<Index> members) : members_(std::move(members))
{
    for (std::size_t i = 1; i < members_.size(); ++i) {
        if (members_[i - 1] >= members_[i]) {
            throw InputError("parity index members must be strictly increasing");
        }
    }
}

std::string ParityIndex::to_string() const
{
    std::ostringstream out;
    out << '{';
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (i) out << ',';
        out << members_[i];
    }
    out << '}';
    return out.str();
}

std::strong_ordering operator<=>(const ParityIndex& a, const ParityIndex& b)
{
    if (auto c = a.degree() <=> b.degree(); c != 0) return c;
    return std::lexicographical_compare_three_way(a.members_.begin(), a.members_.end(),
                                                  b.members_.begin(), b.members_.end());
}

Sign evaluate_parity(const ParityIndex& s, const Configuration& x)
{
    Sign product = 1;
    for (Index i : s.members()) {
        if (i >= x.dimension()) {
            throw DimensionError("parity index " + std::to_string(i) +
                                 " out of range for dimension " + std::to_string(x.dimension()));
        }
        product = static_cast<Sign>(product * x[i]);
    }
    return product;
}

void SparsePolynomial::set(const ParityIndex& s, double coefficient)
{
    if (!s.empty() && s.members().back() >= dimension_) {
        throw DimensionError("monomial " + s.to_string() + " exceeds dimension " +
                             std::to_string(dimension_));
    }
    if (coefficient == 0.0) {
        terms_.erase(s);
    } else {
        terms_[s] = coefficient;
    }
}

double SparsePolynomial::coefficient(const ParityIndex& s) const
{
    auto it = terms_.find(s);
    return it == terms_.end() ? 0.0 : it->second;
}

double SparsePolynomial::l1_norm() const
{
    double sum = 0.0;
    for (const auto& [s, c] : terms_) sum += std::abs(c);
    return sum;
}

std::vector<Index> SparsePolynomial::variables() const
{
    std::vector<Index> vars;
    for (const auto& [s, c] : terms_) {
        vars.insert(vars.end(), s.members().begin(), s.members().end());
    }
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

double SparsePolynomial::evaluate(const Configuration& x) const
{
    if (x.dimension() != dimension_) {
        throw DimensionError("polynomial of dimension " + std::to_string(dimension_) +
                             " evaluated at configuration of dimension " +
                             std::to_string(x.dimension()));
    }
    double sum = 0.0;
    for (const auto& [s, c] : terms_) sum += c * evaluate_parity(s, x);
    return sum;
}

PartialAssignment::PartialAssignment(std::vector<Entry> entries) : entries_(std::move(entries))
{
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i > 0 && entries_[i - 1].first >= entries_[i].first) {
            throw InputError("partial assignment indices must be strictly increasing");
        }
        if (entries_[i].second != 1 && entries_[i].second != -1) {
            throw InputError("partial assignment value is not +1 or -1");
        }
    }
}

PartialAssignment::PartialAssignment(std::span<const Index> indices, std::span<const Sign> values)
{
    if (indices.size() != values.size()) {
        throw DimensionError("partial assignment index and value counts differ");
    }
    std::vector<Entry> entries;
    entries.reserve(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) entries.emplace_back(indices[k], values[k]);
    *this = PartialAssignment(std::move(entries));
}

std::vector<Index> PartialAssignment::indices() const
{
    std::vector<Index> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.first);
    return out;
}

std::string PartialAssignment::to_string() const
{
    std::string s(entries_.size(), '+');
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].second < 0) s[i] = '-';
    }
    return s;
}

Configuration merge_assignment(std::size_t n, const PartialAssignment& z, const PartialAssignment& y)
{
    if (z.size() + y.size() != n) {
        throw PartitionError("assignments cover " + std::to_string(z.size() + y.size()) +
                             " variables, expected " + std::to_string(n));
    }
    std::vector<Sign> values(n, 0);
    for (const auto* part : {&z, &y}) {
        for (const auto& [i, v] : part->entries()) {
            if (i >= n) throw PartitionError("assignment index " + std::to_string(i) + " out of range");
            if (values[i] != 0) throw PartitionError("variable " + std::to_string(i) + " assigned twice");
            values[i] = v;
        }
    }
    return Configuration(std::move(values));
}

double Objective::evaluate(const Configuration& x, std::uint64_t seed, int fidelity) const
{
    if (x.dimension() != dimension()) {
        throw DimensionError("objective of dimension " + std::to_string(dimension()) +
                             " evaluated at configuration of dimension " +
                             std::to_string(x.dimension()));
    }
    if (fidelity < 1) throw InputError("fidelity level must be a positive integer");
    if (fidelity > max_fidelity()) {
        throw InputError("fidelity " + std::to_string(fidelity) + " exceeds the objective's maximum of " +
                         std::to_string(max_fidelity()));
    }
    return do_evaluate(x, seed, fidelity);
}

Configuration Objective::lift(const Configuration& x, std::uint64_t) const
{
    return x;
}

double draw_noise(std::uint64_t seed, double half_width)
{
    if (half_width == 0.0) return 0.0;
    Stream stream(derive_seed(seed, seed_tag::noise));
    return stream.uniform(-half_width, half_width);
}

PolynomialObjective::PolynomialObjective(SparsePolynomial poly, double noise_half_width)
    : poly_(std::move(poly)), noise_(noise_half_width)
{
    if (!(noise_ >= 0.0)) throw InputError("noise half-width must be non-negative");
}

double PolynomialObjective::do_evaluate(const Configuration& x, std::uint64_t seed, int) const
{
    return poly_.evaluate(x) + draw_noise(seed, noise_);
}

void RestrictionLayer::validate(std::size_t n) const
{
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        if (fixed[i] >= n) throw DimensionError("restricted index out of range");
        if (i > 0 && fixed[i - 1] >= fixed[i]) {
            throw InputError("restricted index set must be strictly increasing");
        }
    }
    if (assignments.empty()) throw InputError("restriction layer needs at least one assignment");
    for (const auto& a : assignments) {
        if (a.indices() != fixed) {
            throw PartitionError("restriction assignment does not cover the fixed set exactly");
        }
    }
}

RestrictedObjective::RestrictedObjective(ObjectivePtr parent, RestrictionLayer layer,
                                         std::uint64_t master_seed)
    : parent_(std::move(parent)), layer_(std::move(layer)), master_seed_(master_seed)
{
    const std::size_t n = parent_->dimension();
    layer_.validate(n);
    free_.reserve(n - layer_.fixed.size());
    std::size_t k = 0;
    for (Index i = 0; i < n; ++i) {
        if (k < layer_.fixed.size() && layer_.fixed[k] == i) {
            ++k;
        } else {
            free_.push_back(i);
        }
    }
}

std::size_t RestrictedObjective::choose_assignment(std::uint64_t seed) const
{
    const std::size_t t = layer_.assignments.size();
    if (t == 1) return 0;
    Stream stream(derive_seed(master_seed_, seed_tag::restriction, seed));
    return static_cast<std::size_t>(stream.below(t));
}

Configuration RestrictedObjective::to_parent(const Configuration& x, std::size_t assignment) const
{
    if (x.dimension() != free_.size()) {
        throw DimensionError("restricted objective expects " + std::to_string(free_.size()) +
                             " free variables");
    }
    return merge_assignment(parent_->dimension(), layer_.assignments.at(assignment),
                            PartialAssignment(free_, x.values()));
}

double RestrictedObjective::do_evaluate(const Configuration& x, std::uint64_t seed, int fidelity) const
{
    return parent_->evaluate(to_parent(x, choose_assignment(seed)), seed, fidelity);
}

Configuration RestrictedObjective::lift(const Configuration& x, std::uint64_t seed) const
{
    return parent_->lift(to_parent(x, choose_assignment(seed)), seed);
}

ObjectivePtr restrict_objective(ObjectivePtr f, RestrictionLayer layer, std::uint64_t master_seed)
{
    return std::make_shared<RestrictedObjective>(std::move(f), std::move(layer), master_seed);
}

} // namespace shpo
