#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace shpo {

using Sign = std::int8_t;
using Index = std::uint32_t;

/// A point of {-1,+1}^n. Variable indices are 0-based throughout the library.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::vector<Sign> values);

    static Configuration filled(std::size_t n, Sign value);
    /// Parses a string of '+' and '-' characters.
    static Configuration parse(std::string_view text);
    /// Point number `rank` in lexicographic order where +1 sorts before -1
    /// and variable 0 is the most significant position.
    static Configuration from_lex_rank(std::uint64_t rank, std::size_t n);

    std::size_t dimension() const noexcept { return values_.size(); }
    Sign operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<const Sign> values() const noexcept { return values_; }

    std::string to_string() const;

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    std::vector<Sign> values_;
};

/// Lexicographic order with +1 before -1.
bool lex_less(const Configuration& a, const Configuration& b);

/// A monomial chi_S: strictly increasing variable indices. The empty set is
/// the constant monomial. Ordered by degree, then lexicographically.
class ParityIndex {
public:
    ParityIndex() = default;
    ParityIndex(std::initializer_list<Index> members);
    explicit ParityIndex(std::vector<Index> members);

    std::size_t degree() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    std::span<const Index> members() const noexcept { return members_; }

    std::string to_string() const;

    friend bool operator==(const ParityIndex&, const ParityIndex&) = default;
    friend std::strong_ordering operator<=>(const ParityIndex& a, const ParityIndex& b);

private:
    std::vector<Index> members_;
};

/// chi_S(x) = prod_{i in S} x_i.
Sign evaluate_parity(const ParityIndex& s, const Configuration& x);

/// Finite map from monomials to nonzero real coefficients.
class SparsePolynomial {
public:
    using Terms = std::map<ParityIndex, double>;

    explicit SparsePolynomial(std::size_t dimension = 0) : dimension_(dimension) {}

    std::size_t dimension() const noexcept { return dimension_; }
    const Terms& terms() const noexcept { return terms_; }
    std::size_t sparsity() const noexcept { return terms_.size(); }

    /// Sets coefficient of s; a zero coefficient removes the term.
    void set(const ParityIndex& s, double coefficient);
    double coefficient(const ParityIndex& s) const;

    double l1_norm() const;
    /// Sorted union of the members of every stored monomial.
    std::vector<Index> variables() const;

    double evaluate(const Configuration& x) const;

    friend bool operator==(const SparsePolynomial&, const SparsePolynomial&) = default;

private:
    std::size_t dimension_;
    Terms terms_;
};

inline double evaluate_polynomial(const SparsePolynomial& p, const Configuration& x)
{
    return p.evaluate(x);
}

/// Sorted (index, sign) pairs covering some subset of the variables.
class PartialAssignment {
public:
    using Entry = std::pair<Index, Sign>;

    PartialAssignment() = default;
    explicit PartialAssignment(std::vector<Entry> entries);
    /// Assigns values[k] to indices[k]; indices must be sorted and unique.
    PartialAssignment(std::span<const Index> indices, std::span<const Sign> values);

    std::span<const Entry> entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    std::vector<Index> indices() const;
    std::string to_string() const;

    friend bool operator==(const PartialAssignment&, const PartialAssignment&) = default;

private:
    std::vector<Entry> entries_;
};

/// Combines assignments over J and its complement into one point of
/// {-1,+1}^n. Throws PartitionError unless z and y cover {0..n-1} exactly
/// once between them.
Configuration merge_assignment(std::size_t n, const PartialAssignment& z, const PartialAssignment& y);

/// Evaluation oracle over {-1,+1}^n.
///
/// Evaluations are keyed by an explicit 64-bit seed (the sample seed) and a
/// fidelity level in [1, max_fidelity()]; identical triples give bit-identical
/// results. Other fidelities throw InputError.
/// Implementations are immutable and safe to evaluate concurrently.
class Objective {
public:
    virtual ~Objective() = default;

    virtual std::size_t dimension() const = 0;
    virtual int max_fidelity() const { return 1; }
    virtual double noise_half_width() const { return 0.0; }

    double evaluate(const Configuration& x, std::uint64_t seed, int fidelity = 1) const;

    /// The configuration of the underlying unrestricted objective that an
    /// evaluation at (x, seed) actually queries. Identity for root objectives.
    virtual Configuration lift(const Configuration& x, std::uint64_t seed) const;
    virtual std::size_t root_dimension() const { return dimension(); }

protected:
    virtual double do_evaluate(const Configuration& x, std::uint64_t seed, int fidelity) const = 0;
};

using ObjectivePtr = std::shared_ptr<const Objective>;

/// Wraps a plain function of x. Seed and fidelity are ignored.
class FunctionObjective final : public Objective {
public:
    FunctionObjective(std::size_t n, std::function<double(const Configuration&)> fn)
        : n_(n), fn_(std::move(fn)) {}

    std::size_t dimension() const override { return n_; }

protected:
    double do_evaluate(const Configuration& x, std::uint64_t, int) const override { return fn_(x); }

private:
    std::size_t n_;
    std::function<double(const Configuration&)> fn_;
};

/// Sparse polynomial plus optional uniform[-A, A] noise keyed by the seed.
class PolynomialObjective final : public Objective {
public:
    explicit PolynomialObjective(SparsePolynomial poly, double noise_half_width = 0.0);

    std::size_t dimension() const override { return poly_.dimension(); }
    double noise_half_width() const override { return noise_; }
    const SparsePolynomial& polynomial() const noexcept { return poly_; }

protected:
    double do_evaluate(const Configuration& x, std::uint64_t seed, int) const override;

private:
    SparsePolynomial poly_;
    double noise_;
};

/// Draws uniform[-half_width, half_width] noise for an evaluation seed.
double draw_noise(std::uint64_t seed, double half_width);

/// One stage's restriction: fixed set J (in the coordinates of the objective
/// being restricted) and t >= 1 candidate assignments over J.
struct RestrictionLayer {
    std::vector<Index> fixed;
    std::vector<PartialAssignment> assignments;
    int stage = 0;

    /// Throws unless every assignment covers exactly `fixed` and t >= 1.
    void validate(std::size_t n) const;
};

/// An objective with the variables of a RestrictionLayer fixed. Each
/// evaluation at sample seed m picks assignment k uniformly from a stream
/// derived from (master_seed, m); with t = 1 the restriction is
/// deterministic.
class RestrictedObjective final : public Objective {
public:
    RestrictedObjective(ObjectivePtr parent, RestrictionLayer layer, std::uint64_t master_seed);

    std::size_t dimension() const override { return free_.size(); }
    int max_fidelity() const override { return parent_->max_fidelity(); }
    double noise_half_width() const override { return parent_->noise_half_width(); }
    std::size_t root_dimension() const override { return parent_->root_dimension(); }
    Configuration lift(const Configuration& x, std::uint64_t seed) const override;

    const RestrictionLayer& layer() const noexcept { return layer_; }
    /// Parent-coordinate index of each free variable.
    std::span<const Index> free_indices() const noexcept { return free_; }

    /// Index of the assignment used for sample seed m.
    std::size_t choose_assignment(std::uint64_t seed) const;
    Configuration to_parent(const Configuration& x, std::size_t assignment) const;

protected:
    double do_evaluate(const Configuration& x, std::uint64_t seed, int fidelity) const override;

private:
    ObjectivePtr parent_;
    RestrictionLayer layer_;
    std::uint64_t master_seed_;
    std::vector<Index> free_;
};

ObjectivePtr restrict_objective(ObjectivePtr f, RestrictionLayer layer, std::uint64_t master_seed);

} // namespace shpo
