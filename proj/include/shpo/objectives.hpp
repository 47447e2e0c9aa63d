#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "shpo/hypercube.hpp"
#include "shpo/psr.hpp"

namespace shpo {

// ---------------------------------------------------------------------------
// Random sparse polynomials
// ---------------------------------------------------------------------------

struct SparseObjectiveSpec {
    std::size_t dimension = 0;
    std::size_t sparsity = 1;
    std::size_t degree = 1;
    double coeff_low = 1.0;
    double coeff_high = 2.0;
    double noise = 0.0;
    std::uint64_t seed = 0;
};

struct GeneratedSparse {
    std::shared_ptr<const PolynomialObjective> objective;
    SparsePolynomial truth;
};

/// s distinct non-constant monomials of degree <= d drawn uniformly from the
/// basis, coefficients uniform in [coeff_low, coeff_high] with a random sign.
GeneratedSparse gen_sparse_polynomial_objective(const SparseObjectiveSpec& spec);

// ---------------------------------------------------------------------------
// Three-stage hierarchical function
// ---------------------------------------------------------------------------

inline constexpr std::size_t hierarchical_stages = 3;
inline constexpr std::size_t hierarchical_terms = 5;
inline constexpr std::size_t hierarchical_fanout = 32;

/// Five weighted monomials. Their signs, read as bits, index the next stage.
struct SparseVector {
    std::array<WeightedMonomial, hierarchical_terms> terms;

    double evaluate(const Configuration& x) const;
    /// Bit k is 1 when monomial k evaluates to +1; term 0 is least significant.
    std::size_t code(const Configuration& x) const;

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

/// Closed weight interval of 1-based stage i: [10 + 10^(1-i), 10 + 10^(3-i)].
std::pair<double, double> hierarchical_weight_interval(std::size_t stage);

struct HierarchicalSpec {
    std::size_t dimension = 0;
    double noise = 0.0;
    std::uint64_t seed = 0;
    /// stages[i] holds 32^i sparse vectors (0-based stage i).
    std::array<std::vector<SparseVector>, hierarchical_stages> stages;

    friend bool operator==(const HierarchicalSpec&, const HierarchicalSpec&);
};

HierarchicalSpec generate_hierarchical_spec(std::size_t n, double noise, std::uint64_t seed);

/// h(x) = s_1(x) + s_{2,c1}(x) + s_{3, 32 c1 + c2}(x) + xi, xi ~ U[-A, A]
/// keyed by the evaluation seed.
class HierarchicalObjective final : public Objective {
public:
    explicit HierarchicalObjective(HierarchicalSpec spec);

    std::size_t dimension() const override { return spec_.dimension; }
    double noise_half_width() const override { return spec_.noise; }
    const HierarchicalSpec& spec() const noexcept { return spec_; }

    double clean_value(const Configuration& x) const;
    /// The single stage-1 sparse vector as a polynomial.
    SparsePolynomial stage_one_polynomial() const;

protected:
    double do_evaluate(const Configuration& x, std::uint64_t seed, int) const override;

private:
    HierarchicalSpec spec_;
};

std::shared_ptr<const HierarchicalObjective> gen_hierarchical_objective(std::size_t n, double noise,
                                                                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Decision trees
// ---------------------------------------------------------------------------

struct DecisionTreeSpec {
    struct Node {
        /// Tested variable, or -1 for a leaf.
        int variable = -1;
        double value = 0.0;
        /// Children for x_variable = +1 and x_variable = -1.
        std::size_t plus = 0;
        std::size_t minus = 0;

        friend bool operator==(const Node&, const Node&) = default;
    };

    std::size_t dimension = 0;
    std::size_t depth = 0;
    std::uint64_t seed = 0;
    /// nodes[0] is the root.
    std::vector<Node> nodes;

    std::size_t leaf_count() const;
    /// Sorted variables tested anywhere in the tree.
    std::vector<Index> variables() const;
    double evaluate(const Configuration& x) const;

    friend bool operator==(const DecisionTreeSpec&, const DecisionTreeSpec&) = default;
};

/// Complete tree of depth D with distinct variables on every root-to-leaf
/// path. Leaves are uniform in [-leaf_range, leaf_range], or exactly
/// +-leaf_range with equal probability when boolean_leaves is set.
DecisionTreeSpec generate_decision_tree_spec(std::size_t n, std::size_t depth, double leaf_range,
                                             bool boolean_leaves, std::uint64_t seed);

class DecisionTreeObjective final : public Objective {
public:
    explicit DecisionTreeObjective(DecisionTreeSpec spec);

    std::size_t dimension() const override { return spec_.dimension; }
    const DecisionTreeSpec& spec() const noexcept { return spec_; }

protected:
    double do_evaluate(const Configuration& x, std::uint64_t, int) const override { return spec_.evaluate(x); }

private:
    DecisionTreeSpec spec_;
};

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

inline constexpr std::size_t max_bruteforce_dimension = 20;

/// Exhaustive minimum of a noiseless objective (seed 0), first point in
/// lexicographic order (+1 before -1) on ties. n <= 20.
std::pair<Configuration, double> global_min_bruteforce(const Objective& f);

} // namespace shpo
