#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "shpo/fourier.hpp"
#include "shpo/hypercube.hpp"
#include "shpo/rng.hpp"

namespace shpo {

/// Polynomial sparse recovery settings. Defaults follow the staged
/// optimizer's per-stage defaults.
struct PsrParams {
    std::size_t samples = 300;
    std::size_t sparsity = 5;
    std::size_t degree = 3;
    double lambda = 1.0;
    std::uint64_t seed = 0;
    /// Keep the constant monomial out of the top-s selection.
    bool exclude_constant = true;
    double tolerance = 1e-7;
    int max_sweeps = 10'000;
    std::size_t basis_cap = default_basis_cap;

    void validate(std::size_t n) const;

    friend bool operator==(const PsrParams&, const PsrParams&) = default;
};

struct Sample {
    std::uint64_t index = 0;
    std::uint64_t seed = 0;
    Configuration x;
    double value = 0.0;
};

struct WeightedMonomial {
    ParityIndex monomial;
    double weight = 0.0;

    friend bool operator==(const WeightedMonomial&, const WeightedMonomial&) = default;
};

struct PsrResult {
    /// Surrogate g: the selected monomials with their Lasso coefficients.
    SparsePolynomial surrogate;
    /// J: union of the selected monomials' variables.
    std::vector<Index> variables;
    std::vector<WeightedMonomial> selected;
    std::vector<Sample> samples;
    /// Largest 3s coefficients by magnitude, constant included.
    std::vector<WeightedMonomial> leading;
    double intercept = 0.0;
    int lasso_sweeps = 0;
    bool lasso_converged = false;
    double kkt_residual = 0.0;
};

/// Seed of sample number `index` in a draw keyed by `seed`. The sample's
/// configuration and its evaluation both derive from it.
inline std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index)
{
    return derive_seed(seed, seed_tag::evaluation, index);
}

/// Uniform configuration for a per-sample seed.
Configuration random_configuration(std::size_t n, std::uint64_t seed);

/// T uniform samples evaluated at the objective's maximum fidelity.
/// Output order is by sample index regardless of `width`.
std::vector<Sample> draw_samples(const Objective& f, std::size_t count, std::uint64_t seed, unsigned width = 1);

/// The s largest-magnitude nonzero coefficients, ties by canonical monomial
/// order; may return fewer than s.
std::vector<WeightedMonomial> top_s_select(std::span<const double> coefficients, const MonomialBasis& basis,
                                           std::size_t s, bool exclude_constant);

/// Regression and selection over existing samples.
PsrResult psr_from_samples(std::vector<Sample> samples, std::size_t n, const PsrParams& params,
                           unsigned width = 1);

PsrResult psr(const Objective& f, const PsrParams& params, unsigned width = 1);

/// CSV rows `sample_index,x,value` with a header line.
void write_samples_csv(std::ostream& out, std::span<const Sample> samples);

/// Shortest decimal representation that round-trips.
std::string format_double(double v);

} // namespace shpo
