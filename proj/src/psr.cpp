#include "shpo/psr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "shpo/error.hpp"
#include "shpo/lasso.hpp"
#include "shpo/parallel.hpp"
#include "shpo/rng.hpp"

namespace shpo {

void PsrParams::validate(std::size_t n) const
{
    if (samples < 1) throw InputError("PSR needs at least one sample");
    if (sparsity < 1) throw InputError("PSR sparsity must be at least 1");
    if (degree > n) {
        throw InputError("PSR degree " + std::to_string(degree) + " exceeds dimension " + std::to_string(n));
    }
    if (!(lambda >= 0.0)) throw InputError("PSR lambda must be non-negative");
}

Configuration random_configuration(std::size_t n, std::uint64_t seed)
{
    Stream stream(derive_seed(seed, seed_tag::configuration));
    std::vector<Sign> values(n);
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 64 == 0) bits = stream.next();
        values[i] = (bits & 1U) ? Sign{-1} : Sign{1};
        bits >>= 1;
    }
    return Configuration(std::move(values));
}

std::vector<Sample> draw_samples(const Objective& f, std::size_t count, std::uint64_t seed, unsigned width)
{
    const std::size_t n = f.dimension();
    const int fidelity = f.max_fidelity();
    std::vector<Sample> samples(count);
    parallel_for(count, width, [&](std::size_t i) {
        Sample& s = samples[i];
        s.index = i;
        s.seed = sample_seed(seed, i);
        s.x = random_configuration(n, s.seed);
        s.value = f.evaluate(s.x, s.seed, fidelity);
    });
    return samples;
}

std::vector<WeightedMonomial> top_s_select(std::span<const double> coefficients, const MonomialBasis& basis,
                                           std::size_t s, bool exclude_constant)
{
    if (coefficients.size() != basis.size()) {
        throw DimensionError("coefficient vector does not align with the monomial basis");
    }
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < coefficients.size(); ++j) {
        if (coefficients[j] == 0.0) continue;
        if (exclude_constant && basis.monomials[j].empty()) continue;
        order.push_back(j);
    }
    // Basis is in canonical order, so index order is the tie-break.
    auto by_magnitude = [&](std::size_t a, std::size_t b) {
        const double ma = std::abs(coefficients[a]);
        const double mb = std::abs(coefficients[b]);
        return ma != mb ? ma > mb : a < b;
    };
    const std::size_t keep = std::min(s, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), by_magnitude);
    order.resize(keep);

    std::vector<WeightedMonomial> selected;
    selected.reserve(keep);
    for (std::size_t j : order) selected.push_back({basis.monomials[j], coefficients[j]});
    return selected;
}

PsrResult psr_from_samples(std::vector<Sample> samples, std::size_t n, const PsrParams& params, unsigned width)
{
    params.validate(n);
    if (samples.empty()) throw InputError("PSR needs at least one sample");

    MonomialBasis basis = enumerate_monomials(n, params.degree, params.basis_cap);
    std::vector<Configuration> xs;
    std::vector<double> ys;
    xs.reserve(samples.size());
    ys.reserve(samples.size());
    for (const auto& s : samples) {
        xs.push_back(s.x);
        ys.push_back(s.value);
    }
    const DesignMatrix design(std::move(xs), std::move(basis), DesignMatrix::default_memory_cap, width);

    std::vector<bool> penalized(design.cols(), true);
    penalized[0] = false; // constant column, first in canonical order

    LassoProblem problem{design, ys, params.lambda, penalized, params.tolerance, params.max_sweeps};
    const LassoSolution fit = lasso_fit(problem);

    PsrResult result;
    result.samples = std::move(samples);
    result.intercept = fit.coefficients[0];
    result.lasso_sweeps = fit.sweeps;
    result.lasso_converged = fit.converged;
    result.kkt_residual = fit.kkt_residual;
    result.selected = top_s_select(fit.coefficients, design.basis(), params.sparsity, params.exclude_constant);
    result.leading = top_s_select(fit.coefficients, design.basis(), 3 * params.sparsity, false);

    result.surrogate = SparsePolynomial(n);
    for (const auto& term : result.selected) result.surrogate.set(term.monomial, term.weight);
    result.variables = result.surrogate.variables();
    return result;
}

PsrResult psr(const Objective& f, const PsrParams& params, unsigned width)
{
    params.validate(f.dimension());
    // Fail on an oversized basis before spending any evaluations.
    const auto count = count_monomials(f.dimension(), params.degree);
    if (!count || *count > params.basis_cap) {
        enumerate_monomials(f.dimension(), params.degree, params.basis_cap);
    }
    auto samples = draw_samples(f, params.samples, params.seed, width);
    return psr_from_samples(std::move(samples), f.dimension(), params, width);
}

std::string format_double(double v)
{
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, v);
    if (ec != std::errc{}) throw Error(ErrorCode::internal, "failed to format number");
    return std::string(buffer, end);
}

void write_samples_csv(std::ostream& out, std::span<const Sample> samples)
{
    out << "sample_index,x,value\n";
    for (const auto& s : samples) {
        out << s.index << ',' << s.x.to_string() << ',' << format_double(s.value) << '\n';
    }
}

} // namespace shpo
