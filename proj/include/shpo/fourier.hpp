#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "shpo/hypercube.hpp"

namespace shpo {

inline constexpr std::size_t default_basis_cap = 5'000'000;

/// All monomials of degree <= d over n variables, in canonical order.
struct MonomialBasis {
    std::size_t dimension = 0;
    std::size_t max_degree = 0;
    std::vector<ParityIndex> monomials;

    std::size_t size() const noexcept { return monomials.size(); }
};

/// sum_{k<=d} C(n, k), or nullopt if it does not fit in 64 bits.
std::optional<std::uint64_t> count_monomials(std::size_t n, std::size_t d);

/// Throws LimitError naming N when the basis would exceed `cap`.
MonomialBasis enumerate_monomials(std::size_t n, std::size_t d, std::size_t cap = default_basis_cap);

/// T x N sign matrix with A(i, j) = chi_{basis[j]}(sample[i]).
///
/// Stored densely column-major, one byte per entry, unless T * N exceeds the
/// memory cap given at construction; then columns are recomputed on demand.
class DesignMatrix {
public:
    static constexpr std::size_t default_memory_cap = std::size_t{1} << 30;

    DesignMatrix(std::vector<Configuration> samples, MonomialBasis basis,
                 std::size_t memory_cap = default_memory_cap, unsigned width = 1);

    /// Arbitrary sign matrix given column-major; has no sample or basis
    /// alignment. Used for solver tests.
    static DesignMatrix from_columns(std::size_t rows, std::size_t cols, std::vector<Sign> column_major);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_dense() const noexcept { return !entries_.empty() || rows_ * cols_ == 0; }

    Sign operator()(std::size_t i, std::size_t j) const;

    /// Dense storage of column j; only valid when is_dense().
    std::span<const Sign> column(std::size_t j) const;
    /// Writes column j into out (size rows()); works in both storage modes.
    void fill_column(std::size_t j, std::span<Sign> out) const;

    const std::vector<Configuration>& samples() const noexcept { return samples_; }
    const MonomialBasis& basis() const noexcept { return basis_; }

private:
    DesignMatrix() = default;

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Sign> entries_;
    std::vector<Configuration> samples_;
    MonomialBasis basis_;
    // Per-sample bitmask of negative coordinates for the matrix-free path.
    std::vector<std::vector<std::uint64_t>> negative_bits_;
};

DesignMatrix design_matrix(std::vector<Configuration> samples, const MonomialBasis& basis,
                           unsigned width = 1);

inline constexpr std::size_t max_exhaustive_dimension = 22;

/// Exact Fourier expansion of a noiseless, fidelity-free objective by
/// exhaustive expectation over all 2^n points (n <= 22). The objective is
/// queried with seed 0. Coefficients below `drop_below` times the largest
/// |f(x)| are treated as zero.
SparsePolynomial full_fourier_transform(const Objective& f, double drop_below = 1e-12);

/// Mean over the whole hypercube of fn(x), by exhaustive scan (n <= 22).
template <class Fn>
double hypercube_mean(std::size_t n, Fn&& fn);

} // namespace shpo

#include "shpo/detail/hypercube_mean.ipp"
