#include "shpo/fourier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "shpo/error.hpp"
#include "shpo/parallel.hpp"

namespace shpo {

std::optional<std::uint64_t> count_monomials(std::size_t n, std::size_t d)
{
    std::uint64_t total = 0;
    std::uint64_t binom = 1; // C(n, k)
    for (std::size_t k = 0; k <= std::min(n, d); ++k) {
        if (k > 0) {
            // C(n, k) = C(n, k-1) * (n-k+1) / k, exact at each step.
            const std::uint64_t factor = n - k + 1;
            if (binom > UINT64_MAX / factor) return std::nullopt;
            binom = binom * factor / k;
        }
        if (total > UINT64_MAX - binom) return std::nullopt;
        total += binom;
    }
    return total;
}

MonomialBasis enumerate_monomials(std::size_t n, std::size_t d, std::size_t cap)
{
    if (d > n) throw InputError("degree " + std::to_string(d) + " exceeds dimension " + std::to_string(n));
    const auto count = count_monomials(n, d);
    if (!count || *count > cap) {
        throw LimitError("monomial basis for n=" + std::to_string(n) + ", d=" + std::to_string(d) +
                         " has N=" + (count ? std::to_string(*count) : std::string("overflow")) +
                         " terms, above cap " + std::to_string(cap));
    }

    MonomialBasis basis{n, d, {}};
    basis.monomials.reserve(*count);
    basis.monomials.emplace_back();
    std::vector<Index> combo;
    for (std::size_t k = 1; k <= d; ++k) {
        combo.resize(k);
        for (std::size_t i = 0; i < k; ++i) combo[i] = static_cast<Index>(i);
        for (;;) {
            basis.monomials.emplace_back(combo);
            // Advance to the next k-combination in lexicographic order.
            std::size_t pos = k;
            while (pos > 0 && combo[pos - 1] == n - k + pos - 1) --pos;
            if (pos == 0) break;
            ++combo[pos - 1];
            for (std::size_t i = pos; i < k; ++i) combo[i] = combo[i - 1] + 1;
        }
    }
    return basis;
}

namespace {

std::vector<std::uint64_t> negative_mask(const Configuration& x)
{
    std::vector<std::uint64_t> bits((x.dimension() + 63) / 64, 0);
    for (std::size_t i = 0; i < x.dimension(); ++i) {
        if (x[i] < 0) bits[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    return bits;
}

Sign parity_from_bits(const ParityIndex& s, const std::vector<std::uint64_t>& bits)
{
    unsigned negatives = 0;
    for (Index i : s.members()) negatives += (bits[i / 64] >> (i % 64)) & 1U;
    return (negatives & 1U) ? Sign{-1} : Sign{1};
}

} // namespace

DesignMatrix::DesignMatrix(std::vector<Configuration> samples, MonomialBasis basis,
                           std::size_t memory_cap, unsigned width)
    : rows_(samples.size()), cols_(basis.size()), samples_(std::move(samples)), basis_(std::move(basis))
{
    for (const auto& x : samples_) {
        if (x.dimension() != basis_.dimension) {
            throw DimensionError("sample dimension " + std::to_string(x.dimension()) +
                                 " does not match basis dimension " + std::to_string(basis_.dimension));
        }
    }
    negative_bits_.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) negative_bits_[i] = negative_mask(samples_[i]);

    if (rows_ != 0 && cols_ > memory_cap / rows_) return; // matrix-free

    entries_.resize(rows_ * cols_);
    parallel_for(rows_, width, [&](std::size_t i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            entries_[j * rows_ + i] = parity_from_bits(basis_.monomials[j], negative_bits_[i]);
        }
    });
}

DesignMatrix DesignMatrix::from_columns(std::size_t rows, std::size_t cols, std::vector<Sign> column_major)
{
    if (column_major.size() != rows * cols) throw DimensionError("column data size does not match shape");
    for (Sign v : column_major) {
        if (v != 1 && v != -1) throw InputError("design matrix entries must be +1 or -1");
    }
    DesignMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.entries_ = std::move(column_major);
    return m;
}

Sign DesignMatrix::operator()(std::size_t i, std::size_t j) const
{
    if (!entries_.empty()) return entries_[j * rows_ + i];
    return parity_from_bits(basis_.monomials[j], negative_bits_[i]);
}

std::span<const Sign> DesignMatrix::column(std::size_t j) const
{
    return std::span<const Sign>(entries_).subspan(j * rows_, rows_);
}

void DesignMatrix::fill_column(std::size_t j, std::span<Sign> out) const
{
    if (!entries_.empty()) {
        auto col = column(j);
        std::copy(col.begin(), col.end(), out.begin());
        return;
    }
    for (std::size_t i = 0; i < rows_; ++i) out[i] = parity_from_bits(basis_.monomials[j], negative_bits_[i]);
}

DesignMatrix design_matrix(std::vector<Configuration> samples, const MonomialBasis& basis, unsigned width)
{
    return DesignMatrix(std::move(samples), basis, DesignMatrix::default_memory_cap, width);
}

SparsePolynomial full_fourier_transform(const Objective& f, double drop_below)
{
    const std::size_t n = f.dimension();
    if (n > max_exhaustive_dimension) {
        throw LimitError("full Fourier transform limited to n <= " +
                         std::to_string(max_exhaustive_dimension) + ", got " + std::to_string(n));
    }
    const std::uint64_t points = std::uint64_t{1} << n;
    std::vector<double> values(points);
    double largest = 0.0;
    for (std::uint64_t rank = 0; rank < points; ++rank) {
        values[rank] = f.evaluate(Configuration::from_lex_rank(rank, n), 0);
        largest = std::max(largest, std::abs(values[rank]));
    }

    // In-place Walsh-Hadamard butterfly: values[mask] becomes
    // sum_rank f(rank) * (-1)^popcount(rank & mask).
    for (std::uint64_t half = 1; half < points; half <<= 1) {
        for (std::uint64_t block = 0; block < points; block += 2 * half) {
            for (std::uint64_t k = block; k < block + half; ++k) {
                const double a = values[k];
                const double b = values[k + half];
                values[k] = a + b;
                values[k + half] = a - b;
            }
        }
    }

    SparsePolynomial result(n);
    const double threshold = drop_below * largest;
    for (std::uint64_t mask = 0; mask < points; ++mask) {
        const double coefficient = values[mask] / static_cast<double>(points);
        if (std::abs(coefficient) <= threshold) continue;
        std::vector<Index> members;
        members.reserve(static_cast<std::size_t>(std::popcount(mask)));
        // Rank bit (n-1-i) encodes variable i.
        for (std::size_t i = 0; i < n; ++i) {
            if ((mask >> (n - 1 - i)) & 1U) members.push_back(static_cast<Index>(i));
        }
        result.set(ParityIndex(std::move(members)), coefficient);
    }
    return result;
}

} // namespace shpo
