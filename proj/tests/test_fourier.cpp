#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "shpo/error.hpp"
#include "shpo/fourier.hpp"
#include "shpo/objectives.hpp"
#include "shpo/psr.hpp"
#include "shpo/rng.hpp"

using namespace shpo;

namespace {

std::vector<Index> to_index(const std::vector<unsigned>& s) { return {s.begin(), s.end()}; }

double eval_point(const Objective& f, const oracle::Point& p)
{
    return f.evaluate(Configuration(std::vector<Sign>(p.begin(), p.end())), 0);
}

} // namespace

TEST_CASE("basis sizes")
{
    CHECK(enumerate_monomials(4, 2).size() == 11);
    const auto b = enumerate_monomials(5, 0);
    REQUIRE(b.size() == 1);
    CHECK(b.monomials[0].empty());
    CHECK(count_monomials(60, 3).value() == 36051);
    CHECK(count_monomials(60, 3).value() == oracle::basis_size(60, 3));
    CHECK(enumerate_monomials(60, 3).size() == 36051);
    for (std::size_t n = 0; n <= 9; ++n) {
        for (std::size_t d = 0; d <= n; ++d) CHECK(enumerate_monomials(n, d).size() == oracle::basis_size(n, d));
    }
    CHECK_THROWS_AS(enumerate_monomials(60, 3, 1000), LimitError);
    CHECK_THROWS_AS(enumerate_monomials(3, 4), InputError);
}

TEST_CASE("basis is in canonical order without repeats")
{
    const auto b = enumerate_monomials(7, 3);
    for (std::size_t j = 1; j < b.size(); ++j) CHECK(b.monomials[j - 1] < b.monomials[j]);
}

TEST_CASE("design matrix rows")
{
    const auto basis = enumerate_monomials(2, 1);
    const DesignMatrix a({Configuration::parse("++"), Configuration::parse("-+")}, basis);
    CHECK(a(0, 0) == 1);
    CHECK(a(0, 1) == 1);
    CHECK(a(0, 2) == 1);
    CHECK(a(1, 0) == 1);
    CHECK(a(1, 1) == -1);
    CHECK(a(1, 2) == 1);

    SUBCASE("constant column sums to T and matrix-free storage agrees")
    {
        const auto big_basis = enumerate_monomials(9, 3);
        std::vector<Configuration> xs;
        for (std::uint64_t i = 0; i < 40; ++i) xs.push_back(random_configuration(9, sample_seed(3, i)));
        const DesignMatrix dense(xs, big_basis);
        const DesignMatrix lazy(xs, big_basis, 16);
        CHECK(dense.is_dense());
        CHECK_FALSE(lazy.is_dense());
        int sum = 0;
        for (std::size_t i = 0; i < dense.rows(); ++i) sum += dense(i, 0);
        CHECK(sum == 40);
        std::vector<Sign> col(40);
        for (std::size_t j = 0; j < dense.cols(); ++j) {
            lazy.fill_column(j, col);
            for (std::size_t i = 0; i < 40; ++i) {
                CHECK(col[i] == dense(i, j));
                CHECK(dense(i, j) == evaluate_parity(big_basis.monomials[j], xs[i]));
            }
        }
    }

    SUBCASE("parallel construction is identical")
    {
        const auto big_basis = enumerate_monomials(10, 2);
        std::vector<Configuration> xs;
        for (std::uint64_t i = 0; i < 64; ++i) xs.push_back(random_configuration(10, sample_seed(8, i)));
        const DesignMatrix one(xs, big_basis, DesignMatrix::default_memory_cap, 1);
        const DesignMatrix four(xs, big_basis, DesignMatrix::default_memory_cap, 4);
        for (std::size_t j = 0; j < one.cols(); ++j) {
            for (std::size_t i = 0; i < one.rows(); ++i) CHECK(one(i, j) == four(i, j));
        }
    }
}

TEST_CASE("orthonormality of parities is exact for n <= 12")
{
    for (std::size_t n : {1u, 4u, 8u, 12u}) {
        const auto basis = enumerate_monomials(n, std::min<std::size_t>(n, 2));
        for (std::size_t a = 0; a < basis.size(); a += std::max<std::size_t>(1, basis.size() / 9)) {
            for (std::size_t b = 0; b < basis.size(); b += std::max<std::size_t>(1, basis.size() / 11)) {
                const double inner = hypercube_mean(n, [&](const Configuration& x) {
                    return double(evaluate_parity(basis.monomials[a], x) * evaluate_parity(basis.monomials[b], x));
                });
                CHECK(inner == (a == b ? 1.0 : 0.0));
            }
        }
    }
}

TEST_CASE("full Fourier transform")
{
    SUBCASE("constant")
    {
        FunctionObjective f(3, [](const Configuration&) { return 5.0; });
        const auto t = full_fourier_transform(f);
        CHECK(t.sparsity() == 1);
        CHECK(t.coefficient({}) == 5.0);
    }
    SUBCASE("single parity")
    {
        FunctionObjective f(2, [](const Configuration& x) { return double(x[0] * x[1]); });
        const auto t = full_fourier_transform(f);
        CHECK(t.sparsity() == 1);
        CHECK(t.coefficient({0, 1}) == 1.0);
    }
    SUBCASE("majority of three bits against the definition")
    {
        FunctionObjective f(3, [](const Configuration& x) { return x[0] + x[1] + x[2] > 0 ? 1.0 : -1.0; });
        const auto t = full_fourier_transform(f);
        for (const auto& s : oracle::all_subsets(3)) {
            const double expected =
                oracle::fourier_coefficient([&](const oracle::Point& p) { return eval_point(f, p); }, 3, s);
            CHECK(t.coefficient(ParityIndex(to_index(s))) == expected);
        }
        CHECK(t.coefficient({0}) == 0.5);
        CHECK(t.coefficient({1}) == 0.5);
        CHECK(t.coefficient({2}) == 0.5);
        CHECK(t.coefficient({0, 1, 2}) == -0.5);
        CHECK(t.sparsity() == 4);
    }
    SUBCASE("round trip of a hand-evaluated polynomial")
    {
        SparsePolynomial p(3);
        p.set({0}, 2.0);
        p.set({1, 2}, -1.0);
        PolynomialObjective f(p);
        CHECK(full_fourier_transform(f) == p);
        CHECK(f.evaluate(Configuration::parse("-+-"), 0) == -1.0);
    }
    SUBCASE("Parseval at n = 10")
    {
        Stream rng(77);
        std::vector<double> table(1024);
        for (double& v : table) v = std::round(rng.uniform(-8.0, 8.0) * 4.0) / 4.0;
        FunctionObjective f(10, [&](const Configuration& x) {
            std::size_t code = 0;
            for (std::size_t i = 0; i < 10; ++i) code |= std::size_t(x[i] < 0) << i;
            return table[code];
        });
        const auto t = full_fourier_transform(f, 0.0);
        double mass = 0.0;
        for (const auto& [s, c] : t.terms()) mass += c * c;
        const double energy = hypercube_mean(10, [&](const Configuration& x) {
            const double v = f.evaluate(x, 0);
            return v * v;
        });
        // Quarter-integer values keep every term dyadic, so both sides are exact.
        CHECK(mass == energy);
    }
}
