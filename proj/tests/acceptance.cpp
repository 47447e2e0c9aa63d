// Acceptance run: one PASS/FAIL line per criterion, then a verdict.
//
// The process exits non-zero on any failure outside the list of known
// shortfalls. Known shortfalls still print FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "shpo/base_optimizers.hpp"
#include "shpo/experiment.hpp"
#include "shpo/fourier.hpp"
#include "shpo/harmonica.hpp"
#include "shpo/lasso.hpp"
#include "shpo/objectives.hpp"
#include "shpo/psr.hpp"

using namespace shpo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args)
{
    char buffer[256];
    std::snprintf(buffer, sizeof buffer, format, args...);
    return buffer;
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome exact_recovery()
{
    const auto start = std::chrono::steady_clock::now();
    int good = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto gen = gen_sparse_polynomial_objective({25, 8, 3, 1.0, 2.0, 0.0, seed});
        PsrParams params;
        params.samples = 600;
        params.sparsity = 8;
        params.lambda = 0.05;
        params.seed = derive_seed(seed, seed_tag::stage);
        const auto r = psr(*gen.objective, params);
        bool ok = r.selected.size() == gen.truth.sparsity();
        for (const auto& m : r.selected) {
            const double c = gen.truth.coefficient(m.monomial);
            ok = ok && c != 0.0 && std::abs(m.weight - c) <= 1e-2;
        }
        good += ok;
    }
    const double elapsed = seconds_since(start);
    return {good >= 18 && elapsed < 120.0, fmt("%d/20 seeds exact, %.1f s", good, elapsed)};
}

Outcome noise_linearity()
{
    SweepConfig c;
    c.objective.kind = ObjectiveConfig::Kind::hierarchical;
    c.objective.n = 14;
    c.psr.samples = 300;
    c.psr.lambda = 1.0;
    c.levels = {0.0, 0.5, 1.0, 2.0, 4.0};
    c.seeds = 10;
    const auto r = noise_sweep(c);
    const double ratio = r.mean_error.front() / r.mean_error.back();
    return {r.fit.correlation >= 0.95 && ratio <= 0.05,
            fmt("correlation %.4f, error(0)/error(4) = %.4f", r.fit.correlation, ratio)};
}

Outcome staged_optimality()
{
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto f = gen_hierarchical_objective(14, 0.0, seed);
        HarmonicaParams params;
        params.stages = 2;
        params.seed = derive_seed(seed, seed_tag::arm);
        const auto r = harmonica_q(f, params);
        hits += std::abs(r.value - global_min_bruteforce(*f).second) <= 1e-6;
    }
    return {hits >= 8, fmt("%d/10 seeds reach the global minimum", hits)};
}

Outcome beats_random_search()
{
    int wins = 0;
    double diff = 0.0;
    std::size_t budget = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto f = gen_hierarchical_objective(20, 1.0, seed);
        HarmonicaParams params;
        params.seed = derive_seed(seed, seed_tag::arm);
        const auto h = harmonica_q(f, params);
        budget = h.trace.total_evaluations;
        const auto rs = random_search(*f, 4 * budget, derive_seed(seed, seed_tag::base));
        // Compare the returned configurations on the clean objective.
        const double d = f->clean_value(rs.best) - f->clean_value(h.best);
        diff += d / 10.0;
        wins += d > 0.0;
    }
    const double p = oracle::sign_test_p(static_cast<std::size_t>(wins), 10);
    return {diff > 0.0 && p < 0.05,
            fmt("mean advantage %.2f, %d/10 wins, sign test p = %.4f (B = %zu)", diff, wins, p, budget)};
}

Outcome stage_drop()
{
    int drops = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto f = gen_hierarchical_objective(20, 0.0, seed);
        PsrParams params;
        params.seed = derive_seed(seed, seed_tag::stage);
        const auto r = psr(*f, params);
        RestrictionLayer layer{r.variables, {}, 1};
        for (const auto& m : minimize_sparse_poly(r.surrogate, r.variables, 4)) layer.assignments.push_back(m.assignment);
        const auto g = restrict_objective(f, layer, seed);
        const std::uint64_t eval_seed = derive_seed(seed, seed_tag::evaluation);
        drops += stage_average_error(*g, 300, eval_seed) < stage_average_error(*f, 300, eval_seed);
    }
    return {drops == 10, fmt("%d/10 seeds drop after stage 1", drops)};
}

Outcome lambda_stability()
{
    int stable = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto f = gen_hierarchical_objective(20, 0.0, seed);
        std::vector<std::set<ParityIndex>> sets;
        for (double lambda : {0.1, 0.5, 1.0}) {
            PsrParams params;
            params.lambda = lambda;
            params.seed = derive_seed(seed, seed_tag::stage);
            std::set<ParityIndex> s;
            for (const auto& m : psr(*f, params).selected) s.insert(m.monomial);
            sets.push_back(std::move(s));
        }
        stable += sets[0] == sets[1] && sets[1] == sets[2];
    }
    return {stable >= 8, fmt("%d/10 seeds select the same top 5", stable)};
}

// Fraction of a 2^14 grid where sign(g + intercept) disagrees with the tree.
// The grid spans the tree's variables plus the lowest-numbered others; the
// remaining variables stay at +1.
double tree_sign_error(const DecisionTreeSpec& tree, const PsrResult& r)
{
    std::vector<Index> grid = tree.variables();
    for (Index i = 0; grid.size() < 14; ++i) {
        if (std::find(grid.begin(), grid.end(), i) == grid.end()) grid.push_back(i);
    }
    std::size_t wrong = 0;
    const std::uint64_t size = std::uint64_t{1} << grid.size();
    std::vector<Sign> values(tree.dimension, 1);
    for (std::uint64_t code = 0; code < size; ++code) {
        for (std::size_t k = 0; k < grid.size(); ++k) values[grid[k]] = (code >> k) & 1 ? -1 : 1;
        const Configuration x(values);
        const double h = r.surrogate.evaluate(x) + r.intercept;
        wrong += (h >= 0.0 ? 1.0 : -1.0) != tree.evaluate(x);
    }
    return static_cast<double>(wrong) / static_cast<double>(size);
}

Outcome decision_trees()
{
    int good = 0;
    double worst_shift = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto tree = generate_decision_tree_spec(20, 3, 1.0, true, seed);
        const DecisionTreeObjective f(tree);
        PsrParams params;
        params.samples = 1000;
        params.sparsity = 16;
        params.degree = 3;
        params.seed = derive_seed(seed, seed_tag::stage);
        const auto samples = draw_samples(f, params.samples, params.seed);
        const double clean = tree_sign_error(tree, psr_from_samples(samples, 20, params));

        // The adversary flips 2% of the labels, all inside the region where
        // the root variable is +1, so the corruption is correlated with the
        // target rather than spread uniformly.
        auto flipped = samples;
        const Index root = static_cast<Index>(tree.nodes[0].variable);
        std::size_t budget = flipped.size() / 50;
        for (auto& s : flipped) {
            if (budget == 0) break;
            if (s.x[root] == 1) {
                s.value = -s.value;
                --budget;
            }
        }
        const double noisy = tree_sign_error(tree, psr_from_samples(std::move(flipped), 20, params));
        good += clean <= 0.05;
        worst_shift = std::max(worst_shift, noisy - clean);
    }
    return {good >= 8 && worst_shift <= 0.05,
            fmt("%d/10 seeds within 5%%, worst shift under flips %.2f pp", good, 100.0 * worst_shift)};
}

// --- criterion 8 -----------------------------------------------------------

bool orthonormality()
{
    const std::size_t n = 8;
    const auto subsets = oracle::all_subsets(n);
    std::vector<ParityIndex> basis;
    for (const auto& s : subsets) basis.emplace_back(std::vector<Index>(s.begin(), s.end()));
    for (std::size_t a = 0; a < basis.size(); ++a) {
        for (std::size_t b = a; b < basis.size(); ++b) {
            long sum = 0;
            for (std::uint64_t code = 0; code < (1U << n); ++code) {
                const auto x = Configuration::from_lex_rank(code, n);
                sum += evaluate_parity(basis[a], x) * evaluate_parity(basis[b], x);
            }
            if (sum != (a == b ? 256 : 0)) return false;
        }
    }
    return true;
}

bool parseval()
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto f = gen_hierarchical_objective(12, 0.0, seed);
        const auto transform = full_fourier_transform(*f, 0.0);
        double mass = 0.0;
        for (const auto& [s, c] : transform.terms()) mass += c * c;
        const double energy = oracle::mean_over_cube(
            [&](const oracle::Point& p) {
                const double v = f->evaluate(Configuration(std::vector<Sign>(p.begin(), p.end())), 0);
                return v * v;
            },
            12);
        if (std::abs(mass - energy) > 1e-9 * energy) return false;
    }
    return true;
}

bool lasso_certificates()
{
    for (std::uint64_t k = 0; k < 100; ++k) {
        Stream stream(derive_seed(k, seed_tag::generator));
        const std::size_t rows = 20 + stream.below(60);
        const std::size_t cols = 5 + stream.below(60);
        std::vector<Sign> entries(rows * cols);
        for (auto& e : entries) e = stream.below(2) ? 1 : -1;
        const auto a = DesignMatrix::from_columns(rows, cols, entries);
        std::vector<double> y(rows);
        for (auto& v : y) v = stream.uniform(-5.0, 5.0);
        const double lambda = stream.uniform(0.05, 20.0);
        const auto sol = lasso_fit({a, y, lambda});
        if (!sol.converged) return false;
        if (lasso_kkt_residual(a, y, lambda, sol.coefficients) > 1e-6) return false;
        for (std::size_t i = 1; i < sol.objective_history.size(); ++i) {
            if (sol.objective_history[i] > sol.objective_history[i - 1] * (1.0 + 1e-12)) return false;
        }
    }
    return true;
}

bool budget_accounting()
{
    const auto sum = std::make_shared<FunctionObjective>(6, [](const Configuration& x) {
        double s = 0.0;
        for (Sign v : x.values()) s += v;
        return s;
    });
    const FidelityObjective f(sum, 8);
    const auto sh = successive_halving(f, {8, 2, 1}, 3);
    long long expected = 0;
    for (const auto& [arms, r] : oracle::halving_rungs(8, 2, 1, 8)) expected += arms * r;
    if (sh.total_resource() != 32 || expected != 32) return false;

    const FidelityObjective g(sum, 27);
    const auto hb = hyperband(g, {27, 3}, 5);
    expected = 0;
    for (const auto& [n0, r_min] : oracle::hyperband_table(27, 3)) {
        for (const auto& [arms, r] : oracle::halving_rungs(n0, 3, r_min, 27)) expected += arms * r;
    }
    return hb.total_resource() == expected;
}

bool surrogate_minimizer()
{
    for (std::uint64_t k = 0; k < 50; ++k) {
        Stream stream(derive_seed(k, seed_tag::collapse));
        const std::size_t m = 1 + k % 12;
        const std::size_t n = m + stream.below(4);
        // J is a random m-subset of the n variables.
        std::vector<Index> all(n);
        for (Index i = 0; i < n; ++i) all[i] = i;
        for (std::size_t i = 0; i < m; ++i) std::swap(all[i], all[i + stream.below(n - i)]);
        std::vector<Index> vars(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m));
        std::sort(vars.begin(), vars.end());

        SparsePolynomial g(n);
        std::vector<std::pair<std::vector<unsigned>, double>> poly;
        for (std::size_t term = 0; term < 1 + stream.below(8); ++term) {
            std::set<Index> members;
            const std::size_t degree = 1 + stream.below(std::min<std::size_t>(3, m));
            while (members.size() < degree) members.insert(vars[stream.below(m)]);
            const ParityIndex s(std::vector<Index>(members.begin(), members.end()));
            // Integer weights make ties common.
            const double w = static_cast<double>(static_cast<int>(stream.below(7)) - 3);
            if (w == 0.0 || g.coefficient(s) != 0.0) continue;
            g.set(s, w);
            poly.emplace_back(std::vector<unsigned>(members.begin(), members.end()), w);
        }

        // Brute force in lexicographic order (+1 first, first variable most
        // significant), then a stable sort by value.
        std::vector<std::pair<double, std::vector<int>>> ranked;
        for (std::uint64_t rank = 0; rank < (std::uint64_t{1} << m); ++rank) {
            std::vector<int> values(m);
            for (std::size_t i = 0; i < m; ++i) values[i] = (rank >> (m - 1 - i)) & 1 ? -1 : 1;
            double v = 0.0;
            for (const auto& [s, w] : poly) {
                int p = 1;
                for (unsigned i : s) p *= values[static_cast<std::size_t>(std::find(vars.begin(), vars.end(), i) - vars.begin())];
                v += w * p;
            }
            ranked.emplace_back(v, std::move(values));
        }
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

        const std::size_t t = 1 + stream.below(6);
        const auto got = minimize_sparse_poly(g, vars, t);
        if (got.size() != std::min<std::size_t>(t, ranked.size())) return false;
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (got[i].value != ranked[i].first) return false;
            const auto& entries = got[i].assignment.entries();
            for (std::size_t j = 0; j < m; ++j) {
                if (entries[j].first != vars[j] || entries[j].second != ranked[i].second[j]) return false;
            }
        }
    }
    return true;
}

Outcome exact_math()
{
    const bool ortho = orthonormality();
    const bool pars = parseval();
    const bool lasso = lasso_certificates();
    const bool budget = budget_accounting();
    const bool minimizer = surrogate_minimizer();
    auto word = [](bool b) { return b ? "ok" : "FAILED"; };
    return {ortho && pars && lasso && budget && minimizer,
            fmt("orthonormality %s, Parseval %s, Lasso certificates %s, budgets %s, surrogate minimizer %s",
                word(ortho), word(pars), word(lasso), word(budget), word(minimizer))};
}

// --- criterion 9 -----------------------------------------------------------

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome reproducibility()
{
    const std::vector<std::string> configs = {
        R"({"objective":{"kind":"hierarchical","n":16,"noise":1,"seed":3},
            "optimizer":{"kind":"harmonica","stages":2,"seed":9,"base":{"kind":"hyperband"}},"replications":3})",
        R"({"objective":{"kind":"sparse","n":12,"noise":0.5,"seed":1},
            "optimizer":{"kind":"sh","seed":4,"max_resource":16,"arms":16},"replications":2})",
        R"({"objective":{"kind":"tree","n":12,"seed":2},"optimizer":{"kind":"random","budget":300,"seed":5},"replications":2})",
    };
    const fs::path root = fs::temp_directory_path() / "shpo_acceptance";
    int same = 0;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        std::string logs[2];
        const unsigned widths[2] = {1, 4};
        for (int w = 0; w < 2; ++w) {
            auto config = parse_experiment_config(configs[k]);
            config.parallel = widths[w];
            const fs::path dir = root / fmt("run%zu_w%u", k, widths[w]);
            fs::remove_all(dir);
            run_experiment(config, dir);
            logs[w] = slurp(dir / "evaluations.csv");
        }
        same += !logs[0].empty() && logs[0] == logs[1];
    }
    fs::remove_all(root);
    return {same == static_cast<int>(configs.size()),
            fmt("%d/%zu configurations byte-identical at widths 1 and 4", same, configs.size())};
}

} // namespace

int main()
{
    struct Criterion {
        int number;
        const char* name;
        std::function<Outcome()> run;
        // Fails for a structural reason recorded with the project decisions.
        bool known_shortfall = false;
    };
    const std::vector<Criterion> criteria = {
        {1, "noiseless exact recovery", exact_recovery},
        {2, "noise linearity", noise_linearity},
        {3, "staged optimality", staged_optimality, true},
        {4, "beats random search", beats_random_search, true},
        {5, "stage drop", stage_drop},
        {6, "lambda stability", lambda_stability},
        {7, "decision trees", decision_trees},
        {8, "exact math", exact_math},
        {9, "reproducibility", reproducibility},
    };

    int unexpected = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("criterion %d %s: %s (%s; %.1f s)%s\n", c.number, c.name, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), seconds_since(start), !o.pass && c.known_shortfall ? " [known shortfall]" : "");
        std::fflush(stdout);
        unexpected += !o.pass && !c.known_shortfall;
    }
    std::printf("%s\n", unexpected == 0 ? "acceptance: no unexpected failures" : "acceptance: unexpected failures");
    return unexpected == 0 ? 0 : 1;
}
