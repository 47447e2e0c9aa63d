#include "shpo/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shpo/error.hpp"

namespace shpo {

namespace {

// Penalty shrink factor between consecutive path points.
constexpr double path_ratio = 0.5;
// The path stops at this fraction of its start when the target is smaller.
constexpr double path_floor = 1e-6;

// Sweeps allowed at each intermediate path point, so that the bulk of the
// budget is left for the target penalty.
int path_point_sweeps(const LassoProblem& problem)
{
    return std::max(1, problem.max_sweeps / 100);
}

double soft_threshold(double v, double theta)
{
    if (v > theta) return v - theta;
    if (v < -theta) return v + theta;
    return 0.0;
}

// Columns as doubles. The solver's inner loops are dot products and axpy
// updates against the residual; double storage lets them vectorize. Falls
// back to one column at a time above the cache limit.
class ColumnReader {
public:
    static constexpr std::size_t cache_limit = std::size_t{1} << 28;

    explicit ColumnReader(const DesignMatrix& a) : a_(a), rows_(a.rows())
    {
        if (a.rows() * a.cols() * sizeof(double) <= cache_limit) {
            cache_.resize(a.rows() * a.cols());
            std::vector<Sign> col(rows_);
            for (std::size_t j = 0; j < a.cols(); ++j) {
                a.fill_column(j, col);
                std::copy(col.begin(), col.end(), cache_.begin() + static_cast<std::ptrdiff_t>(j * rows_));
            }
        } else {
            scratch_.resize(rows_);
            signs_.resize(rows_);
        }
    }

    std::span<const double> operator()(std::size_t j)
    {
        if (!cache_.empty()) return {cache_.data() + j * rows_, rows_};
        a_.fill_column(j, signs_);
        std::copy(signs_.begin(), signs_.end(), scratch_.begin());
        return scratch_;
    }

private:
    const DesignMatrix& a_;
    std::size_t rows_;
    std::vector<double> cache_;
    std::vector<double> scratch_;
    std::vector<Sign> signs_;
};

double dot(std::span<const double> col, std::span<const double> v)
{
    // Four independent partial sums; the order is fixed, so results do not
    // depend on the build or the thread count.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const std::size_t n = col.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += col[i] * v[i];
        s1 += col[i + 1] * v[i + 1];
        s2 += col[i + 2] * v[i + 2];
        s3 += col[i + 3] * v[i + 3];
    }
    for (; i < n; ++i) s0 += col[i] * v[i];
    return (s0 + s1) + (s2 + s3);
}

void check_shapes(const DesignMatrix& a, std::span<const double> y, std::span<const double> alpha,
                  const std::vector<bool>& penalized)
{
    if (y.size() != a.rows()) {
        throw DimensionError("targets have length " + std::to_string(y.size()) + ", design has " +
                             std::to_string(a.rows()) + " rows");
    }
    if (alpha.size() != a.cols()) {
        throw DimensionError("coefficients have length " + std::to_string(alpha.size()) + ", design has " +
                             std::to_string(a.cols()) + " columns");
    }
    if (!penalized.empty() && penalized.size() != a.cols()) {
        throw DimensionError("penalty mask length does not match design columns");
    }
}

std::vector<double> residual(const DesignMatrix& a, std::span<const double> y, std::span<const double> alpha)
{
    std::vector<double> r(y.begin(), y.end());
    ColumnReader column(a);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        if (alpha[j] == 0.0) continue;
        auto col = column(j);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= alpha[j] * col[i];
    }
    return r;
}

double penalty(double lambda, std::span<const double> alpha, const std::vector<bool>& penalized)
{
    double sum = 0.0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        if (penalized.empty() || penalized[j]) sum += std::abs(alpha[j]);
    }
    return lambda * sum;
}

double squared_norm(std::span<const double> v)
{
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return sum;
}

// r = y - A alpha.
double kkt_from_residual(const DesignMatrix& a, std::span<const double> r, double lambda,
                         std::span<const double> alpha, const std::vector<bool>& penalized)
{
    ColumnReader column(a);
    double worst = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const double corr = dot(column(j), r); // A_j^T r = -A_j^T (A alpha - y)
        double violation;
        if (!penalized.empty() && !penalized[j]) {
            violation = std::abs(corr);
        } else if (alpha[j] != 0.0) {
            violation = std::abs(-2.0 * corr + lambda * (alpha[j] > 0 ? 1.0 : -1.0));
        } else {
            violation = std::max(0.0, 2.0 * std::abs(corr) - lambda);
        }
        worst = std::max(worst, violation);
    }
    return worst;
}

} // namespace

void LassoProblem::validate() const
{
    if (!(lambda >= 0.0)) throw InputError("lasso penalty must be non-negative");
    if (!(tolerance > 0.0)) throw InputError("lasso tolerance must be positive");
    if (design.rows() == 0 || design.cols() == 0) throw InputError("lasso design must be non-empty");
    if (targets.size() != design.rows()) throw DimensionError("targets length does not match design rows");
    if (!penalized.empty() && penalized.size() != design.cols()) {
        throw DimensionError("penalty mask length does not match design columns");
    }
    for (double v : targets) {
        if (!std::isfinite(v)) throw InputError("lasso targets contain a non-finite value");
    }
}

double lasso_objective(const DesignMatrix& a, std::span<const double> y, double lambda,
                       std::span<const double> alpha, const std::vector<bool>& penalized)
{
    check_shapes(a, y, alpha, penalized);
    return squared_norm(residual(a, y, alpha)) + penalty(lambda, alpha, penalized);
}

double lasso_kkt_residual(const DesignMatrix& a, std::span<const double> y, double lambda,
                          std::span<const double> alpha, const std::vector<bool>& penalized)
{
    check_shapes(a, y, alpha, penalized);
    return kkt_from_residual(a, residual(a, y, alpha), lambda, alpha, penalized);
}

LassoSolution lasso_fit(const LassoProblem& problem)
{
    problem.validate();
    const DesignMatrix& a = problem.design;
    const std::size_t cols = a.cols();
    double half_lambda = problem.lambda / 2.0;

    LassoSolution solution;
    solution.coefficients.assign(cols, 0.0);
    auto& alpha = solution.coefficients;
    std::vector<double> r(problem.targets.begin(), problem.targets.end());

    ColumnReader column(a);
    std::vector<double> column_norm(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        const auto col = column(j);
        double sum = 0.0;
        for (double v : col) sum += v * v;
        column_norm[j] = sum;
    }

    auto update = [&](std::size_t j) {
        const auto col = column(j);
        const double rho = dot(col, r) + column_norm[j] * alpha[j];
        const double next = problem.is_penalized(j) ? soft_threshold(rho, half_lambda) / column_norm[j]
                                                    : rho / column_norm[j];
        const double delta = next - alpha[j];
        if (delta != 0.0) {
            for (std::size_t i = 0; i < r.size(); ++i) r[i] -= delta * col[i];
            alpha[j] = next;
        }
        return std::abs(delta);
    };

    // Objective history is kept for sweeps at the target penalty only;
    // values along the path are not comparable with it.
    auto sweep_done = [&](double lambda, bool at_target) {
        ++solution.sweeps;
        if (at_target) solution.objective_history.push_back(squared_norm(r) + penalty(lambda, alpha, problem.penalized));
    };

    // Full sweeps alternate with sweeps over the current support; the
    // support pass is where nearly all of the work happens once the active
    // set has settled.
    std::vector<std::size_t> active;
    auto solve_at = [&](double lambda, bool at_target) {
        half_lambda = lambda / 2.0;
        const int limit = at_target ? problem.max_sweeps
                                    : std::min(problem.max_sweeps, solution.sweeps + path_point_sweeps(problem));
        while (solution.sweeps < limit) {
            double full_change = 0.0;
            for (std::size_t j = 0; j < cols; ++j) full_change = std::max(full_change, update(j));
            sweep_done(lambda, at_target);

            if (full_change <= problem.tolerance) {
                if (!at_target) return;
                // Re-derive the residual to shed accumulated rounding before
                // certifying.
                r = residual(a, problem.targets, alpha);
                solution.kkt_residual = kkt_from_residual(a, r, lambda, alpha, problem.penalized);
                if (solution.kkt_residual <= 10.0 * problem.tolerance) {
                    solution.converged = true;
                    return;
                }
            }

            active.clear();
            for (std::size_t j = 0; j < cols; ++j) {
                if (alpha[j] != 0.0) active.push_back(j);
            }
            while (!active.empty() && solution.sweeps < limit) {
                double change = 0.0;
                for (std::size_t j : active) change = std::max(change, update(j));
                sweep_done(lambda, at_target);
                if (change <= problem.tolerance) break;
            }
        }
    };

    // Warm-started penalty path. Starting from the smallest penalty at which
    // every penalized coefficient is zero keeps the support small throughout;
    // a cold start at a small penalty activates nearly every column at once
    // and then converges very slowly.
    double lambda_max = 0.0;
    {
        std::vector<double> saved = r;
        for (std::size_t j = 0; j < cols; ++j) {
            if (!problem.is_penalized(j)) update(j);
        }
        for (std::size_t j = 0; j < cols; ++j) {
            if (problem.is_penalized(j)) lambda_max = std::max(lambda_max, 2.0 * std::abs(dot(column(j), r)));
        }
        r = std::move(saved);
        std::fill(alpha.begin(), alpha.end(), 0.0);
    }
    const double path_end = std::max(problem.lambda, lambda_max * path_floor);
    for (double lambda = lambda_max * path_ratio; lambda > path_end; lambda *= path_ratio) {
        solve_at(lambda, false);
    }
    solve_at(problem.lambda, true);

    if (!solution.converged) {
        solution.kkt_residual = lasso_kkt_residual(a, problem.targets, problem.lambda, alpha, problem.penalized);
    }
    solution.objective = lasso_objective(a, problem.targets, problem.lambda, alpha, problem.penalized);
    return solution;
}

} // namespace shpo
