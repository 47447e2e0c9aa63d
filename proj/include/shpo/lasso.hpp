#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "shpo/fourier.hpp"

namespace shpo {

/// Least squares with an L1 penalty on the penalized columns:
///
///     minimize ||A alpha - y||^2 + lambda * sum_{j penalized} |alpha_j|
///
/// An empty `penalized` mask means every column is penalized.
struct LassoProblem {
    const DesignMatrix& design;
    std::span<const double> targets;
    double lambda = 1.0;
    std::vector<bool> penalized;
    double tolerance = 1e-7;
    int max_sweeps = 10'000;

    bool is_penalized(std::size_t j) const { return penalized.empty() || penalized[j]; }
    void validate() const;
};

struct LassoSolution {
    std::vector<double> coefficients;
    double objective = 0.0;
    int sweeps = 0;
    /// Largest violation of the optimality conditions at the returned point.
    double kkt_residual = 0.0;
    bool converged = false;
    /// Objective after each sweep at the target penalty.
    std::vector<double> objective_history;
};

double lasso_objective(const DesignMatrix& a, std::span<const double> y, double lambda,
                       std::span<const double> alpha, const std::vector<bool>& penalized = {});

/// KKT violation of alpha: for penalized j, |g_j + lambda sign(alpha_j)| if
/// alpha_j != 0 and max(0, |g_j| - lambda) otherwise, with g = 2 A^T(A alpha - y);
/// for exempt j, |A_j^T (A alpha - y)|.
double lasso_kkt_residual(const DesignMatrix& a, std::span<const double> y, double lambda,
                          std::span<const double> alpha, const std::vector<bool>& penalized = {});

/// Cyclic coordinate descent from alpha = 0 with soft-thresholding, warm
/// started along a geometric path of penalties that begins where every
/// penalized coefficient is zero and ends at `lambda`. `sweeps` counts the
/// whole path.
///
/// At the target penalty it stops once a full sweep moves no coordinate by more than the tolerance
/// and the KKT residual is within 10 * tolerance. Runs out of sweeps with
/// converged = false rather than throwing. Throws InputError on non-finite
/// targets.
LassoSolution lasso_fit(const LassoProblem& problem);

} // namespace shpo
