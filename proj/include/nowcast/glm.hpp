#pragma once
// Weighted maximum-likelihood fitting of binary-response models (logit and
// probit links) by damped Newton / Fisher-scoring iterations.

#include "nowcast/covariates.hpp"

#include <span>
#include <string>
#include <vector>

namespace nowcast {

enum class Link { logit, probit };

struct GlmOptions {
    int max_iterations = 100;
    double score_tolerance = 1e-8;   // max |d logL / d beta_j|
    double separation_bound = 30.0;  // |beta_j| beyond this means a diverging fit
};

struct GlmFit {
    std::vector<double> coefficients; // column 0 = intercept
    std::vector<double> standard_errors;
    double log_likelihood = 0.0;
    double max_score = 0.0;
    int iterations = 0;
    bool converged = false;
};

double standard_normal_cdf(double x);
double inverse_link(Link link, double eta);
double link_function(Link link, double p);

/// Fits Pr(y = 1 | x) = F(x'beta) by weighted maximum likelihood.
///
/// Preconditions checked here: both outcome classes present with positive
/// weight, no non-intercept column constant over the positively weighted
/// rows, and a full-rank information matrix. Violations throw DataError or
/// SingularInformationError naming the offending columns. A coefficient
/// whose magnitude exceeds `separation_bound` throws SeparationError.
///
/// Convergence: max |score| < score_tolerance, or the iteration reaches a
/// point where the Newton step no longer changes the log-likelihood in the
/// last representable digits (numerically stationary).
GlmFit fit_binary(const DesignMatrix& x, std::span<const double> y, std::span<const double> weights, Link link,
                  std::span<const std::string> column_names, const GlmOptions& options = {});

// Columns kept greedily in order: a column stays when its residual after
// projecting on the kept columns, in the weighted cross-product metric, is
// non-negligible. Column 0 stays unless it is all zero.
std::vector<std::size_t> independent_columns(const DesignMatrix& x, std::span<const double> w);

// x'beta for every row.
std::vector<double> linear_predictor(const DesignMatrix& x, std::span<const double> beta);

} // namespace nowcast
