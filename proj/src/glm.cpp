#include "nowcast/glm.hpp"

#include "nowcast/error.hpp"
#include "nowcast/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace nowcast {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double log_normal_cdf(double x)
{
    const double c = standard_normal_cdf(x);
    if (c > 0.0) return std::log(c);
    // Mills-ratio asymptote for the far left tail.
    return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double softplus(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

struct Evaluation {
    double log_likelihood = 0.0;
    std::vector<double> score;
    std::vector<double> info; // row-major k*k, lower triangle filled
};

Evaluation evaluate(const DesignMatrix& x, std::span<const double> y, std::span<const double> w, Link link,
                    std::span<const double> beta, bool with_derivatives)
{
    const auto& kern = simd::kernels();
    const std::size_t k = x.cols;
    Evaluation ev;
    if (with_derivatives) {
        ev.score.assign(k, 0.0);
        ev.info.assign(k * k, 0.0);
    }
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double wi = w[i];
        if (wi <= 0.0) continue;
        const double* row = x.data.data() + i * k;
        const double eta = kern.dot(row, beta.data(), k);
        const bool success = y[i] > 0.5;
        double resid = 0.0;  // d loglik_i / d eta
        double fisher = 0.0; // E[-d2 loglik_i / d eta2]
        if (link == Link::logit) {
            const double p = 1.0 / (1.0 + std::exp(-eta));
            ev.log_likelihood += wi * ((success ? eta : 0.0) - softplus(eta));
            resid = (success ? 1.0 : 0.0) - p;
            fisher = p * (1.0 - p);
        } else {
            const double q = success ? 1.0 : -1.0;
            const double cdf_q = standard_normal_cdf(q * eta);
            const double pdf = normal_pdf(eta);
            ev.log_likelihood += wi * log_normal_cdf(q * eta);
            if (!with_derivatives) continue;
            // Inverse Mills ratio; asymptote when the tail probability underflows.
            resid = cdf_q > 0.0 ? q * pdf / cdf_q : q * (-q * eta);
            const double p = standard_normal_cdf(eta);
            const double denom = p * (1.0 - p);
            fisher = denom > 0.0 ? pdf * pdf / denom : 0.0;
        }
        if (!with_derivatives) continue;
        kern.axpy(wi * resid, row, ev.score.data(), k);
        if (fisher > 0.0) kern.syr_lower(wi * fisher, row, ev.info.data(), k);
    }
    return ev;
}

double max_abs(std::span<const double> v)
{
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
}

Eigen::MatrixXd full_symmetric(const std::vector<double>& lower, std::size_t k)
{
    Eigen::MatrixXd m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t l = 0; l <= j; ++l) {
            const double v = lower[j * k + l];
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) = v;
            m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) = v;
        }
    return m;
}

std::string join_names(const std::vector<std::size_t>& cols, std::span<const std::string> names)
{
    std::string out;
    for (std::size_t c : cols) {
        if (!out.empty()) out += ", ";
        out += c < names.size() ? names[c] : fmt::format("column {}", c);
    }
    return out;
}

// Equilibrated information matrix D^-1 H D^-1 with D = sqrt(diag H).
struct Equilibrated {
    Eigen::MatrixXd a;
    Eigen::VectorXd d;
};

Equilibrated equilibrate(const std::vector<double>& info, std::size_t k, std::span<const std::string> names)
{
    Equilibrated e;
    e.a = full_symmetric(info, k);
    e.d.resize(static_cast<Eigen::Index>(k));
    std::vector<std::size_t> zero;
    for (std::size_t j = 0; j < k; ++j) {
        const double hjj = e.a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
        if (!(hjj > 0.0)) zero.push_back(j);
        e.d(static_cast<Eigen::Index>(j)) = hjj > 0.0 ? std::sqrt(hjj) : 1.0;
    }
    if (!zero.empty())
        throw SingularInformationError(
            fmt::format("singular information matrix: no information on {}", join_names(zero, names)));
    e.a = e.d.asDiagonal().inverse() * e.a * e.d.asDiagonal().inverse();
    return e;
}

void check_rank(const Equilibrated& e, std::span<const std::string> names)
{
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(e.a);
    qr.setThreshold(1e-10);
    const auto rank = static_cast<std::size_t>(qr.rank());
    const auto k = static_cast<std::size_t>(e.a.cols());
    if (rank >= k) return;
    std::vector<std::size_t> offending;
    const auto& perm = qr.colsPermutation().indices();
    for (std::size_t i = rank; i < k; ++i) offending.push_back(static_cast<std::size_t>(perm(static_cast<Eigen::Index>(i))));
    std::sort(offending.begin(), offending.end());
    throw SingularInformationError(
        fmt::format("singular information matrix: collinear terms {}", join_names(offending, names)));
}

} // namespace

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double inverse_link(Link link, double eta)
{
    if (link == Link::logit) return 1.0 / (1.0 + std::exp(-eta));
    return standard_normal_cdf(eta);
}

double link_function(Link link, double p)
{
    if (link == Link::logit) return std::log(p / (1.0 - p));
    // Probit start values only need to be rough: invert by bisection.
    double lo = -40.0;
    double hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (standard_normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<std::size_t> independent_columns(const DesignMatrix& x, std::span<const double> w)
{
    const auto& kern = simd::kernels();
    const std::size_t k = x.cols;
    std::vector<double> lower(k * k, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i)
        if (w[i] > 0.0) kern.syr_lower(w[i], x.data.data() + i * k, lower.data(), k);
    Eigen::MatrixXd g(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t l = 0; l <= j; ++l) {
            const auto a = static_cast<Eigen::Index>(j);
            const auto b = static_cast<Eigen::Index>(l);
            g(a, b) = g(b, a) = lower[j * k + l];
        }
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < k; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double gjj = g(jj, jj);
        if (!(gjj > 0.0)) continue;
        double resid = gjj;
        if (!kept.empty()) {
            const auto m = static_cast<Eigen::Index>(kept.size());
            Eigen::MatrixXd a(m, m);
            Eigen::VectorXd b(m);
            for (Eigen::Index r = 0; r < m; ++r) {
                const auto kr = static_cast<Eigen::Index>(kept[static_cast<std::size_t>(r)]);
                b(r) = g(kr, jj);
                for (Eigen::Index c = 0; c < m; ++c) a(r, c) = g(kr, static_cast<Eigen::Index>(kept[static_cast<std::size_t>(c)]));
            }
            resid = gjj - b.dot(a.ldlt().solve(b));
        }
        if (resid > 1e-9 * gjj) kept.push_back(j);
    }
    return kept;
}

std::vector<double> linear_predictor(const DesignMatrix& x, std::span<const double> beta)
{
    const auto& kern = simd::kernels();
    std::vector<double> eta(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) eta[i] = kern.dot(x.data.data() + i * x.cols, beta.data(), x.cols);
    return eta;
}

GlmFit fit_binary(const DesignMatrix& x, std::span<const double> y, std::span<const double> weights, Link link,
                  std::span<const std::string> column_names, const GlmOptions& options)
{
    const std::size_t n = x.rows;
    const std::size_t k = x.cols;
    if (y.size() != n || weights.size() != n) throw Error("fit_binary: y/weights size mismatch with design");
    if (k == 0) throw Error("fit_binary: empty design");

    double w_total = 0.0;
    double w_success = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(weights[i]) || weights[i] < 0.0) throw DataError("fit_binary: weights must be finite and >= 0");
        if (y[i] != 0.0 && y[i] != 1.0) throw DataError("fit_binary: outcome must be 0 or 1");
        w_total += weights[i];
        if (y[i] > 0.5) w_success += weights[i];
    }
    if (!(w_total > 0.0)) throw DataError("fit_binary: no observations with positive weight");
    if (w_success <= 0.0 || w_success >= w_total)
        throw DataError("outcome constant in sample: both classes are required for a fit");

    std::vector<std::size_t> constant;
    for (std::size_t j = 1; j < k; ++j) {
        double lo = INFINITY;
        double hi = -INFINITY;
        for (std::size_t i = 0; i < n; ++i) {
            if (weights[i] <= 0.0) continue;
            const double v = x.data[i * k + j];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (lo == hi) constant.push_back(j);
    }
    if (!constant.empty())
        throw DataError(fmt::format("covariate constant across the sample: {}", join_names(constant, column_names)));

    std::vector<double> beta(k, 0.0);
    beta[0] = link_function(link, w_success / w_total);

    GlmFit fit;
    Evaluation ev = evaluate(x, y, weights, link, beta, true);
    check_rank(equilibrate(ev.info, k, column_names), column_names);

    for (int iter = 0;; ++iter) {
        fit.max_score = max_abs(ev.score);
        if (fit.max_score < options.score_tolerance) {
            fit.converged = true;
            break;
        }
        if (iter >= options.max_iterations) break;

        const Equilibrated eq = equilibrate(ev.info, k, column_names);
        const Eigen::Map<const Eigen::VectorXd> g(ev.score.data(), static_cast<Eigen::Index>(k));
        const Eigen::VectorXd rhs = eq.d.asDiagonal().inverse() * g;
        // Rank was checked at the start values; ill-conditioning that appears
        // later (tail rows losing information) is damped with a ridge instead.
        Eigen::MatrixXd a = eq.a;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        for (double ridge = 1e-10; ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-14 * ldlt.vectorD().maxCoeff();
             ridge *= 10.0) {
            if (ridge > 1.0) check_rank(eq, column_names);
            a = eq.a + ridge * Eigen::MatrixXd::Identity(eq.a.rows(), eq.a.cols());
            ldlt.compute(a);
        }
        const Eigen::VectorXd step = eq.d.asDiagonal().inverse() * ldlt.solve(rhs);
        const double decrement = g.dot(step);

        std::vector<double> trial(k);
        double scale = 1.0;
        Evaluation next;
        bool improved = false;
        for (int halving = 0; halving < 40; ++halving) {
            for (std::size_t j = 0; j < k; ++j) trial[j] = beta[j] + scale * step(static_cast<Eigen::Index>(j));
            next = evaluate(x, y, weights, link, trial, false);
            if (next.log_likelihood >= ev.log_likelihood - 1e-13 * (1.0 + std::abs(ev.log_likelihood))) {
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        fit.iterations = iter + 1;
        if (!improved || decrement <= 1e-15 * (1.0 + std::abs(ev.log_likelihood))) {
            // Nothing left to gain in double precision.
            if (improved) beta = trial;
            ev = evaluate(x, y, weights, link, beta, true);
            fit.max_score = max_abs(ev.score);
            fit.converged = true;
            break;
        }
        beta = trial;

        std::vector<std::size_t> diverging;
        for (std::size_t j = 0; j < k; ++j)
            if (!std::isfinite(beta[j]) || std::abs(beta[j]) > options.separation_bound) diverging.push_back(j);
        if (!diverging.empty())
            throw SeparationError(fmt::format("separation: coefficients diverging for {}", join_names(diverging, column_names)));

        ev = evaluate(x, y, weights, link, beta, true);
    }

    {
        // A probit likelihood flattens out before the coefficients reach the bound.
        const auto eta = linear_predictor(x, beta);
        bool perfect = true;
        for (std::size_t i = 0; i < n && perfect; ++i)
            if (weights[i] > 0.0 && std::abs(y[i] - inverse_link(link, eta[i])) > 1e-6) perfect = false;
        if (perfect) throw SeparationError("separation: every observation is perfectly predicted");
    }

    fit.coefficients = beta;
    fit.log_likelihood = ev.log_likelihood;
    const Equilibrated eq = equilibrate(ev.info, k, column_names);
    const Eigen::MatrixXd inv_a = eq.a.ldlt().solve(Eigen::MatrixXd::Identity(eq.a.rows(), eq.a.cols()));
    fit.standard_errors.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        fit.standard_errors[j] = std::sqrt(std::max(0.0, inv_a(jj, jj))) / eq.d(jj);
    }
    return fit;
}

} // namespace nowcast
