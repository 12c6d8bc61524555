#include "oracles.hpp"

#include "nowcast/error.hpp"
#include "nowcast/glm.hpp"

#include <doctest.h>

#include <array>
#include <cmath>

using namespace nowcast;
using nowcast::test::simulate_binary;

namespace {

constexpr std::array<double, 4> kBeta = {-0.3, 0.8, -0.5, 0.4};

DesignMatrix matrix(std::size_t cols, std::initializer_list<double> values)
{
    DesignMatrix x;
    x.cols = cols;
    x.data = values;
    x.rows = x.data.size() / cols;
    return x;
}

} // namespace

TEST_CASE("link functions")
{
    CHECK(standard_normal_cdf(0.0) == 0.5);
    CHECK(inverse_link(Link::probit, 0.0) == 0.5);
    CHECK(inverse_link(Link::logit, 0.0) == 0.5);
    CHECK(standard_normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(link_function(Link::logit, 0.75) == doctest::Approx(std::log(3.0)));
    CHECK(link_function(Link::probit, 0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
}

TEST_CASE("probit recovers simulated coefficients within three standard errors")
{
    const auto s = simulate_binary(Link::probit, kBeta, 50000, 11);
    const auto fit = fit_binary(s.x, s.y, s.w, Link::probit, s.names);
    CHECK(fit.converged);
    CHECK(nowcast::test::within_three_se(fit, kBeta));
}

TEST_CASE("logit recovers simulated coefficients within three standard errors")
{
    const auto s = simulate_binary(Link::logit, kBeta, 50000, 12);
    const auto fit = fit_binary(s.x, s.y, s.w, Link::logit, s.names);
    CHECK(fit.converged);
    CHECK(fit.max_score < 1e-8);
    CHECK(nowcast::test::within_three_se(fit, kBeta));
}

TEST_CASE("logit score equations hold: predicted mass equals observed mass per column")
{
    const auto s = simulate_binary(Link::logit, kBeta, 5000, 13);
    const auto fit = fit_binary(s.x, s.y, s.w, Link::logit, s.names);
    const auto eta = linear_predictor(s.x, fit.coefficients);
    double observed = 0.0;
    double predicted = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        observed += s.y[i];
        predicted += inverse_link(Link::logit, eta[i]);
    }
    CHECK(predicted / 5000.0 == doctest::Approx(observed / 5000.0).epsilon(1e-9));
}

TEST_CASE("saturated logit reproduces empirical cell shares")
{
    // Cell A: 3 of 10 successes; cell B: 7 of 8, with fractional weights.
    DesignMatrix x;
    x.cols = 2;
    std::vector<double> y;
    std::vector<double> w;
    double a_succ = 0.0, a_tot = 0.0, b_succ = 0.0, b_tot = 0.0;
    for (int i = 0; i < 18; ++i) {
        const bool b = i >= 10;
        const bool success = b ? (i - 10) < 7 : i < 3;
        const double wi = 0.5 + 0.1 * i;
        x.data.push_back(1.0);
        x.data.push_back(b ? 1.0 : 0.0);
        y.push_back(success ? 1.0 : 0.0);
        w.push_back(wi);
        (b ? b_tot : a_tot) += wi;
        if (success) (b ? b_succ : a_succ) += wi;
    }
    x.rows = 18;
    const std::vector<std::string> names = {"intercept", "b"};
    const auto fit = fit_binary(x, y, w, Link::logit, names);
    CHECK(inverse_link(Link::logit, fit.coefficients[0]) == doctest::Approx(a_succ / a_tot).epsilon(1e-8));
    CHECK(inverse_link(Link::logit, fit.coefficients[0] + fit.coefficients[1]) ==
          doctest::Approx(b_succ / b_tot).epsilon(1e-8));
}

TEST_CASE("degenerate samples are errors, not fits")
{
    const std::vector<std::string> names = {"intercept", "x", "x2"};
    const auto x = matrix(2, {1, 0, 1, 1, 1, 2, 1, 3});
    const std::vector<double> w(4, 1.0);
    CHECK_THROWS_AS(fit_binary(x, std::vector<double>{1, 1, 1, 1}, w, Link::probit, names), DataError);
    CHECK_THROWS_AS(fit_binary(x, std::vector<double>{0, 0, 0, 0}, w, Link::logit, names), DataError);

    const auto constant = matrix(2, {1, 5, 1, 5, 1, 5, 1, 5});
    CHECK_THROWS_WITH_AS(fit_binary(constant, std::vector<double>{0, 1, 0, 1}, w, Link::logit, names),
                         "covariate constant across the sample: x", DataError);

    const auto collinear = matrix(3, {1, 0, 0, 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 1, 2, 1, 0, 0});
    const std::vector<double> w6(6, 1.0);
    CHECK_THROWS_AS(fit_binary(collinear, std::vector<double>{0, 1, 0, 1, 1, 0}, w6, Link::logit, names),
                    SingularInformationError);
}

TEST_CASE("perfect separation is reported")
{
    const auto x = matrix(2, {1, -2, 1, -1, 1, -0.5, 1, 0.5, 1, 1, 1, 2});
    const std::vector<double> w(6, 1.0);
    const std::vector<std::string> names = {"intercept", "x"};
    CHECK_THROWS_AS(fit_binary(x, std::vector<double>{0, 0, 0, 1, 1, 1}, w, Link::logit, names), SeparationError);
    CHECK_THROWS_AS(fit_binary(x, std::vector<double>{0, 0, 0, 1, 1, 1}, w, Link::probit, names), SeparationError);
}

TEST_CASE("frequency weights match replicated rows")
{
    const auto s = simulate_binary(Link::probit, kBeta, 400, 21);
    std::vector<double> w(s.w.size());
    DesignMatrix rep;
    rep.cols = s.x.cols;
    std::vector<double> ry;
    for (std::size_t i = 0; i < s.x.rows; ++i) {
        w[i] = 1.0 + static_cast<double>(i % 3);
        for (int r = 0; r < static_cast<int>(w[i]); ++r) {
            const auto row = s.x.row(i);
            rep.data.insert(rep.data.end(), row.begin(), row.end());
            ry.push_back(s.y[i]);
        }
    }
    rep.rows = ry.size();
    const auto a = fit_binary(s.x, s.y, w, Link::probit, s.names);
    const auto b = fit_binary(rep, ry, std::vector<double>(ry.size(), 1.0), Link::probit, s.names);
    for (std::size_t j = 0; j < 4; ++j) CHECK(a.coefficients[j] == doctest::Approx(b.coefficients[j]).epsilon(1e-7));
}

TEST_CASE("independent columns drop exact aliases in order")
{
    // Columns: intercept, a, b = 1 - a, c, d = a + c.
    DesignMatrix x;
    x.cols = 5;
    Rng rng{3};
    for (int i = 0; i < 50; ++i) {
        const double a = uniform01(rng) < 0.5 ? 1.0 : 0.0;
        const double c = uniform01(rng);
        x.data.insert(x.data.end(), {1.0, a, 1.0 - a, c, a + c});
    }
    x.rows = 50;
    const std::vector<double> w(50, 1.0);
    CHECK(independent_columns(x, w) == std::vector<std::size_t>{0, 1, 3});
}
