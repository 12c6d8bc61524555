#include "oracles.hpp"

#include "nowcast/glm.hpp"
#include "nowcast/rng.hpp"
#include "nowcast/simd/kernels.hpp"
#include "nowcast/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace nowcast;
using simd::Isa;

namespace {

std::vector<double> randoms(Rng& rng, std::size_t n)
{
    std::vector<double> v(n);
    for (double& x : v) x = 2.0 * uniform01(rng) - 1.0;
    return v;
}

double abs_dot(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] * b[i]);
    return s;
}

struct IsaGuard {
    ~IsaGuard() { simd::force_isa(simd::avx2_kernels() ? Isa::avx2 : Isa::scalar); }
};

} // namespace

TEST_CASE("scalar kernels are the plain loops")
{
    const auto& k = simd::scalar_kernels();
    CHECK(k.isa == Isa::scalar);
    const double a[] = {1, 2, 3};
    const double b[] = {4, 5, 6};
    const double c[] = {2, 0, 1};
    CHECK(k.dot(a, b, 3) == 32.0);
    CHECK(k.dot3(a, b, c, 3) == 26.0);
    double y[] = {1, 1, 1};
    k.axpy(2.0, a, y, 3);
    CHECK(y[2] == 7.0);
    double m[9] = {};
    k.syr_lower(1.0, a, m, 3);
    CHECK(m[0] == 1.0);
    CHECK(m[3] == 2.0);
    CHECK(m[8] == 9.0);
    CHECK(m[1] == 0.0); // upper triangle untouched
}

TEST_CASE("AVX2 kernels agree with the scalar reference")
{
    const auto* v = simd::avx2_kernels();
    if (!v) {
        MESSAGE("AVX2 kernels unavailable on this machine; equivalence not exercised");
        return;
    }
    const auto& s = simd::scalar_kernels();
    Rng rng{1};
    for (std::size_t n = 0; n <= 67; ++n) {
        const auto a = randoms(rng, n);
        const auto b = randoms(rng, n);
        const auto c = randoms(rng, n);
        const double tol = 1e-14 * (1.0 + abs_dot(a, b));
        CHECK(std::abs(v->dot(a.data(), b.data(), n) - s.dot(a.data(), b.data(), n)) <= tol);
        CHECK(std::abs(v->dot3(a.data(), b.data(), c.data(), n) - s.dot3(a.data(), b.data(), c.data(), n)) <= tol);

        auto y1 = c;
        auto y2 = c;
        s.axpy(0.37, a.data(), y1.data(), n);
        v->axpy(0.37, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));

        std::vector<double> m1(n * n, 0.5);
        std::vector<double> m2(n * n, 0.5);
        s.syr_lower(1.3, a.data(), m1.data(), n);
        v->syr_lower(1.3, a.data(), m2.data(), n);
        for (std::size_t i = 0; i < n * n; ++i) CHECK(m1[i] == doctest::Approx(m2[i]).epsilon(1e-15));
    }
}

TEST_CASE("model fits and Gini agree across instruction sets")
{
    if (!simd::avx2_kernels()) {
        MESSAGE("AVX2 kernels unavailable on this machine; equivalence not exercised");
        return;
    }
    IsaGuard guard;
    const std::vector<double> beta = {0.2, -0.7, 0.5, 0.3};
    const auto data = test::simulate_binary(Link::probit, beta, 20000, 5);
    Rng rng{6};
    std::vector<double> x(5000);
    std::vector<double> w(5000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = 3000.0 * uniform01(rng);
        w[i] = 1.0 + uniform01(rng);
    }

    simd::force_isa(Isa::scalar);
    CHECK(simd::kernels().isa == Isa::scalar);
    const auto fs = fit_binary(data.x, data.y, data.w, Link::probit, data.names);
    const double gs = gini(x, w);

    simd::force_isa(Isa::avx2);
    CHECK(simd::kernels().isa == Isa::avx2);
    const auto fv = fit_binary(data.x, data.y, data.w, Link::probit, data.names);
    const double gv = gini(x, w);

    for (std::size_t j = 0; j < beta.size(); ++j) {
        CHECK(fv.coefficients[j] == doctest::Approx(fs.coefficients[j]).epsilon(1e-9));
        CHECK(fv.standard_errors[j] == doctest::Approx(fs.standard_errors[j]).epsilon(1e-9));
    }
    CHECK(std::abs(gv - gs) < 1e-13);
}

TEST_CASE("isa names")
{
    CHECK(simd::isa_name(Isa::scalar) == "scalar");
    CHECK(simd::isa_name(Isa::avx2) == "avx2");
}
