#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <random>

#include "plgame/core.hpp"
#include "plgame/field.hpp"
#include "plgame/test_functions.hpp"

using namespace plgame;

namespace {

// Dense log-spaced scan oracle for the truncated geometric-mean infimum.
double scan_geometric_mean_inf(double a, double b, double alpha, double m, double M) {
    const double lo = m > 0.0 ? m : 1e-12;
    const double hi = M < kInf ? M : 1e12;
    double best = kInf;
    const int n = 20000;
    for (int i = 0; i <= n; ++i) {
        const double c = lo * std::pow(hi / lo, static_cast<double>(i) / n);
        const double v = alpha * std::pow(c, 1.0 - alpha) * a +
                         (1.0 - alpha) * std::pow(c, -alpha) * b;
        best = std::min(best, v);
    }
    return best;
}

}  // namespace

TEST_CASE("signed_pow examples and oddness") {
    CHECK(signed_pow(-4.0, 0.5) == Approx(-2.0));
    CHECK(signed_pow(0.0, 0.37) == 0.0);
    CHECK(signed_pow(8.0, 1.0 / 3.0) == Approx(2.0));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> da(-50.0, 50.0), dq(0.05, 4.0);
    for (int i = 0; i < 500; ++i) {
        const double a = da(rng), q = dq(rng);
        CHECK(signed_pow(-a, q) == -signed_pow(a, q));
    }
    CHECK(signed_pow(2.0, 1.5) > signed_pow(1.0, 1.5));
}

TEST_CASE("geometric_mean_inf pinned examples") {
    CHECK(geometric_mean_inf(4.0, 9.0, 0.5, 0.0, kInf) == Approx(6.0).epsilon(1e-12));
    CHECK(geometric_mean_inf(0.0, 5.0, 0.5, 0.0, kInf) == 0.0);
    CHECK(geometric_mean_inf(1.0, 1.0, 2.0 / 3.0, 0.5, 2.0) == Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(geometric_mean_inf(-1.0, 1.0, 0.5, 0.0, kInf), std::invalid_argument);
    CHECK_THROWS_AS(geometric_mean_inf(1.0, -1.0, 0.5, 0.0, kInf), std::invalid_argument);
}

TEST_CASE("geometric_mean_inf matches the untruncated product") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dv(0.01, 30.0), dal(0.05, 0.95);
    for (int i = 0; i < 1000; ++i) {
        const double a = dv(rng), b = dv(rng), al = dal(rng);
        const double want = std::pow(a, al) * std::pow(b, 1.0 - al);
        const double got = geometric_mean_inf(a, b, al, 0.0, kInf);
        CHECK(std::abs(got - want) <= 1e-10 * want);
    }
}

TEST_CASE("geometric_mean_inf truncation error bound") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dv(0.01, 10.0), dal(0.1, 0.9), dm(0.01, 0.5),
        dM(2.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = dv(rng), b = dv(rng), al = dal(rng), m = dm(rng), M = dM(rng);
        const double gm = std::pow(a, al) * std::pow(b, 1.0 - al);
        const double got = geometric_mean_inf(a, b, al, m, M);
        const double bound = al * a * std::pow(m, 1.0 - al) + (1.0 - al) * b * std::pow(M, -al);
        CHECK(got >= gm - 1e-12 * (1.0 + gm));
        CHECK(got - gm <= bound + 1e-12 * (1.0 + bound));
        // scan oracle agreement
        const double scanned = scan_geometric_mean_inf(a, b, al, m, M);
        CHECK(std::abs(got - scanned) <= 1e-8 * (1.0 + std::abs(scanned)));
    }
}

TEST_CASE("p_laplacian_radial pinned examples") {
    Params prm(2, 3.0, 0.3);
    CHECK(p_laplacian_radial(RadialKind::pos_power, 3.5, 1.0, prm) == Approx(73.5));
    CHECK(p_laplacian_radial(RadialKind::neg_power, 1.5, 1.0, prm) == Approx(9.0));
    CHECK_THROWS_AS(p_laplacian_radial(RadialKind::neg_power, 1.5, 0.0, prm), std::invalid_argument);

    for (double p : {2.5, 3.0, 4.0}) {
        for (int d : {1, 2, 3}) {
            Params q(d, p, 0.3);
            const double b = (3.0 * p - 2.0) / (p - 1.0);
            CHECK(p_laplacian_radial(RadialKind::pos_power, b, 0.0, q) == 0.0);
        }
    }
}

TEST_CASE("analytic_p_laplacian on closed forms") {
    Params prm1(1, 3.0, 0.3);
    std::vector<double> A{2.0};
    TestFunction quad = make_quadratic(1, A, {0.0}, 0.0);
    CHECK(analytic_p_laplacian(quad.field, {1.0}, prm1) == Approx(8.0));

    TestFunction aff = make_affine(2, {1.0, -2.0}, 0.5);
    Params prm2(2, 3.0, 0.3);
    CHECK(analytic_p_laplacian(aff.field, {0.3, -0.7}, prm2) == 0.0);

    TestFunction rad = make_radial_power(2, {0.0, 0.0}, 3.5, "r35");
    const Point x{0.6, 0.8};  // |x| = 1
    const double via_derivs = analytic_p_laplacian(rad.field, x, prm2);
    CHECK(via_derivs == Approx(73.5).epsilon(1e-8));
}

TEST_CASE("analytic_p_laplacian agrees with the radial closed forms") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> dr(0.2, 3.0);
    for (double p : {2.5, 3.0, 4.0}) {
        for (int d : {1, 2}) {
            Params prm(d, p, 0.3);
            const double a_neg = (p + d - 2.0) / (p - 1.0);
            const double b_pos = (3.0 * p - 2.0) / (p - 1.0);
            TestFunction fneg = make_singular_profile(d, Point(d, 0.0), prm);
            TestFunction fpos = make_barrier_profile(d, Point(d, 0.0), prm);
            for (int i = 0; i < 25; ++i) {
                const double r = dr(rng);
                Point x(d, 0.0);
                x[0] = r;
                const double neg_oracle = p_laplacian_radial(RadialKind::neg_power, a_neg, r, prm);
                const double pos_oracle = p_laplacian_radial(RadialKind::pos_power, b_pos, r, prm);
                CHECK(std::abs(analytic_p_laplacian(fneg.field, x, prm) - neg_oracle) <=
                      1e-8 * std::abs(neg_oracle));
                CHECK(std::abs(analytic_p_laplacian(fpos.field, x, prm) - pos_oracle) <=
                      1e-8 * std::abs(pos_oracle));
            }
        }
    }
}

TEST_CASE("Params invariants and validation") {
    CHECK_THROWS_AS(Params(0, 3.0, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(Params(1, 2.0, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(Params(1, 3.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Params(1, 3.0, 0.0), std::invalid_argument);

    for (double p : {2.5, 3.0, 4.0, 7.0}) {
        for (int d : {1, 2, 3}) {
            for (double eps : {0.4, 0.2, 0.1, 0.05}) {
                Params prm(d, p, eps);
                CHECK(prm.alpha > 0.0);
                CHECK(prm.alpha < 1.0);
                CHECK(prm.beta > 0.0);
                CHECK(prm.beta < 1.0);
                CHECK(prm.gamma > 2.0);
                CHECK(prm.m_eps > 0.0);
                CHECK(prm.m_eps < prm.M_eps);
                CHECK(prm.tau == Approx(eps * eps / 2.0));
            }
        }
    }

    // (HT): m -> 0, eps m^{-alpha/2} -> 0, M -> inf, eps^2 M^{1-alpha} -> 0
    for (double p : {2.5, 3.0, 4.0}) {
        double prev_m = kInf, prev_small = kInf, prev_M = 0.0, prev_band = kInf;
        for (double eps : {0.4, 0.2, 0.1, 0.05, 0.02, 0.01}) {
            Params prm(1, p, eps);
            const double small = eps * std::pow(prm.m_eps, -prm.alpha / 2.0);
            const double band = eps * eps * std::pow(prm.M_eps, 1.0 - prm.alpha);
            CHECK(prm.m_eps < prev_m);
            CHECK(small < prev_small);
            CHECK(prm.M_eps > prev_M);
            CHECK(band < prev_band);
            prev_m = prm.m_eps;
            prev_small = small;
            prev_M = prm.M_eps;
            prev_band = band;
        }
    }

    // derived fields are pure functions of (d, p, eps)
    Params a(2, 3.5, 0.25), b(2, 3.5, 0.25);
    CHECK(a.alpha == b.alpha);
    CHECK(a.m_eps == b.m_eps);
    CHECK(a.M_eps == b.M_eps);
    CHECK(a.band_width == b.band_width);
}
