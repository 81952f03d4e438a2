#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "fracschro/linear.hpp"
#include "fracschro/parallel.hpp"
#include "fracschro/renorm.hpp"
#include "fracschro/rng.hpp"

using namespace fracschro;

namespace {

GridSpec box(int N, double L, double T, int M) {
    GridSpec g;
    g.d = 1;
    g.N = N;
    g.L = L;
    g.T = T;
    g.M = M;
    return g;
}

// Beta-function form of the angular integral
double angular_oracle(const HurstIndex& H) {
    double num = 2.0, s = 0.0;
    for (double h : H.Hs) {
        const double a = 1.0 - 2.0 * h;
        num *= boost::math::tgamma(0.5 * (a + 1.0));
        s += 0.5 * (a + 1.0);
    }
    return num / boost::math::tgamma(s);
}

struct Moments {
    double mean = 0.0, se = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= double(v.size());
    double s2 = 0.0;
    for (double x : v) s2 += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(s2 / double(v.size() - 1) / double(v.size()));
    return m;
}

}  // namespace

TEST_CASE("angular constant matches the Beta-function form") {
    CHECK(angular_constant(HurstIndex{0.7, {0.6}}) == 2.0);
    for (const auto& H : {HurstIndex{0.9, {0.7, 0.55}}, HurstIndex{0.9, {0.3, 0.8}}, HurstIndex{0.95, {0.8, 0.75, 0.7}},
                          HurstIndex{0.95, {0.3, 0.6, 0.9}}})
        CHECK(angular_constant(H) == doctest::Approx(angular_oracle(H)).epsilon(1e-10));
}

TEST_CASE("sigma_n vanishes at t = 0 and agrees with the covariance diagonal") {
    HurstIndex H{0.7, {0.7}};
    CHECK(sigma_n(0.0, H, 4) == 0.0);
    for (double t : {0.3, 1.0}) {
        const double s = sigma_n(t, H, 4);
        const double c = covariance_quadrature(t, t, {0.0}, 4, 4, H).value.real();
        CHECK(std::abs(s / c - 1.0) <= 1e-6);
    }
    HurstIndex H2{0.8, {0.7, 0.7}};
    const double s2 = sigma_n(0.5, H2, 3);
    CHECK(std::abs(s2 / covariance_quadrature(0.5, 0.5, {0.0, 0.0}, 3, 3, H2).value.real() - 1.0) <= 1e-6);
    HurstIndex H3{0.9, {0.8, 0.8, 0.8}};
    const double s3 = sigma_n(0.5, H3, 2);
    CHECK(std::abs(s3 / covariance_quadrature(0.5, 0.5, {0.0, 0.0, 0.0}, 2, 2, H3).value.real() - 1.0) <= 1e-6);
}

TEST_CASE("sigma_n is nondecreasing in n and t") {
    HurstIndex H{0.6, {0.6}};
    double prev = 0.0;
    for (int n = 1; n <= 6; ++n) {
        const double s = sigma_n(0.7, H, n);
        CHECK(s > prev);
        prev = s;
    }
    prev = 0.0;
    for (double t : {0.1, 0.3, 0.6, 1.0}) {
        const double s = sigma_n(t, H, 4);
        CHECK(s > prev);
        prev = s;
    }
}

TEST_CASE("sigma_n / 2^n settles for H = (0.5, 0.5)") {
    HurstIndex H{0.5, {0.5}};
    std::vector<double> r;
    for (int n = 4; n <= 10; ++n) r.push_back(sigma_n(1.0, H, n) / std::ldexp(1.0, n));
    for (double v : r) CHECK(v > 0.0);
    for (std::size_t i = 2; i < r.size(); ++i) CHECK(std::abs(r[i] - r[i - 1]) < std::abs(r[i - 1] - r[i - 2]));
    CHECK(std::abs(r.back() / r[r.size() - 2] - 1.0) < 0.01);
}

TEST_CASE("reduced integral: scaling in t and domain checks") {
    const double r8 = reduced_integral(2.0, 1.2, 0.4, 8).value / reduced_integral(1.0, 1.2, 0.4, 8).value;
    const double r4 = reduced_integral(2.0, 1.2, 0.4, 4).value / reduced_integral(1.0, 1.2, 0.4, 4).value;
    CHECK(std::abs(r8 - 2.0) < std::abs(r4 - 2.0));
    CHECK(std::abs(r8 - 2.0) < 0.02);
    CHECK_THROWS_AS(reduced_integral(1.0, 2.0, 0.4, 4), std::invalid_argument);
    CHECK_THROWS_AS(reduced_integral(1.0, 0.5, 0.4, 4), std::invalid_argument);
    CHECK_THROWS_AS(verify_asymptotics(1.2, -0.1, 1.0, {4, 5}), std::invalid_argument);
    CHECK_THROWS_AS(verify_asymptotics(0.5, 0.3, 1.0, {4, 5}), std::invalid_argument);
}

TEST_CASE("asymptotics report for kappa > 0") {
    AsymptoticsReport rep = verify_asymptotics(1.2, 0.4, 1.0, {6, 7, 8});
    REQUIRE(rep.points.size() == 3);
    CHECK(rep.deviation_decreasing);
    CHECK(rep.deviation_slope < 0.0);
    for (const auto& p : rep.points) {
        CHECK(p.converged);
        CHECK(p.predicted == doctest::Approx(std::numbers::pi / 0.4 * std::pow(4.0, 0.4 * p.n)));
        CHECK(std::abs(p.ratio - 1.0) < 0.02);
    }
    CHECK(predicted_equivalent(0.0, 2.0, 5) == doctest::Approx(std::numbers::pi * std::log(4.0) * 10.0));
}

TEST_CASE("renormalization constant interpolates between nodes") {
    RenormConstant rc = renorm_constant(HurstIndex{0.7, {0.7}}, 3, {0.0, 0.5, 1.0});
    CHECK(rc.values[0] == 0.0);
    CHECK(rc.converged);
    CHECK(rc.at(0.25) == doctest::Approx(0.5 * rc.values[1]));
    CHECK(rc.at(0.75) == doctest::Approx(0.5 * (rc.values[1] + rc.values[2])));
    CHECK(rc.at(2.0) == rc.values[2]);
    CHECK_THROWS_AS(renorm_constant(HurstIndex{0.7, {0.7}}, 3, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("wick square of a zero path and grid checks") {
    GridSpec g = box(64, 8.0, 1.0, 3);
    RenormConstant rc = renorm_constant(HurstIndex{0.7, {0.7}}, 3, g.times());
    FieldPath zero(g);
    FieldPath w = wick_square(zero, rc);
    for (std::size_t k = 0; k < w.nodes(); ++k)
        for (const auto& v : w.fields[k].values) CHECK(v == cplx(-rc.values[k], 0.0));
    GridSpec g2 = box(64, 8.0, 2.0, 3);
    CHECK_THROWS_AS(wick_square(FieldPath(g2), rc), std::invalid_argument);
    GridSpec g3 = box(64, 8.0, 1.0, 4);
    CHECK_THROWS_AS(wick_square(FieldPath(g3), rc), std::invalid_argument);
}

TEST_CASE("Monte Carlo: Wick square has mean zero and obeys the Wick formula") {
    GridSpec g = box(256, 32.0, 1.0, 3);
    HurstIndex H{0.7, {0.7}};
    SpectralCellSet cs = build_cells(3, H, g);
    RenormConstant s3 = renorm_constant(H, 3, g.times());
    RenormConstant s2 = renorm_constant(H, 2, g.times());
    const int R = 3000;
    const int jx = 128, jy = 132;
    std::vector<double> mean(R), prod(R);
    parallel_for(R, [&](std::size_t r) {
        auto paths = sample_psi_levels(sample_noise(derive_seed(17, r)), cs, {2, 3});
        FieldPath a = wick_square(paths[1], s3), b = wick_square(paths[0], s2);
        mean[r] = a.fields[2].values[jx].real();
        prod[r] = a.fields[2].values[jx].real() * b.fields[1].values[jy].real();
    });
    Moments m = moments(mean);
    MESSAGE("wick mean " << m.mean << " se " << m.se << " sigma " << s3.values[2]);
    CHECK(std::abs(m.mean) <= 4.0 * m.se);
    const double dx = g.coord(jx) - g.coord(jy);
    const double t = g.times()[2], s = g.times()[1];
    const cplx c = covariance_quadrature(t, s, {dx}, 3, 2, H).value;
    const cplx pc = pseudo_covariance_quadrature(t, s, {dx}, 3, 2, H).value;
    const double oracle = std::norm(c) + std::norm(pc);
    Moments p = moments(prod);
    MESSAGE("wick product " << p.mean << " se " << p.se << " oracle " << oracle);
    CHECK(std::abs(p.mean - oracle) <= 4.0 * p.se);
}

TEST_CASE("wick convergence study: flags and the t = 0 node") {
    ConvergenceConfig cfg;
    cfg.grid = box(256, 16.0, 0.5, 2);
    cfg.levels = {2, 3, 4, 5};
    cfg.realizations = 4;
    cfg.chi = CutoffSpec::isotropic(1, 1.0, 2.0);
    cfg.H = HurstIndex{0.9, {0.9}};
    cfg.alpha = 0.3;
    RateReport reg = wick_convergence_study(cfg);
    CHECK(reg.flagged);
    cfg.H = HurstIndex{0.7, {0.55}};
    cfg.alpha = 0.02;   // at or below -alpha_gap = 0.05
    CHECK(wick_convergence_study(cfg).flagged);
    cfg.alpha = 0.08;
    RateReport rep = wick_convergence_study(cfg);
    CHECK_FALSE(rep.flagged);
    CHECK(rep.points.size() == 3);
    for (const auto& p : rep.points) CHECK(p.mean > 0.0);
}
