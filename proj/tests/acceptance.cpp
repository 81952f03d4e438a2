// Acceptance run: one PASS/FAIL line per criterion 1..11, nonzero exit on any FAIL.
// Usage: acceptance [criterion numbers...]

#include <sys/wait.h>
#include <unistd.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fracschro/experiments.hpp"
#include "fracschro/gamma.hpp"
#include "fracschro/lab.hpp"
#include "fracschro/linear.hpp"
#include "fracschro/parallel.hpp"
#include "fracschro/renorm.hpp"
#include "fracschro/rng.hpp"
#include "fracschro/solver.hpp"

using namespace fracschro;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> lines;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
};

std::string f(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

std::string fc(cplx z) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.6g%+.4gi", z.real(), z.imag());
    return buf;
}

GridSpec box(int N, double L, double T, int M) { return GridSpec{1, N, L, T, M}; }

Field gaussian(const GridSpec& g, double width, double k0 = 0.0) {
    return Field::from_function(
        g, [&](const double* x) { return std::exp(-x[0] * x[0] / (width * width)) * std::polar(1.0, k0 * x[0]); });
}

double path_max(const FieldPath& p) {
    double m = 0.0;
    for (const auto& fl : p.fields)
        for (const auto& v : fl.values) m = std::max(m, std::abs(v));
    return m;
}

struct Moments {
    cplx mean;
    double se_re = 0.0, se_im = 0.0;
};

Moments moments(const std::vector<cplx>& v) {
    Moments m;
    for (auto x : v) m.mean += x;
    m.mean /= double(v.size());
    double vr = 0.0, vi = 0.0;
    for (auto x : v) {
        vr += (x.real() - m.mean.real()) * (x.real() - m.mean.real());
        vi += (x.imag() - m.mean.imag()) * (x.imag() - m.mean.imag());
    }
    const double n = double(v.size());
    m.se_re = std::sqrt(vr / (n - 1) / n);
    m.se_im = std::sqrt(vi / (n - 1) / n);
    return m;
}

// |mc - oracle| <= 4 se per component; an exactly degenerate component (se = 0) must match to 1e-12.
bool within4(double mc, double se, double oracle, double scale) {
    if (se == 0.0) return std::abs(mc - oracle) <= 1e-12 * std::max(1.0, scale);
    return std::abs(mc - oracle) <= 4.0 * se;
}

// --- 1 -------------------------------------------------------------------

cplx gamma_oracle(double t, double xi, double r) {
    using boost::math::quadrature::gauss_kronrod;
    const double delta = r * r - xi;
    auto c = [&](double s) { return std::cos(s * delta); };
    auto s = [&](double u) { return std::sin(u * delta); };
    const int panels = 1 + static_cast<int>(std::ceil(t * std::abs(delta) / 3.0));
    double re = 0.0, im = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double a = t * k / panels, b = t * (k + 1) / panels;
        re += gauss_kronrod<double, 61>::integrate(c, a, b, 5, 1e-14);
        im += gauss_kronrod<double, 61>::integrate(s, a, b, 5, 1e-14);
    }
    return std::polar(1.0, xi * t) * cplx(re, im);
}

Outcome criterion1() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    SplitMix64 gen(20240101);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double t = 2.0 * gen.uniform(), xi = -60.0 + 120.0 * gen.uniform(), r = 8.0 * gen.uniform();
        const cplx ref = gamma_oracle(t, xi, r);
        worst = std::max(worst, std::abs(gamma(t, xi, r) - ref) / std::max(std::abs(ref), 1e-300));
    }
    o.check(worst <= 1e-10, "max relative error vs adaptive quadrature on 1000 points = " + f(worst, 3) + " (<= 1e-10)");
    double jump = 0.0;
    for (double t : {0.01, 0.5, 1.0, 3.0})
        for (double r : {0.0, 1.0, 30.0})
            for (double sg : {-1.0, 1.0}) {
                const double th = resonance_threshold(t);
                const double lo = r * r - sg * th * (1.0 - 1e-9), hi = r * r - sg * th * (1.0 + 1e-9);
                jump = std::max(jump, std::abs(gamma(t, lo, r) - gamma(t, hi, r)) / t);
            }
    o.check(jump <= 1e-9, "relative jump across the resonance guard = " + f(jump, 3) + " (<= 1e-9)");
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(sec < 5.0, "runtime " + f(sec, 3) + " s (< 5 s)");
    return o;
}

// --- 2, 3 ------------------------------------------------------------------

Outcome criterion2() {
    Outcome o;
    for (auto [a, k] : {std::pair{1.2, 0.4}, std::pair{0.8, 0.5}}) {
        const AsymptoticsReport rep = verify_asymptotics(a, k, 1.0, {6, 7, 8, 9, 10});
        std::string devs;
        for (const auto& p : rep.points) devs += " " + f(std::abs(p.ratio - 1.0), 3);
        const double r10 = rep.points.back().ratio;
        o.check(std::abs(r10 - 1.0) <= 0.05,
                "(alpha,kappa)=(" + f(a) + "," + f(k) + "): J_10/((pi/kappa)4^{10 kappa}) = " + f(r10, 7) + " (|.-1| <= 0.05)");
        o.check(rep.deviation_decreasing, "  deviation decreasing over n=6..10:" + devs);
    }
    return o;
}

Outcome criterion3() {
    Outcome o;
    const AsymptoticsReport rep = verify_asymptotics(1.5, 0.0, 1.0, {10, 11, 12});
    std::string inc;
    for (std::size_t i = 1; i < rep.points.size(); ++i) inc += " " + f(rep.points[i].increment, 7);
    const double r12 = rep.points.back().ratio;
    o.check(std::abs(r12 - 1.0) <= 0.10, "J_12/(pi ln4 12) = " + f(r12, 7) + " (|.-1| <= 0.10)");
    o.lines.push_back("     increments J_n - J_{n-1}:" + inc + " vs pi ln4 = " + f(std::numbers::pi * std::log(4.0), 7));
    return o;
}

// --- 4 -------------------------------------------------------------------

Outcome criterion4() {
    Outcome o;
    const HurstIndex Ha{0.5, {0.5}};
    std::vector<std::pair<double, double>> pts;
    for (int n = 4; n <= 10; ++n) pts.emplace_back(n, sigma_n(1.0, Ha, n));
    const RateFit fit = fit_decay_rate(pts);
    o.check(std::abs(fit.slope - 1.0) <= 0.05, "H=(0.5,0.5): slope of log2 sigma_n(1), n=4..10 = " + f(fit.slope, 6) + " (1.0 +- 0.05)");
    const HurstIndex Hb{0.625, {0.75}};
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    std::string vals;
    for (int n = 6; n <= 12; ++n) {
        const double v = sigma_n(1.0, Hb, n) / n;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        vals += " " + f(v, 6);
    }
    o.check(hi / lo - 1.0 <= 0.10, "H=(0.625,0.75): max/min of sigma_n(1)/n over n=6..12 = " + f(hi / lo, 5) + " (<= 1.10)");
    o.lines.push_back("     sigma_n/n:" + vals);
    return o;
}

// --- 5, 6 ------------------------------------------------------------------

Outcome criterion5() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const GridSpec g = box(512, 64.0, 1.0, 5);
    const HurstIndex H{0.7, {0.7}};
    const SpectralCellSet cs = build_cells(4, H, g);
    struct Probe {
        int ks, kt, jx, jy;
    };
    const std::vector<Probe> probes{{4, 4, 256, 256}, {2, 4, 256, 260}, {1, 3, 256, 264}, {4, 2, 248, 264}, {3, 3, 256, 272}};
    const int R = 2000;
    std::vector<std::vector<cplx>> cov(probes.size(), std::vector<cplx>(R)), pcov = cov;
    parallel_for(R, [&](std::size_t r) {
        const FieldPath p = sample_psi(sample_noise(derive_seed(5005, r)), cs);
        for (std::size_t i = 0; i < probes.size(); ++i) {
            const cplx a = p.fields[probes[i].ks].values[probes[i].jx], b = p.fields[probes[i].kt].values[probes[i].jy];
            cov[i][r] = a * std::conj(b);
            pcov[i][r] = a * b;
        }
    });
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const Probe& q = probes[i];
        const double s = g.time(q.ks), t = g.time(q.kt), dx = g.coord(q.jx) - g.coord(q.jy);
        const cplx c = covariance_quadrature(s, t, {dx}, 4, 4, H).value;
        const cplx pc = pseudo_covariance_quadrature(s, t, {dx}, 4, 4, H).value;
        const Moments mc = moments(cov[i]), mp = moments(pcov[i]);
        const double sc = std::abs(c), sp = std::abs(pc);
        const bool ok_c = within4(mc.mean.real(), mc.se_re, c.real(), sc) && within4(mc.mean.imag(), mc.se_im, c.imag(), sc);
        const bool ok_p = within4(mp.mean.real(), mp.se_re, pc.real(), sp) && within4(mp.mean.imag(), mp.se_im, pc.imag(), sp);
        const std::string tag = "(s,t,dx)=(" + f(s) + "," + f(t) + "," + f(dx) + ")";
        o.check(ok_c, tag + " cov MC " + fc(mc.mean) + " se (" + f(mc.se_re, 3) + "," +
                          f(mc.se_im, 3) + ") vs " + fc(c));
        o.check(ok_p, tag + " pseudo MC " + fc(mp.mean) + " se (" + f(mp.se_re, 3) + "," +
                          f(mp.se_im, 3) + ") vs " + fc(pc));
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(sec < 600.0, "runtime " + f(sec, 3) + " s (< 10 min)");
    return o;
}

Outcome criterion6() {
    Outcome o;
    const GridSpec g = box(256, 32.0, 1.0, 3);
    const HurstIndex H{0.7, {0.7}};
    const SpectralCellSet cs = build_cells(3, H, g);
    const RenormConstant s3 = renorm_constant(H, 3, g.times()), s2 = renorm_constant(H, 2, g.times());
    struct Probe {
        int na, ka, ja, nb, kb, jb;
    };
    const std::vector<Probe> probes{{3, 2, 128, 2, 1, 132}, {3, 2, 128, 3, 2, 128}, {2, 1, 128, 3, 2, 136}};
    const int R = 3000;
    std::vector<std::vector<cplx>> prod(probes.size(), std::vector<cplx>(R));
    parallel_for(R, [&](std::size_t r) {
        const auto paths = sample_psi_levels(sample_noise(derive_seed(6006, r)), cs, {2, 3});
        const FieldPath w2 = wick_square(paths[0], s2), w3 = wick_square(paths[1], s3);
        for (std::size_t i = 0; i < probes.size(); ++i) {
            const Probe& q = probes[i];
            const FieldPath& a = q.na == 3 ? w3 : w2;
            const FieldPath& b = q.nb == 3 ? w3 : w2;
            prod[i][r] = a.fields[q.ka].values[q.ja] * std::conj(b.fields[q.kb].values[q.jb]);
        }
    });
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const Probe& q = probes[i];
        const double s = g.time(q.ka), t = g.time(q.kb), dx = g.coord(q.ja) - g.coord(q.jb);
        const cplx c = covariance_quadrature(s, t, {dx}, q.na, q.nb, H).value;
        const cplx pc = pseudo_covariance_quadrature(s, t, {dx}, q.na, q.nb, H).value;
        const double oracle = std::norm(c) + std::norm(pc);
        const Moments m = moments(prod[i]);
        o.check(within4(m.mean.real(), m.se_re, oracle, oracle) && within4(m.mean.imag(), m.se_im, 0.0, oracle),
                "(n,m,s,t,dx)=(" + std::to_string(q.na) + "," + std::to_string(q.nb) + "," + f(s) + "," + f(t) + "," + f(dx) +
                    ") MC " + f(m.mean.real()) + " se " + f(m.se_re, 3) + " vs |cov|^2+|pcov|^2 = " + f(oracle));
    }
    return o;
}

// --- 7 -------------------------------------------------------------------

Outcome criterion7() {
    Outcome o;
    ConvergenceConfig cfg;
    cfg.grid = box(512, 20.0, 0.5, 5);
    cfg.levels = {2, 3, 4, 5, 6};
    cfg.realizations = 200;
    cfg.seed = 2024;
    cfg.p = 2.0;
    cfg.chi = CutoffSpec::isotropic(1, 2.0, 4.0);
    cfg.H = HurstIndex{0.7, {0.7}};
    cfg.alpha = 0.15;
    const RateReport psi = convergence_study(cfg);
    o.check(psi.fit.slope <= -0.1 && psi.slope_stderr < 0.05,
            "Psi, H=(0.7,0.7), alpha=0.15: slope " + f(psi.fit.slope, 4) + " se " + f(psi.slope_stderr, 3) +
                " (slope <= -0.1, se < 0.05)");
    cfg.H = HurstIndex{0.7, {0.55}};
    cfg.alpha = 0.08;
    const RateReport wick = wick_convergence_study(cfg);
    o.check(wick.fit.slope <= -0.1 && wick.slope_stderr < 0.05,
            "Wick square, H=(0.7,0.55), alpha=0.08: slope " + f(wick.fit.slope, 4) + " se " + f(wick.slope_stderr, 3) +
                " (slope <= -0.1, se < 0.05)");
    return o;
}

// --- 8 -------------------------------------------------------------------

Outcome criterion8() {
    Outcome o;
    const GridSpec g = box(512, 40.0, 1.0, 2);
    Ensemble e;
    e.band = 200;
    const Field r = random_field(g, e, 88);
    double worst = 0.0;
    for (double t : {0.1, 0.5, 1.7, -3.2, 25.0})
        worst = std::max(worst, std::abs(lp_norm(schrodinger_propagate(r, t), 2.0) / lp_norm(r, 2.0) - 1.0));
    o.check(worst <= 1e-13, "unitarity | ||S_t f|| / ||f|| - 1 | = " + f(worst, 3) + " (<= 1e-13)");
    const Field phi = Field::from_function(g, [](const double* x) { return std::exp(-0.5 * x[0] * x[0]); });
    const double t = 0.5;
    const Field u = schrodinger_propagate(phi, t);
    const cplx w(1.0, -2.0 * t);
    double err = 0.0;
    for (int j = 0; j < g.N; ++j) {
        const double x = g.coord(j);
        err = std::max(err, std::abs(u.values[j] - std::exp(-x * x / (2.0 * w)) / std::sqrt(w)));
    }
    o.check(err <= 1e-6, "Gaussian packet L-inf error at t=0.5 = " + f(err, 3) + " (<= 1e-6)");
    return o;
}

// --- 9 -------------------------------------------------------------------

MildProblem empty_problem(const GridSpec& g) {
    MildProblem prob;
    prob.grid = g;
    prob.phi = Field(g);
    prob.rho = CutoffSpec::isotropic(1, 2.0, 4.0);
    prob.chi = CutoffSpec::isotropic(1, 1.0, 2.0);
    prob.ell = FieldPath(g);
    prob.c = FieldPath(g);
    return prob;
}

Outcome criterion9() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const HurstIndex H9{0.9, {0.9}};
    {
        const GridSpec g = box(256, 24.0, 0.5, 17);
        MildProblem prob = empty_problem(g);
        const SolverParams sp = select_parameters(1, SolverRegime::Regular, 0.2, H9);
        const SolveReport z = picard_solve(prob, sp);
        o.check(path_max(z.v) == 0.0, "(a) phi = 0, drivers = 0: max|v| = " + f(path_max(z.v)));

        set_drivers(prob, sample_psi(sample_noise(7), build_cells(3, H9, g)), nullptr);
        Field phi = gaussian(g, 1.0);
        phi *= 0.1 / sobolev_norm(phi, 0.2, 2.0);
        prob.phi = phi;
        const SolveReport rep = picard_solve(prob, sp);
        double rmax = 0.0;
        for (double r : rep.ratios) rmax = std::max(rmax, r);
        o.check(rmax < 0.5 && rep.residual < 1e-6 && rep.iterates <= 15,
                "(b) small data: max ratio " + f(rmax, 3) + ", residual " + f(rep.residual, 3) + ", iterates " +
                    std::to_string(rep.iterates) + " (ratio < 0.5, residual < 1e-6, <= 15 iterations)");
    }
    {
        auto at_T = [](int M) {
            const GridSpec g = box(128, 20.0, 1.0, M);
            FieldPath F(g);
            for (std::size_t k = 0; k < F.nodes(); ++k)
                F.fields[k] = std::cos(3.0 * F.times[k]) * gaussian(g, 1.0 + 0.5 * F.times[k]);
            return duhamel(F).fields.back();
        };
        const Field ref = at_T(2049);
        std::vector<double> errs;
        for (int M : {17, 33, 65, 129}) errs.push_back(sobolev_norm(at_T(M) - ref, 0.0, 2.0));
        double order = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < errs.size(); ++i) order = std::min(order, std::log2(errs[i - 1] / errs[i]));
        o.check(order >= 1.9, "(c) duhamel self-convergence order (min over M=17..129) = " + f(order, 4) + " (>= 1.9)");
    }
    {
        const GridSpec g = box(256, 32.0, 0.5, 5);
        const HurstIndex H{0.7, {0.55}};
        const FieldPath psi = sample_psi(sample_noise(11), build_cells(3, H, g));
        const RenormConstant sig = renorm_constant(H, 3, g.times());
        MildProblem raw = empty_problem(g), wick = empty_problem(g);
        raw.phi = wick.phi = 0.2 * gaussian(g, 1.0);
        set_drivers(raw, psi, nullptr);
        set_drivers(wick, psi, &sig);
        FieldPath v(g);
        for (auto& x : v.fields) x = 0.1 * gaussian(g, 1.5, 0.5);
        const FieldPath diff = gamma_map(v, wick, select_parameters(1, SolverRegime::Rough, 0.08)) -
                               gamma_map(v, raw, select_parameters(1, SolverRegime::Regular, 0.2));
        const Field rho = raw.rho.sample(g);
        FieldPath rs(g);
        for (std::size_t k = 0; k < rs.nodes(); ++k)
            for (std::size_t i = 0; i < g.size(); ++i) rs.fields[k].values[i] = std::norm(rho.values[i]) * sig.values[k];
        const FieldPath expect = duhamel(rs);
        double err = 0.0;
        for (std::size_t k = 0; k < v.nodes(); ++k)
            for (std::size_t i = 0; i < g.size(); ++i)
                err = std::max(err, std::abs(diff.fields[k].values[i] + expect.fields[k].values[i]));
        err /= path_max(expect);
        o.check(err <= 1e-12, "(d) rough - regular + duhamel(rho^2 sigma): relative max = " + f(err, 3) + " (<= 1e-12)");
    }
    {
        SmoothConvergenceConfig cfg;
        cfg.grid = box(256, 24.0, 0.25, 9);
        cfg.levels = {2, 3, 4, 5};
        cfg.seed = 5;
        cfg.rho = CutoffSpec::isotropic(1, 2.0, 4.0);
        cfg.chi = CutoffSpec::isotropic(1, 1.0, 2.0);
        cfg.H = H9;
        cfg.params = select_parameters(1, SolverRegime::Regular, 0.2, cfg.H);
        cfg.phi = 0.1 * gaussian(cfg.grid, 1.0);
        const double reg = smooth_convergence_experiment(cfg).rate.fit.slope;
        cfg.H = HurstIndex{0.7, {0.55}};
        cfg.params = select_parameters(1, SolverRegime::Rough, 0.08, cfg.H);
        const Field g0 = gaussian(cfg.grid, 1.0);
        cfg.phi = (0.1 / sobolev_norm(g0, -0.16, 2.0)) * g0;
        const double rough = smooth_convergence_experiment(cfg).rate.fit.slope;
        o.check(reg < 0.0 && rough < 0.0, "(e) smooth-solution convergence slopes: regular H=(0.9,0.9) " + f(reg, 4) +
                                              ", rough H=(0.7,0.55) alpha=0.08 " + f(rough, 4) + " (< 0)");
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(sec < 1800.0, "runtime " + f(sec, 3) + " s (< 30 min)");
    return o;
}

// --- 10 ------------------------------------------------------------------

Outcome criterion10() {
    Outcome o;
    const LabSuiteResult res = run_lab_suite("all", 256, 32, 2024);
    for (const auto& r : res.reports) {
        std::string params;
        for (const auto& [k, v] : r.params) params += (params.empty() ? "" : ",") + k + "=" + f(v, 4);
        o.check(r.refinement_ok(), r.id + "(" + params + "): C(256) = " + f(r.trace[0].second, 5) + ", C(512) = " +
                                       f(r.trace[1].second, 5) + " (C(512) <= 2 C(256))");
    }
    for (const auto& [id, scan] : res.scans) {
        if (id.rfind("commutator", 0) != 0) continue;
        std::string vals;
        for (const auto& p : scan.points) vals += " " + f(p.ratio, 4);
        o.check(std::abs(scan.slope) <= 0.1, id + ": slope of log C vs log K over K=2..32 = " + f(scan.slope, 4) +
                                                 " (|.| <= 0.1); C:" + vals);
    }
    return o;
}

// --- 11 ------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string cli_binary(const char* argv0) {
    if (const char* b = std::getenv("FRACSCHRO_BIN")) return b;
    return (fs::absolute(argv0).parent_path() / "fracschro").string();
}

Outcome criterion11(const std::string& bin) {
    Outcome o;
    const fs::path dir = fs::temp_directory_path() / ("fracschro_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::ofstream(dir / "solve.toml") << "experiment = \"solve\"\nseed = 7\nlevels = [3]\n[hurst]\nH0 = 0.9\nH = [0.9]\n"
                                         "[grid]\nN = 256\nL = 24.0\nT = 0.5\nM = 17\n[solver]\nregime = \"regular\"\n"
                                         "beta = 0.2\nphi_norm = 0.1\n";
    struct Run {
        std::string name, args;
        bool snapshot;
    };
    const std::vector<Run> runs{
        {"verify-gamma", "verify-gamma --samples 500 --seed 3", false},
        {"renorm-constant", "renorm-constant --hurst 0.5,0.5 --levels 3..6 --t 0.7", false},
        {"sample-noise", "sample-noise --levels 3 --seed 9 --M 5", true},
        {"linear-solution", "linear-solution --levels 3 --seed 9 --M 5", true},
        {"psi-convergence", "psi-convergence --levels 2..5 --N 512 --L 20 --T 0.5 --M 3 --realizations 8 --seed 4", false},
        {"wick-convergence",
         "wick-convergence --hurst 0.7,0.55 --alpha 0.08 --levels 2..5 --N 512 --L 20 --T 0.5 --M 3 --realizations 8 --seed 4",
         false},
        {"inequality-lab", "inequality-lab --which leibniz --samples 8", false},
        {"solve", "solve --config '" + (dir / "solve.toml").string() + "'", true},
        {"solution-convergence",
         "solution-convergence --hurst 0.9,0.9 --beta 0.2 --levels 2..5 --N 256 --L 24 --T 0.25 --M 9 --seed 5", false},
    };
    for (const auto& r : runs) {
        std::string outs[2], snaps[2];
        int codes[2] = {-1, -1};
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = dir / (r.name + std::to_string(rep) + ".out");
            const fs::path snap = dir / (r.name + std::to_string(rep) + ".frsc");
            std::string cmd = (rep == 1 ? "FRACSCHRO_THREADS=1 " : "") + std::string("'") + bin + "' " + r.args +
                              " --out '" + out.string() + "'";
            if (r.snapshot) cmd += " --snapshot '" + snap.string() + "'";
            cmd += " 2>/dev/null";
            const int st = std::system(cmd.c_str());
            codes[rep] = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
            outs[rep] = slurp(out);
            if (r.snapshot) snaps[rep] = slurp(snap);
        }
        const bool same = codes[0] == 0 && codes[1] == 0 && !outs[0].empty() && outs[0] == outs[1] && snaps[0] == snaps[1];
        o.check(same, r.name + ": exit codes " + std::to_string(codes[0]) + "/" + std::to_string(codes[1]) + ", " +
                          std::to_string(outs[0].size()) + " bytes" +
                          (r.snapshot ? " + " + std::to_string(snaps[0].size()) + "-byte snapshot" : "") +
                          (same ? ", bit-identical" : ", DIFFERENT"));
    }
    fs::remove_all(dir);
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    const std::string bin = cli_binary(argv[0]);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gamma-kernel exactness", criterion1},
        {"renormalization asymptotics, kappa > 0", criterion2},
        {"renormalization asymptotics, kappa = 0", criterion3},
        {"sigma_n divergence rate", criterion4},
        {"linear-solution covariance (Monte Carlo vs quadrature)", criterion5},
        {"Wick formula (Monte Carlo vs oracle)", criterion6},
        {"convergence studies", criterion7},
        {"free-propagator exactness", criterion8},
        {"solver correctness", criterion9},
        {"inequality lab", criterion10},
        {"CLI reproducibility", [&] { return criterion11(bin); }},
    };
    int failed = 0, run = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ++run;
        if (!o.pass) ++failed;
        std::printf("%s criterion %d: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), sec);
        for (const auto& l : o.lines) std::printf("       %s\n", l.c_str());
        std::fflush(stdout);
    }
    std::printf("SUMMARY: %d/%d criteria passed\n", run - failed, run);
    return failed == 0 ? 0 : 1;
}
