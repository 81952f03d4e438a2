#include "fracschro/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fracschro/gamma.hpp"
#include "fracschro/parallel.hpp"
#include "fracschro/ridge.hpp"
#include "fracschro/rng.hpp"

namespace fracschro {

namespace {

constexpr int kLowOctave = -12;

// int_{-X}^{X} |xi|^p |gamma_t(xi, r)|^2 dxi
double inner_integral(double t, double r, double p, double X, double tol) {
    const double r2 = r * r;
    RidgeProblem prob;
    prob.p = p;
    prob.r2 = r2;
    prob.smooth = 2.0;
    prob.waves = {{-2.0 * std::polar(1.0, t * r2), -t}};
    prob.exact = [=](double xi) { return std::pow(std::abs(xi), p) * gamma_sq_modulus(t, xi, r); };
    RidgeOptions ro;
    ro.rel_tol = tol;
    return ridge_integral(prob, -X, X, ro).value;
}

struct Panel {
    double a, b;
    bool power;   // [0, b] with r^e substituted away
};

}  // namespace

QuadResult reduced_integral(double t, double alpha, double kappa, int n, const ReducedOptions& opt) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("reduced_integral: alpha must lie in (0,2)");
    if (!(alpha + kappa > 1.0)) throw std::invalid_argument("reduced_integral: need alpha + kappa > 1");
    if (n < 1) throw std::invalid_argument("reduced_integral: n must be >= 1");
    if (t < 0.0) throw std::invalid_argument("reduced_integral: t must be non-negative");
    QuadResult res;
    res.value = 0.0;
    if (t == 0.0) return res;
    const double e = 2.0 * alpha + 2.0 * kappa - 3.0;
    const double p = 1.0 - alpha;
    const double X = std::ldexp(1.0, 2 * n);
    const double top = std::ldexp(1.0, n);

    std::vector<Panel> panels{{0.0, std::ldexp(1.0, kLowOctave), true}};
    for (int k = kLowOctave + 1; k < n; ++k) panels.push_back({std::ldexp(1.0, k - 1), std::ldexp(1.0, k), false});
    // the ridge meets the truncation at r = 2^n: layer of width ~ 1 / (2^n t)
    const double layer = 1.0 / (top * t);
    int jmax = 2;
    while (top * std::ldexp(1.0, -jmax) > 1e-3 * layer && jmax < 200) ++jmax;
    double lo = 0.5 * top;
    for (int j = 2; j <= jmax; ++j) {
        const double hi = top * (1.0 - std::ldexp(1.0, -j));
        panels.push_back({lo, hi, false});
        lo = hi;
    }
    panels.push_back({lo, top, false});

    const GaussRule& g64 = gauss_legendre(64);
    const GaussRule& g32 = gauss_legendre(32);
    const double q = e + 1.0;
    // 64- and 32-point sums over a set of panels
    auto integrate = [&](const std::vector<Panel>& pns, double& s64, double& s32) {
        struct Node {
            double r, w64, w32;
        };
        std::vector<Node> nodes;
        for (const auto& pn : pns) {
            auto add = [&](const GaussRule& g, bool fine) {
                for (std::size_t i = 0; i < g.nodes.size(); ++i) {
                    double r, w;
                    if (pn.power) {
                        // r = u^{1/q}, r^e dr = du / q
                        const double ub = std::pow(pn.b, q);
                        const double u = 0.5 * ub * (g.nodes[i] + 1.0);
                        r = std::pow(u, 1.0 / q);
                        w = 0.5 * ub * g.weights[i] / q;
                    } else {
                        r = 0.5 * (pn.a + pn.b) + 0.5 * (pn.b - pn.a) * g.nodes[i];
                        w = 0.5 * (pn.b - pn.a) * g.weights[i] * std::pow(r, e);
                    }
                    nodes.push_back(fine ? Node{r, w, 0.0} : Node{r, 0.0, w});
                }
            };
            add(g64, true);
            add(g32, false);
        }
        std::vector<double> vals(nodes.size());
        parallel_for(nodes.size(), [&](std::size_t i) { vals[i] = inner_integral(t, nodes[i].r, p, X, opt.inner_rel_tol); });
        s64 = s32 = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            s64 += nodes[i].w64 * vals[i];
            s32 += nodes[i].w32 * vals[i];
        }
    };
    double s64, s32;
    integrate(panels, s64, s32);

    // The |xi|^p point at 0 leaves a chirp ~ 4 t^{-1-p} r^{e-4} cos(t r^2) in the
    // inner integral. Split the octaves where it still matters into panels of
    // about four periods.
    std::vector<Panel> coarse, fine;
    const double c0 = 4.0 * std::pow(t, -1.0 - p);
    for (const auto& pn : panels) {
        if (pn.power || c0 * std::pow(pn.a, e - 4.0) * (pn.b - pn.a) <= 0.1 * opt.rel_tol * std::abs(s64)) continue;
        const double periods = (pn.b * pn.b - pn.a * pn.a) * t / (2.0 * std::numbers::pi);
        const int m = static_cast<int>(std::clamp(std::ceil(periods / 4.0), 1.0, 4096.0));
        if (m == 1) continue;
        coarse.push_back(pn);
        for (int i = 0; i < m; ++i)
            fine.push_back({pn.a + (pn.b - pn.a) * i / m, i + 1 == m ? pn.b : pn.a + (pn.b - pn.a) * (i + 1) / m, false});
    }
    if (!coarse.empty()) {
        double c64, c32, f64, f32;
        integrate(coarse, c64, c32);
        integrate(fine, f64, f32);
        s64 += f64 - c64;
        s32 += f32 - c32;
    }
    res.value = s64;
    res.error = std::abs(s64 - s32);
    res.intervals = static_cast<int>(panels.size());
    res.converged = res.error <= opt.rel_tol * std::abs(s64);
    return res;
}

double angular_constant(const HurstIndex& H) {
    std::vector<double> p;
    for (double h : H.Hs) p.push_back(1.0 - 2.0 * h);
    return angular_weight_integral(p);
}

QuadResult sigma_n_quadrature(double t, const HurstIndex& H, int n, const ReducedOptions& opt) {
    H.validate();
    const double alpha = 2.0 * H.H0;
    const double kappa = H.d() + 1.0 - 2.0 * H.H0 - H.sum_space();
    QuadResult res = reduced_integral(t, alpha, kappa, n, opt);
    const double C = angular_constant(H);
    res.value *= C;
    res.error *= C;
    return res;
}

double sigma_n(double t, const HurstIndex& H, int n) { return sigma_n_quadrature(t, H, n).value; }

double predicted_equivalent(double kappa, double t, int n) {
    if (kappa > 0.0) return std::numbers::pi / kappa * std::pow(4.0, n * kappa) * t;
    return std::numbers::pi * std::log(4.0) * n * t;
}

AsymptoticsReport verify_asymptotics(double alpha, double kappa, double t, const std::vector<int>& n_range,
                                     const ReducedOptions& opt) {
    if (!(alpha > 0.0 && alpha < 2.0) || !(kappa >= 0.0) || !(alpha + kappa > 1.0))
        throw std::invalid_argument("verify_asymptotics: need alpha in (0,2), kappa >= 0, alpha + kappa > 1");
    if (!(t > 0.0)) throw std::invalid_argument("verify_asymptotics: t must be positive");
    if (n_range.empty()) throw std::invalid_argument("verify_asymptotics: empty level range");
    AsymptoticsReport rep;
    rep.alpha = alpha;
    rep.kappa = kappa;
    rep.t = t;
    for (int n : n_range) {
        QuadResult q = reduced_integral(t, alpha, kappa, n, opt);
        AsymptoticsPoint pt;
        pt.n = n;
        pt.J = q.value;
        pt.error = q.error;
        pt.converged = q.converged;
        pt.predicted = predicted_equivalent(kappa, t, n);
        pt.ratio = pt.J / pt.predicted;
        if (!rep.points.empty()) pt.increment = pt.J - rep.points.back().J;
        rep.points.push_back(pt);
    }
    rep.deviation_decreasing = true;
    double prev = -1.0;
    std::vector<std::pair<double, double>> dev;
    for (const auto& pt : rep.points) {
        const double d = std::abs(pt.ratio - 1.0);
        if (d > 0.0) dev.emplace_back(pt.n, d);
        if (pt.n < 6) continue;
        if (prev >= 0.0 && !(d < prev)) rep.deviation_decreasing = false;
        prev = d;
    }
    if (dev.size() >= 2) rep.deviation_slope = fit_decay_rate(dev).slope;
    return rep;
}

double RenormConstant::at(double t) const {
    if (times.empty()) throw std::logic_error("RenormConstant: empty");
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t j = static_cast<std::size_t>(it - times.begin());
    const double u = (t - times[j - 1]) / (times[j] - times[j - 1]);
    return (1.0 - u) * values[j - 1] + u * values[j];
}

RenormConstant renorm_constant(const HurstIndex& H, int n, const std::vector<double>& times,
                               const ReducedOptions& opt) {
    H.validate();
    RenormConstant rc;
    rc.H = H;
    rc.level = n;
    rc.times = times;
    rc.values.resize(times.size());
    rc.errors.resize(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (k > 0 && !(times[k] > times[k - 1])) throw std::invalid_argument("renorm_constant: times must increase");
        QuadResult q = sigma_n_quadrature(times[k], H, n, opt);
        rc.values[k] = q.value;
        rc.errors[k] = q.error;
        rc.converged = rc.converged && q.converged;
    }
    return rc;
}

FieldPath wick_square(const FieldPath& path, const RenormConstant& sigma) {
    if (path.times.size() != sigma.times.size()) throw std::invalid_argument("wick_square: time grid mismatch");
    for (std::size_t k = 0; k < path.times.size(); ++k)
        if (std::abs(path.times[k] - sigma.times[k]) > 1e-12 * std::max(1.0, std::abs(sigma.times[k])))
            throw std::invalid_argument("wick_square: time grid mismatch");
    FieldPath out = path;
    for (std::size_t k = 0; k < out.nodes(); ++k) {
        const double s = sigma.values[k];
        for (auto& v : out.fields[k].values) v = cplx(std::norm(v) - s, 0.0);
    }
    return out;
}

RateReport wick_convergence_study(const ConvergenceConfig& cfg) {
    cfg.H.validate();
    if (cfg.levels.size() < 4) throw std::invalid_argument("wick_convergence_study: need at least 4 levels");
    for (std::size_t i = 1; i < cfg.levels.size(); ++i)
        if (cfg.levels[i] != cfg.levels[i - 1] + 1)
            throw std::invalid_argument("wick_convergence_study: levels must be consecutive");
    if (cfg.realizations < 2) throw std::invalid_argument("wick_convergence_study: need at least 2 realizations");
    cfg.chi.validate(cfg.grid);
    const SpectralCellSet cells = build_cells(cfg.levels.back(), cfg.H, cfg.grid, cfg.cells);
    const Field chi = cfg.chi.sample(cfg.grid);
    const Field chi2 = pointwise_product(chi, chi);
    const std::vector<double> times = cfg.grid.times();
    std::vector<RenormConstant> sig(cfg.levels.size());
    for (std::size_t i = 0; i < cfg.levels.size(); ++i) sig[i] = renorm_constant(cfg.H, cfg.levels[i], times);

    const std::size_t np = cfg.levels.size() - 1;
    std::vector<std::vector<double>> norms(cfg.realizations, std::vector<double>(np));
    parallel_for(cfg.realizations, [&](std::size_t r) {
        const NoiseRealization w = sample_noise(derive_seed(cfg.seed, r));
        const auto paths = sample_psi_levels(w, cells, cfg.levels);
        std::vector<FieldPath> sq;
        for (std::size_t i = 0; i < paths.size(); ++i) sq.push_back(wick_square(paths[i], sig[i]));
        for (std::size_t i = 0; i < np; ++i) {
            double sup = 0.0;
            for (std::size_t k = 0; k < sq[i].nodes(); ++k) {
                Field diff = pointwise_product(chi2, sq[i + 1].fields[k] - sq[i].fields[k]);
                sup = std::max(sup, sobolev_norm(diff, -2.0 * cfg.alpha, cfg.p));
            }
            norms[r][i] = sup;
        }
    });
    std::vector<RatePoint> pts;
    const double R = static_cast<double>(cfg.realizations);
    for (std::size_t i = 0; i < np; ++i) {
        double m = 0.0, m2 = 0.0;
        for (const auto& row : norms) {
            m += row[i];
            m2 += row[i] * row[i];
        }
        m /= R;
        const double var = std::max(0.0, m2 / R - m * m) * R / (R - 1.0);
        pts.push_back(RatePoint{cfg.levels[i], m, std::sqrt(var / R)});
    }
    RateReport rep = make_rate_report(std::move(pts));
    const Regime reg = classify_regime(cfg.H, cfg.grid.d);
    if (reg != Regime::RoughSolvable && reg != Regime::RoughConstructible) {
        rep.flagged = true;
        rep.note = std::string("regime mismatch: ") + regime_name(reg);
    } else if (!(cfg.alpha > -cfg.H.alpha_gap())) {
        rep.flagged = true;
        rep.note = "divergence expected: alpha at or below d+1-(2H0+sum Hi)";
    }
    return rep;
}

}  // namespace fracschro
