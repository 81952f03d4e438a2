#include "fracschro/linear.hpp"

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

// cos and sin of j pi/2 + y without rounding the multiple of pi/2
void quarter_trig(int j, double y, double& c, double& s) {
    const double cy = std::cos(y), sy = std::sin(y);
    switch (((j % 4) + 4) % 4) {
        case 0: c = cy; s = sy; break;
        case 1: c = -sy; s = cy; break;
        case 2: c = -cy; s = -sy; break;
        default: c = sy; s = -cy; break;
    }
}

constexpr double kPi = std::numbers::pi;

cplx i_pow(int d) {
    static const cplx table[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    return table[d % 4];
}

cplx gamma_tab(double t, double xi, double r2, cplx e_xi, cplx e_r) {
    const double delta = r2 - xi;
    if (std::abs(delta) * t < kResonanceGuard) return gamma(t, xi, std::sqrt(r2));
    return gamma_from_phases(t, delta, e_xi, e_r);
}

}  // namespace

std::vector<FieldPath> sample_psi_levels(const NoiseRealization& w, const SpectralCellSet& cells,
                                         const std::vector<int>& levels) {
    for (int n : levels)
        if (n < 1 || n > cells.level) throw std::invalid_argument("sample_psi: level outside [1, cells.level]");
    const GridSpec& g = cells.grid;
    const int d = g.d;
    const std::vector<double> times = g.times();
    const std::size_t M = times.size(), ne = cells.eta.size(), nx = cells.xi.size();
    const int nl = cells.level;

    std::vector<cplx> exi(nx * M), er(ne * M);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t k = 0; k < M; ++k) exi[i * M + k] = std::polar(1.0, cells.xi[i].centroid * times[k]);
    for (std::size_t c = 0; c < ne; ++c)
        for (std::size_t k = 0; k < M; ++k) er[c * M + k] = std::polar(1.0, cells.eta[c].r * cells.eta[c].r * times[k]);

    // acc[(lev - 1) * M * ne + k * ne + c]
    std::vector<cplx> acc(static_cast<std::size_t>(nl) * M * ne, cplx(0.0, 0.0));
    std::vector<std::size_t> first;
    for (std::size_t c = 0; c < ne; ++c)
        if (c < cells.eta[c].mirror) first.push_back(c);
    const cplx id = i_pow(d);
    const double mirror_sign = (d % 2 == 0) ? 1.0 : -1.0;
    const std::size_t chunk = 16;
    const std::size_t tasks = (first.size() + chunk - 1) / chunk;
    parallel_for(tasks, [&](std::size_t task) {
        std::vector<cplx> gp(M), gm(M);
        const std::size_t end = std::min(first.size(), (task + 1) * chunk);
        for (std::size_t f = task * chunk; f < end; ++f) {
            const std::size_t c = first[f];
            const EtaCell& ec = cells.eta[c];
            const std::size_t mc = ec.mirror;
            const double r2 = ec.r * ec.r;
            for (std::size_t i = 0; i < nx; ++i) {
                const AxisPiece& p = cells.xi[i];
                const cplx z1 = w.gaussian(CellKey{p.key, ec.key});
                const cplx z2 = w.gaussian(CellKey{p.key, cells.eta[mc].key});
                if (z1 == cplx(0.0, 0.0) && z2 == cplx(0.0, 0.0)) continue;
                const int lev = std::max(p.level, ec.level);
                const cplx pre = id * (ec.sign * std::sqrt(p.weight * ec.weight));
                cplx* row = acc.data() + static_cast<std::size_t>(lev - 1) * M * ne;
                for (std::size_t k = 0; k < M; ++k) {
                    const double t = times[k];
                    const cplx ex = exi[i * M + k], e_r = er[c * M + k];
                    const cplx gpk = gamma_tab(t, p.centroid, r2, ex, e_r);
                    const cplx gmk = gamma_tab(t, -p.centroid, r2, std::conj(ex), e_r);
                    row[k * ne + c] += pre * (gpk * z1 - gmk * std::conj(z2));
                    row[k * ne + mc] += (mirror_sign * pre) * (gpk * z2 - gmk * std::conj(z1));
                }
            }
        }
    });

    std::vector<int> sorted = levels;
    std::sort(sorted.begin(), sorted.end());
    const double Ld = std::pow(g.L, d);
    std::vector<FieldPath> out_sorted;
    std::vector<cplx> running(M * ne, cplx(0.0, 0.0));
    int done = 0;
    for (int n : sorted) {
        for (; done < n; ++done) {
            const cplx* row = acc.data() + static_cast<std::size_t>(done) * M * ne;
            for (std::size_t j = 0; j < M * ne; ++j) running[j] += row[j];
        }
        FieldPath path(g);
        for (std::size_t k = 0; k < M; ++k) {
            std::vector<cplx> coef(g.size(), cplx(0.0, 0.0));
            for (std::size_t c = 0; c < ne; ++c) coef[cells.eta[c].lattice] += Ld * running[k * ne + c];
            path.fields[k] = from_coefficients(g, std::move(coef));
        }
        out_sorted.push_back(std::move(path));
    }
    std::vector<FieldPath> out;
    for (int n : levels) {
        const auto pos = std::find(sorted.begin(), sorted.end(), n) - sorted.begin();
        out.push_back(out_sorted[pos]);
    }
    return out;
}

FieldPath sample_psi(const NoiseRealization& w, const SpectralCellSet& cells) {
    return sample_psi_levels(w, cells, {cells.level}).front();
}

namespace {

// int_{-X}^{X} |xi|^{p0} gamma_s(xi, r) K(xi) dxi with K = conj gamma_t(xi, r) or gamma_t(-xi, r).
QuadResultT<cplx> inner_xi(double s, double t, double r, double X, double p0, bool pseudo, double rel_tol) {
    auto f = [=](double xi) -> cplx {
        const cplx a = gamma(s, xi, r);
        const cplx b = pseudo ? gamma(t, -xi, r) : std::conj(gamma(t, xi, r));
        return std::pow(std::abs(xi), p0) * a * b;
    };
    const double width = kPi / std::max({s, t, 1e-3});
    const double w0 = std::min(X, std::min(width, 1.0));
    QuadOptions qo;
    qo.rel_tol = rel_tol;
    qo.max_intervals = 200000;
    auto neg = [&](double y) { return f(-y); };
    QuadResultT<cplx> res = integrate_power_origin<cplx>(f, p0, w0, qo);
    accumulate(res, integrate_power_origin<cplx>(neg, p0, w0, qo));
    if (X > w0) {
        std::vector<double> pts;
        const int panels = std::max(1, static_cast<int>(std::ceil((X - w0) / width)));
        for (int i = 0; i <= panels; ++i) pts.push_back(w0 + (X - w0) * i / panels);
        const double r2 = r * r;
        if (r2 > w0 && r2 < X) pts.push_back(r2);
        std::sort(pts.begin(), pts.end());
        std::vector<double> npts;
        for (auto it = pts.rbegin(); it != pts.rend(); ++it) npts.push_back(-*it);
        accumulate(res, integrate_gk_points<cplx>(f, pts, qo));
        accumulate(res, integrate_gk_points<cplx>(f, npts, qo));
    }
    return res;
}

QuadResultT<cplx> covariance_impl(double s, double t, const std::vector<double>& dx, int n, int m,
                                  const HurstIndex& H, const CovOptions& opt, bool pseudo) {
    H.validate();
    const int d = H.d();
    if (static_cast<int>(dx.size()) != d) throw std::invalid_argument("covariance: offset dimension mismatch");
    if (n < 1 || m < 1) throw std::invalid_argument("covariance: levels must be >= 1");
    if (s < 0.0 || t < 0.0) throw std::invalid_argument("covariance: times must be non-negative");
    QuadResultT<cplx> res;
    if (s == 0.0 || t == 0.0) return res;
    const int k = std::min(n, m);
    const double X = std::ldexp(1.0, 2 * k), Y = std::ldexp(1.0, k);
    const double p0 = 1.0 - 2.0 * H.H0;
    const double inner_tol = opt.rel_tol * 1e-2;
    QuadOptions qo;
    qo.rel_tol = opt.rel_tol;
    qo.max_intervals = 20000;
    bool inner_ok = true;
    auto G = [&](double r) {
        auto q = inner_xi(s, t, r, X, p0, pseudo, inner_tol);
        inner_ok = inner_ok && q.converged;
        return q.value;
    };
    const double sign = pseudo ? -1.0 : 1.0;
    double dnorm = 0.0;
    for (double v : dx) dnorm = std::max(dnorm, std::abs(v));
    const int panels = std::max(8, static_cast<int>(std::ceil(Y * (1.0 + dnorm) / 2.0)));

    if (d == 1) {
        const double p1 = 1.0 - 2.0 * H.Hs[0];
        auto f = [&](double r) { return 2.0 * std::pow(r, p1) * std::cos(r * dx[0]) * G(r); };
        res = integrate_power_origin<cplx>(f, p1, Y, qo, panels);
    } else if (d == 2) {
        const double p1 = 1.0 - 2.0 * H.Hs[0], p2 = 1.0 - 2.0 * H.Hs[1];
        QuadOptions ao;
        ao.rel_tol = inner_tol;
        // angular factor int_0^{2 pi} |cos|^{p1} |sin|^{p2} e^{i r (dx . omega)}, by quarter
        auto A = [&](double r) -> cplx {
            cplx total(0.0, 0.0);
            for (int quad = 0; quad < 4; ++quad) {
                const bool even = quad % 2 == 0;
                // |cos| vanishes at pi/2 + j pi, |sin| at j pi
                const double pa = even ? p2 : p1, pb = even ? p1 : p2;
                for (int part = 0; part < 2; ++part) {
                    auto fn = [&, quad](double y, int side) -> cplx {
                        double c, sn;
                        quarter_trig(quad + side, side == 0 ? y : -y, c, sn);
                        const double w = std::pow(std::abs(c), p1) * std::pow(std::abs(sn), p2);
                        return w * std::polar(1.0, r * (dx[0] * c + dx[1] * sn));
                    };
                    auto left = [&](double y) { return part == 0 ? fn(y, 0).real() : fn(y, 0).imag(); };
                    auto right = [&](double y) { return part == 0 ? fn(y, 1).real() : fn(y, 1).imag(); };
                    const double v = endpoint_singular_integral(left, right, 0.25 * kPi, pa, pb, ao).value;
                    total += part == 0 ? cplx(v, 0.0) : cplx(0.0, v);
                }
            }
            return total;
        };
        auto f = [&](double r) { return std::pow(r, 1.0 + p1 + p2) * A(r) * G(r); };
        res = integrate_power_origin<cplx>(f, 1.0 + p1 + p2, Y, qo, panels);
    } else {
        if (dnorm != 0.0) throw std::invalid_argument("covariance: d = 3 supports dx = 0 only");
        std::vector<double> p;
        for (double h : H.Hs) p.push_back(1.0 - 2.0 * h);
        const double CH = angular_weight_integral(p);
        const double q = 2.0 + p[0] + p[1] + p[2];
        auto f = [&](double r) { return CH * std::pow(r, q) * G(r); };
        res = integrate_power_origin<cplx>(f, q, Y, qo, panels);
    }
    res.value *= sign;
    res.converged = res.converged && inner_ok;
    return res;
}

}  // namespace

double angular_weight_integral(const std::vector<double>& p) {
    QuadOptions ao;
    ao.rel_tol = 1e-13;
    // int_0^{pi/2} cos^a sin^b, each half written from its own endpoint
    auto quarter = [&](double a, double b) {
        auto left = [&](double y) { return std::pow(std::cos(y), a) * std::pow(std::sin(y), b); };
        auto right = [&](double y) { return std::pow(std::sin(y), a) * std::pow(std::cos(y), b); };
        return endpoint_singular_integral(left, right, 0.25 * kPi, b, a, ao).value;
    };
    if (p.size() == 1) return 2.0;
    if (p.size() == 2) return 4.0 * quarter(p[0], p[1]);
    if (p.size() == 3) {
        // omega = (sin phi cos th, sin phi sin th, cos phi), d omega = sin phi dphi dth
        return 4.0 * quarter(p[0], p[1]) * 2.0 * quarter(p[2], 1.0 + p[0] + p[1]);
    }
    throw std::invalid_argument("angular_weight_integral: dimension must be 1, 2 or 3");
}

QuadResultT<cplx> covariance_quadrature(double s, double t, const std::vector<double>& dx, int n, int m,
                                        const HurstIndex& H, const CovOptions& opt) {
    return covariance_impl(s, t, dx, n, m, H, opt, false);
}

QuadResultT<cplx> pseudo_covariance_quadrature(double s, double t, const std::vector<double>& dx, int n, int m,
                                               const HurstIndex& H, const CovOptions& opt) {
    return covariance_impl(s, t, dx, n, m, H, opt, true);
}

RateReport make_rate_report(std::vector<RatePoint> points) {
    RateReport rep;
    rep.points = std::move(points);
    std::vector<std::pair<double, double>> xy;
    for (const auto& p : rep.points) xy.emplace_back(p.n, p.mean);
    rep.fit = fit_decay_rate(xy);
    double nbar = 0.0;
    for (const auto& p : rep.points) nbar += p.n;
    nbar /= static_cast<double>(rep.points.size());
    double sxx = 0.0, var = 0.0;
    for (const auto& p : rep.points) {
        const double dn = p.n - nbar;
        const double sy = p.stderr_ / (p.mean * std::numbers::ln2);
        sxx += dn * dn;
        var += dn * dn * sy * sy;
    }
    rep.mc_slope_stderr = std::sqrt(var) / sxx;
    rep.slope_stderr = std::hypot(rep.fit.slope_stderr, rep.mc_slope_stderr);
    return rep;
}

RateReport convergence_study(const ConvergenceConfig& cfg) {
    cfg.H.validate();
    if (cfg.levels.size() < 4) throw std::invalid_argument("convergence_study: need at least 4 levels");
    for (std::size_t i = 1; i < cfg.levels.size(); ++i)
        if (cfg.levels[i] != cfg.levels[i - 1] + 1) throw std::invalid_argument("convergence_study: levels must be consecutive");
    if (cfg.realizations < 2) throw std::invalid_argument("convergence_study: need at least 2 realizations");
    cfg.chi.validate(cfg.grid);
    const SpectralCellSet cells = build_cells(cfg.levels.back(), cfg.H, cfg.grid, cfg.cells);
    const Field chi = cfg.chi.sample(cfg.grid);
    const std::size_t np = cfg.levels.size() - 1;
    std::vector<std::vector<double>> norms(cfg.realizations, std::vector<double>(np));
    parallel_for(cfg.realizations, [&](std::size_t r) {
        const NoiseRealization w = sample_noise(derive_seed(cfg.seed, r));
        const auto paths = sample_psi_levels(w, cells, cfg.levels);
        for (std::size_t i = 0; i < np; ++i) {
            double sup = 0.0;
            for (std::size_t k = 0; k < paths[i].nodes(); ++k) {
                Field diff = pointwise_product(chi, paths[i + 1].fields[k] - paths[i].fields[k]);
                sup = std::max(sup, sobolev_norm(diff, -cfg.alpha, cfg.p));
            }
            norms[r][i] = sup;
        }
    });
    std::vector<RatePoint> pts;
    for (std::size_t i = 0; i < np; ++i) {
        double m = 0.0, m2 = 0.0;
        for (const auto& row : norms) {
            m += row[i];
            m2 += row[i] * row[i];
        }
        const double R = static_cast<double>(cfg.realizations);
        m /= R;
        const double var = std::max(0.0, m2 / R - m * m) * R / (R - 1.0);
        pts.push_back(RatePoint{cfg.levels[i], m, std::sqrt(var / R)});
    }
    RateReport rep = make_rate_report(std::move(pts));
    if (!(cfg.alpha > -cfg.H.alpha_gap())) {
        rep.flagged = true;
        rep.note = "divergence expected: alpha at or below d+1-(2H0+sum Hi)";
    }
    return rep;
}

}  // namespace fracschro
