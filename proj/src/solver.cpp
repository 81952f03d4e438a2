#include "fracschro/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracschro/parallel.hpp"
#include "fracschro/rng.hpp"

namespace fracschro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_path(const FieldPath& a, const FieldPath& b, const char* what) {
    if (a.nodes() != b.nodes() || !(a.grid.N == b.grid.N && a.grid.d == b.grid.d && a.grid.L == b.grid.L))
        throw std::invalid_argument(std::string(what) + ": path grid mismatch");
}

// trapezoid (or sup) of |g_k|^p over the nodes, then the 1/p power
double time_norm(const std::vector<double>& vals, const std::vector<double>& times, double p) {
    if (std::isinf(p)) return vals.empty() ? 0.0 : *std::max_element(vals.begin(), vals.end());
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < vals.size(); ++k)
        s += 0.5 * (times[k + 1] - times[k]) * (std::pow(vals[k], p) + std::pow(vals[k + 1], p));
    return std::pow(s, 1.0 / p);
}

FieldPath restrict_to(const FieldPath& f, std::size_t count) {
    if (f.nodes() == 0) return f;
    return f.restrict_nodes(count);
}

}  // namespace

const char* solver_regime_name(SolverRegime r) { return r == SolverRegime::Regular ? "regular" : "rough"; }

SolverParams select_parameters(int d, SolverRegime regime, double value, const std::optional<HurstIndex>& H) {
    if (d < 1 || d > 3) throw std::invalid_argument("select_parameters: d must be 1, 2 or 3");
    SolverParams sp;
    sp.regime = regime;
    sp.d = d;
    std::ostringstream msg;
    if (regime == SolverRegime::Regular) {
        if (!(value > 0.0 && value < 1.0)) throw std::invalid_argument("select_parameters: need 0 < beta < 1");
        if (H) {
            const double gap = H->alpha_gap();
            if (!(value < gap)) {
                msg << "select_parameters: need beta < 2H0+sum Hi-(d+1) = " << gap;
                throw std::invalid_argument(msg.str());
            }
        }
        sp.beta = value;
        sp.p = 12.0 / (d - value);
        sp.q = 6.0 * d / (2.0 * d + value);
        return sp;
    }
    const double bound = d == 1 ? 3.0 / 20.0 : d == 2 ? 1.0 / 10.0 : 1.0 / 24.0;
    if (!(value > 0.0)) throw std::invalid_argument("select_parameters: need alpha > 0");
    if (!(value < bound)) {
        msg << "select_parameters: need alpha < alpha_d = " << bound << " for d = " << d;
        throw std::invalid_argument(msg.str());
    }
    if (H) {
        const double gap = H->alpha_gap();
        if (!(value > -gap)) {
            msg << "select_parameters: need alpha > d+1-(2H0+sum Hi) = " << -gap;
            throw std::invalid_argument(msg.str());
        }
    }
    sp.alpha = value;
    if (d == 1) {
        sp.p = kInf;
        sp.q = 2.0;
        sp.kappa = 0.5 * (3.0 * value + std::min(0.5, 0.75 - 2.0 * value));
    } else if (d == 2) {
        sp.p = 4.0;
        sp.q = 4.0;
        sp.kappa = 0.5 * (3.0 * value + 0.5 - 2.0 * value);
    } else {
        sp.p = 2.0;
        sp.q = 6.0;
        sp.kappa = 4.0 * value;
    }
    sp.theta = 2.0 * value / sp.kappa;
    return sp;
}

void set_drivers(MildProblem& prob, const FieldPath& psi, const RenormConstant* sigma) {
    const Field rho = prob.rho.sample(psi.grid);
    prob.psi = psi;
    prob.ell = psi;
    for (auto& f : prob.ell.fields)
        for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] *= rho.values[i].real();
    prob.c = FieldPath();
    if (sigma) {
        const FieldPath sq = wick_square(psi, *sigma);
        prob.c = sq;
        for (auto& f : prob.c.fields)
            for (std::size_t i = 0; i < f.values.size(); ++i) {
                const double r = rho.values[i].real();
                f.values[i] *= r * r;
            }
    }
}

FieldPath duhamel(const FieldPath& F) {
    FieldPath out = F;
    const std::size_t M = F.nodes();
    if (M == 0) return out;
    const GridSpec& g = F.grid;
    const std::size_t n = g.size();
    std::vector<std::vector<cplx>> hat(M);
    parallel_for(M, [&](std::size_t k) {
        hat[k] = F.fields[k].values;
        fft_forward(g, hat[k].data());
    });
    const auto k2 = wavenumber_squares(g);
    std::vector<cplx> acc(n, cplx(0.0, 0.0));
    std::vector<std::vector<cplx>> res(M, std::vector<cplx>(n));
    const cplx mi(0.0, -1.0);
    for (std::size_t k = 1; k < M; ++k) {
        const double dt = F.times[k] - F.times[k - 1];
        for (std::size_t i = 0; i < n; ++i) {
            const cplx e = std::polar(1.0, k2[i] * dt);
            acc[i] = e * acc[i] + mi * (0.5 * dt) * (e * hat[k - 1][i] + hat[k][i]);
        }
        res[k] = acc;
    }
    const double inv = 1.0 / static_cast<double>(n);
    parallel_for(M, [&](std::size_t k) {
        fft_backward(g, res[k].data());
        for (std::size_t i = 0; i < n; ++i) out.fields[k].values[i] = res[k][i] * inv;
    });
    return out;
}

FieldPath gamma_map(const FieldPath& v, const MildProblem& prob, const SolverParams& params) {
    check_path(v, prob.ell, "gamma_map");
    const bool rough = params.regime == SolverRegime::Rough;
    if (rough) check_path(v, prob.c, "gamma_map");
    const Field rho = prob.rho.sample(v.grid);
    FieldPath src = v;
    parallel_for(v.nodes(), [&](std::size_t k) {
        const auto& vv = v.fields[k].values;
        const auto& l = prob.ell.fields[k].values;
        auto& s = src.fields[k].values;
        for (std::size_t i = 0; i < vv.size(); ++i) {
            const double r = rho.values[i].real();
            const cplx rv = r * vv[i];
            const cplx drive = rough ? prob.c.fields[k].values[i] : cplx(std::norm(l[i]), 0.0);
            s[i] = std::norm(rv) + std::conj(rv) * l[i] + rv * std::conj(l[i]) + drive;
        }
    });
    FieldPath out = duhamel(src);
    parallel_for(v.nodes(), [&](std::size_t k) { out.fields[k] += schrodinger_propagate(prob.phi, v.times[k]); });
    return out;
}

std::vector<double> x_norm_components(const FieldPath& v, const SolverParams& params, const CutoffSpec& rho) {
    const std::size_t M = v.nodes();
    std::vector<double> a(M), b(M), c(M);
    const bool rough = params.regime == SolverRegime::Rough;
    const double s = rough ? -2.0 * params.alpha : params.beta;
    const bool second = !(rough && params.d == 1);
    parallel_for(M, [&](std::size_t k) {
        a[k] = sobolev_norm(v.fields[k], s, 2.0);
        if (second) b[k] = sobolev_norm(v.fields[k], s, params.q);
        if (rough) c[k] = local_sobolev_seminorm(v.fields[k], s + params.kappa, rho);
    });
    std::vector<double> out{time_norm(a, v.times, kInf)};
    if (second) out.push_back(time_norm(b, v.times, params.p));
    if (rough) out.push_back(time_norm(c, v.times, 1.0 / params.kappa));
    return out;
}

double x_norm(const FieldPath& v, const SolverParams& params, const CutoffSpec& rho) {
    double s = 0.0;
    for (double c : x_norm_components(v, params, rho)) s += c;
    return s;
}

SolveReport picard_solve(const MildProblem& prob, const SolverParams& params) {
    if (prob.ell.nodes() < 2) throw std::invalid_argument("picard_solve: drivers need at least 2 time nodes");
    if (params.regime == SolverRegime::Rough && prob.c.nodes() != prob.ell.nodes())
        throw std::invalid_argument("picard_solve: rough regime needs the Wick driver");
    const std::vector<double>& times = prob.ell.times;
    std::size_t count = times.size();
    if (params.T_current > 0.0) {
        count = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), params.T_current * (1.0 + 1e-12)) -
                                         times.begin());
        if (count < 2) throw std::invalid_argument("picard_solve: T_current below the first time step");
    }
    SolveReport rep;
    for (int attempt = 0; attempt <= params.max_halvings; ++attempt) {
        MildProblem sub = prob;
        sub.ell = restrict_to(prob.ell, count);
        sub.c = restrict_to(prob.c, count);
        sub.psi = restrict_to(prob.psi, count);
        const double T = sub.ell.times.back();
        FieldPath v = sub.ell;
        for (std::size_t k = 0; k < count; ++k) v.fields[k] = schrodinger_propagate(prob.phi, v.times[k]);

        std::vector<double> diffs, ratios;
        int streak = 0;
        bool ok = false, bad = false;
        for (int it = 0; it < params.max_iters; ++it) {
            FieldPath next = gamma_map(v, sub, params);
            const double dn = x_norm(next - v, params, prob.rho);
            v = std::move(next);
            if (!std::isfinite(dn)) {
                bad = true;
                break;
            }
            if (!diffs.empty()) {
                const double r = diffs.back() > 0.0 ? dn / diffs.back() : 0.0;
                ratios.push_back(r);
                streak = r > params.ratio_limit ? streak + 1 : 0;
            }
            diffs.push_back(dn);
            if (dn < params.contraction_tol) {
                ok = true;
                break;
            }
            if (streak >= params.ratio_patience) {
                bad = true;
                break;
            }
        }
        std::ostringstream tr;
        tr << "T=" << T << " nodes=" << count << " iterations=" << diffs.size();
        if (!ratios.empty()) tr << " last_ratio=" << ratios.back();
        if (!diffs.empty()) tr << " last_diff=" << diffs.back();
        tr << (ok ? " converged" : bad ? " diverging" : " max_iters");
        rep.trace.push_back(tr.str());
        if (ok) {
            rep.v = v;
            rep.iterates = static_cast<int>(diffs.size());
            rep.diffs = diffs;
            rep.ratios = ratios;
            rep.residual = x_norm(v - gamma_map(v, sub, params), params, prob.rho);
            rep.T_used = T;
            rep.halvings = attempt;
            rep.u = sub.psi.nodes() == count ? v + sub.psi : v + sub.ell;
            if (rep.residual <= params.residual_tol) return rep;
            rep.trace.back() += " residual_above_tol";
        }
        if (count <= 2) break;
        count = (count - 1) / 2 + 1;
    }
    throw NoContraction("picard_solve: no contraction after " + std::to_string(params.max_halvings) + " halvings",
                        rep.trace);
}

SmoothConvergenceReport smooth_convergence_experiment(const SmoothConvergenceConfig& cfg) {
    cfg.H.validate();
    if (cfg.levels.size() < 3) throw std::invalid_argument("smooth_convergence_experiment: need at least 3 levels");
    const Regime reg = classify_regime(cfg.H, cfg.grid.d);
    const bool rough = cfg.params.regime == SolverRegime::Rough;
    if (rough && reg != Regime::RoughSolvable)
        throw std::invalid_argument(std::string("smooth_convergence_experiment: rough solver needs the rough-solvable regime, got ") +
                                    regime_name(reg));
    if (!rough && reg != Regime::Regular)
        throw std::invalid_argument(std::string("smooth_convergence_experiment: regular solver needs the regular regime, got ") +
                                    regime_name(reg));
    const SpectralCellSet cells = build_cells(*std::max_element(cfg.levels.begin(), cfg.levels.end()), cfg.H, cfg.grid, cfg.cells);
    const auto paths = sample_psi_levels(sample_noise(cfg.seed), cells, cfg.levels);
    SmoothConvergenceReport out;
    std::vector<SolveReport> runs(cfg.levels.size());
    for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
        MildProblem prob;
        prob.grid = cfg.grid;
        prob.phi = cfg.phi;
        prob.rho = cfg.rho;
        prob.chi = cfg.chi;
        if (rough) {
            const RenormConstant sig = renorm_constant(cfg.H, cfg.levels[i], paths[i].times);
            set_drivers(prob, paths[i], &sig);
        } else {
            set_drivers(prob, paths[i], nullptr);
        }
        try {
            runs[i] = picard_solve(prob, cfg.params);
        } catch (const NoContraction& e) {
            throw NoContraction(std::string(e.what()) + " at level " + std::to_string(cfg.levels[i]), e.trace());
        }
        out.T_used.push_back(runs[i].T_used);
        out.iterates.push_back(runs[i].iterates);
    }
    out.T0 = *std::min_element(out.T_used.begin(), out.T_used.end());
    std::size_t count = 0;
    for (double t : runs[0].u.times)
        if (t <= out.T0 * (1.0 + 1e-12)) ++count;
    const Field chi = cfg.chi.sample(cfg.grid);
    const double s = rough ? -2.0 * cfg.params.alpha : cfg.params.beta;
    std::vector<RatePoint> pts;
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        double sup = 0.0;
        for (std::size_t k = 0; k < count; ++k)
            sup = std::max(sup, sobolev_norm(pointwise_product(chi, runs[i + 1].u.fields[k] - runs[i].u.fields[k]), s, 2.0));
        pts.push_back(RatePoint{cfg.levels[i], sup, 0.0});
    }
    out.rate = make_rate_report(std::move(pts));
    return out;
}

}  // namespace fracschro
