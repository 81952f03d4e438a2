#include "fracschro/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fracschro/ridge.hpp"
#include "fracschro/rng.hpp"

namespace fracschro {

double resonance_threshold(double t) {
    return t > 0.0 ? kResonanceGuard / t : std::numeric_limits<double>::infinity();
}

cplx gamma(double t, double xi, double r) {
    if (t < 0.0) throw std::invalid_argument("gamma: t must be non-negative");
    if (t == 0.0) return cplx(0.0, 0.0);
    const double delta = r * r - xi;
    const double z = delta * t;
    if (std::abs(z) < kResonanceGuard) {
        const double z2 = z * z;
        return std::polar(t, xi * t) * cplx(1.0 - z2 / 6.0, 0.5 * z - z2 * z / 24.0);
    }
    // e^{i xi t} (e^{i delta t} - 1) / (i delta) written without cancellation.
    const double half = 0.5 * z;
    return (t * std::sin(half) / half) * std::polar(1.0, 0.5 * (xi + r * r) * t);
}

cplx gamma_increment(double s, double t, double xi, double r) {
    if (s < 0.0 || s > t) throw std::invalid_argument("gamma_increment: need 0 <= s <= t");
    if (s == t) return cplx(0.0, 0.0);
    return gamma(t, xi, r) - gamma(s, xi, r);
}

double gamma_sq_modulus(double t, double xi, double r) {
    if (t < 0.0) throw std::invalid_argument("gamma_sq_modulus: t must be non-negative");
    if (t == 0.0) return 0.0;
    const double delta = r * r - xi;
    const double z = delta * t;
    if (std::abs(z) < kResonanceGuard) {
        const double z2 = z * z;
        return t * t * (1.0 - z2 / 12.0 + z2 * z2 / 360.0);
    }
    const double sh = std::sin(0.5 * z);
    return 4.0 * sh * sh / (delta * delta);
}

double GammaBounds::min() const { return std::min({b1, b2, b3}); }

GammaBounds gamma_bounds(double s, double t, double xi, double r, double kappa, double lambda) {
    const double tau = t - s;
    const double ax = std::abs(xi);
    const double tk = std::pow(tau, kappa);
    const double inf = std::numeric_limits<double>::infinity();
    GammaBounds b;
    b.b1 = std::pow(ax, kappa) * tk + tau;
    b.b2 = ax > 0.0 ? tau * r * r / ax + tk * (1.0 + r * r) / std::pow(ax, 1.0 - kappa) : inf;
    const double gap = std::abs(ax - r * r);
    b.b3 = gap > 0.0 ? tk * (std::pow(r, 2.0 * kappa) + std::pow(ax, kappa)) / std::pow(gap, 1.0 - lambda * (1.0 - kappa))
                     : inf;
    return b;
}

QuadResult increment_weighted_integral(double s, double t, double r, double H, double rel_tol) {
    if (s < 0.0 || s > t) throw std::invalid_argument("increment integral: need 0 <= s <= t");
    if (!(H > 0.0 && H < 1.0)) throw std::invalid_argument("increment integral: H in (0,1)");
    QuadResult res;
    if (s == t) return res;
    const double r2 = r * r;
    const cplx b = std::polar(1.0, r2 * t) - std::polar(1.0, r2 * s);
    RidgeProblem prob;
    prob.p = 1.0 - 2.0 * H;
    prob.r2 = r2;
    prob.smooth = 2.0 + std::norm(b);
    prob.waves = {{cplx(-2.0, 0.0), t - s}, {-2.0 * std::conj(b), t}, {2.0 * std::conj(b), s}};
    const double p = prob.p;
    prob.exact = [=](double xi) { return std::pow(std::abs(xi), p) * std::norm(gamma_increment(s, t, xi, r)); };
    RidgeOptions ro;
    ro.rel_tol = rel_tol;
    const double inf = std::numeric_limits<double>::infinity();
    return ridge_integral(prob, -inf, inf, ro);
}

BoundReport verify_gamma_bounds(const BoundOptions& opt) {
    if (!(opt.kappa >= 0.0 && opt.kappa <= 1.0) || !(opt.lambda >= 0.0 && opt.lambda <= 1.0))
        throw std::invalid_argument("verify_gamma_bounds: kappa and lambda must lie in [0,1]");
    if (!(opt.T > 0.0)) throw std::invalid_argument("verify_gamma_bounds: T must be positive");
    if (opt.sample_count < 1) throw std::invalid_argument("verify_gamma_bounds: sample_count must be positive");
    const bool corollary = !opt.corollary_r.empty();
    if (corollary) {
        if (!(opt.eps > 0.0 && opt.eps < 1.0)) throw std::invalid_argument("verify_gamma_bounds: eps in (0,1)");
        if (!(opt.H > 0.0 && opt.H < 1.0)) throw std::invalid_argument("verify_gamma_bounds: H in (0,1)");
        if (!(opt.kappa < std::min(opt.H, 0.5 * (1.0 - opt.eps))))
            throw std::invalid_argument("verify_gamma_bounds: corollary needs kappa < min(H, (1-eps)/2)");
        if (!(0.0 <= opt.s && opt.s < opt.t && opt.t <= opt.T))
            throw std::invalid_argument("verify_gamma_bounds: corollary needs 0 <= s < t <= T");
    }

    BoundReport rep;
    SplitMix64 gen(opt.seed);
    for (int i = 0; i < opt.sample_count; ++i) {
        double s = opt.T * gen.uniform(), t = opt.T * gen.uniform();
        if (s > t) std::swap(s, t);
        const double r = std::pow(10.0, -2.0 + 4.0 * gen.uniform());
        double xi;
        if (i % 4 == 3) {
            xi = r * r * (1.0 + std::pow(10.0, -8.0 + 7.0 * gen.uniform()));    // near resonance
        } else {
            xi = std::pow(10.0, -3.0 + 7.0 * gen.uniform());
            if (gen.uniform() < 0.5) xi = -xi;
        }
        BoundSample smp{s, t, xi, r, opt.kappa, opt.lambda, 0.0, 0.0, 0.0};
        smp.value = std::abs(gamma_increment(s, t, xi, r));
        smp.bound_min = gamma_bounds(s, t, xi, r, opt.kappa, opt.lambda).min();
        smp.ratio = smp.bound_min > 0.0 ? smp.value / smp.bound_min : 0.0;
        rep.lemma_constant = std::max(rep.lemma_constant, smp.ratio);
        rep.samples.push_back(smp);
    }

    if (corollary) {
        std::vector<std::pair<double, double>> trend;
        const double tau = opt.t - opt.s;
        for (double r : opt.corollary_r) {
            CorollaryPoint cp;
            cp.r = r;
            QuadResult q = increment_weighted_integral(opt.s, opt.t, r, opt.H);
            cp.integral = q.value;
            cp.converged = q.converged;
            cp.envelope = std::pow(tau, 2.0 * opt.kappa) /
                          (1.0 + std::pow(r, 4.0 * (opt.H - opt.kappa) - 2.0 - 2.0 * opt.eps));
            cp.ratio = cp.integral / cp.envelope;
            rep.corollary_constant = std::max(rep.corollary_constant, cp.ratio);
            rep.corollary.push_back(cp);
            if (cp.ratio > 0.0) trend.emplace_back(std::log2(r), cp.ratio);
        }
        if (trend.size() >= 3) rep.corollary_trend = fit_decay_rate(trend).slope;
    }
    return rep;
}

BoundReport verify_gamma_bounds(int sample_count, double kappa, double lambda, double T) {
    BoundOptions opt;
    opt.sample_count = sample_count;
    opt.kappa = kappa;
    opt.lambda = lambda;
    opt.T = T;
    opt.s = 0.25 * T;
    opt.t = 0.75 * T;
    if (!(kappa < std::min(opt.H, 0.5 * (1.0 - opt.eps)))) opt.corollary_r.clear();
    return verify_gamma_bounds(opt);
}

}  // namespace fracschro
