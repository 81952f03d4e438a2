#pragma once

#include <cstdint>
#include <vector>

#include "fracschro/grid.hpp"
#include "fracschro/quadrature.hpp"

namespace fracschro {

// Below |r^2 - xi| * t = kResonanceGuard the kernel is evaluated by its Taylor
// expansion in delta = r^2 - xi. The truncation error there is below 1e-14
// relative.
inline constexpr double kResonanceGuard = 1e-3;

// Resonance threshold on |delta| at time t.
double resonance_threshold(double t);

// gamma_t(xi, r) = e^{i xi t} int_0^t e^{i s (r^2 - xi)} ds.
cplx gamma(double t, double xi, double r);
// gamma_t - gamma_s, requires 0 <= s <= t.
cplx gamma_increment(double s, double t, double xi, double r);
// |gamma_t(xi, r)|^2 = 2 (1 - cos(t (xi - r^2))) / |r^2 - xi|^2.
double gamma_sq_modulus(double t, double xi, double r);

// Kernel from precomputed phases e^{i xi t} and e^{i r^2 t}; used by the
// samplers where the phases are tabulated once per time node.
inline cplx gamma_from_phases(double t, double delta, cplx e_xi, cplx e_r2) {
    const double z = delta * t;
    if (std::abs(z) < kResonanceGuard) {
        const double z2 = z * z;
        return e_xi * (t * cplx(1.0 - z2 / 6.0, 0.5 * z - z2 * z / 24.0));
    }
    const cplx diff = e_xi - e_r2;
    return cplx(-diff.imag(), diff.real()) / delta;
}

// The three upper bounds on |gamma_{s,t}(xi, r)| for exponents kappa, lambda.
struct GammaBounds {
    double b1, b2, b3;
    double min() const;
};
GammaBounds gamma_bounds(double s, double t, double xi, double r, double kappa, double lambda);

struct BoundSample {
    double s, t, xi, r, kappa, lambda;
    double value;       // |gamma_{s,t}|
    double bound_min;
    double ratio;
};

struct CorollaryPoint {
    double r;
    double integral;    // int_R |gamma_{s,t}|^2 |xi|^{1-2H} dxi
    double envelope;    // |t-s|^{2 kappa} / (1 + r^{4(H-kappa)-2-2eps})
    double ratio;
    bool converged;
};

struct BoundOptions {
    int sample_count = 1000;
    double kappa = 0.2;
    double lambda = 0.5;
    double T = 1.0;
    double H = 0.7;
    double eps = 0.2;
    double s = 0.25;                 // fixed times for the corollary scan
    double t = 0.75;
    std::vector<double> corollary_r = {1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0};
    std::uint64_t seed = 20240601;
};

struct BoundReport {
    std::vector<BoundSample> samples;
    double lemma_constant = 0.0;       // sup ratio over the samples
    std::vector<CorollaryPoint> corollary;
    double corollary_constant = 0.0;   // sup ratio over the r scan
    double corollary_trend = 0.0;      // slope of log ratio against log r
};

BoundReport verify_gamma_bounds(const BoundOptions& opt);
BoundReport verify_gamma_bounds(int sample_count, double kappa, double lambda, double T);

// int_R |gamma_{s,t}(xi, r)|^2 |xi|^{1-2H} dxi.
QuadResult increment_weighted_integral(double s, double t, double r, double H, double rel_tol = 1e-8);

}  // namespace fracschro
