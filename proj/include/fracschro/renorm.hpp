#pragma once

#include <vector>

#include "fracschro/grid.hpp"
#include "fracschro/linear.hpp"
#include "fracschro/noise.hpp"
#include "fracschro/quadrature.hpp"

namespace fracschro {

struct ReducedOptions {
    double rel_tol = 1e-6;        // against the 32-point companion rule
    double inner_rel_tol = 1e-10;
};

// J_n(t) = int_0^{2^n} r^{2 alpha + 2 kappa - 3} int_{|xi| <= 4^n} |xi|^{1 - alpha} |gamma_t(xi, r)|^2 dxi dr.
// Outer: 64-point Gauss-Legendre per octave down to 2^-12, a power substitution
// below that, and geometric refinement of the top octave. The error is the
// difference to the 32-point rule; converged is false above rel_tol.
// Needs alpha in (0, 2) and alpha + kappa > 1.
QuadResult reduced_integral(double t, double alpha, double kappa, int n, const ReducedOptions& opt = {});

// C_H = int_{S^{d-1}} prod |omega_i|^{1 - 2 H_i}.
double angular_constant(const HurstIndex& H);

// sigma_n(t) = E|Psi_n(t, x)|^2 = C_H J_n(t) with alpha = 2 H0, kappa = d + 1 - 2 H0 - sum H_i.
QuadResult sigma_n_quadrature(double t, const HurstIndex& H, int n, const ReducedOptions& opt = {});
double sigma_n(double t, const HurstIndex& H, int n);

struct AsymptoticsPoint {
    int n = 0;
    double J = 0.0;
    double error = 0.0;
    double predicted = 0.0;
    double ratio = 0.0;
    double increment = 0.0;   // J_n - J_{n-1}, 0 for the first point
    bool converged = true;
};

struct AsymptoticsReport {
    double alpha = 0.0, kappa = 0.0, t = 0.0;
    std::vector<AsymptoticsPoint> points;
    // |ratio - 1| strictly decreasing over the points with n >= 6
    bool deviation_decreasing = false;
    // slope of log2 |ratio - 1| against n
    double deviation_slope = 0.0;
};

// predicted: (pi / kappa) 4^{n kappa} t for kappa > 0, pi ln(4) n t for kappa = 0.
double predicted_equivalent(double kappa, double t, int n);
AsymptoticsReport verify_asymptotics(double alpha, double kappa, double t, const std::vector<int>& n_range,
                                     const ReducedOptions& opt = {});

struct RenormConstant {
    HurstIndex H;
    int level = 0;
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> errors;
    bool converged = true;

    // linear interpolation between nodes, clamped to [times.front(), times.back()]
    double at(double t) const;
};

RenormConstant renorm_constant(const HurstIndex& H, int n, const std::vector<double>& times,
                               const ReducedOptions& opt = {});

// |Psi|^2 - sigma_n(t) per node, real part only.
FieldPath wick_square(const FieldPath& path, const RenormConstant& sigma);

// sup_k ||chi^2 (Psi^2_{n+1} - Psi^2_n)(t_k)||_{W^{-2 alpha, p}} per n; flagged outside
// the rough regimes or for alpha <= -alpha_gap.
RateReport wick_convergence_study(const ConvergenceConfig& cfg);

}  // namespace fracschro
