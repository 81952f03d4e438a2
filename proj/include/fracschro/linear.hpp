#pragma once

#include <string>
#include <vector>

#include "fracschro/grid.hpp"
#include "fracschro/noise.hpp"
#include "fracschro/quadrature.hpp"

namespace fracschro {

// Psi_n at the grid's time nodes for each requested level (each <= cells.level),
// from one pass over the cells: cell (xi, eta) contributes
//   i^d sign(xi) prod sign(eta_i) sqrt(w) gamma_t(xi, |eta|) Z
// to the lattice bin of eta, then one inverse FFT per node and level.
std::vector<FieldPath> sample_psi_levels(const NoiseRealization& w, const SpectralCellSet& cells,
                                         const std::vector<int>& levels);
FieldPath sample_psi(const NoiseRealization& w, const SpectralCellSet& cells);

// int over S^{d-1} of prod_i |omega_i|^{p_i} (d = 1 gives 2).
double angular_weight_integral(const std::vector<double>& p);

struct CovOptions {
    double rel_tol = 1e-7;
};

// E[Psi_n(s, x) conj Psi_m(t, x - dx)] over D_n and D_m. d = 3 supports dx = 0 only.
QuadResultT<cplx> covariance_quadrature(double s, double t, const std::vector<double>& dx, int n, int m,
                                        const HurstIndex& H, const CovOptions& opt = {});
// E[Psi_n(s, x) Psi_m(t, x - dx)].
QuadResultT<cplx> pseudo_covariance_quadrature(double s, double t, const std::vector<double>& dx, int n, int m,
                                               const HurstIndex& H, const CovOptions& opt = {});

struct RatePoint {
    int n = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
};

struct RateReport {
    std::vector<RatePoint> points;
    RateFit fit;
    // regression and Monte Carlo standard errors of the slope, combined in quadrature
    double slope_stderr = 0.0;
    double mc_slope_stderr = 0.0;
    bool flagged = false;
    std::string note;
};

// Slope fit over (n, mean) with Monte Carlo errors propagated into the slope error.
RateReport make_rate_report(std::vector<RatePoint> points);

struct ConvergenceConfig {
    HurstIndex H;
    GridSpec grid;
    double alpha = 0.15;
    double p = 2.0;
    std::vector<int> levels;   // consecutive, ascending
    int realizations = 100;
    std::uint64_t seed = 1;
    CutoffSpec chi;
    CellOptions cells;
};

// sup_k ||chi (Psi_{n+1} - Psi_n)(t_k)||_{W^{-alpha,p}} averaged over realizations, per n.
RateReport convergence_study(const ConvergenceConfig& cfg);

}  // namespace fracschro
