#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracschro/grid.hpp"
#include "fracschro/linear.hpp"
#include "fracschro/noise.hpp"
#include "fracschro/renorm.hpp"

namespace fracschro {

enum class SolverRegime { Regular, Rough };

const char* solver_regime_name(SolverRegime r);

struct SolverParams {
    SolverRegime regime = SolverRegime::Regular;
    int d = 1;
    double beta = 0.0;    // regular
    double alpha = 0.0;   // rough
    double p = 2.0;       // time exponent, infinity allowed
    double q = 2.0;       // space exponent
    double kappa = 0.0;   // local smoothing gain (rough)
    double theta = 0.0;   // interpolation weight 2 alpha / kappa (rough)
    double T_current = 0.0;   // 0: the grid horizon
    int max_iters = 50;
    double contraction_tol = 1e-8;
    double residual_tol = 1e-6;
    double ratio_limit = 0.9;
    int ratio_patience = 3;
    int max_halvings = 10;
};

// Regular: beta in (0,1), p = 12/(d-beta), q = 6d/(2d+beta). Rough: alpha below
// 3/20, 1/10, 1/24 for d = 1, 2, 3 with kappa at the midpoint of its interval
// (d = 1, 2) or kappa = 4 alpha (d = 3). With H given, also checks
// 0 < beta < 2H0 + sum Hi - (d+1), resp. d+1 - (2H0 + sum Hi) < alpha.
SolverParams select_parameters(int d, SolverRegime regime, double beta_or_alpha,
                               const std::optional<HurstIndex>& H = std::nullopt);

struct MildProblem {
    GridSpec grid;
    Field phi;
    CutoffSpec rho;
    CutoffSpec chi;
    FieldPath ell;   // rho Psi
    FieldPath c;     // rho^2 Psi^2, rough regime only
    FieldPath psi;   // optional, for u = v + Psi
};

// (rho Psi, rho^2 (|Psi|^2 - sigma)) from one path of Psi.
void set_drivers(MildProblem& prob, const FieldPath& psi, const RenormConstant* sigma);

struct SolveReport {
    FieldPath v;
    FieldPath u;
    int iterates = 0;
    std::vector<double> ratios;     // of the final attempt
    std::vector<double> diffs;      // X-norms of v_{k+1} - v_k, final attempt
    double residual = 0.0;
    double T_used = 0.0;
    int halvings = 0;
    std::vector<std::string> trace;
};

class NoContraction : public std::runtime_error {
public:
    NoContraction(const std::string& what, std::vector<std::string> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const std::vector<std::string>& trace() const { return trace_; }

private:
    std::vector<std::string> trace_;
};

// G(F)(t_k) = -i sum_j w_j S_{t_k - t_j} F(t_j), trapezoid weights on the uniform
// grid. Evaluated through the equivalent recursion in Fourier space,
//   A_k = e^{i k^2 dt} A_{k-1} - i dt/2 (e^{i k^2 dt} F_{k-1} + F_k).
FieldPath duhamel(const FieldPath& F);

// S_t phi + G(rho^2 |v|^2 + conj(rho v) ell + rho v conj(ell) + D), where D is
// |ell|^2 (regular) or c (rough).
FieldPath gamma_map(const FieldPath& v, const MildProblem& prob, const SolverParams& params);

// Component norms: regular {C_T H^beta, L^p_T W^{beta,q}}; rough {C_T H^{-2a},
// L^p_T W^{-2a,q}, L^{1/kappa}_T H^{-2a+kappa}_rho}. The second rough component
// is dropped for d = 1, where (p, q) = (inf, 2) repeats the first.
std::vector<double> x_norm_components(const FieldPath& v, const SolverParams& params, const CutoffSpec& rho);
double x_norm(const FieldPath& v, const SolverParams& params, const CutoffSpec& rho);

// Throws NoContraction after max_halvings restarts.
SolveReport picard_solve(const MildProblem& prob, const SolverParams& params);

struct SmoothConvergenceConfig {
    HurstIndex H;
    GridSpec grid;
    std::vector<int> levels;
    std::uint64_t seed = 1;
    SolverParams params;
    Field phi;
    CutoffSpec rho;
    CutoffSpec chi;
    CellOptions cells;
};

struct SmoothConvergenceReport {
    RateReport rate;
    double T0 = 0.0;
    std::vector<double> T_used;   // per level
    std::vector<int> iterates;
};

// Solves with (rho Psi_n) or (rho Psi_n, rho^2 Psi^2_n) at each level from one
// noise realization, restricts to the common T0 and fits
// log2 sup_t ||chi (u_{n+1} - u_n)(t)|| in H^beta (regular) or H^{-2 alpha} (rough).
SmoothConvergenceReport smooth_convergence_experiment(const SmoothConvergenceConfig& cfg);

}  // namespace fracschro
