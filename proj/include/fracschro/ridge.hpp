#pragma once

#include <functional>
#include <vector>

#include "fracschro/grid.hpp"
#include "fracschro/quadrature.hpp"

namespace fracschro {

// Integrals of the form
//   int_a^b |xi|^p (S + Re sum_j c_j e^{i w_j xi}) / (r2 - xi)^2 dxi
// whose integrand stays bounded on the ridge xi = r2 (the bracket vanishes
// there to second order). `exact` evaluates the full integrand stably.
// Within a window of width ~ window_factor / min|w_j| around 0 and r2 the
// exact integrand is integrated adaptively; outside, the smooth part is
// integrated adaptively and the oscillatory part through its
// integration-by-parts expansion at the segment ends.
struct Wave {
    cplx coef;
    double omega;
};

struct RidgeProblem {
    double p = 0.0;
    double r2 = 0.0;
    double smooth = 0.0;
    std::vector<Wave> waves;
    std::function<double(double)> exact;
};

struct RidgeOptions {
    double window_factor = 100.0;
    int ibp_terms = 8;
    double rel_tol = 1e-11;
    int max_intervals = 20000;
};

// a and b may be infinite.
QuadResult ridge_integral(const RidgeProblem& prob, double a, double b, const RidgeOptions& opt = {});

// k-th derivative of |xi|^p (r2 - xi)^{-2}, xi != 0, xi != r2.
double ridge_weight_derivative(double p, double r2, double xi, int k);

// int_a^b of f with integrable power singularities (x-a)^pa and (b-x)^pb.
QuadResult endpoint_singular_integral(const std::function<double(double)>& f, double a, double b, double pa,
                                      double pb, const QuadOptions& opt = {});

// Same split at the midpoint, with each half given in terms of the distance
// y to its endpoint: int_0^half left(y) + right(y) dy, left ~ y^pa, right ~ y^pb.
// Use this when the endpoint is not exactly representable.
QuadResult endpoint_singular_integral(const std::function<double(double)>& left,
                                      const std::function<double(double)>& right, double half, double pa, double pb,
                                      const QuadOptions& opt = {});

}  // namespace fracschro
