#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <vector>

namespace fracschro {

struct QuadOptions {
    double abs_tol = 0.0;
    double rel_tol = 1e-10;
    int max_intervals = 4000;
};

template <class V>
struct QuadResultT {
    V value{};
    double error = 0.0;
    int intervals = 0;
    bool converged = true;
};
using QuadResult = QuadResultT<double>;

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre rule with n points, computed once and cached.
const GaussRule& gauss_legendre(int n);

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525043700, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr double kWg[5] = {0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
                                  0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
                                  0.295524224714752870173892994651338};

inline double mag(double v) { return std::abs(v); }
inline double mag(const std::complex<double>& v) { return std::abs(v); }

template <class V, class F>
void gk21(F& f, double a, double b, V& result, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    V fc = f(c);
    V resk = fc * kWgk[10];
    V resg{};
    for (int j = 0; j < 10; ++j) {
        const double x = h * kXgk[j];
        V f1 = f(c - x), f2 = f(c + x);
        resk += (f1 + f2) * kWgk[j];
        if (j % 2 == 1) resg += (f1 + f2) * kWg[j / 2];
    }
    result = resk * h;
    err = mag((resk - resg) * h);
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod 21 over the partition defined by `points`
// (sorted breakpoints including both ends). The interval with the largest
// error estimate is bisected until the total error meets the tolerance.
template <class V, class F>
QuadResultT<V> integrate_gk_points(F&& f, const std::vector<double>& points, const QuadOptions& opt = {}) {
    struct Piece {
        double a, b;
        V value;
        double err;
        bool operator<(const Piece& o) const { return err < o.err; }
    };
    QuadResultT<V> res;
    std::priority_queue<Piece> heap;
    V total{};
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (!(points[i + 1] > points[i])) continue;
        Piece p{points[i], points[i + 1], V{}, 0.0};
        detail::gk21<V>(f, p.a, p.b, p.value, p.err);
        total += p.value;
        total_err += p.err;
        heap.push(p);
    }
    int count = static_cast<int>(heap.size());
    auto tol = [&]() { return std::max(opt.abs_tol, opt.rel_tol * detail::mag(total)); };
    while (!heap.empty() && total_err > tol()) {
        if (count >= opt.max_intervals) {
            res.converged = false;
            break;
        }
        Piece p = heap.top();
        const double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b)) {
            res.converged = false;
            break;
        }
        heap.pop();
        Piece l{p.a, mid, V{}, 0.0}, r{mid, p.b, V{}, 0.0};
        detail::gk21<V>(f, l.a, l.b, l.value, l.err);
        detail::gk21<V>(f, r.a, r.b, r.value, r.err);
        total += l.value + r.value - p.value;
        total_err += l.err + r.err - p.err;
        heap.push(l);
        heap.push(r);
        ++count;
    }
    // Re-sum to remove the drift of incremental updates.
    V sum{};
    double esum = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        esum += heap.top().err;
        heap.pop();
    }
    res.value = sum;
    res.error = esum;
    res.intervals = count;
    return res;
}

template <class F>
QuadResult integrate_gk(F&& f, double a, double b, const QuadOptions& opt = {}) {
    return integrate_gk_points<double>(f, std::vector<double>{a, b}, opt);
}

// Integral over [0, b] of an integrand behaving like x^p near 0 (p > -1),
// through the substitution x = u^{1/(p+1)}.
template <class V, class F>
QuadResultT<V> integrate_power_origin(F&& f, double p, double b, const QuadOptions& opt = {}, int panels = 1) {
    const double q = p + 1.0;
    auto g = [&](double u) -> V {
        const double x = std::pow(u, 1.0 / q);
        return f(x) * (std::pow(u, 1.0 / q - 1.0) / q);
    };
    const double ub = std::pow(b, q);
    std::vector<double> pts(panels + 1);
    for (int i = 0; i <= panels; ++i) pts[i] = ub * i / panels;
    return integrate_gk_points<V>(g, pts, opt);
}

// Accumulates independent quadrature pieces.
template <class V>
void accumulate(QuadResultT<V>& into, const QuadResultT<V>& part) {
    into.value += part.value;
    into.error += part.error;
    into.intervals += part.intervals;
    into.converged = into.converged && part.converged;
}

}  // namespace fracschro
