#include "fracschro/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fracschro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double falling(double p, int j) {
    double v = 1.0;
    for (int i = 0; i < j; ++i) v *= (p - i);
    return v;
}

int panel_count(double len, double wmax) {
    const double n = std::ceil(len * wmax / std::numbers::pi);
    return static_cast<int>(std::clamp(n, 1.0, 2000.0));
}

std::vector<double> uniform_points(double a, double b, int n) {
    std::vector<double> pts(n + 1);
    for (int i = 0; i <= n; ++i) pts[i] = a + (b - a) * i / n;
    pts.back() = b;
    return pts;
}

// Geometric partition of [c, e] away from an anchor lying outside it.
std::vector<double> geometric_points(double c, double e, double anchor) {
    std::vector<double> pts;
    const bool right = c >= anchor;
    double dc = std::abs(c - anchor), de = std::abs(e - anchor);
    double lo = std::min(dc, de), hi = std::max(dc, de);
    std::vector<double> dist{lo};
    while (dist.back() * 2.0 < hi) dist.push_back(dist.back() * 2.0);
    dist.push_back(hi);
    for (double d : dist) pts.push_back(right ? anchor + d : anchor - d);
    std::sort(pts.begin(), pts.end());
    pts.front() = c;
    pts.back() = e;
    return pts;
}

// Integral of |y|^p / (P - y)^2 over [c, inf), c > 0, P < c.
QuadResult right_tail_smooth(double p, double P, double c, const QuadOptions& qo) {
    // y = c / u
    auto h = [&](double u) {
        const double denom = P * u - c;
        return std::pow(c, p + 1.0) * std::pow(u, -p) / (denom * denom);
    };
    return integrate_power_origin<double>(h, -p, 1.0, qo, 4);
}

QuadResult far_smooth(double p, double r2, double c, double e, const QuadOptions& qo) {
    if (std::isinf(e)) return right_tail_smooth(p, r2, c, qo);
    if (std::isinf(c)) return right_tail_smooth(p, -r2, -e, qo);
    auto f = [&](double x) {
        const double d = r2 - x;
        return std::pow(std::abs(x), p) / (d * d);
    };
    // Nearest singular point, both lie outside [c, e].
    double anchor;
    if (c >= std::max(0.0, r2)) anchor = std::max(0.0, r2);
    else if (e <= std::min(0.0, r2)) anchor = std::min(0.0, r2);
    else anchor = (std::abs(c) < std::abs(c - r2)) ? std::min(0.0, r2) : std::max(0.0, r2);
    if (anchor > c && anchor < e) throw std::logic_error("ridge: far segment contains a singular point");
    return integrate_gk_points<double>(f, geometric_points(c, e, anchor), qo);
}

// Boundary expansion of int g e^{i w x}: sum_k (-1)^k g^{(k)}(x) e^{i w x} / (i w)^{k+1}.
cplx ibp_boundary(double p, double r2, double x, double w, int terms, double& last) {
    if (std::isinf(x)) {
        last = 0.0;
        return cplx(0.0, 0.0);
    }
    const cplx iw(0.0, w);
    cplx pw = 1.0 / iw;
    cplx sum(0.0, 0.0);
    double sign = 1.0;
    cplx term(0.0, 0.0);
    for (int k = 0; k < terms; ++k) {
        term = sign * ridge_weight_derivative(p, r2, x, k) * pw;
        sum += term;
        pw /= iw;
        sign = -sign;
    }
    last = std::abs(term);
    return sum * std::polar(1.0, w * x);
}

}  // namespace

double ridge_weight_derivative(double p, double r2, double xi, int k) {
    // Leibniz on |xi|^p and (r2 - xi)^{-2}.
    const double ax = std::abs(xi);
    const double sgn = xi < 0.0 ? -1.0 : 1.0;
    const double d = r2 - xi;
    double sum = 0.0;
    double binom = 1.0;
    double fact = 1.0;   // (k-j+1)! built up below
    for (int j = 0; j <= k; ++j) {
        const int m = k - j;
        fact = 1.0;
        for (int i = 2; i <= m + 1; ++i) fact *= i;
        const double a_j = falling(p, j) * std::pow(ax, p - j) * (j % 2 == 1 ? sgn : 1.0);
        const double b_m = fact * std::pow(d, -2.0 - m);
        sum += binom * a_j * b_m;
        binom = binom * (k - j) / (j + 1);
    }
    return sum;
}

QuadResult endpoint_singular_integral(const std::function<double(double)>& f, double a, double b, double pa,
                                      double pb, const QuadOptions& opt) {
    const double mid = 0.5 * (a + b);
    auto left = [&](double y) { return f(a + y); };
    auto right = [&](double y) { return f(b - y); };
    QuadResult res = integrate_power_origin<double>(left, pa, mid - a, opt);
    accumulate(res, integrate_power_origin<double>(right, pb, b - mid, opt));
    return res;
}

QuadResult endpoint_singular_integral(const std::function<double(double)>& left,
                                      const std::function<double(double)>& right, double half, double pa, double pb,
                                      const QuadOptions& opt) {
    QuadResult res = integrate_power_origin<double>(left, pa, half, opt);
    accumulate(res, integrate_power_origin<double>(right, pb, half, opt));
    return res;
}

QuadResult ridge_integral(const RidgeProblem& prob, double a, double b, const RidgeOptions& opt) {
    QuadResult res;
    res.value = 0.0;
    if (!(b > a)) return res;
    double S = prob.smooth;
    std::vector<Wave> waves;
    for (const auto& w : prob.waves) {
        if (w.omega == 0.0) S += w.coef.real();
        else waves.push_back(w);
    }
    if (waves.empty()) throw std::invalid_argument("ridge_integral: needs at least one oscillating term");
    double wmin = kInf, wmax = 0.0;
    for (const auto& w : waves) {
        wmin = std::min(wmin, std::abs(w.omega));
        wmax = std::max(wmax, std::abs(w.omega));
    }
    const double W = opt.window_factor / wmin;
    const double p = prob.p, r2 = prob.r2;
    QuadOptions qo;
    qo.rel_tol = opt.rel_tol;
    qo.max_intervals = opt.max_intervals;

    // Near windows, merged and clipped.
    std::vector<std::pair<double, double>> near{{-W, W}, {r2 - W, r2 + W}};
    std::sort(near.begin(), near.end());
    if (near[1].first <= near[0].second) {
        near[0].second = std::max(near[0].second, near[1].second);
        near.pop_back();
    }
    std::vector<std::pair<double, double>> clipped;
    for (auto [u, v] : near) {
        u = std::max(u, a);
        v = std::min(v, b);
        if (v > u) clipped.emplace_back(u, v);
    }

    const auto& exact = prob.exact;
    auto mirrored = [&](double y) { return exact(-y); };
    for (auto [u, v] : clipped) {
        std::vector<double> cuts{u};
        if (0.0 > u && 0.0 < v) cuts.push_back(0.0);
        if (r2 > u && r2 < v && r2 != 0.0) cuts.push_back(r2);
        cuts.push_back(v);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double lo = cuts[i], hi = cuts[i + 1];
            const int panels = panel_count(hi - lo, wmax);
            if (lo == 0.0) {
                accumulate(res, integrate_power_origin<double>(exact, p, hi, qo, panels));
            } else if (hi == 0.0) {
                accumulate(res, integrate_power_origin<double>(mirrored, p, -lo, qo, panels));
            } else {
                accumulate(res, integrate_gk_points<double>(exact, uniform_points(lo, hi, panels), qo));
            }
        }
    }

    // Far segments: complement of the near windows within [a, b].
    std::vector<std::pair<double, double>> far;
    double cursor = a;
    for (auto [u, v] : clipped) {
        if (u > cursor) far.emplace_back(cursor, u);
        cursor = std::max(cursor, v);
    }
    if (b > cursor) far.emplace_back(cursor, b);

    for (auto [c, e] : far) {
        QuadResult sm = far_smooth(p, r2, c, e, qo);
        sm.value *= S;
        sm.error *= std::abs(S);
        accumulate(res, sm);
        double osc = 0.0, err = 0.0;
        for (const auto& w : waves) {
            double lc = 0.0, le = 0.0;
            const cplx be = ibp_boundary(p, r2, e, w.omega, opt.ibp_terms, le);
            const cplx bc = ibp_boundary(p, r2, c, w.omega, opt.ibp_terms, lc);
            osc += (w.coef * (be - bc)).real();
            err += std::abs(w.coef) * (le + lc);
        }
        res.value += osc;
        res.error += err;
    }
    return res;
}

}  // namespace fracschro
