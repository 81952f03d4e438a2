#include "fracschro/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

#include "fracschro/quadrature.hpp"

namespace fracschro {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW planning is not thread safe; plans are created once per shape and
// executed through the new-array interface.
class PlanCache {
public:
    fftw_plan get(int d, int N, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_tuple(d, N, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::size_t total = 1;
        for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(N);
        std::vector<cplx> scratch(total);
        std::vector<int> dims(d, N);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan p = fftw_plan_dft(d, dims.data(), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw std::runtime_error("fftw plan creation failed");
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mu_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plans() {
    static PlanCache cache;
    return cache;
}

void execute(const GridSpec& g, cplx* data, int sign) {
    fftw_plan p = plans().get(g.d, g.N, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, buf, buf);
}

// (-1)^{m_1+...+m_d}: the phase of e^{-i k_m x_0} at the box corner x_0 = -L/2.
std::vector<double> corner_signs(const GridSpec& g) {
    std::vector<double> s(g.size());
    const std::size_t n = static_cast<std::size_t>(g.N);
    for (std::size_t idx = 0; idx < s.size(); ++idx) {
        std::size_t rem = idx;
        int parity = 0;
        for (int a = 0; a < g.d; ++a) {
            parity += g.freq_index(static_cast<int>(rem % n));
            rem /= n;
        }
        s[idx] = (parity % 2 == 0) ? 1.0 : -1.0;
    }
    return s;
}

double step_profile_integral(double u) {
    // integral over [0, u] of exp(-1 / (4 v (1 - v)))
    if (u <= 0.0) return 0.0;
    auto f = [](double v) { return (v <= 0.0 || v >= 1.0) ? 0.0 : std::exp(-1.0 / (4.0 * v * (1.0 - v))); };
    return integrate_gk(f, 0.0, std::min(u, 1.0), QuadOptions{1e-300, 1e-15, 200}).value;
}

const double kStepNorm = step_profile_integral(1.0);

}  // namespace

void GridSpec::validate() const {
    if (d < 1 || d > 3) throw std::invalid_argument("grid: d must be 1, 2 or 3");
    if (N < 8 || !is_pow2(N)) throw std::invalid_argument("grid: N must be a power of two >= 8");
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("grid: L must be positive");
    if (!(T >= 0.0) || !std::isfinite(T)) throw std::invalid_argument("grid: T must be non-negative");
    if (M < 2) throw std::invalid_argument("grid: M must be >= 2");
}

std::size_t GridSpec::size() const {
    std::size_t s = 1;
    for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(N);
    return s;
}

double GridSpec::cell_volume() const { return std::pow(L / N, d); }
double GridSpec::dk() const { return 2.0 * kPi / L; }
double GridSpec::k_nyquist() const { return kPi * N / L; }
double GridSpec::time(int k) const { return T * k / (M - 1); }

std::vector<double> GridSpec::times() const {
    std::vector<double> t(M);
    for (int k = 0; k < M; ++k) t[k] = time(k);
    t.back() = T;
    return t;
}

int GridSpec::storage_index(int m) const {
    if (m < -N / 2 || m >= N / 2) return -1;
    return m >= 0 ? m : m + N;
}

Field::Field(const GridSpec& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
    if (values.size() != g.size()) throw std::invalid_argument("field: value count does not match grid");
}

Field Field::from_function(const GridSpec& g, const std::function<cplx(const double*)>& f) {
    Field out(g);
    const std::size_t n = static_cast<std::size_t>(g.N);
    double x[3] = {0.0, 0.0, 0.0};
    for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
        std::size_t rem = idx;
        for (int a = g.d - 1; a >= 0; --a) {
            x[a] = g.coord(static_cast<int>(rem % n));
            rem /= n;
        }
        out.values[idx] = f(x);
    }
    return out;
}

Field& Field::operator+=(const Field& o) {
    if (o.values.size() != values.size()) throw std::invalid_argument("field: size mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    if (o.values.size() != values.size()) throw std::invalid_argument("field: size mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
}

Field& Field::operator*=(double a) {
    for (auto& v : values) v *= a;
    return *this;
}

Field& Field::operator*=(cplx a) {
    for (auto& v : values) v *= a;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field f) { return f *= a; }
Field operator*(cplx a, Field f) { return f *= a; }

Field pointwise_product(const Field& a, const Field& b) {
    if (a.values.size() != b.values.size()) throw std::invalid_argument("field: size mismatch");
    Field out(a.grid);
    for (std::size_t i = 0; i < a.values.size(); ++i) out.values[i] = a.values[i] * b.values[i];
    return out;
}

FieldPath::FieldPath(const GridSpec& g) : grid(g), times(g.times()), fields(g.M, Field(g)) {}

FieldPath FieldPath::restrict_nodes(std::size_t count) const {
    if (count < 2 || count > fields.size()) throw std::invalid_argument("field path: bad restriction");
    FieldPath out;
    out.grid = grid;
    out.grid.M = static_cast<int>(count);
    out.grid.T = times[count - 1];
    out.times.assign(times.begin(), times.begin() + count);
    out.fields.assign(fields.begin(), fields.begin() + count);
    for (auto& f : out.fields) f.grid = out.grid;
    return out;
}

namespace {
FieldPath combine(const FieldPath& a, const FieldPath& b, double sign) {
    if (a.nodes() != b.nodes()) throw std::invalid_argument("field path: node count mismatch");
    FieldPath out = a;
    for (std::size_t k = 0; k < a.nodes(); ++k) {
        for (std::size_t i = 0; i < out.fields[k].values.size(); ++i)
            out.fields[k].values[i] += sign * b.fields[k].values[i];
    }
    return out;
}
}  // namespace

FieldPath operator+(const FieldPath& a, const FieldPath& b) { return combine(a, b, 1.0); }
FieldPath operator-(const FieldPath& a, const FieldPath& b) { return combine(a, b, -1.0); }

double Bump1D::operator()(double x) const {
    double r = std::abs(x - center);
    if (r <= plateau) return 1.0;
    if (r >= support) return 0.0;
    double u = (r - plateau) / (support - plateau);
    return std::clamp(1.0 - step_profile_integral(u) / kStepNorm, 0.0, 1.0);
}

CutoffSpec CutoffSpec::isotropic(int d, double plateau, double support, double center) {
    CutoffSpec c;
    c.axes.assign(d, Bump1D{center, plateau, support});
    return c;
}

double CutoffSpec::operator()(const double* x) const {
    double v = 1.0;
    for (std::size_t a = 0; a < axes.size(); ++a) v *= axes[a](x[a]);
    return v;
}

void CutoffSpec::validate(const GridSpec& g) const {
    if (static_cast<int>(axes.size()) != g.d) throw std::invalid_argument("cutoff: axis count must equal d");
    for (const auto& b : axes) {
        if (!(b.plateau >= 0.0) || !(b.support > b.plateau))
            throw std::invalid_argument("cutoff: need 0 <= plateau < support");
        if (b.center - b.support <= -0.5 * g.L || b.center + b.support >= 0.5 * g.L)
            throw std::invalid_argument("cutoff: support must lie strictly inside the box");
    }
}

bool CutoffSpec::inside_plateau_of(const CutoffSpec& outer) const {
    if (axes.size() != outer.axes.size()) return false;
    for (std::size_t a = 0; a < axes.size(); ++a) {
        const auto& in = axes[a];
        const auto& out = outer.axes[a];
        if (in.center - in.support < out.center - out.plateau) return false;
        if (in.center + in.support > out.center + out.plateau) return false;
    }
    return true;
}

Field CutoffSpec::sample(const GridSpec& g) const {
    // Separable: tabulate each axis once.
    std::vector<std::vector<double>> tab(g.d, std::vector<double>(g.N));
    for (int a = 0; a < g.d; ++a)
        for (int j = 0; j < g.N; ++j) tab[a][j] = axes[a](g.coord(j));
    Field out(g);
    const std::size_t n = static_cast<std::size_t>(g.N);
    for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
        std::size_t rem = idx;
        double v = 1.0;
        for (int a = g.d - 1; a >= 0; --a) {
            v *= tab[a][rem % n];
            rem /= n;
        }
        out.values[idx] = v;
    }
    return out;
}

void fft_forward(const GridSpec& g, cplx* data) { execute(g, data, FFTW_FORWARD); }
void fft_backward(const GridSpec& g, cplx* data) { execute(g, data, FFTW_BACKWARD); }

std::vector<double> wavenumber_squares(const GridSpec& g) {
    std::vector<double> k1(g.N);
    for (int i = 0; i < g.N; ++i) {
        double k = g.dk() * g.freq_index(i);
        k1[i] = k * k;
    }
    std::vector<double> k2(g.size());
    const std::size_t n = static_cast<std::size_t>(g.N);
    for (std::size_t idx = 0; idx < k2.size(); ++idx) {
        std::size_t rem = idx;
        double s = 0.0;
        for (int a = 0; a < g.d; ++a) {
            s += k1[rem % n];
            rem /= n;
        }
        k2[idx] = s;
    }
    return k2;
}

std::vector<cplx> to_coefficients(const Field& f) {
    std::vector<cplx> c = f.values;
    fft_forward(f.grid, c.data());
    const auto sgn = corner_signs(f.grid);
    const double w = f.grid.cell_volume();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= w * sgn[i];
    return c;
}

Field from_coefficients(const GridSpec& g, std::vector<cplx> c) {
    if (c.size() != g.size()) throw std::invalid_argument("coefficients: size mismatch");
    const auto sgn = corner_signs(g);
    const double w = std::pow(g.L, -g.d);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= w * sgn[i];
    fft_backward(g, c.data());
    return Field(g, std::move(c));
}

Field apply_multiplier(const Field& f, const std::function<cplx(double)>& m_of_k2) {
    Field out = f;
    fft_forward(f.grid, out.values.data());
    const auto k2 = wavenumber_squares(f.grid);
    const double inv = 1.0 / static_cast<double>(f.grid.size());
    for (std::size_t i = 0; i < k2.size(); ++i) out.values[i] *= m_of_k2(k2[i]) * inv;
    fft_backward(f.grid, out.values.data());
    return out;
}

Field bessel_multiplier(const Field& f, double s) {
    if (s == 0.0) return f;
    Field out = f;
    fft_forward(f.grid, out.values.data());
    const auto k2 = wavenumber_squares(f.grid);
    const double inv = 1.0 / static_cast<double>(f.grid.size());
    const double h = 0.5 * s;
    for (std::size_t i = 0; i < k2.size(); ++i) out.values[i] *= std::pow(1.0 + k2[i], h) * inv;
    fft_backward(f.grid, out.values.data());
    return out;
}

Field schrodinger_propagate(const Field& f, double t) {
    if (t == 0.0) return f;
    Field out = f;
    fft_forward(f.grid, out.values.data());
    const auto k2 = wavenumber_squares(f.grid);
    const double inv = 1.0 / static_cast<double>(f.grid.size());
    for (std::size_t i = 0; i < k2.size(); ++i) out.values[i] *= std::polar(inv, t * k2[i]);
    fft_backward(f.grid, out.values.data());
    return out;
}

double lp_norm(const Field& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (const auto& v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    double acc = 0.0;
    if (p == 2.0) {
        for (const auto& v : f.values) acc += std::norm(v);
        return std::sqrt(acc * f.grid.cell_volume());
    }
    for (const auto& v : f.values) acc += std::pow(std::abs(v), p);
    return std::pow(acc * f.grid.cell_volume(), 1.0 / p);
}

double sobolev_norm(const Field& f, double s, double p) { return lp_norm(bessel_multiplier(f, s), p); }

double local_sobolev_seminorm(const Field& f, double s, const CutoffSpec& rho) {
    Field g = bessel_multiplier(f, s);
    Field r = rho.sample(f.grid);
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] *= r.values[i].real();
    return lp_norm(g, 2.0);
}

double spectral_l2_norm(const Field& f) {
    const auto c = to_coefficients(f);
    double acc = 0.0;
    for (const auto& v : c) acc += std::norm(v);
    return std::sqrt(acc * std::pow(f.grid.dk() / (2.0 * kPi), f.grid.d));
}

RateFit fit_decay_rate(const std::vector<std::pair<double, double>>& values) {
    if (values.size() < 3) throw std::invalid_argument("fit_decay_rate: need at least 3 points");
    const double m = static_cast<double>(values.size());
    double sx = 0.0, sy = 0.0;
    std::vector<double> ys;
    ys.reserve(values.size());
    for (const auto& [n, v] : values) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("fit_decay_rate: values must be positive and finite");
        ys.push_back(std::log2(v));
        sx += n;
        sy += ys.back();
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double dxv = values[i].first - mx;
        sxx += dxv * dxv;
        sxy += dxv * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_decay_rate: levels must not all coincide");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double e = ys[i] - (fit.intercept + fit.slope * values[i].first);
        ssr += e * e;
    }
    fit.residual = std::sqrt(ssr / m);
    fit.slope_stderr = m > 2.0 ? std::sqrt(ssr / (m - 2.0) / sxx) : 0.0;
    return fit;
}

}  // namespace fracschro
