#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace fracschro {

using cplx = std::complex<double>;

// Periodic box [-L/2, L/2)^d sampled at N points per axis, plus a uniform
// time grid of M nodes on [0, T]. Arrays are row-major with axis 0 slowest.
struct GridSpec {
    int d = 1;
    int N = 256;
    double L = 40.0;
    double T = 1.0;
    int M = 2;

    void validate() const;
    std::size_t size() const;             // N^d
    double dx() const { return L / N; }
    double cell_volume() const;           // (L/N)^d
    double dk() const;                    // 2 pi / L
    double k_nyquist() const;             // pi N / L
    double coord(int j) const { return -0.5 * L + j * dx(); }
    double time(int k) const;
    std::vector<double> times() const;

    // Signed lattice index m in {-N/2..N/2-1} of storage index i.
    int freq_index(int i) const { return i < N / 2 ? i : i - N; }
    // Storage index of lattice index m, or -1 when m is outside the lattice.
    int storage_index(int m) const;

    bool operator==(const GridSpec&) const = default;
};

// Field on the box. Spectral coefficients c_m are defined by
//   f(x) = L^{-d} sum_m c_m e^{i k_m . x},   c_m = (L/N)^d sum_j f(x_j) e^{-i k_m . x_j}
// with k_m = 2 pi m / L, so c_m approximates the whole-space transform.
struct Field {
    GridSpec grid;
    std::vector<cplx> values;

    Field() = default;
    explicit Field(const GridSpec& g) : grid(g), values(g.size(), cplx(0.0, 0.0)) {}
    Field(const GridSpec& g, std::vector<cplx> v);

    static Field from_function(const GridSpec& g, const std::function<cplx(const double*)>& f);

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double a);
    Field& operator*=(cplx a);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field f);
Field operator*(cplx a, Field f);
Field pointwise_product(const Field& a, const Field& b);

// Values at the M time nodes of a grid.
struct FieldPath {
    GridSpec grid;
    std::vector<double> times;
    std::vector<Field> fields;

    FieldPath() = default;
    explicit FieldPath(const GridSpec& g);   // M zero fields at g.times()
    std::size_t nodes() const { return fields.size(); }
    // First `count` nodes; the grid horizon T becomes times[count-1].
    FieldPath restrict_nodes(std::size_t count) const;
};

FieldPath operator+(const FieldPath& a, const FieldPath& b);
FieldPath operator-(const FieldPath& a, const FieldPath& b);

// Smooth one-dimensional step: 1 on |x-c| <= plateau, 0 on |x-c| >= support.
struct Bump1D {
    double center = 0.0;
    double plateau = 1.0;
    double support = 2.0;
    double operator()(double x) const;
};

// Product cutoff rho(x) = rho_1(x_1)...rho_d(x_d).
struct CutoffSpec {
    std::vector<Bump1D> axes;

    static CutoffSpec isotropic(int d, double plateau, double support, double center = 0.0);
    double operator()(const double* x) const;
    void validate(const GridSpec& g) const;   // support strictly inside the box
    bool inside_plateau_of(const CutoffSpec& outer) const;
    Field sample(const GridSpec& g) const;
};

// Raw transforms (FFTW ordering, no normalisation beyond (L/N)^d and phase).
std::vector<cplx> to_coefficients(const Field& f);
Field from_coefficients(const GridSpec& g, std::vector<cplx> c);

// Applies a real or complex Fourier multiplier m(|k|^2) to `f`.
Field apply_multiplier(const Field& f, const std::function<cplx(double)>& m_of_k2);
void fft_forward(const GridSpec& g, cplx* data);    // unnormalised, in place
void fft_backward(const GridSpec& g, cplx* data);   // unnormalised, in place
std::vector<double> wavenumber_squares(const GridSpec& g);

Field bessel_multiplier(const Field& f, double s);
Field schrodinger_propagate(const Field& f, double t);

double lp_norm(const Field& f, double p);   // grid quadrature, p = inf gives max modulus
double sobolev_norm(const Field& f, double s, double p);
double local_sobolev_seminorm(const Field& f, double s, const CutoffSpec& rho);
// ((2 pi)^{-d} (2 pi / L)^d sum_m |c_m|^2)^{1/2}, the Riemann sum of the Plancherel side.
double spectral_l2_norm(const Field& f);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;        // root mean square of log2 residuals
    double slope_stderr = 0.0;
};

// Least squares of log2(value) against n.
RateFit fit_decay_rate(const std::vector<std::pair<double, double>>& values);

}  // namespace fracschro
