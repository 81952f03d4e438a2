#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fracschro/grid.hpp"
#include "fracschro/rng.hpp"

namespace fracschro {

struct HurstIndex {
    double H0 = 0.5;
    std::vector<double> Hs;   // spatial indices H_1..H_d

    int d() const { return static_cast<int>(Hs.size()); }
    double sum_space() const;
    // (2 H0 + sum H_i) - (d + 1)
    double alpha_gap() const;
    // Throws std::invalid_argument naming the offending component.
    void validate() const;
    // "H0,H1,...,Hd"
    static HurstIndex parse(const std::string& text);
};

enum class Regime { Regular, RoughSolvable, RoughConstructible, OutOfScope };

const char* regime_name(Regime r);
// alpha_d bound of the rough well-posedness condition: 3/20, 1/10, 1/24.
double rough_alpha_bound(int d);
Regime classify_regime(const HurstIndex& H, int d);

// One piece of the one-dimensional partition of the positive half-axis.
// Pieces are indexed by a signed ordinal: piece k > 0 is the k-th piece from
// the origin, -k its mirror image.
struct AxisPiece {
    double lo = 0.0;
    double hi = 0.0;
    double weight = 0.0;     // int_lo^hi |x|^p dx
    double centroid = 0.0;   // weight centre of mass
    int key = 0;
    int bin = 0;             // eta axes: lattice index of the bin holding the piece
    int level = 1;           // smallest n >= 1 with the piece inside the level-n range
};

struct EtaCell {
    std::array<int, 3> key{0, 0, 0};
    std::array<int, 3> bin{0, 0, 0};
    std::array<double, 3> centroid{0.0, 0.0, 0.0};
    double weight = 1.0;      // prod_i int |eta_i|^{1-2H_i}
    double sign = 1.0;        // prod_i sign(eta_i)
    double r = 0.0;           // |lattice frequency|
    double volume = 1.0;
    int level = 1;
    std::size_t mirror = 0;   // index of -cell
    std::size_t lattice = 0;  // storage index of the lattice mode on the grid
};

// Cells of D_n = {|xi| <= 4^n} x {|eta| <= 2^n}: a uniform xi lattice of step
// xi_step split at +-4^j, times the eta lattice bins 2 pi m / L split at 0 and
// +-2^j. Weights carry the Psi density |xi|^{1-2H0} prod |eta_i|^{1-2H_i}.
// The partition is the same for every n, so D_n's cells are a subset of D_m's.
struct SpectralCellSet {
    int level = 1;
    HurstIndex H;
    GridSpec grid;
    double xi_step = 1.0;
    std::vector<AxisPiece> xi;       // xi > 0 only; the mirror pieces are implicit
    std::vector<EtaCell> eta;        // all signs

    std::size_t size() const { return 2 * xi.size() * eta.size(); }
    double total_volume() const;
    int cell_level(std::size_t xi_index, std::size_t eta_index) const;
};

struct CellOptions {
    double xi_step = 0.0;   // 0 picks 1 / T clamped to [0.05, 4]
};

// Throws if the eta range does not fit under the grid Nyquist index.
SpectralCellSet build_cells(int n, const HurstIndex& H, const GridSpec& grid, const CellOptions& opt = {});

struct CellKey {
    int xi = 0;
    std::array<int, 3> eta{0, 0, 0};
};

// Gaussians are functions of (seed, canonical key) only. `mask`, when set,
// multiplies the canonical Gaussian (its mirror receives the conjugate).
struct NoiseRealization {
    std::uint64_t seed = 0;
    double scale = 1.0;
    std::function<double(const CellKey&)> mask;

    // Canonical keys have xi > 0; other keys return the conjugate of the mirror.
    cplx gaussian(const CellKey& key) const {
        if (key.xi > 0 && !mask) {
            const PhiloxCounter ctr{static_cast<std::uint32_t>(key.xi), static_cast<std::uint32_t>(key.eta[0]),
                                    static_cast<std::uint32_t>(key.eta[1]), static_cast<std::uint32_t>(key.eta[2])};
            return scale * philox_complex_normal(ctr, philox_key(seed));
        }
        return gaussian_slow(key);
    }
    cplx gaussian_slow(const CellKey& key) const;
};

NoiseRealization sample_noise(std::uint64_t seed);

// Pointwise B_n(t, x) by direct summation over all cells, phases at cell centroids.
double evaluate_Bn(const NoiseRealization& w, const SpectralCellSet& cells, double t, const double* x);
// B_n on the grid at the grid's time nodes (eta phases on the lattice, one FFT per node).
FieldPath sample_Bn(const NoiseRealization& w, const SpectralCellSet& cells);
// Spectral variance of B_n(t, x) carried by the cells.
double Bn_cell_variance(const SpectralCellSet& cells, double t, const double* x);

}  // namespace fracschro
