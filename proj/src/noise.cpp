#include "fracschro/noise.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fracschro/parallel.hpp"
#include "fracschro/rng.hpp"

namespace fracschro {

double HurstIndex::sum_space() const {
    double s = 0.0;
    for (double h : Hs) s += h;
    return s;
}

double HurstIndex::alpha_gap() const { return 2.0 * H0 + sum_space() - (d() + 1); }

void HurstIndex::validate() const {
    if (!(H0 > 0.0 && H0 < 1.0)) throw std::invalid_argument("hurst: H₀∈(0,1) violated (H0 = " + std::to_string(H0) + ")");
    if (Hs.empty() || Hs.size() > 3) throw std::invalid_argument("hurst: need 1 to 3 spatial indices");
    for (std::size_t i = 0; i < Hs.size(); ++i) {
        if (!(Hs[i] > 0.0 && Hs[i] < 1.0))
            throw std::invalid_argument("hurst: H" + std::to_string(i + 1) + "∈(0,1) violated (value " +
                                        std::to_string(Hs[i]) + ")");
    }
}

HurstIndex HurstIndex::parse(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw std::invalid_argument("hurst: cannot parse '" + item + "'");
        }
    }
    if (v.size() < 2) throw std::invalid_argument("hurst: expected H0,H1[,H2,H3]");
    HurstIndex H;
    H.H0 = v[0];
    H.Hs.assign(v.begin() + 1, v.end());
    H.validate();
    return H;
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Regular: return "regular";
        case Regime::RoughSolvable: return "rough-solvable";
        case Regime::RoughConstructible: return "rough-constructible";
        case Regime::OutOfScope: return "out-of-scope";
    }
    return "?";
}

double rough_alpha_bound(int d) {
    switch (d) {
        case 1: return 3.0 / 20.0;
        case 2: return 1.0 / 10.0;
        case 3: return 1.0 / 24.0;
    }
    throw std::invalid_argument("rough_alpha_bound: d must be 1, 2 or 3");
}

Regime classify_regime(const HurstIndex& H, int d) {
    H.validate();
    if (H.d() != d) throw std::invalid_argument("classify_regime: Hurst vector length does not match d");
    const double gap = H.alpha_gap();
    if (gap > 0.0) return Regime::Regular;
    if (gap > -rough_alpha_bound(d)) return Regime::RoughSolvable;
    if (gap > -0.25) return Regime::RoughConstructible;
    return Regime::OutOfScope;
}

namespace {

double power_integral(double a, double b, double p) {   // int_a^b x^p, 0 <= a < b
    return (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / (p + 1.0);
}

int level_of(double extent, double base) {
    int n = 1;
    double edge = base;
    while (edge < extent * (1.0 - 1e-14)) {
        edge *= base;
        ++n;
    }
    return n;
}

// Positive half-axis pieces up to `extent`: lattice edges {offset + k step}
// (plus 0) merged with the split points base^j.
std::vector<AxisPiece> half_axis(double step, double offset, double base, double extent, double p) {
    std::vector<double> edges{0.0};
    for (double e = offset > 0.0 ? offset : step; e < extent; e += step) edges.push_back(e);
    for (double s = 1.0; s < extent; s *= base) edges.push_back(s);
    edges.push_back(extent);
    std::sort(edges.begin(), edges.end());
    // drop duplicates closer than roundoff
    std::vector<double> uniq;
    for (double e : edges)
        if (uniq.empty() || e - uniq.back() > 1e-12 * std::max(1.0, e)) uniq.push_back(e);
    std::vector<AxisPiece> out;
    for (std::size_t i = 0; i + 1 < uniq.size(); ++i) {
        AxisPiece pc;
        pc.lo = uniq[i];
        pc.hi = uniq[i + 1];
        pc.weight = power_integral(pc.lo, pc.hi, p);
        pc.centroid = power_integral(pc.lo, pc.hi, p + 1.0) / pc.weight;
        pc.key = static_cast<int>(i + 1);
        out.push_back(pc);
    }
    return out;
}

}  // namespace

double SpectralCellSet::total_volume() const {
    double vx = 0.0, ve = 0.0;
    for (const auto& p : xi) vx += 2.0 * (p.hi - p.lo);
    for (const auto& c : eta) ve += c.volume;
    return vx * ve;
}

int SpectralCellSet::cell_level(std::size_t i, std::size_t j) const { return std::max(xi[i].level, eta[j].level); }

SpectralCellSet build_cells(int n, const HurstIndex& H, const GridSpec& grid, const CellOptions& opt) {
    if (n < 1) throw std::invalid_argument("build_cells: level must be >= 1");
    H.validate();
    grid.validate();
    if (H.d() != grid.d) throw std::invalid_argument("build_cells: Hurst dimension does not match the grid");
    SpectralCellSet cs;
    cs.level = n;
    cs.H = H;
    cs.grid = grid;
    cs.xi_step = opt.xi_step > 0.0 ? opt.xi_step : std::clamp(1.0 / std::max(grid.T, 1e-12), 0.05, 4.0);

    const double xi_ext = std::ldexp(1.0, 2 * n), eta_ext = std::ldexp(1.0, n);
    cs.xi = half_axis(cs.xi_step, 0.0, 4.0, xi_ext, 1.0 - 2.0 * H.H0);
    for (auto& p : cs.xi) p.level = level_of(p.hi, 4.0);

    const double dk = grid.dk();
    if (std::ceil(eta_ext / dk - 0.5) > grid.N / 2 - 1)
        throw std::invalid_argument("build_cells: grid Nyquist index below 2^n (increase N or decrease L)");

    const int d = grid.d;
    std::vector<std::vector<AxisPiece>> axes(d);
    for (int a = 0; a < d; ++a) {
        auto half = half_axis(dk, 0.5 * dk, 2.0, eta_ext, 1.0 - 2.0 * H.Hs[a]);
        for (auto& p : half) {
            p.bin = static_cast<int>(std::floor(0.5 * (p.lo + p.hi) / dk + 0.5));
            p.level = level_of(p.hi, 2.0);
        }
        std::vector<AxisPiece> full;
        for (auto it = half.rbegin(); it != half.rend(); ++it) {
            AxisPiece m = *it;
            m.lo = -it->hi;
            m.hi = -it->lo;
            m.centroid = -it->centroid;
            m.key = -it->key;
            m.bin = -it->bin;
            full.push_back(m);
        }
        full.insert(full.end(), half.begin(), half.end());
        axes[a] = std::move(full);
    }

    std::vector<std::size_t> idx(d, 0);
    std::map<std::array<int, 3>, std::size_t> by_key;
    for (;;) {
        EtaCell c;
        double r2 = 0.0;
        std::size_t storage = 0;
        int level = 1;
        for (int a = 0; a < d; ++a) {
            const AxisPiece& p = axes[a][idx[a]];
            c.key[a] = p.key;
            c.bin[a] = p.bin;
            c.centroid[a] = p.centroid;
            c.weight *= p.weight;
            c.volume *= p.hi - p.lo;
            c.sign *= p.key < 0 ? -1.0 : 1.0;
            r2 += (p.bin * dk) * (p.bin * dk);
            storage = storage * grid.N + static_cast<std::size_t>(grid.storage_index(p.bin));
            level = std::max(level, p.level);
        }
        c.r = std::sqrt(r2);
        c.lattice = storage;
        // d >= 2: Euclidean ball, membership by lattice frequency
        if (d >= 2) level = level_of(std::max(c.r, 1e-300), 2.0);
        c.level = level;
        if (d == 1 || c.r <= eta_ext * (1.0 + 1e-14)) {
            by_key[c.key] = cs.eta.size();
            cs.eta.push_back(c);
        }
        int a = d - 1;
        while (a >= 0 && ++idx[a] == axes[a].size()) idx[a--] = 0;
        if (a < 0) break;
    }
    for (auto& c : cs.eta) {
        std::array<int, 3> mk{-c.key[0], -c.key[1], -c.key[2]};
        c.mirror = by_key.at(mk);
    }
    return cs;
}

cplx NoiseRealization::gaussian_slow(const CellKey& key) const {
    const bool canonical = key.xi > 0;
    CellKey k = key;
    if (!canonical) {
        k.xi = -k.xi;
        for (auto& e : k.eta) e = -e;
    }
    double m = scale;
    if (mask) m *= mask(k);
    if (m == 0.0) return cplx(0.0, 0.0);
    const PhiloxCounter ctr{static_cast<std::uint32_t>(k.xi), static_cast<std::uint32_t>(k.eta[0]),
                            static_cast<std::uint32_t>(k.eta[1]), static_cast<std::uint32_t>(k.eta[2])};
    const cplx z = m * philox_complex_normal(ctr, philox_key(seed));
    return canonical ? z : std::conj(z);
}

NoiseRealization sample_noise(std::uint64_t seed) {
    NoiseRealization w;
    w.seed = seed;
    return w;
}

namespace {

// (e^{i a} - 1) / b without cancellation for small a.
cplx expm1i_over(double a, double b) {
    const double h = 0.5 * a;
    const double s = std::sin(h);
    return cplx(-2.0 * s * s, std::sin(a)) / b;
}

}  // namespace

double evaluate_Bn(const NoiseRealization& w, const SpectralCellSet& cells, double t, const double* x) {
    const int d = cells.grid.d;
    std::vector<cplx> fx(cells.xi.size());
    for (std::size_t i = 0; i < fx.size(); ++i) {
        const AxisPiece& p = cells.xi[i];
        fx[i] = std::sqrt(p.weight) * expm1i_over(t * p.centroid, p.centroid);
    }
    double sum = 0.0;
    for (const auto& c : cells.eta) {
        cplx ef(std::sqrt(c.weight), 0.0);
        for (int a = 0; a < d; ++a) ef *= expm1i_over(x[a] * c.centroid[a], std::abs(c.centroid[a]));
        if (ef == cplx(0.0, 0.0)) continue;
        cplx acc(0.0, 0.0);
        for (std::size_t i = 0; i < fx.size(); ++i) acc += fx[i] * w.gaussian(CellKey{cells.xi[i].key, c.key});
        // the mirror cell contributes the complex conjugate
        sum += 2.0 * (acc * ef).real();
    }
    return sum;
}

double Bn_cell_variance(const SpectralCellSet& cells, double t, const double* x) {
    const int d = cells.grid.d;
    double sx = 0.0;
    for (const auto& p : cells.xi) sx += p.weight * std::norm(expm1i_over(t * p.centroid, p.centroid));
    double se = 0.0;
    for (const auto& c : cells.eta) {
        double v = c.weight;
        for (int a = 0; a < d; ++a) v *= std::norm(expm1i_over(x[a] * c.centroid[a], std::abs(c.centroid[a])));
        se += v;
    }
    // xi < 0 pieces mirror the xi > 0 ones
    return 2.0 * sx * se;
}

FieldPath sample_Bn(const NoiseRealization& w, const SpectralCellSet& cells) {
    const GridSpec& g = cells.grid;
    const int d = g.d;
    FieldPath out(g);
    const std::size_t ne = cells.eta.size();
    const std::size_t M = out.nodes();
    // C[k][c] = sum_xi sqrt(w) (e^{i t_k xi} - 1) / xi Z(xi, c) for canonical xi > 0
    std::vector<std::vector<cplx>> C(M, std::vector<cplx>(ne));
    parallel_for(ne, [&](std::size_t ci) {
        const EtaCell& c = cells.eta[ci];
        for (const auto& p : cells.xi) {
            const cplx z = w.gaussian(CellKey{p.key, c.key});
            if (z == cplx(0.0, 0.0)) continue;
            const double amp = std::sqrt(p.weight * c.weight);
            for (std::size_t k = 0; k < M; ++k)
                C[k][ci] += amp * expm1i_over(out.times[k] * p.centroid, p.centroid) * z;
        }
    });
    const double Ld = std::pow(g.L, d);
    for (std::size_t k = 0; k < M; ++k) {
        std::vector<cplx> coef(g.size(), cplx(0.0, 0.0));
        for (std::size_t ci = 0; ci < ne; ++ci) {
            const EtaCell& c = cells.eta[ci];
            // both the cell (xi > 0 part) and the conjugate arriving from the mirror cell's xi < 0 part
            const cplx a = C[k][ci], am = std::conj(C[k][c.mirror]);
            cplx amp = a + am;
            for (int ax = 0; ax < d; ++ax) amp /= std::abs(c.centroid[ax]);
            // prod_i (e^{i x_i eta_i} - 1) expanded over subsets of axes
            for (int S = 0; S < (1 << d); ++S) {
                std::size_t idx = 0;
                int missing = 0;
                for (int ax = 0; ax < d; ++ax) {
                    const int m = (S >> ax) & 1 ? c.bin[ax] : 0;
                    if (!((S >> ax) & 1)) ++missing;
                    idx = idx * g.N + static_cast<std::size_t>(g.storage_index(m));
                }
                coef[idx] += (missing % 2 == 0 ? 1.0 : -1.0) * Ld * amp;
            }
        }
        out.fields[k] = from_coefficients(g, std::move(coef));
    }
    return out;
}

}  // namespace fracschro
