#include "fracschro/lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fracschro/parallel.hpp"
#include "fracschro/rng.hpp"
#include "fracschro/solver.hpp"

namespace fracschro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double time_norm(const std::vector<double>& vals, const std::vector<double>& times, double p) {
    if (std::isinf(p)) return vals.empty() ? 0.0 : *std::max_element(vals.begin(), vals.end());
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < vals.size(); ++k)
        s += 0.5 * (times[k + 1] - times[k]) * (std::pow(vals[k], p) + std::pow(vals[k + 1], p));
    return std::pow(s, 1.0 / p);
}

template <class F>
std::vector<double> over_nodes(const FieldPath& u, F&& f) {
    std::vector<double> out(u.nodes());
    for (std::size_t k = 0; k < u.nodes(); ++k) out[k] = f(u.fields[k]);
    return out;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b))); }

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

// The three documented profiles, cycled by sample index, scaled with N.
Ensemble sample_ensemble(int N, std::size_t i, bool real) {
    Ensemble e;
    e.real = real;
    switch (i % 3) {
    case 0:
        e.profile = Profile::Flat;
        e.band = N / 8;
        break;
    case 1:
        e.profile = Profile::Concentrated;
        e.band = N / 4;
        e.centre = N / 5;
        break;
    default:
        e.profile = Profile::PowerLaw;
        e.band = N / 4;
        e.decay = 1.0;
        break;
    }
    return e;
}

// Time profile cos(w t + phase) f(x) with w in [0, 20).
FieldPath modulated_source(const GridSpec& g, const Ensemble& e, std::uint64_t seed) {
    SplitMix64 gen(seed);
    const double w = 20.0 * gen.uniform(), ph = 6.283185307179586 * gen.uniform();
    const Field f = random_field(g, e, derive_seed(seed, 1));
    FieldPath F(g);
    for (std::size_t k = 0; k < F.nodes(); ++k) F.fields[k] = std::cos(w * F.times[k] + ph) * f;
    return F;
}

FieldPath free_plus_duhamel(const Field& phi, const FieldPath& F) {
    FieldPath u = duhamel(F);
    for (std::size_t k = 0; k < u.nodes(); ++k) u.fields[k] += schrodinger_propagate(phi, u.times[k]);
    return u;
}

using SampleRatio = std::function<double(const GridSpec&, std::size_t, std::uint64_t)>;

double empirical_constant(const GridSpec& g, const LabConfig& cfg, const SampleRatio& ratio) {
    std::vector<double> r(cfg.samples);
    parallel_for(r.size(), [&](std::size_t i) { r[i] = ratio(g, i, derive_seed(cfg.seed, i)); });
    double c = 0.0;
    for (double v : r) {
        if (!std::isfinite(v)) throw std::runtime_error("inequality lab: non-finite ratio");
        c = std::max(c, v);
    }
    return c;
}

InequalityReport run_report(std::string id, std::vector<std::pair<std::string, double>> params, int d,
                            const LabConfig& cfg, const SampleRatio& ratio) {
    require(cfg.samples >= 1, "inequality lab: samples must be positive");
    InequalityReport rep;
    rep.id = std::move(id);
    rep.params = std::move(params);
    rep.samples = cfg.samples;
    for (int N : {cfg.N, 2 * cfg.N}) {
        GridSpec g{d, N, cfg.L, cfg.T, cfg.M};
        g.validate();
        rep.trace.emplace_back(N, empirical_constant(g, cfg, ratio));
    }
    rep.constant = rep.trace.front().second;
    return rep;
}

double log_slope(const std::vector<ScanPoint>& pts, bool reference) {
    std::vector<std::pair<double, double>> v;
    for (const auto& p : pts) v.emplace_back(std::log2(p.K), reference ? p.reference : p.ratio);
    return v.size() >= 2 ? fit_decay_rate(v).slope : 0.0;
}

int lattice_mode(const GridSpec& g, double K) {
    const double m = K / g.dk();
    const long r = std::lround(m);
    if (std::abs(m - r) > 1e-9 * std::max(1.0, m)) throw std::invalid_argument("scan: K must be a lattice frequency");
    if (r <= 0 || r >= g.N / 2) throw std::invalid_argument("scan: K outside (0, Nyquist)");
    return static_cast<int>(r);
}

}  // namespace

Rational::Rational(long long n, long long d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

Rational Rational::operator+(const Rational& o) const { return Rational(num * o.den + o.num * den, den * o.den); }
Rational Rational::operator*(const Rational& o) const { return Rational(num * o.num, den * o.den); }
bool Rational::operator<(const Rational& o) const { return num * o.den < o.num * den; }

Exponent Exponent::parse(const std::string& s) {
    if (s == "inf" || s == "infinity" || s == "∞") return infinity();
    const auto slash = s.find('/');
    try {
        std::size_t used = 0;
        if (slash == std::string::npos) {
            const long long p = std::stoll(s, &used);
            if (used != s.size() || p < 1) throw std::invalid_argument(s);
            return of(p);
        }
        const long long a = std::stoll(s.substr(0, slash), &used);
        if (used != slash) throw std::invalid_argument(s);
        const std::string rest = s.substr(slash + 1);
        const long long b = std::stoll(rest, &used);
        if (used != rest.size() || a < 1 || b < 1 || a < b) throw std::invalid_argument(s);
        return Exponent{Rational(b, a)};
    } catch (const std::exception&) {
        throw std::invalid_argument("Exponent: cannot parse '" + s + "' as p in [1, inf]");
    }
}

double Exponent::value() const { return is_inf() ? kInf : 1.0 / inv.value(); }

std::string admissibility_violation(int d, const Exponent& p, const Exponent& q) {
    if (d < 1 || d > 3) return "d must be 1, 2 or 3";
    const Rational half(1, 2);
    if (half < p.inv || half < q.inv) return "need p, q >= 2";
    if (p.inv == half && q.is_inf() && d == 2) return "(p,q,d) = (2,inf,2) is excluded";
    const Rational lhs = Rational(2) * p.inv + Rational(d) * q.inv;
    if (!(lhs == Rational(d, 2))) {
        std::ostringstream os;
        os << "2/p + d/q = d/2 fails: 2/p + d/q = " << lhs.num << "/" << lhs.den << ", d/2 = " << d << "/2";
        return os.str();
    }
    return {};
}

bool schrodinger_admissible(int d, const Exponent& p, const Exponent& q) { return admissibility_violation(d, p, q).empty(); }

Field random_field(const GridSpec& g, const Ensemble& e, std::uint64_t seed) {
    g.validate();
    if (e.band < 0) throw std::invalid_argument("random_field: band must be non-negative");
    const PhiloxKey key = philox_key(seed);
    std::vector<cplx> c(g.size(), cplx(0.0, 0.0));
    const double dk = g.dk();
    const double width = std::max(1.0, 0.25 * e.centre);
    const std::size_t N = static_cast<std::size_t>(g.N);
    for (std::size_t idx = 0; idx < c.size(); ++idx) {
        std::size_t rest = idx;
        int m[3] = {0, 0, 0};
        for (int a = g.d - 1; a >= 0; --a) {
            m[a] = g.freq_index(static_cast<int>(rest % N));
            rest /= N;
        }
        double m2 = 0.0;
        for (int a = 0; a < g.d; ++a) m2 += double(m[a]) * m[a];
        const double am = std::sqrt(m2);
        if (am > e.band || 2 * std::abs(m[0]) >= g.N) continue;
        double w = 1.0;
        if (e.profile == Profile::Concentrated) w = std::abs(am - e.centre) <= width ? 1.0 : 0.0;
        else if (e.profile == Profile::PowerLaw) w = std::pow(1.0 + m2 * dk * dk, -0.5 * e.decay);
        if (w == 0.0) continue;
        // Counter keyed on the lattice index so a mode draws the same value at every N.
        const PhiloxCounter ctr{static_cast<std::uint32_t>(m[0] + (1 << 20)), static_cast<std::uint32_t>(m[1] + (1 << 20)),
                                static_cast<std::uint32_t>(m[2] + (1 << 20)), 0x1ab5u};
        c[idx] = w * philox_complex_normal(ctr, key);
    }
    Field f = from_coefficients(g, std::move(c));
    if (e.real)
        for (auto& v : f.values) v = cplx(v.real(), 0.0);
    return f;
}

bool InequalityReport::refinement_ok() const {
    if (trace.size() < 2) return false;
    return std::isfinite(trace[1].second) && trace[1].second <= 2.0 * trace[0].second;
}

InequalityReport strichartz_check(int d, const Exponent& p, const Exponent& q, double s, const LabConfig& cfg) {
    const std::string why = admissibility_violation(d, p, q);
    if (!why.empty()) throw std::invalid_argument("strichartz_check: inadmissible pair: " + why);
    const double pv = p.value(), qv = q.value();
    auto ratio = [=](const GridSpec& g, std::size_t i, std::uint64_t seed) {
        const Ensemble e = sample_ensemble(g.N, i, false);
        const Field phi = random_field(g, e, seed);
        FieldPath F(g);
        if (i % 2 == 1) F = modulated_source(g, sample_ensemble(g.N, i + 1, false), derive_seed(seed, 7));
        const FieldPath u = free_plus_duhamel(phi, F);
        const double lhs = time_norm(over_nodes(u, [&](const Field& f) { return sobolev_norm(f, s, qv); }), u.times, pv);
        const double rhs = sobolev_norm(phi, s, 2.0) +
                           time_norm(over_nodes(F, [&](const Field& f) { return sobolev_norm(f, s, 2.0); }), F.times, 1.0);
        return lhs / rhs;
    };
    return run_report("strichartz", {{"d", d}, {"p", pv}, {"q", qv}, {"s", s}}, d, cfg, ratio);
}

LeibnizTerms leibniz_terms(const Field& u, const Field& v, double s, double r, double p1, double p2, double q1,
                           double q2) {
    LeibnizTerms t;
    t.lhs = sobolev_norm(pointwise_product(u, v), s, r);
    t.u_term = sobolev_norm(u, s, p1) * lp_norm(v, p2);
    t.v_term = lp_norm(u, q1) * sobolev_norm(v, s, q2);
    return t;
}

InequalityReport leibniz_check(double s, double r, double p1, double p2, double q1, double q2, const LabConfig& cfg) {
    require(s >= 0.0, "leibniz_check: need s >= 0");
    for (double e : {r, p1, p2, q1, q2})
        require(e > 1.0 && std::isfinite(e), "leibniz_check: need 1 < r, p1, p2, q1, q2 < inf");
    require(close(1.0 / r, 1.0 / p1 + 1.0 / p2), "leibniz_check: need 1/r = 1/p1 + 1/p2");
    require(close(1.0 / r, 1.0 / q1 + 1.0 / q2), "leibniz_check: need 1/r = 1/q1 + 1/q2");
    auto ratio = [=](const GridSpec& g, std::size_t i, std::uint64_t seed) {
        const Field u = random_field(g, sample_ensemble(g.N, i, false), derive_seed(seed, 0));
        const Field v = random_field(g, sample_ensemble(g.N, i / 3 + 1, false), derive_seed(seed, 1));
        const LeibnizTerms t = leibniz_terms(u, v, s, r, p1, p2, q1, q2);
        return t.lhs / (t.u_term + t.v_term);
    };
    return run_report("leibniz", {{"s", s}, {"r", r}, {"p1", p1}, {"p2", p2}, {"q1", q1}, {"q2", q2}}, 1, cfg, ratio);
}

InequalityReport product_check(double alpha, double beta, double p, double p1, double p2, const LabConfig& cfg) {
    const int d = 1;
    for (double e : {p, p1, p2}) require(e >= 1.0, "product_check: exponents must be >= 1");
    require(close(inv(p), inv(p1) + inv(p2)), "product_check: need 1/p = 1/p1 + 1/p2");
    require(alpha > 0.0 && alpha < beta && beta < d * inv(p2), "product_check: need 0 < alpha < beta < d/p2");
    auto ratio = [=](const GridSpec& g, std::size_t i, std::uint64_t seed) {
        // White field weighted to regularity -alpha/2.
        Ensemble white;
        white.band = g.N / 2;
        const Field f = bessel_multiplier(random_field(g, white, derive_seed(seed, 0)), -(0.5 * d - 0.5 * alpha));
        const Field h = random_field(g, sample_ensemble(g.N, i, false), derive_seed(seed, 1));
        return sobolev_norm(pointwise_product(f, h), -alpha, p) /
               (sobolev_norm(f, -alpha, p1) * sobolev_norm(h, beta, p2));
    };
    return run_report("product", {{"alpha", alpha}, {"beta", beta}, {"p", p}, {"p1", p1}, {"p2", p2}}, d, cfg, ratio);
}

double interpolation_ratio(const Field& v, double s1, double s2, double p1, double p2, double theta) {
    const double s = theta * s1 + (1.0 - theta) * s2;
    const double ip = theta * inv(p1) + (1.0 - theta) * inv(p2);
    const double p = ip == 0.0 ? kInf : 1.0 / ip;
    const double a = sobolev_norm(v, s1, p1);
    const double b = theta == 1.0 ? 1.0 : sobolev_norm(v, s2, p2);
    return sobolev_norm(v, s, p) / (std::pow(a, theta) * std::pow(b, 1.0 - theta));
}

InequalityReport interpolation_check(double s1, double s2, double p1, double p2, double theta, const LabConfig& cfg) {
    require(theta > 0.0 && theta <= 1.0, "interpolation_check: need theta in (0, 1]");
    require(p1 >= 1.0 && p2 >= 1.0, "interpolation_check: exponents must be >= 1");
    auto ratio = [=](const GridSpec& g, std::size_t i, std::uint64_t seed) {
        return interpolation_ratio(random_field(g, sample_ensemble(g.N, i, false), seed), s1, s2, p1, p2, theta);
    };
    return run_report("interpolation", {{"s1", s1}, {"s2", s2}, {"p1", p1}, {"p2", p2}, {"theta", theta}}, 1, cfg, ratio);
}

InequalityReport local_smoothing_check(int d, const CutoffSpec& rho, double alpha, double kappa, const LabConfig& cfg) {
    require(alpha >= 0.0 && alpha <= 0.5, "local_smoothing_check: need 0 <= alpha <= 1/2");
    require(kappa >= 0.0 && kappa <= 0.5, "local_smoothing_check: need 0 <= kappa <= 1/2");
    require(cfg.T <= 1.0, "local_smoothing_check: need T <= 1");
    require(static_cast<int>(rho.axes.size()) == d, "local_smoothing_check: cutoff dimension must equal d");
    const double tp = kappa == 0.0 ? kInf : 1.0 / kappa;
    auto ratio = [=](const GridSpec& g, std::size_t i, std::uint64_t seed) {
        rho.validate(g);
        const Field phi = random_field(g, sample_ensemble(g.N, i, false), seed);
        FieldPath F(g);
        if (i % 2 == 1) F = modulated_source(g, sample_ensemble(g.N, i + 1, false), derive_seed(seed, 7));
        const FieldPath u = free_plus_duhamel(phi, F);
        const double lhs = time_norm(
            over_nodes(u, [&](const Field& f) { return local_sobolev_seminorm(f, kappa - alpha, rho); }), u.times, tp);
        const double rhs = sobolev_norm(phi, -alpha, 2.0) +
                           time_norm(over_nodes(F, [&](const Field& f) { return sobolev_norm(f, -alpha, 2.0); }), F.times, 1.0);
        return lhs / rhs;
    };
    return run_report("local_smoothing", {{"d", d}, {"alpha", alpha}, {"kappa", kappa}}, d, cfg, ratio);
}

double commutator_ratio(const Field& g, const CutoffSpec& rho, double s) {
    const Field r = rho.sample(g.grid);
    const Field a = bessel_multiplier(pointwise_product(r, g), s);
    const Field b = pointwise_product(r, bessel_multiplier(g, s));
    return lp_norm(a - b, 2.0) / sobolev_norm(g, s - 1.0, 2.0);
}

InequalityReport commutator_check(const CutoffSpec& rho, double s, const LabConfig& cfg) {
    require(s > 0.0, "commutator_check: need s > 0");
    const int d = static_cast<int>(rho.axes.size());
    auto ratio = [=](const GridSpec& g, std::size_t i, std::uint64_t seed) {
        rho.validate(g);
        return commutator_ratio(random_field(g, sample_ensemble(g.N, i, true), seed), rho, s);
    };
    return run_report("commutator", {{"d", d}, {"s", s}}, d, cfg, ratio);
}

FrequencyScan commutator_scan(const CutoffSpec& rho, double s, const std::vector<double>& K, const GridSpec& g) {
    require(s > 0.0, "commutator_scan: need s > 0");
    rho.validate(g);
    FrequencyScan scan;
    for (double k : K) {
        lattice_mode(g, k);
        const Field f = Field::from_function(g, [k](const double* x) { return cplx(std::cos(k * x[0]), 0.0); });
        scan.points.push_back({k, commutator_ratio(f, rho, s), 0.0});
    }
    scan.slope = log_slope(scan.points, false);
    return scan;
}

FrequencyScan local_smoothing_scan(const CutoffSpec& rho, double alpha, double kappa, const std::vector<double>& K,
                                   const GridSpec& g) {
    require(alpha >= 0.0 && alpha <= 0.5 && kappa >= 0.0 && kappa <= 0.5,
            "local_smoothing_scan: need 0 <= alpha, kappa <= 1/2");
    rho.validate(g);
    const double tp = kappa == 0.0 ? kInf : 1.0 / kappa;
    const int d = g.d;
    FrequencyScan scan;
    for (double k : K) {
        lattice_mode(g, k);
        const Field phi = Field::from_function(g, [k, d](const double* x) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
            return std::exp(-r2) * std::polar(1.0, k * x[0]);
        });
        const FieldPath u = free_plus_duhamel(phi, FieldPath(g));
        const double lhs = time_norm(
            over_nodes(u, [&](const Field& f) { return local_sobolev_seminorm(f, kappa - alpha, rho); }), u.times, tp);
        const double base = sobolev_norm(phi, -alpha, 2.0);
        scan.points.push_back({k, lhs / base, sobolev_norm(phi, kappa - alpha, 2.0) / base});
    }
    scan.slope = log_slope(scan.points, false);
    scan.reference_slope = log_slope(scan.points, true);
    return scan;
}

}  // namespace fracschro
