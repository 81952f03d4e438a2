#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fracschro/grid.hpp"

namespace fracschro {

// Exact rational, kept reduced with a positive denominator.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d = 1);
    Rational operator+(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    bool operator==(const Rational& o) const = default;
    bool operator<(const Rational& o) const;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Lebesgue exponent p in [1, inf], stored through 1/p.
struct Exponent {
    Rational inv;
    static Exponent parse(const std::string& s);   // "inf", "8", "8/3"
    static Exponent of(long long p) { return Exponent{Rational(1, p)}; }
    static Exponent infinity() { return Exponent{Rational(0)}; }
    bool is_inf() const { return inv.num == 0; }
    double value() const;
};

// Empty string when admissible, otherwise the violated condition.
std::string admissibility_violation(int d, const Exponent& p, const Exponent& q);
bool schrodinger_admissible(int d, const Exponent& p, const Exponent& q);

enum class Profile { Flat, Concentrated, PowerLaw };

// Band-limited Gaussian field: lattice modes |m| <= band with weights of the
// profile (concentrated: |m| within band/4 of `centre`; power law: (1+|k|^2)^{-decay/2}).
struct Ensemble {
    Profile profile = Profile::Flat;
    int band = 32;
    int centre = 16;
    double decay = 0.0;
    bool real = false;
};

Field random_field(const GridSpec& g, const Ensemble& e, std::uint64_t seed);

struct InequalityReport {
    std::string id;
    std::vector<std::pair<std::string, double>> params;
    int samples = 0;
    double constant = 0.0;                          // at the base resolution
    std::vector<std::pair<int, double>> trace;      // (N, constant)
    bool refinement_ok() const;                     // constant(2N) <= 2 constant(N)
};

struct LabConfig {
    int N = 256;          // base resolution; each check also runs at 2N
    double L = 40.0;
    double T = 0.5;
    int M = 33;
    int samples = 32;
    std::uint64_t seed = 1;
};

// ||u||_{L^p_T W^{s,q}} / (||phi||_{H^s} + ||F||_{L^1_T H^s}), u = S phi + G(F).
InequalityReport strichartz_check(int d, const Exponent& p, const Exponent& q, double s, const LabConfig& cfg);

struct LeibnizTerms {
    double lhs = 0.0, u_term = 0.0, v_term = 0.0;
};
LeibnizTerms leibniz_terms(const Field& u, const Field& v, double s, double r, double p1, double p2, double q1, double q2);
InequalityReport leibniz_check(double s, double r, double p1, double p2, double q1, double q2, const LabConfig& cfg);

// ||f g||_{W^{-alpha,p}} / (||f||_{W^{-alpha,p1}} ||g||_{W^{beta,p2}}), f rough.
InequalityReport product_check(double alpha, double beta, double p, double p1, double p2, const LabConfig& cfg);

// ||v||_{W^{s,p}} / (||v||^theta_{W^{s1,p1}} ||v||^{1-theta}_{W^{s2,p2}}), theta in (0, 1].
double interpolation_ratio(const Field& v, double s1, double s2, double p1, double p2, double theta);
InequalityReport interpolation_check(double s1, double s2, double p1, double p2, double theta, const LabConfig& cfg);

// ||u||_{L^{1/kappa}_T H^{-alpha+kappa}_rho} / (||phi||_{H^{-alpha}} + ||F||_{L^1_T H^{-alpha}}).
InequalityReport local_smoothing_check(int d, const CutoffSpec& rho, double alpha, double kappa, const LabConfig& cfg);

// ||(1-Delta)^{s/2}(rho g) - rho (1-Delta)^{s/2} g||_{L^2} / ||g||_{H^{s-1}}, real g.
double commutator_ratio(const Field& g, const CutoffSpec& rho, double s);
InequalityReport commutator_check(const CutoffSpec& rho, double s, const LabConfig& cfg);

struct ScanPoint {
    double K = 0.0;
    double ratio = 0.0;         // the inequality's ratio
    double reference = 0.0;     // comparison quantity (local smoothing: global norm ratio)
};

struct FrequencyScan {
    std::vector<ScanPoint> points;
    double slope = 0.0;            // of log ratio against log K
    double reference_slope = 0.0;
};

// g = cos(K x1) on a grid where K is a lattice frequency.
FrequencyScan commutator_scan(const CutoffSpec& rho, double s, const std::vector<double>& K, const GridSpec& g);
// phi = bump e^{i K x1} at the origin, F = 0; reference = ||phi||_{H^{-alpha+kappa}} / ||phi||_{H^{-alpha}}.
FrequencyScan local_smoothing_scan(const CutoffSpec& rho, double alpha, double kappa, const std::vector<double>& K,
                                   const GridSpec& g);

}  // namespace fracschro
