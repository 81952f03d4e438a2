#include "fracschro/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "toml.hpp"

#include "fracschro/gamma.hpp"
#include "fracschro/linear.hpp"
#include "fracschro/renorm.hpp"
#include "fracschro/snapshot.hpp"

#ifndef FRACSCHRO_VERSION
#define FRACSCHRO_VERSION "unknown"
#endif

namespace fracschro {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void reject(const std::string& what) { throw ConfigError(what); }

std::string num(double v) { return format_number(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }

CutoffSpec rho_of(const ExperimentConfig& c) { return CutoffSpec::isotropic(c.grid.d, c.rho_plateau, c.rho_support); }
CutoffSpec chi_of(const ExperimentConfig& c) { return CutoffSpec::isotropic(c.grid.d, c.chi_plateau, c.chi_support); }

bool consecutive(const std::vector<int>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] != v[i - 1] + 1) return false;
    return true;
}

// Gaussian initial datum scaled to phi_norm in H^s.
Field initial_datum(const ExperimentConfig& c, double s) {
    const double w = c.phi_width;
    const int d = c.grid.d;
    const Field g = Field::from_function(c.grid, [w, d](const double* x) {
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
        return cplx(std::exp(-r2 / (w * w)), 0.0);
    });
    if (c.phi_norm == 0.0) return Field(c.grid);
    return (c.phi_norm / sobolev_norm(g, s, 2.0)) * g;
}

SolverParams solver_params(const ExperimentConfig& c) {
    SolverParams p = select_parameters(c.grid.d, c.regime, c.exponent, c.H);
    p.max_iters = c.max_iters;
    p.contraction_tol = c.contraction_tol;
    p.residual_tol = c.residual_tol;
    return p;
}

double data_regularity(const SolverParams& p) { return p.regime == SolverRegime::Regular ? p.beta : -2.0 * p.alpha; }

ConvergenceConfig convergence_config(const ExperimentConfig& c) {
    ConvergenceConfig cc;
    cc.H = c.H;
    cc.grid = c.grid;
    cc.alpha = c.alpha;
    cc.levels = c.levels;
    cc.realizations = c.realizations;
    cc.seed = c.seed;
    cc.chi = chi_of(c);
    return cc;
}

Table rate_table(const RateReport& r) {
    Table t{{"n", "mean", "stderr", "slope", "slope_stderr", "flagged"}, {}};
    for (const auto& p : r.points)
        t.rows.push_back({num(p.n), num(p.mean), num(p.stderr_), num(r.fit.slope), num(r.slope_stderr),
                          r.flagged ? "1" : "0"});
    return t;
}

json rate_summary(const RateReport& r) {
    return {{"slope", r.fit.slope}, {"slope_stderr", r.slope_stderr}, {"flagged", r.flagged}, {"note", r.note}};
}

RunOutput run_sample_noise(const ExperimentConfig& c) {
    const SpectralCellSet cells = build_cells(c.levels.back(), c.H, c.grid);
    const NoiseRealization w = sample_noise(c.seed);
    RunOutput out;
    out.snapshot = sample_Bn(w, cells);
    out.has_snapshot = true;
    // the sheet vanishes on the axes; probe at x = (L/4, ..., L/4), a grid point
    out.table.header = {"k", "t", "mean", "mean_square", "value_at_probe", "cell_variance_at_probe"};
    const std::vector<double> probe(c.grid.d, 0.25 * c.grid.L);
    const int j = 3 * c.grid.N / 4;
    std::size_t flat = 0;
    for (int a = 0; a < c.grid.d; ++a) flat = flat * static_cast<std::size_t>(c.grid.N) + static_cast<std::size_t>(j);
    for (std::size_t k = 0; k < out.snapshot.nodes(); ++k) {
        const Field& f = out.snapshot.fields[k];
        double m = 0.0, m2 = 0.0;
        for (const auto& v : f.values) {
            m += v.real();
            m2 += v.real() * v.real();
        }
        m /= static_cast<double>(f.values.size());
        m2 /= static_cast<double>(f.values.size());
        const double t = out.snapshot.times[k];
        out.table.rows.push_back({num(k), num(t), num(m), num(m2), num(f.values[flat].real()),
                                  num(Bn_cell_variance(cells, t, probe.data()))});
    }
    out.report = {{"cells", cells.size()}};
    return out;
}

RunOutput run_linear_solution(const ExperimentConfig& c) {
    const int n = c.levels.back();
    const SpectralCellSet cells = build_cells(n, c.H, c.grid);
    RunOutput out;
    out.snapshot = sample_psi(sample_noise(c.seed), cells);
    out.has_snapshot = true;
    const RenormConstant sigma = renorm_constant(c.H, n, out.snapshot.times);
    out.table.header = {"k", "t", "mean_abs2", "sigma", "ratio"};
    for (std::size_t k = 0; k < out.snapshot.nodes(); ++k) {
        double m2 = 0.0;
        for (const auto& v : out.snapshot.fields[k].values) m2 += std::norm(v);
        m2 /= static_cast<double>(out.snapshot.fields[k].values.size());
        const double s = sigma.values[k];
        out.table.rows.push_back({num(k), num(out.snapshot.times[k]), num(m2), num(s), num(s > 0.0 ? m2 / s : kNaN)});
    }
    out.report = {{"cells", cells.size()}, {"sigma_converged", sigma.converged}};
    return out;
}

RunOutput run_renorm_constant(const ExperimentConfig& c) {
    const double kappa = c.grid.d + 1 - 2.0 * c.H.H0 - c.H.sum_space();
    const double CH = angular_constant(c.H);
    RunOutput out;
    out.table.header = {"n", "t", "sigma", "predicted", "ratio"};
    bool converged = true;
    for (int n : c.levels) {
        const QuadResult q = sigma_n_quadrature(c.t, c.H, n);
        converged = converged && q.converged;
        const double pred = kappa >= 0.0 ? CH * predicted_equivalent(kappa, c.t, n) : kNaN;
        out.table.rows.push_back({num(n), num(c.t), num(q.value), num(pred), num(q.value / pred)});
    }
    out.report = {{"kappa_div", kappa}, {"angular_constant", CH}, {"converged", converged}};
    out.status = converged ? 0 : 1;
    return out;
}

RunOutput run_verify_gamma(const ExperimentConfig& c) {
    BoundOptions opt;
    opt.sample_count = c.samples;
    opt.seed = c.seed;
    const BoundReport rep = verify_gamma_bounds(opt);
    RunOutput out;
    out.table.header = {"kind", "s", "t", "xi", "r", "value", "bound", "ratio"};
    for (const auto& s : rep.samples)
        out.table.rows.push_back({"lemma", num(s.s), num(s.t), num(s.xi), num(s.r), num(s.value), num(s.bound_min), num(s.ratio)});
    for (const auto& p : rep.corollary)
        out.table.rows.push_back({"corollary", num(opt.s), num(opt.t), "", num(p.r), num(p.integral), num(p.envelope), num(p.ratio)});
    out.report = {{"lemma_constant", rep.lemma_constant},
                  {"corollary_constant", rep.corollary_constant},
                  {"corollary_trend", rep.corollary_trend}};
    const bool finite = std::isfinite(rep.lemma_constant) && std::isfinite(rep.corollary_constant);
    out.status = finite ? 0 : 1;
    return out;
}

RunOutput run_inequality_lab(const ExperimentConfig& c) {
    const LabSuiteResult res = run_lab_suite(c.which, c.grid.N, c.samples, c.seed);
    RunOutput out;
    out.table.header = {"id", "params", "samples", "N", "K", "constant", "reference", "slope", "pass"};
    for (const auto& r : res.reports) {
        std::string params;
        for (const auto& [k, v] : r.params) params += (params.empty() ? "" : ";") + k + "=" + num(v);
        for (const auto& [N, C] : r.trace)
            out.table.rows.push_back({r.id, params, num(r.samples), num(N), "", num(C), "", "", r.refinement_ok() ? "1" : "0"});
    }
    for (const auto& [id, scan] : res.scans)
        for (const auto& p : scan.points)
            out.table.rows.push_back({id, "", "1", "", num(p.K), num(p.ratio), id.rfind("local", 0) == 0 ? num(p.reference) : "",
                                      num(scan.slope), ""});
    out.report = {{"passed", res.passed}};
    out.status = res.passed ? 0 : 1;
    return out;
}

json solve_json(const SolveReport& r, const SolverParams& p) {
    json j;
    j["regime"] = solver_regime_name(p.regime);
    j["params"] = {{"beta", p.beta}, {"alpha", p.alpha}, {"p", std::isinf(p.p) ? json("inf") : json(p.p)},
                   {"q", p.q},       {"kappa", p.kappa}, {"theta", p.theta}};
    j["iterates"] = r.iterates;
    j["ratios"] = r.ratios;
    j["diffs"] = r.diffs;
    j["residual"] = r.residual;
    j["T_used"] = r.T_used;
    j["halvings"] = r.halvings;
    j["trace"] = r.trace;
    return j;
}

RunOutput run_solve(const ExperimentConfig& c) {
    const SolverParams p = solver_params(c);
    const int n = c.levels.back();
    MildProblem prob;
    prob.grid = c.grid;
    prob.phi = initial_datum(c, data_regularity(p));
    prob.rho = rho_of(c);
    prob.chi = chi_of(c);
    const FieldPath psi = sample_psi(sample_noise(c.seed), build_cells(n, c.H, c.grid));
    RenormConstant sigma;
    if (p.regime == SolverRegime::Rough) sigma = renorm_constant(c.H, n, psi.times);
    set_drivers(prob, psi, p.regime == SolverRegime::Rough ? &sigma : nullptr);
    RunOutput out;
    out.is_json = true;
    try {
        const SolveReport r = picard_solve(prob, p);
        out.report = solve_json(r, p);
        out.report["status"] = "ok";
        out.report["x_norm"] = x_norm(r.v, p, prob.rho);
        out.snapshot = r.u;
        out.has_snapshot = true;
    } catch (const NoContraction& e) {
        out.report = {{"status", "no_contraction"}, {"error", e.what()}, {"trace", e.trace()}};
        out.status = 1;
    }
    return out;
}

RunOutput run_solution_convergence(const ExperimentConfig& c) {
    SmoothConvergenceConfig sc;
    sc.H = c.H;
    sc.grid = c.grid;
    sc.levels = c.levels;
    sc.seed = c.seed;
    sc.params = solver_params(c);
    sc.phi = initial_datum(c, data_regularity(sc.params));
    sc.rho = rho_of(c);
    sc.chi = chi_of(c);
    RunOutput out;
    try {
        const SmoothConvergenceReport r = smooth_convergence_experiment(sc);
        out.table.header = {"n", "diff_norm", "slope", "T0"};
        for (const auto& pt : r.rate.points)
            out.table.rows.push_back({num(pt.n), num(pt.mean), num(r.rate.fit.slope), num(r.T0)});
        out.report = {{"slope", r.rate.fit.slope}, {"T0", r.T0}, {"T_used", r.T_used}, {"iterates", r.iterates}};
    } catch (const NoContraction& e) {
        out.table.header = {"n", "diff_norm", "slope", "T0"};
        out.report = {{"status", "no_contraction"}, {"error", e.what()}, {"trace", e.trace()}};
        out.status = 1;
    }
    return out;
}

// --- TOML ---------------------------------------------------------------

void check_keys(const toml::table& t, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [k, v] : t) {
        (void)v;
        if (!allowed.count(std::string(k.str()))) reject("config: unknown key '" + std::string(k.str()) + "' in " + where);
    }
}

template <class T>
void read_num(const toml::table& t, const char* key, T& dst) {
    const toml::node* n = t.get(key);
    if (!n) return;
    if constexpr (std::is_floating_point_v<T>) {
        if (auto v = n->value<double>()) dst = *v;
        else reject(std::string("config: '") + key + "' must be a number");
    } else {
        auto v = n->value<std::int64_t>();
        if (!v) reject(std::string("config: '") + key + "' must be an integer");
        dst = static_cast<T>(*v);
    }
}

void read_str(const toml::table& t, const char* key, std::string& dst) {
    const toml::node* n = t.get(key);
    if (!n) return;
    auto v = n->value<std::string>();
    if (!v) reject(std::string("config: '") + key + "' must be a string");
    dst = *v;
}

std::vector<double> read_array(const toml::node& n, const std::string& key) {
    const toml::array* a = n.as_array();
    if (!a) reject("config: '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : *a) {
        auto v = e.value<double>();
        if (!v) reject("config: '" + key + "' must hold numbers");
        out.push_back(*v);
    }
    return out;
}

void read_pair(const toml::table& t, const char* key, double& a, double& b) {
    const toml::node* n = t.get(key);
    if (!n) return;
    const auto v = read_array(*n, key);
    if (v.size() != 2) reject(std::string("config: '") + key + "' must be [plateau, support]");
    a = v[0];
    b = v[1];
}

const toml::table* section(const toml::table& root, const char* name) {
    const toml::node* n = root.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) reject(std::string("config: '") + name + "' must be a table");
    return n->as_table();
}

}  // namespace

// --- config ---------------------------------------------------------------

json ExperimentConfig::to_json() const {
    json j;
    j["experiment"] = experiment;
    j["hurst"] = {{"H0", H.H0}, {"H", H.Hs}};
    j["grid"] = {{"d", grid.d}, {"N", grid.N}, {"L", grid.L}, {"T", grid.T}, {"M", grid.M}};
    j["levels"] = levels;
    j["seed"] = seed;
    j["t"] = t;
    j["samples"] = samples;
    j["realizations"] = realizations;
    j["alpha"] = alpha;
    j["which"] = which;
    j["solver"] = {{"regime", solver_regime_name(regime)},
                   {"exponent", exponent},
                   {"max_iters", max_iters},
                   {"contraction_tol", contraction_tol},
                   {"residual_tol", residual_tol},
                   {"phi_norm", phi_norm},
                   {"phi_width", phi_width},
                   {"rho", {rho_plateau, rho_support}},
                   {"chi", {chi_plateau, chi_support}}};
    return j;
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"sample-noise",   "linear-solution", "psi-convergence",
                                                "renorm-constant", "wick-convergence", "verify-gamma",
                                                "inequality-lab",  "solve",            "solution-convergence"};
    return names;
}

std::vector<int> parse_levels(const std::string& text) {
    auto to_int = [&](const std::string& s) {
        int v = 0;
        const char* b = s.data();
        const char* e = b + s.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || p != e) reject("levels: cannot parse '" + text + "' (use 4..10 or 2,3,4)");
        return v;
    };
    std::vector<int> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int a = to_int(text.substr(0, dots)), b = to_int(text.substr(dots + 2));
        if (b < a) reject("levels: empty range '" + text + "'");
        for (int n = a; n <= b; ++n) out.push_back(n);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_int(item));
    if (out.empty()) reject("levels: empty list");
    return out;
}

ExperimentConfig config_from_toml(const std::string& text) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config: TOML parse error at line " << e.source().begin.line << ": " << e.description();
        reject(os.str());
    }
    check_keys(root, "top level",
               {"experiment", "seed", "levels", "t", "samples", "realizations", "alpha", "which", "hurst", "grid",
                "solver", "output"});
    ExperimentConfig c;
    read_str(root, "experiment", c.experiment);
    read_num(root, "seed", c.seed);
    read_num(root, "t", c.t);
    read_num(root, "samples", c.samples);
    read_num(root, "realizations", c.realizations);
    read_num(root, "alpha", c.alpha);
    read_str(root, "which", c.which);
    if (const toml::node* lv = root.get("levels")) {
        if (auto s = lv->value<std::string>()) {
            c.levels = parse_levels(*s);
        } else {
            c.levels.clear();
            for (double v : read_array(*lv, "levels")) {
                if (v != std::floor(v)) reject("config: levels must be integers");
                c.levels.push_back(static_cast<int>(v));
            }
        }
    }
    bool grid_d = false;
    if (const toml::table* h = section(root, "hurst")) {
        check_keys(*h, "[hurst]", {"H0", "H", "values"});
        if (const toml::node* v = h->get("values")) {
            auto s = v->value<std::string>();
            if (!s) reject("config: hurst.values must be a string like \"0.7,0.7\"");
            try {
                c.H = HurstIndex::parse(*s);
            } catch (const std::invalid_argument& e) {
                reject(e.what());
            }
        }
        read_num(*h, "H0", c.H.H0);
        if (const toml::node* v = h->get("H")) c.H.Hs = read_array(*v, "hurst.H");
    }
    if (const toml::table* g = section(root, "grid")) {
        check_keys(*g, "[grid]", {"d", "N", "L", "T", "M"});
        grid_d = g->get("d") != nullptr;
        read_num(*g, "d", c.grid.d);
        read_num(*g, "N", c.grid.N);
        read_num(*g, "L", c.grid.L);
        read_num(*g, "T", c.grid.T);
        read_num(*g, "M", c.grid.M);
    }
    if (!grid_d) c.grid.d = c.H.d();
    if (const toml::table* s = section(root, "solver")) {
        check_keys(*s, "[solver]", {"regime", "beta", "alpha", "max_iters", "contraction_tol", "residual_tol", "phi_norm",
                                    "phi_width", "rho", "chi"});
        std::string regime = solver_regime_name(c.regime);
        read_str(*s, "regime", regime);
        if (regime == "regular") c.regime = SolverRegime::Regular;
        else if (regime == "rough") c.regime = SolverRegime::Rough;
        else reject("config: solver.regime must be \"regular\" or \"rough\"");
        if (s->get("beta") && s->get("alpha")) reject("config: give solver.beta or solver.alpha, not both");
        if (s->get("beta")) {
            read_num(*s, "beta", c.exponent);
            if (c.regime != SolverRegime::Regular) reject("config: solver.beta needs regime = \"regular\"");
        }
        if (s->get("alpha")) {
            read_num(*s, "alpha", c.exponent);
            if (c.regime != SolverRegime::Rough) reject("config: solver.alpha needs regime = \"rough\"");
        }
        read_num(*s, "max_iters", c.max_iters);
        read_num(*s, "contraction_tol", c.contraction_tol);
        read_num(*s, "residual_tol", c.residual_tol);
        read_num(*s, "phi_norm", c.phi_norm);
        read_num(*s, "phi_width", c.phi_width);
        read_pair(*s, "rho", c.rho_plateau, c.rho_support);
        read_pair(*s, "chi", c.chi_plateau, c.chi_support);
    }
    if (const toml::table* o = section(root, "output")) {
        check_keys(*o, "[output]", {"path", "snapshot"});
        read_str(*o, "path", c.out);
        read_str(*o, "snapshot", c.snapshot);
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) reject("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_toml(ss.str());
}

void validate_config(const ExperimentConfig& c) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end())
        reject("config: unknown experiment '" + c.experiment + "'");
    try {
        c.H.validate();
        if (c.H.d() != c.grid.d)
            reject("config: Hurst vector has " + std::to_string(c.H.d()) + " spatial entries but d = " +
                   std::to_string(c.grid.d));
        c.grid.validate();
        if (c.levels.empty()) reject("config: levels must be non-empty");
        for (std::size_t i = 0; i < c.levels.size(); ++i) {
            if (c.levels[i] < 1) reject("config: levels must be >= 1");
            if (i > 0 && c.levels[i] <= c.levels[i - 1]) reject("config: levels must be increasing");
        }
        if (c.seed == 0) reject("config: seed must be non-zero");
        const std::string& e = c.experiment;
        if (e == "sample-noise" || e == "linear-solution" || e == "solve") {
            build_cells(c.levels.back(), c.H, c.grid);
        }
        if (e == "psi-convergence" || e == "wick-convergence") {
            if (c.levels.size() < 4 || !consecutive(c.levels)) reject("config: convergence studies need >= 4 consecutive levels");
            if (c.realizations < 2) reject("config: realizations must be >= 2");
            if (!(c.alpha > 0.0)) reject("config: alpha must be positive");
            chi_of(c).validate(c.grid);
            build_cells(c.levels.back() + 1, c.H, c.grid);
        }
        if (e == "renorm-constant" && !(c.t > 0.0)) reject("config: t must be positive");
        if ((e == "verify-gamma" || e == "inequality-lab") && c.samples < 1) reject("config: samples must be >= 1");
        if (e == "inequality-lab") {
            const auto& ids = lab_ids();
            if (std::find(ids.begin(), ids.end(), c.which) == ids.end()) reject("config: unknown inequality id '" + c.which + "'");
            if (c.grid.N < 64) reject("config: inequality-lab needs N >= 64");
        }
        if (e == "solve" || e == "solution-convergence") {
            solver_params(c);
            const CutoffSpec rho = rho_of(c), chi = chi_of(c);
            rho.validate(c.grid);
            if (!chi.inside_plateau_of(rho)) reject("config: chi must lie inside the plateau of rho");
            if (!(c.phi_width > 0.0) || !(c.phi_norm >= 0.0)) reject("config: need phi_width > 0 and phi_norm >= 0");
            if (c.max_iters < 1) reject("config: max_iters must be >= 1");
            if (c.grid.M < 2) reject("config: solver needs M >= 2");
        }
        if (e == "solution-convergence") {
            if (c.levels.size() < 4 || !consecutive(c.levels)) reject("config: solution-convergence needs >= 4 consecutive levels");
            build_cells(c.levels.back(), c.H, c.grid);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        reject(e.what());
    }
}

std::string config_hash(const ExperimentConfig& c) {
    const std::string s = c.to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

std::string format_csv(const Table& t, const std::string& hash) {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    out += "# config_hash=" + hash + "\n";
    return out;
}

// --- inequality suite ---------------------------------------------------

const std::vector<std::string>& lab_ids() {
    static const std::vector<std::string> ids{"all",           "strichartz",      "leibniz",
                                              "product",       "interpolation",   "local_smoothing",
                                              "commutator",    "commutator_scan", "local_smoothing_scan"};
    return ids;
}

LabSuiteResult run_lab_suite(const std::string& which, int N, int samples, std::uint64_t seed) {
    auto want = [&](const char* id) { return which == "all" || which == id; };
    LabSuiteResult res;
    LabConfig base;
    base.N = N;
    base.samples = samples;
    base.seed = seed;
    base.L = 40.0;
    base.T = 0.25;
    base.M = 65;
    const CutoffSpec rho = CutoffSpec::isotropic(1, 2.0, 4.0);
    if (want("strichartz")) res.reports.push_back(strichartz_check(1, Exponent::of(8), Exponent::of(4), 0.0, base));
    if (want("leibniz")) res.reports.push_back(leibniz_check(0.5, 2.0, 4.0, 4.0, 4.0, 4.0, base));
    if (want("product"))
        res.reports.push_back(product_check(0.1, 0.3, 2.0, std::numeric_limits<double>::infinity(), 2.0, base));
    if (want("interpolation")) {
        res.reports.push_back(interpolation_check(0.0, 1.0, 4.0, 2.0, 0.5, base));
        res.reports.push_back(interpolation_check(0.0, 1.0, 4.0, 2.0, 1.0, base));
    }
    if (want("local_smoothing")) {
        LabConfig c = base;
        c.L = 64.0;
        c.T = 0.5;
        for (double kappa : {0.5, 0.3}) res.reports.push_back(local_smoothing_check(1, rho, 0.1, kappa, c));
    }
    if (want("commutator")) {
        LabConfig c = base;
        c.L = 8.0 * std::numbers::pi;
        for (double s : {0.5, 1.3}) res.reports.push_back(commutator_check(rho, s, c));
    }
    for (const auto& r : res.reports) res.passed = res.passed && r.refinement_ok();
    if (want("commutator_scan")) {
        const GridSpec g{1, 2 * N, 8.0 * std::numbers::pi, 1.0, 2};
        std::vector<double> K;
        for (double k = 2.0; k <= 0.25 * g.N * g.dk() + 1e-9; k *= 2.0) K.push_back(k);
        for (double s : {0.5, 1.3}) {
            FrequencyScan scan = commutator_scan(rho, s, K, g);
            res.passed = res.passed && std::abs(scan.slope) <= 0.1;
            res.scans.emplace_back("commutator_scan_s" + format_number(s), std::move(scan));
        }
    }
    if (want("local_smoothing_scan")) {
        const GridSpec g{1, 2 * N, 64.0, 0.5, 129};
        std::vector<double> K;
        for (int m = 8; m <= g.N / 4; m *= 2) K.push_back(m * g.dk());
        FrequencyScan scan = local_smoothing_scan(rho, 0.0, 0.5, K, g);
        // the local gain shows as a much flatter growth than the global norm ratio
        res.passed = res.passed && scan.slope < 0.5 * scan.reference_slope;
        res.scans.emplace_back("local_smoothing_scan", std::move(scan));
    }
    return res;
}

// --- dispatch -----------------------------------------------------------

RunOutput run_experiment(const ExperimentConfig& c) {
    const std::string& e = c.experiment;
    if (e == "sample-noise") return run_sample_noise(c);
    if (e == "linear-solution") return run_linear_solution(c);
    if (e == "psi-convergence") {
        const RateReport r = convergence_study(convergence_config(c));
        RunOutput out;
        out.table = rate_table(r);
        out.report = rate_summary(r);
        return out;
    }
    if (e == "wick-convergence") {
        const RateReport r = wick_convergence_study(convergence_config(c));
        RunOutput out;
        out.table = rate_table(r);
        out.report = rate_summary(r);
        return out;
    }
    if (e == "renorm-constant") return run_renorm_constant(c);
    if (e == "verify-gamma") return run_verify_gamma(c);
    if (e == "inequality-lab") return run_inequality_lab(c);
    if (e == "solve") return run_solve(c);
    if (e == "solution-convergence") return run_solution_convergence(c);
    reject("config: unknown experiment '" + e + "'");
}

int run_command(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
    try {
        validate_config(c);
    } catch (const std::invalid_argument& e) {
        err << json{{"error", "invalid_config"}, {"reason", e.what()}}.dump() << "\n";
        return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    RunOutput res;
    try {
        res = run_experiment(c);
    } catch (const std::invalid_argument& e) {
        err << json{{"error", "invalid_config"}, {"reason", e.what()}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << json{{"error", "numerical_failure"}, {"reason", e.what()}}.dump() << "\n";
        return 1;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string hash = config_hash(c);

    std::string body;
    if (res.is_json) {
        json j = res.report;
        j["config_hash"] = hash;
        body = j.dump(2) + "\n";
    } else {
        body = format_csv(res.table, hash);
    }
    std::vector<std::string> outputs;
    if (c.out == "-") {
        out << body;
    } else {
        std::ofstream f(c.out, std::ios::binary);
        if (!f) {
            err << json{{"error", "io"}, {"reason", "cannot write '" + c.out + "'"}}.dump() << "\n";
            return 1;
        }
        f << body;
        outputs.push_back(c.out);
    }
    if (!c.snapshot.empty() && res.has_snapshot) {
        write_snapshot(c.snapshot, res.snapshot);
        outputs.push_back(c.snapshot);
    }
    if (c.out != "-") {
        const std::time_t now = std::time(nullptr);
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        json m{{"command", c.experiment}, {"code_version", FRACSCHRO_VERSION}, {"config_hash", hash},
               {"config", c.to_json()},   {"wall_time_s", wall},               {"timestamp", stamp},
               {"outputs", outputs},      {"status", res.status},              {"summary", res.report}};
        if (res.is_json) m.erase("summary");
        std::ofstream(c.out + ".manifest.json") << m.dump(2) << "\n";
    }
    if (res.status != 0) {
        json diag{{"error", "numerical_failure"}, {"command", c.experiment}};
        if (res.report.contains("trace")) diag["trace"] = res.report["trace"];
        if (res.report.contains("error")) diag["reason"] = res.report["error"];
        err << diag.dump() << "\n";
    }
    return res.status;
}

}  // namespace fracschro
