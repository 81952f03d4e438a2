#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fracschro/experiments.hpp"

using namespace fracschro;

namespace {

struct Flags {
    std::string config;
    std::optional<int> d, N, M, samples, realizations, max_iters;
    std::optional<double> L, T, t, alpha, beta, phi_norm;
    std::optional<std::string> hurst, levels, which, regime, out, snapshot;
    std::optional<std::uint64_t> seed;
};

void add_flags(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "TOML config file");
    sub->add_option("--d", f.d, "spatial dimension");
    sub->add_option("--hurst", f.hurst, "H0,H1[,H2,H3]");
    sub->add_option("--levels", f.levels, "4..10 or 2,3,4");
    sub->add_option("--seed", f.seed, "master seed");
    sub->add_option("--N", f.N, "grid points per axis");
    sub->add_option("--L", f.L, "box length");
    sub->add_option("--T", f.T, "time horizon");
    sub->add_option("--M", f.M, "time nodes");
    sub->add_option("--t", f.t, "evaluation time (renorm-constant)");
    sub->add_option("--samples", f.samples, "sample count (verify-gamma, inequality-lab)");
    sub->add_option("--realizations", f.realizations, "Monte Carlo realizations");
    sub->add_option("--alpha", f.alpha, "norm exponent; for solve / solution-convergence the rough-regime alpha");
    sub->add_option("--beta", f.beta, "regular-regime beta (solve / solution-convergence)");
    sub->add_option("--regime", f.regime, "regular or rough");
    sub->add_option("--which", f.which, "inequality id (inequality-lab)");
    sub->add_option("--phi-norm", f.phi_norm, "initial datum norm");
    sub->add_option("--max-iters", f.max_iters, "Picard iteration cap");
    sub->add_option("--out", f.out, "output path, - for stdout");
    sub->add_option("--snapshot", f.snapshot, "binary snapshot path");
}

ExperimentConfig build_config(const std::string& name, const Flags& f) {
    ExperimentConfig c;
    if (!f.config.empty()) {
        c = load_config(f.config);
        if (!c.experiment.empty() && c.experiment != name)
            throw ConfigError("config: file is for '" + c.experiment + "', not '" + name + "'");
    }
    c.experiment = name;
    if (f.hurst) {
        c.H = HurstIndex::parse(*f.hurst);
        if (!f.d) c.grid.d = c.H.d();
    }
    if (f.d) c.grid.d = *f.d;
    if (f.levels) c.levels = parse_levels(*f.levels);
    if (f.seed) c.seed = *f.seed;
    if (f.N) c.grid.N = *f.N;
    if (f.L) c.grid.L = *f.L;
    if (f.T) c.grid.T = *f.T;
    if (f.M) c.grid.M = *f.M;
    if (f.t) c.t = *f.t;
    if (f.samples) c.samples = *f.samples;
    if (f.realizations) c.realizations = *f.realizations;
    if (f.which) c.which = *f.which;
    if (f.phi_norm) c.phi_norm = *f.phi_norm;
    if (f.max_iters) c.max_iters = *f.max_iters;
    if (f.out) c.out = *f.out;
    if (f.snapshot) c.snapshot = *f.snapshot;
    const bool solver = name == "solve" || name == "solution-convergence";
    if (f.regime) {
        if (*f.regime == "regular") c.regime = SolverRegime::Regular;
        else if (*f.regime == "rough") c.regime = SolverRegime::Rough;
        else throw ConfigError("--regime must be regular or rough");
    }
    if (f.beta) {
        if (f.regime && c.regime != SolverRegime::Regular) throw ConfigError("--beta needs the regular regime");
        c.regime = SolverRegime::Regular;
        c.exponent = *f.beta;
    }
    if (f.alpha) {
        if (solver) {
            if (f.beta) throw ConfigError("give --alpha or --beta, not both");
            if (f.regime && c.regime != SolverRegime::Rough) throw ConfigError("--alpha needs the rough regime");
            c.regime = SolverRegime::Rough;
            c.exponent = *f.alpha;
        } else {
            c.alpha = *f.alpha;
        }
    }
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fracschro: fractional-noise Schrodinger experiments"};
    app.require_subcommand(1);
    Flags flags;
    for (const auto& name : experiment_names()) add_flags(app.add_subcommand(name, "run " + name), flags);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    ExperimentConfig cfg;
    try {
        cfg = build_config(name, flags);
    } catch (const std::invalid_argument& e) {
        std::cerr << nlohmann::json{{"error", "invalid_config"}, {"reason", e.what()}}.dump() << "\n";
        return 2;
    }
    return run_command(cfg, std::cout, std::cerr);
}
