#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fracschro/grid.hpp"
#include "fracschro/lab.hpp"
#include "fracschro/noise.hpp"
#include "fracschro/solver.hpp"

namespace fracschro {

// Rejected configuration; what() names the violated constraint.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    std::string experiment;
    HurstIndex H{0.7, {0.7}};
    GridSpec grid{1, 256, 40.0, 1.0, 17};   // grid.d is the dimension
    std::vector<int> levels{4};
    std::uint64_t seed = 1;

    // study knobs
    double t = 1.0;                     // renorm-constant evaluation time
    int samples = 32;                   // verify-gamma, inequality-lab
    int realizations = 50;              // convergence studies
    double alpha = 0.15;                // norm exponent of the convergence studies
    std::string which = "all";          // inequality-lab

    // solver
    SolverRegime regime = SolverRegime::Regular;
    double exponent = 0.2;              // beta (regular) or alpha (rough)
    int max_iters = 50;
    double contraction_tol = 1e-8;
    double residual_tol = 1e-6;
    double phi_norm = 0.1;              // ||phi|| in H^beta, resp. H^{-2 alpha}
    double phi_width = 1.0;
    double rho_plateau = 2.0, rho_support = 4.0;
    double chi_plateau = 1.0, chi_support = 2.0;

    // output; "-" is stdout
    std::string out = "-";
    std::string snapshot;

    // Canonical form, used for the hash and the manifest.
    nlohmann::json to_json() const;
};

const std::vector<std::string>& experiment_names();

// "4..10" or "2,3,5".
std::vector<int> parse_levels(const std::string& text);

// TOML with [hurst], [grid], [solver], [output] sections; unknown keys are rejected.
ExperimentConfig config_from_toml(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Checks everything the experiment needs (Hurst vector, grid, regime,
// select_parameters) before any compute. Throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Header row, rows, then "# config_hash=<hash>".
std::string format_csv(const Table& t, const std::string& hash);
std::string format_number(double v);   // shortest round-trip form

struct RunOutput {
    Table table;                 // CSV experiments
    nlohmann::json report;       // solve, and a summary for the manifest
    bool is_json = false;        // solve writes JSON instead of CSV
    FieldPath snapshot;
    bool has_snapshot = false;
    int status = 0;              // 0 ok, 1 numerical failure
};

RunOutput run_experiment(const ExperimentConfig& cfg);

// The d = 1 inequality suite: which is "all", a check id, or a scan id.
struct LabSuiteResult {
    std::vector<InequalityReport> reports;
    std::vector<std::pair<std::string, FrequencyScan>> scans;
    bool passed = true;
};
LabSuiteResult run_lab_suite(const std::string& which, int N, int samples, std::uint64_t seed);
const std::vector<std::string>& lab_ids();

// Validates, runs, writes the output (and snapshot, manifest when `out` is a
// file). Returns the exit code: 0, 1 numerical failure, 2 invalid config.
int run_command(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace fracschro
