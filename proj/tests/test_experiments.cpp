#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracschro/experiments.hpp"

using namespace fracschro;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    const fs::path d = fs::temp_directory_path() / ("fracschro_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

// Runs the CLI, returns its exit code; stderr goes to err_file.
int cli(const std::string& args, const fs::path& err_file, const std::string& env = "") {
    const char* bin = std::getenv("FRACSCHRO_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "FRACSCHRO_BIN not set");
    const std::string cmd = env + " '" + std::string(bin) + "' " + args + " > /dev/null 2> '" + err_file.string() + "'";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

const char* kSolveToml = R"(
experiment = "solve"
seed = 7
levels = [3]

[hurst]
H0 = 0.9
H = [0.9]

[grid]
N = 256
L = 24.0
T = 0.5
M = 17

[solver]
regime = "regular"
beta = 0.2
phi_norm = 0.1
)";

}  // namespace

TEST_CASE("levels parsing") {
    CHECK(parse_levels("4..7") == std::vector<int>{4, 5, 6, 7});
    CHECK(parse_levels("2,3,5") == std::vector<int>{2, 3, 5});
    CHECK(parse_levels("6") == std::vector<int>{6});
    CHECK_THROWS_AS(parse_levels("7..4"), ConfigError);
    CHECK_THROWS_AS(parse_levels("a..4"), ConfigError);
    CHECK_THROWS_AS(parse_levels("2,x"), ConfigError);
}

TEST_CASE("TOML config: sections, overrides, rejections") {
    const ExperimentConfig c = config_from_toml(kSolveToml);
    CHECK(c.experiment == "solve");
    CHECK(c.seed == 7);
    CHECK(c.levels == std::vector<int>{3});
    CHECK(c.H.H0 == 0.9);
    CHECK(c.H.Hs == std::vector<double>{0.9});
    CHECK(c.grid.d == 1);
    CHECK(c.grid.L == 24.0);
    CHECK(c.grid.M == 17);
    CHECK(c.regime == SolverRegime::Regular);
    CHECK(c.exponent == 0.2);
    CHECK_NOTHROW(validate_config(c));

    const ExperimentConfig v = config_from_toml("levels = \"4..6\"\n[hurst]\nvalues = \"0.6,0.7,0.8\"\n");
    CHECK(v.grid.d == 2);
    CHECK(v.levels == std::vector<int>{4, 5, 6});

    CHECK_THROWS_WITH_AS(config_from_toml("bogus = 1\n"), doctest::Contains("bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(config_from_toml("[grid]\nNN = 4\n"), doctest::Contains("NN"), ConfigError);
    CHECK_THROWS_AS(config_from_toml("[grid]\nN = \"many\"\n"), ConfigError);
    CHECK_THROWS_AS(config_from_toml("[solver]\nregime = \"rough\"\nbeta = 0.2\n"), ConfigError);
    CHECK_THROWS_AS(config_from_toml("[solver]\nregime = \"wild\"\n"), ConfigError);
    CHECK_THROWS_WITH_AS(config_from_toml("seed = \n"), doctest::Contains("line 1"), ConfigError);
}

TEST_CASE("validation names the violated constraint") {
    ExperimentConfig c;
    c.experiment = "renorm-constant";
    CHECK_NOTHROW(validate_config(c));
    c.H = HurstIndex{1.2, {0.5}};
    CHECK_THROWS_WITH_AS(validate_config(c), doctest::Contains("H₀∈(0,1)"), ConfigError);

    c = ExperimentConfig{};
    c.experiment = "solve";
    c.regime = SolverRegime::Rough;
    c.exponent = 0.2;
    CHECK_THROWS_WITH_AS(validate_config(c), doctest::Contains("alpha_d"), ConfigError);
    c.H = HurstIndex{0.7, {0.55}};   // alpha must exceed 2 - 1.95 = 0.05
    c.exponent = 0.08;
    CHECK_NOTHROW(validate_config(c));
    c.exponent = 0.04;
    CHECK_THROWS_AS(validate_config(c), ConfigError);

    c = ExperimentConfig{};
    c.experiment = "linear-solution";
    c.grid.d = 2;
    CHECK_THROWS_WITH_AS(validate_config(c), doctest::Contains("spatial entries"), ConfigError);

    c = ExperimentConfig{};
    c.experiment = "inequality-lab";
    c.which = "hoelder";
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c.experiment = "nope";
    CHECK_THROWS_AS(validate_config(c), ConfigError);
}

TEST_CASE("config hash and CSV format") {
    ExperimentConfig a;
    a.experiment = "verify-gamma";
    ExperimentConfig b = a;
    b.out = "elsewhere.csv";
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.seed = 2;
    CHECK(config_hash(a) != config_hash(b));

    Table t{{"x", "y"}, {{"1", "2"}, {"3", "4"}}};
    CHECK(format_csv(t, "abc") == "x,y\n1,2\n3,4\n# config_hash=abc\n");
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 12867.927577123133}) CHECK(std::stod(format_number(v)) == v);
    CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("run_command: CSV, solve JSON, exit codes") {
    ExperimentConfig c;
    c.experiment = "renorm-constant";
    c.H = HurstIndex{0.5, {0.5}};
    c.grid.d = 1;
    c.levels = {4, 5};
    std::ostringstream out, err;
    CHECK(run_command(c, out, err) == 0);
    const std::string csv = out.str();
    CHECK(csv.rfind("n,t,sigma,predicted,ratio\n", 0) == 0);
    CHECK(csv.find("# config_hash=" + config_hash(c)) != std::string::npos);

    std::ostringstream o2, e2;
    c.H = HurstIndex{1.2, {0.5}};
    CHECK(run_command(c, o2, e2) == 2);
    CHECK(e2.str().find("H₀∈(0,1)") != std::string::npos);
    CHECK(e2.str().find("invalid_config") != std::string::npos);

    const fs::path dir = scratch_dir();
    ExperimentConfig s = config_from_toml(kSolveToml);
    s.out = (dir / "solve.json").string();
    s.snapshot = (dir / "u.frsc").string();
    std::ostringstream o3, e3;
    CHECK(run_command(s, o3, e3) == 0);
    const auto j = nlohmann::json::parse(slurp(s.out));
    CHECK(j["status"] == "ok");
    CHECK(j["residual"].get<double>() < 1e-6);
    CHECK(fs::exists(s.snapshot));
    const auto m = nlohmann::json::parse(slurp(s.out + ".manifest.json"));
    CHECK(m["config_hash"] == config_hash(s));
    CHECK(m.contains("code_version"));
    CHECK(m.contains("wall_time_s"));

    s.phi_norm = 50.0;
    std::ostringstream o4, e4;
    CHECK(run_command(s, o4, e4) == 1);
    CHECK(e4.str().find("trace") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("CLI exit codes and bit-identical reruns") {
    const fs::path dir = scratch_dir();
    const fs::path err = dir / "err.txt";

    CHECK(cli("renorm-constant --hurst 1.2,0.5", err) == 2);
    CHECK(slurp(err).find("H₀∈(0,1)") != std::string::npos);
    CHECK(cli("renorm-constant --levels 7..2", err) == 2);
    CHECK(cli("no-such-command", err) == 2);

    const std::string vg = "verify-gamma --samples 200 --seed 11 --out ";
    CHECK(cli(vg + "'" + (dir / "a.csv").string() + "'", err) == 0);
    CHECK(cli(vg + "'" + (dir / "b.csv").string() + "'", err, "FRACSCHRO_THREADS=1") == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(fs::exists(dir / "a.csv.manifest.json"));

    const std::string sn = "sample-noise --levels 3 --seed 4 --M 5 ";
    CHECK(cli(sn + "--out '" + (dir / "n1.csv").string() + "' --snapshot '" + (dir / "n1.frsc").string() + "'", err) == 0);
    CHECK(cli(sn + "--out '" + (dir / "n2.csv").string() + "' --snapshot '" + (dir / "n2.frsc").string() + "'", err) == 0);
    CHECK(slurp(dir / "n1.csv") == slurp(dir / "n2.csv"));
    CHECK(slurp(dir / "n1.frsc") == slurp(dir / "n2.frsc"));

    std::ofstream(dir / "solve.toml") << kSolveToml;
    const std::string so = "solve --config '" + (dir / "solve.toml").string() + "' --out ";
    CHECK(cli(so + "'" + (dir / "s1.json").string() + "'", err) == 0);
    CHECK(cli(so + "'" + (dir / "s2.json").string() + "'", err) == 0);
    CHECK(slurp(dir / "s1.json") == slurp(dir / "s2.json"));
    CHECK(cli(so + "'" + (dir / "s3.json").string() + "' --phi-norm 50", err) == 1);
    CHECK(slurp(err).find("no contraction") != std::string::npos);
    CHECK(cli(so + "'" + (dir / "s4.json").string() + "' --alpha 0.2", err) == 2);
    fs::remove_all(dir);
}
