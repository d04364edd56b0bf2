#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stochdom/normal.hpp"
#include "stochdom/simlab.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code{-1};
    std::string output;

    json parsed() const { return json::parse(output); }
};

RunResult run_raw(const std::string& command) {
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
    const int status = pclose(pipe);
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.output = std::move(output);
    return result;
}

RunResult run_cli(const std::string& args) {
    return run_raw(std::string(STOCHDOM_CLI_PATH) + " " + args + " 2>&1");
}

// Same, but with environment assignments ahead of the binary.
RunResult run_cli_env(const std::string& env, const std::string& args) {
    return run_raw("env " + env + " " + std::string(STOCHDOM_CLI_PATH) + " " + args + " 2>&1");
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "stochdom_cli_scratch";
    fs::create_directories(dir);
    return dir;
}

std::string write_csv(const std::string& name, const std::vector<double>& values,
                      bool header = false) {
    const fs::path path = scratch_dir() / name;
    std::ofstream out(path);
    if (header) out << "value\n";
    char buf[64];
    for (double v : values) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
    return path.string();
}

std::string write_text(const std::string& name, const std::string& text) {
    const fs::path path = scratch_dir() / name;
    std::ofstream out(path);
    out << text;
    return path.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::size_t line_count(const std::string& text) {
    std::size_t count = 0;
    for (char c : text) count += c == '\n';
    return count;
}

}  // namespace

TEST_CASE("cli index command", "[cli]") {
    const std::string x = write_csv("x.csv", {0.0, 2.0});
    const std::string y = write_csv("y.csv", {1.0, 1.0}, /*header=*/true);

    SECTION("crossing pair") {
        const RunResult run = run_cli("index " + x + " " + y);
        REQUIRE(run.exit_code == 0);
        const json out = run.parsed();
        REQUIRE(out["schema_version"] == "1");
        REQUIRE(out["command"] == "index");
        REQUIRE(out["inputs"]["n"] == 2);
        REQUIRE(out["inputs"]["m"] == 2);
        REQUIRE(out["results"]["epsilon"].get<double>() == 0.5);
        REQUIRE(out["results"]["violation_integral"].get<double>() == 0.5);
        REQUIRE(out["results"]["w2_squared"].get<double>() == 1.0);
        REQUIRE(out["warnings"].empty());
    }
    SECTION("ordered pair has index zero") {
        const std::string a = write_csv("a.csv", {1.0, 3.0});
        const std::string b = write_csv("b.csv", {2.0, 4.0});
        const RunResult run = run_cli("index " + a + " " + b);
        REQUIRE(run.exit_code == 0);
        REQUIRE(run.parsed()["results"]["epsilon"].get<double>() == 0.0);
    }
    SECTION("identical files") {
        const RunResult run = run_cli("index " + x + " " + x);
        REQUIRE(run.exit_code == 2);
        REQUIRE_THAT(run.output, ContainsSubstring("index undefined"));
    }
    SECTION("non-numeric row names its line") {
        const std::string bad = write_text("bad.csv", "height\n1.5\noops\n2.5\n");
        const RunResult run = run_cli("index " + bad + " " + y);
        REQUIRE(run.exit_code == 2);
        REQUIRE_THAT(run.output, ContainsSubstring("line 3"));
        REQUIRE_THAT(run.output, ContainsSubstring("oops"));
    }
    SECTION("missing file") {
        const RunResult run = run_cli("index " + x + " /no/such/file.csv");
        REQUIRE(run.exit_code == 2);
        REQUIRE_THAT(run.output, ContainsSubstring("cannot open"));
    }
}

TEST_CASE("cli test command", "[cli]") {
    // Widely separated samples: the index is essentially zero, so the
    // near-dominance claim is certified with a tiny upper bound.
    const stochdom::Sample xs =
        stochdom::normal_sampler(stochdom::NormalParams(0.0, 1.0), 2000, {401, 0, 0});
    const stochdom::Sample ys =
        stochdom::normal_sampler(stochdom::NormalParams(3.0, 1.0), 2000, {401, 0, 1});
    const std::string x = write_csv("tx.csv", xs.values());
    const std::string y = write_csv("ty.csv", ys.values());

    SECTION("documented defaults and a certified rejection") {
        const RunResult run = run_cli("test " + x + " " + y);
        REQUIRE(run.exit_code == 0);
        const json out = run.parsed();
        REQUIRE(out["inputs"]["epsilon0"].get<double>() == 0.05);
        REQUIRE(out["inputs"]["alpha"].get<double>() == 0.05);
        REQUIRE(out["inputs"]["method"] == "bootstrap");
        REQUIRE(out["inputs"]["bootstrap_B"] == 500);
        REQUIRE(out["inputs"]["seed"] == 0);
        REQUIRE(out["results"]["reject"].get<bool>());
        REQUIRE(out["results"]["upper_bound"].get<double>() < 0.01);
        REQUIRE(out["results"]["n"] == 2000);
        REQUIRE(out["results"]["method"] == "bootstrap");
    }
    SECTION("seeded runs emit identical bytes") {
        const std::string args = "test " + x + " " + y + " --bootstrap-B 150 --seed 7";
        const RunResult first = run_cli(args);
        const RunResult second = run_cli(args);
        REQUIRE(first.exit_code == 0);
        REQUIRE(first.output == second.output);
    }
    SECTION("plug-in method and json round trip") {
        const RunResult run = run_cli("test " + x + " " + y + " --method plug-in");
        REQUIRE(run.exit_code == 0);
        const json out = run.parsed();
        REQUIRE(out["results"]["method"] == "plug_in");
        // Re-serialize and re-parse: numeric fields must survive exactly.
        const json again = json::parse(out.dump());
        REQUIRE(again["results"]["sigma_hat"].get<double>() ==
                out["results"]["sigma_hat"].get<double>());
        REQUIRE(again["results"]["statistic"].get<double>() ==
                out["results"]["statistic"].get<double>());
        const double stat = out["results"]["statistic"].get<double>();
        const double sigma = out["results"]["sigma_hat"].get<double>();
        const double alpha = out["results"]["alpha"].get<double>();
        REQUIRE(out["results"]["reject"].get<bool>() ==
                (stat < sigma * stochdom::normal_quantile(alpha)));
    }
    SECTION("invalid flag values") {
        REQUIRE(run_cli("test " + x + " " + y + " --method jackknife").exit_code == 2);
        REQUIRE(run_cli("test " + x + " " + y + " --alpha now").exit_code == 2);
        REQUIRE(run_cli("test " + x + " " + y + " --alpha 1.5").exit_code == 2);
    }
}

TEST_CASE("cli seed environment variable", "[cli]") {
    const stochdom::Sample xs =
        stochdom::normal_sampler(stochdom::NormalParams(0.0, 1.0), 200, {402, 0, 0});
    const stochdom::Sample ys =
        stochdom::normal_sampler(stochdom::NormalParams(0.3, 1.2), 200, {402, 0, 1});
    const std::string x = write_csv("ex.csv", xs.values());
    const std::string y = write_csv("ey.csv", ys.values());
    const std::string tail = "test " + x + " " + y + " --bootstrap-B 120";

    const RunResult flagged = run_cli(tail + " --seed 9");
    const RunResult from_env = run_cli_env("STOCHDOM_SEED=9", tail);
    REQUIRE(flagged.exit_code == 0);
    REQUIRE(from_env.exit_code == 0);
    const json a = flagged.parsed();
    const json b = from_env.parsed();
    REQUIRE(a["inputs"]["seed"] == 9);
    REQUIRE(b["inputs"]["seed"] == 9);
    REQUIRE(a["results"] == b["results"]);
    REQUIRE_THAT(b["warnings"].dump(), ContainsSubstring("STOCHDOM_SEED"));
    REQUIRE(a["warnings"].empty());

    // The flag wins over the environment.
    const RunResult both = run_cli_env("STOCHDOM_SEED=123", tail + " --seed 9");
    REQUIRE(json::parse(both.output)["inputs"]["seed"] == 9);

    const RunResult bad_env = run_cli_env("STOCHDOM_SEED=abc", tail);
    REQUIRE(bad_env.exit_code == 2);
}

TEST_CASE("cli trim command", "[cli]") {
    const std::string x = write_csv("trx.csv", {0.0, 2.0});
    const std::string y = write_csv("try.csv", {1.0, 1.0});

    SECTION("fixed trim level") {
        const RunResult run = run_cli("trim " + x + " " + y + " --pi 0.25");
        REQUIRE(run.exit_code == 0);
        const json out = run.parsed();
        REQUIRE_THAT(out["results"]["distance"].get<double>(),
                     WithinAbs(std::sqrt(1.0 / 6.0), 1e-12));
        const json& pair = out["results"]["optimal_pair"];
        REQUIRE(pair["lower"]["breakpoints"].size() == pair["lower"]["values"].size());
        REQUIRE(pair["upper"]["breakpoints"].size() == pair["upper"]["values"].size());
        REQUIRE(pair["lower"]["breakpoints"].back().get<double>() == 1.0);
        REQUIRE(pair["upper"]["breakpoints"].back().get<double>() == 1.0);
    }
    SECTION("solve for the minimal trim") {
        const RunResult run = run_cli("trim " + x + " " + y + " --solve");
        REQUIRE(run.exit_code == 0);
        const json out = run.parsed();
        REQUIRE_THAT(out["results"]["pi"].get<double>(), WithinAbs(0.5, 1e-6));
        REQUIRE_FALSE(out["results"]["no_finite_trim"].get<bool>());
    }
    SECTION("zero trim on ordered data") {
        const std::string a = write_csv("tra.csv", {1.0, 3.0});
        const std::string b = write_csv("trb.csv", {2.0, 4.0});
        const RunResult run = run_cli("trim " + a + " " + b + " --pi 0");
        REQUIRE(run.exit_code == 0);
        REQUIRE(run.parsed()["results"]["distance"].get<double>() == 0.0);
    }
    SECTION("reversed order never reaches zero") {
        const std::string a = write_csv("trg.csv", {10.0, 20.0});
        const std::string b = write_csv("trh.csv", {0.0, 1.0});
        const RunResult run = run_cli("trim " + a + " " + b + " --solve");
        REQUIRE(run.exit_code == 0);
        REQUIRE(run.parsed()["results"]["no_finite_trim"].get<bool>());
    }
    SECTION("flag conflicts and omissions") {
        REQUIRE(run_cli("trim " + x + " " + y + " --pi 0.1 --solve").exit_code == 2);
        REQUIRE(run_cli("trim " + x + " " + y).exit_code == 2);
        REQUIRE(run_cli("trim " + x + " " + y + " --pi 1.0").exit_code == 2);
    }
}

TEST_CASE("cli contour command", "[cli]") {
    const std::string out_path = (scratch_dir() / "contour.csv").string();
    const RunResult run = run_cli("contour --resolution 50 --out " + out_path);
    REQUIRE(run.exit_code == 0);
    const json out = run.parsed();
    REQUIRE(out["results"]["rows"] == 2500);
    REQUIRE(out["inputs"]["mu_min"].get<double>() == 0.0);
    REQUIRE(out["inputs"]["sigma_max"].get<double>() == 2.5);
    const std::string csv = read_file(out_path);
    REQUIRE(line_count(csv) == 2501);  // header + 50x50 grid
    REQUIRE(csv.rfind("mu,sigma,epsilon\n", 0) == 0);

    REQUIRE(run_cli("contour --out /no/such/dir/c.csv").exit_code == 2);
    REQUIRE(run_cli("contour --resolution 0 --out " + out_path).exit_code == 2);
}

TEST_CASE("cli simulate and coverage commands", "[cli]") {
    const std::string config = write_text("study.cfg",
                                          "g_mu = 0.455\n"
                                          "g_sigma = 1.5\n"
                                          "n = 60\n"
                                          "m = 60\n"
                                          "replications = 20\n"
                                          "bootstrap_B = 40\n"
                                          "master_seed = 5\n");
    const std::string csv_a = (scratch_dir() / "sim_a.csv").string();
    const std::string csv_b = (scratch_dir() / "sim_b.csv").string();

    SECTION("simulate writes the artifact deterministically") {
        const RunResult first = run_cli("simulate " + config + " --out " + csv_a);
        const RunResult second = run_cli("simulate " + config + " --out " + csv_b);
        REQUIRE(first.exit_code == 0);
        REQUIRE(second.exit_code == 0);
        REQUIRE(read_file(csv_a) == read_file(csv_b));
        const json out = first.parsed();
        REQUIRE(out["results"]["replications"] == 20);
        REQUIRE(out["results"]["failures"] == 0);
        REQUIRE(out["results"]["rate"].get<double>() >= 0.0);
        REQUIRE(out["results"]["rate"].get<double>() <= 1.0);
        REQUIRE(out["results"]["config"]["master_seed"] == 5);
        REQUIRE(out["results"]["csv_path"] == csv_a);
        // The CSV rate column round-trips to the JSON value.
        const std::string csv = read_file(csv_a);
        const auto header_end = csv.find('\n');
        std::istringstream row(csv.substr(header_end + 1));
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() == 16);
        REQUIRE(std::stod(fields[13]) == out["results"]["rate"].get<double>());
    }
    SECTION("seed flag overrides the config seed with a warning") {
        const RunResult run = run_cli("simulate " + config + " --out " + csv_a + " --seed 6");
        REQUIRE(run.exit_code == 0);
        const json out = run.parsed();
        REQUIRE(out["results"]["config"]["master_seed"] == 6);
        REQUIRE_THAT(out["warnings"].dump(), ContainsSubstring("overridden"));
    }
    SECTION("coverage study") {
        const RunResult run = run_cli("coverage " + config + " --out " + csv_a);
        REQUIRE(run.exit_code == 0);
        const json out = run.parsed();
        REQUIRE(out["command"] == "coverage");
        REQUIRE(out["results"]["rate"].get<double>() >= 0.0);
        REQUIRE(out["results"]["rate"].get<double>() <= 1.0);
    }
    SECTION("config errors") {
        const std::string bad = write_text("bad.cfg", "g_mu = 1\nwidgets = 7\n");
        const RunResult run = run_cli("simulate " + bad + " --out " + csv_a);
        REQUIRE(run.exit_code == 2);
        REQUIRE_THAT(run.output, ContainsSubstring("widgets"));
        REQUIRE(run_cli("simulate " + config).exit_code == 2);  // --out required
        REQUIRE(run_cli("simulate " + config + " --out /no/dir/s.csv").exit_code == 2);
    }
}

TEST_CASE("cli usage errors", "[cli]") {
    REQUIRE(run_cli("").exit_code == 2);
    REQUIRE(run_cli("frobnicate").exit_code == 2);
    const RunResult help = run_cli("--help");
    REQUIRE(help.exit_code == 0);
    REQUIRE_THAT(help.output, ContainsSubstring("index"));
    REQUIRE_THAT(help.output, ContainsSubstring("coverage"));
}
