#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stochdom/stochdom.hpp"

namespace {

using nlohmann::json;

constexpr const char* kSchemaVersion = "1";
constexpr const char* kSeedEnvVar = "STOCHDOM_SEED";

json make_envelope(const std::string& command) {
    json out;
    out["schema_version"] = kSchemaVersion;
    out["command"] = command;
    out["inputs"] = json::object();
    out["results"] = json::object();
    out["warnings"] = json::array();
    return out;
}

void emit(const json& envelope) { std::cout << envelope.dump(2) << "\n"; }

// First CSV column; a non-numeric first row is treated as a header.
std::vector<double> read_csv_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view field = line;
        if (!field.empty() && field.back() == '\r') field.remove_suffix(1);
        if (const auto comma = field.find(','); comma != std::string_view::npos) {
            field = field.substr(0, comma);
        }
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
            field.remove_prefix(1);
        }
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) {
            field.remove_suffix(1);
        }
        if (field.empty()) continue;
        double value = 0.0;
        const auto* end = field.data() + field.size();
        auto [ptr, ec] = std::from_chars(field.data(), end, value);
        if (ec != std::errc{} || ptr != end) {
            if (line_no == 1) continue;  // header row
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": not a number: '" + std::string(field) + "'");
        }
        values.push_back(value);
    }
    if (values.empty()) throw std::runtime_error(path + ": no numeric rows");
    return values;
}

stochdom::Sample read_sample(const std::string& path) {
    return stochdom::Sample(read_csv_column(path));
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw std::runtime_error(path + ": write failed");
}

// Seed priority: --seed flag, then the environment override, then zero.
std::uint64_t resolve_seed(const CLI::Option* seed_option, std::uint64_t flag_value,
                           std::optional<std::uint64_t> fallback, json& warnings) {
    if (seed_option->count() > 0) return flag_value;
    if (const char* env = std::getenv(kSeedEnvVar)) {
        const std::string_view text(env);
        std::uint64_t value = 0;
        const auto* end = text.data() + text.size();
        auto [ptr, ec] = std::from_chars(text.data(), end, value);
        if (ec != std::errc{} || ptr != end) {
            throw std::runtime_error(std::string(kSeedEnvVar) + ": not an unsigned integer: '" +
                                     std::string(text) + "'");
        }
        warnings.push_back(std::string("seed taken from ") + kSeedEnvVar);
        return value;
    }
    return fallback.value_or(0);
}

json quantile_to_json(const stochdom::StepQuantile& q) {
    json breakpoints = json::array();
    json values = json::array();
    for (std::size_t i = 0; i < q.piece_count(); ++i) {
        breakpoints.push_back(q.upper_as_double(i));
        values.push_back(q.piece_value(i));
    }
    return json{{"breakpoints", breakpoints}, {"values", values}};
}

json index_to_json(const stochdom::IndexReport& report) {
    return json{{"epsilon", report.epsilon},
                {"violation_integral", report.violation_integral},
                {"w2_squared", report.w2_squared},
                {"n", report.n},
                {"m", report.m}};
}

json test_to_json(const stochdom::TestResult& result) {
    return json{{"epsilon_hat", result.epsilon_hat},
                {"epsilon_0", result.epsilon_0},
                {"statistic", result.statistic},
                {"sigma_hat", result.sigma_hat},
                {"alpha", result.alpha},
                {"p_value", result.p_value},
                {"upper_bound", result.upper_bound},
                {"reject", result.reject},
                {"degenerate", result.degenerate},
                {"n", result.n},
                {"m", result.m},
                {"method", stochdom::variance_method_name(result.method)}};
}

json sim_config_to_json(const stochdom::SimConfig& config) {
    return json{{"f_mu", config.model_f.mu},
                {"f_sigma", config.model_f.sigma},
                {"g_mu", config.model_g.mu},
                {"g_sigma", config.model_g.sigma},
                {"n", config.n},
                {"m", config.m},
                {"epsilon0", config.epsilon_0},
                {"alpha", config.alpha},
                {"replications", config.replications},
                {"variance_method", stochdom::variance_method_name(config.variance_method)},
                {"bootstrap_B", config.bootstrap_b},
                {"mode", stochdom::sim_mode_name(config.mode)},
                {"master_seed", config.master_seed}};
}

json sim_report_to_json(const stochdom::SimReport& report) {
    return json{{"rate", report.rate},
                {"replications", report.replications},
                {"binomial_se", report.binomial_se},
                {"failures", report.failures},
                {"config", sim_config_to_json(report.config)}};
}

stochdom::SimConfig load_sim_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open file");
    return stochdom::parse_sim_config(in);
}

struct SimCommandState {
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
    CLI::Option* seed_option = nullptr;
};

// simulate and coverage differ only in the study they run.
void attach_sim_command(CLI::App& sub, SimCommandState& state) {
    sub.add_option("config", state.config_path, "key = value study configuration file")
        ->required();
    sub.add_option("--out", state.out_path, "path for the CSV artifact")->required();
    state.seed_option =
        sub.add_option("--seed", state.seed, "override the config file's master_seed");
}

int run_sim_command(const char* name, const SimCommandState& state, bool coverage) {
    json envelope = make_envelope(name);
    stochdom::SimConfig config = load_sim_config(state.config_path);
    const std::uint64_t seed = resolve_seed(state.seed_option, state.seed, config.master_seed,
                                            envelope["warnings"]);
    if (seed != config.master_seed) {
        envelope["warnings"].push_back("master_seed overridden to " + std::to_string(seed));
        config.master_seed = seed;
    }
    envelope["inputs"] = {{"config", state.config_path},
                          {"out", state.out_path},
                          {"resolved_config", sim_config_to_json(config)}};
    const stochdom::SimReport report =
        coverage ? stochdom::run_coverage_study(config) : stochdom::run_rejection_study(config);
    std::ofstream out = open_output(state.out_path);
    stochdom::write_sim_csv(out, report);
    finish_output(out, state.out_path);
    envelope["results"] = sim_report_to_json(report);
    envelope["results"]["csv_path"] = state.out_path;
    emit(envelope);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Almost-stochastic-order analysis of samples and normal models"};
    app.require_subcommand(1);

    // index
    auto* index_cmd = app.add_subcommand("index", "order-violation index of two samples");
    std::string index_x, index_y;
    index_cmd->add_option("x", index_x, "CSV file with the first sample")->required();
    index_cmd->add_option("y", index_y, "CSV file with the second sample")->required();

    // test
    auto* test_cmd =
        app.add_subcommand("test", "test near-dominance: reject when the index is below epsilon0");
    std::string test_x, test_y;
    double epsilon0 = 0.05;
    double alpha = 0.05;
    std::string method = "bootstrap";
    std::size_t bootstrap_b = 500;
    std::uint64_t test_seed = 0;
    test_cmd->add_option("x", test_x, "CSV file with the first sample")->required();
    test_cmd->add_option("y", test_y, "CSV file with the second sample")->required();
    test_cmd->add_option("--epsilon0", epsilon0, "largest acceptable index")
        ->capture_default_str();
    test_cmd->add_option("--alpha", alpha, "test level")->capture_default_str();
    test_cmd->add_option("--method", method, "variance estimator")
        ->check(CLI::IsMember({"bootstrap", "plug_in", "plug-in"}))
        ->capture_default_str();
    test_cmd->add_option("--bootstrap-B", bootstrap_b, "bootstrap replicates")
        ->capture_default_str();
    auto* test_seed_opt = test_cmd->add_option("--seed", test_seed, "bootstrap seed");

    // trim
    auto* trim_cmd =
        app.add_subcommand("trim", "trimmed distance to stochastic order, or the minimal trim");
    std::string trim_x, trim_y;
    double pi = 0.0;
    bool solve = false;
    trim_cmd->add_option("x", trim_x, "CSV file with the first sample")->required();
    trim_cmd->add_option("y", trim_y, "CSV file with the second sample")->required();
    auto* pi_opt = trim_cmd->add_option("--pi", pi, "trim level in [0, 1)");
    auto* solve_opt =
        trim_cmd->add_flag("--solve", solve, "find the smallest trim that restores order");
    pi_opt->excludes(solve_opt);
    solve_opt->excludes(pi_opt);

    // contour
    auto* contour_cmd =
        app.add_subcommand("contour", "index of N(0,1) against a grid of normal models");
    double mu_min = 0.0, mu_max = 1.5, sigma_min = 0.5, sigma_max = 2.5;
    int resolution = 50;
    std::string contour_out;
    contour_cmd->add_option("--mu-min", mu_min, "")->capture_default_str();
    contour_cmd->add_option("--mu-max", mu_max, "")->capture_default_str();
    contour_cmd->add_option("--sigma-min", sigma_min, "")->capture_default_str();
    contour_cmd->add_option("--sigma-max", sigma_max, "")->capture_default_str();
    contour_cmd->add_option("--resolution", resolution, "grid points per axis")
        ->capture_default_str();
    contour_cmd->add_option("--out", contour_out, "path for the CSV artifact")->required();

    // simulate | coverage
    auto* simulate_cmd =
        app.add_subcommand("simulate", "Monte Carlo rejection-rate study from a config file");
    SimCommandState simulate_state;
    attach_sim_command(*simulate_cmd, simulate_state);
    auto* coverage_cmd =
        app.add_subcommand("coverage", "Monte Carlo confidence-bound coverage study");
    SimCommandState coverage_state;
    attach_sim_command(*coverage_cmd, coverage_state);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*index_cmd) {
            json envelope = make_envelope("index");
            const stochdom::Sample x = read_sample(index_x);
            const stochdom::Sample y = read_sample(index_y);
            envelope["inputs"] = {
                {"x", index_x}, {"y", index_y}, {"n", x.size()}, {"m", y.size()}};
            envelope["results"] = index_to_json(stochdom::epsilon_index(x, y));
            emit(envelope);
        } else if (*test_cmd) {
            json envelope = make_envelope("test");
            const std::uint64_t seed =
                resolve_seed(test_seed_opt, test_seed, std::nullopt, envelope["warnings"]);
            const stochdom::Sample x = read_sample(test_x);
            const stochdom::Sample y = read_sample(test_y);
            const stochdom::VarianceMethod variance_method =
                stochdom::parse_variance_method(method);
            envelope["inputs"] = {{"x", test_x},
                                  {"y", test_y},
                                  {"n", x.size()},
                                  {"m", y.size()},
                                  {"epsilon0", epsilon0},
                                  {"alpha", alpha},
                                  {"method", stochdom::variance_method_name(variance_method)},
                                  {"bootstrap_B", bootstrap_b},
                                  {"seed", seed}};
            envelope["results"] = test_to_json(stochdom::test_almost_dominance(
                x, y, epsilon0, alpha, variance_method, seed, bootstrap_b));
            emit(envelope);
        } else if (*trim_cmd) {
            if (pi_opt->count() == 0 && !solve) {
                std::cerr << "error: trim needs either --pi or --solve\n";
                return 2;
            }
            json envelope = make_envelope("trim");
            const stochdom::Sample x = read_sample(trim_x);
            const stochdom::Sample y = read_sample(trim_y);
            const stochdom::StepQuantile qx = stochdom::empirical_quantile(x);
            const stochdom::StepQuantile qy = stochdom::empirical_quantile(y);
            envelope["inputs"] = {
                {"x", trim_x}, {"y", trim_y}, {"n", x.size()}, {"m", y.size()}};
            if (solve) {
                envelope["inputs"]["solve"] = true;
                const stochdom::MinimalTrimResult solved =
                    stochdom::minimal_trim_for_order(qx, qy);
                envelope["results"] = {{"pi", solved.pi.value()},
                                       {"no_finite_trim", solved.no_finite_trim},
                                       {"tolerance", 1e-6}};
            } else {
                envelope["inputs"]["pi"] = pi;
                const stochdom::TrimLevel level(pi);
                const stochdom::OptimalOrderedPair pair =
                    stochdom::optimal_ordered_pair(qx, qy, level);
                envelope["results"] = {{"pi", level.value()},
                                       {"distance", pair.distance},
                                       {"optimal_pair",
                                        {{"lower", quantile_to_json(pair.lower)},
                                         {"upper", quantile_to_json(pair.upper)}}}};
            }
            emit(envelope);
        } else if (*contour_cmd) {
            json envelope = make_envelope("contour");
            envelope["inputs"] = {{"mu_min", mu_min},
                                  {"mu_max", mu_max},
                                  {"sigma_min", sigma_min},
                                  {"sigma_max", sigma_max},
                                  {"resolution", resolution},
                                  {"out", contour_out}};
            const std::vector<stochdom::ContourRow> rows =
                stochdom::contour_grid(mu_min, mu_max, sigma_min, sigma_max, resolution);
            std::ofstream out = open_output(contour_out);
            stochdom::write_contour_csv(out, rows);
            finish_output(out, contour_out);
            envelope["results"] = {{"rows", rows.size()}, {"csv_path", contour_out}};
            emit(envelope);
        } else if (*simulate_cmd) {
            return run_sim_command("simulate", simulate_state, false);
        } else if (*coverage_cmd) {
            return run_sim_command("coverage", coverage_state, true);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
