#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stochdom/analytic.hpp"
#include "stochdom/inference.hpp"
#include "stochdom/normal.hpp"
#include "stochdom/rng.hpp"

namespace stochdom {

enum class SimMode { nonparametric, parametric };

inline const char* sim_mode_name(SimMode mode) {
    return mode == SimMode::nonparametric ? "nonparametric" : "parametric";
}

inline const char* variance_method_name(VarianceMethod method) {
    return method == VarianceMethod::plug_in ? "plug_in" : "bootstrap";
}

// One Monte Carlo study: repeatedly draw X ~ model_f (size n) and Y ~ model_g
// (size m) and run the dominance test, either on the raw samples
// (nonparametric) or between maximum-likelihood normal fits (parametric).
struct SimConfig {
    NormalParams model_f{0.0, 1.0};
    NormalParams model_g{0.0, 1.0};
    std::size_t n{100};
    std::size_t m{100};
    double epsilon_0{0.05};
    double alpha{0.05};
    std::size_t replications{100};
    VarianceMethod variance_method{VarianceMethod::bootstrap};
    std::size_t bootstrap_b{500};
    SimMode mode{SimMode::nonparametric};
    std::uint64_t master_seed{0};
};

struct SimReport {
    double rate{0.0};  // rejection rate or coverage fraction, in [0, 1]
    std::size_t replications{0};
    double binomial_se{0.0};
    std::size_t failures{0};  // replications that raised instead of deciding
    SimConfig config{};
};

inline void validate_sim_config(const SimConfig& config) {
    if (config.replications < 1) throw std::domain_error("SimConfig: replications must be >= 1");
    if (!(config.alpha > 0.0) || !(config.alpha < 1.0)) {
        throw std::domain_error("SimConfig: alpha must lie in (0, 1)");
    }
    if (!(config.epsilon_0 > 0.0) || !(config.epsilon_0 < 1.0)) {
        throw std::domain_error("SimConfig: epsilon0 must lie in (0, 1)");
    }
    if (config.n < 2 || config.m < 2) {
        throw std::domain_error("SimConfig: n and m must be >= 2");
    }
    if (config.variance_method == VarianceMethod::bootstrap && config.bootstrap_b < 2) {
        throw std::domain_error("SimConfig: bootstrap_B must be >= 2");
    }
    if (config.mode == SimMode::parametric &&
        config.variance_method == VarianceMethod::plug_in) {
        throw std::domain_error(
            "SimConfig: parametric mode estimates sigma by parametric bootstrap only");
    }
}

// Inverse-transform draws; reproducible from the substream value alone.
inline Sample normal_sampler(const NormalParams& params, std::size_t count,
                             const rng::Substream& substream) {
    if (count < 1) throw std::domain_error("normal_sampler: count must be >= 1");
    auto eng = substream.engine();
    std::vector<double> values(count);
    for (double& v : values) v = params.quantile(rng::next_open_unit(eng));
    return Sample(std::move(values));
}

namespace detail {

// Looser than the library default: replicate-level indices feed a Monte Carlo
// average, so 1e-7 relative error is far below the binomial noise.
inline constexpr double kSimQuadRelTol = 1e-7;

// Parametric benchmark for one replication: index between ML fits, sigma from
// refits of samples redrawn from the fitted models.
inline TestResult parametric_test(const Sample& x, const Sample& y, const SimConfig& config,
                                  std::uint64_t replication) {
    const NormalParams fit_x = fit_normal_ml(x);
    const NormalParams fit_y = fit_normal_ml(y);
    const double eps_hat = epsilon_normal(fit_x, fit_y, kSimQuadRelTol).epsilon;

    const auto n = x.size();
    const auto m = y.size();
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    const double factor = std::sqrt(dn * dm / (dn + dm));
    const std::uint64_t seed = rng::mix(config.master_seed, replication);

    std::vector<double> stats(config.bootstrap_b);
    std::vector<double> draw_x(n);
    std::vector<double> draw_y(m);
    for (std::size_t b = 0; b < config.bootstrap_b; ++b) {
        auto eng = rng::engine_for(seed, b, 3);
        for (double& v : draw_x) v = fit_x.quantile(rng::next_open_unit(eng));
        for (double& v : draw_y) v = fit_y.quantile(rng::next_open_unit(eng));
        const NormalParams refit_x = fit_normal_ml(Sample(draw_x));
        const NormalParams refit_y = fit_normal_ml(Sample(draw_y));
        stats[b] = factor * epsilon_normal(refit_x, refit_y, kSimQuadRelTol).epsilon;
    }
    const double sigma_hat = std::sqrt(variance(stats));
    return decide_almost_dominance(eps_hat, config.epsilon_0, n, m, sigma_hat, config.alpha,
                                   VarianceMethod::bootstrap);
}

inline TestResult run_one_replication(const SimConfig& config, std::uint64_t replication) {
    const Sample x = normal_sampler(config.model_f, config.n,
                                    {config.master_seed, replication, 0});
    const Sample y = normal_sampler(config.model_g, config.m,
                                    {config.master_seed, replication, 1});
    if (config.mode == SimMode::parametric) return parametric_test(x, y, config, replication);
    return test_almost_dominance(x, y, config.epsilon_0, config.alpha, config.variance_method,
                                 rng::mix(config.master_seed, replication),
                                 config.bootstrap_b);
}

template <typename CountHit>
SimReport run_study(const SimConfig& config, CountHit&& count_hit) {
    validate_sim_config(config);
    std::size_t hits = 0;
    std::size_t failures = 0;
    for (std::size_t r = 0; r < config.replications; ++r) {
        try {
            if (count_hit(run_one_replication(config, r))) ++hits;
        } catch (const std::exception&) {
            ++failures;  // a degenerate draw spoils one replication, not the study
        }
    }
    SimReport report;
    report.replications = config.replications;
    report.failures = failures;
    report.rate = static_cast<double>(hits) / static_cast<double>(config.replications);
    report.binomial_se =
        std::sqrt(report.rate * (1.0 - report.rate) / static_cast<double>(config.replications));
    report.config = config;
    return report;
}

}  // namespace detail

inline SimReport run_rejection_study(const SimConfig& config) {
    return detail::run_study(config, [](const TestResult& t) { return t.reject; });
}

// Fraction of replications whose upper confidence bound covers the true index.
// epsilon_0 plays no role here; it is validated and echoed only.
inline SimReport run_coverage_study(const SimConfig& config) {
    validate_sim_config(config);
    const double true_epsilon =
        epsilon_normal(config.model_f, config.model_g, 1e-9).epsilon;
    return detail::run_study(
        config, [&](const TestResult& t) { return true_epsilon <= t.upper_bound; });
}

namespace detail {

inline std::string_view trim_view(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline double parse_config_real(std::string_view value, const std::string& key) {
    double out = 0.0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw std::domain_error("SimConfig: bad numeric value for '" + key + "'");
    }
    return out;
}

inline std::uint64_t parse_config_integer(std::string_view value, const std::string& key) {
    std::uint64_t out = 0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw std::domain_error("SimConfig: bad integer value for '" + key + "'");
    }
    return out;
}

}  // namespace detail

inline VarianceMethod parse_variance_method(std::string_view value) {
    if (value == "plug_in" || value == "plug-in") return VarianceMethod::plug_in;
    if (value == "bootstrap") return VarianceMethod::bootstrap;
    throw std::domain_error("SimConfig: variance_method must be plug_in or bootstrap");
}

inline SimMode parse_sim_mode(std::string_view value) {
    if (value == "nonparametric") return SimMode::nonparametric;
    if (value == "parametric") return SimMode::parametric;
    throw std::domain_error("SimConfig: mode must be nonparametric or parametric");
}

// Key = value lines; '#' starts a comment; blank lines ignored; unknown keys
// rejected. Later duplicates of a key overwrite earlier ones.
inline SimConfig parse_sim_config(std::istream& in) {
    double f_mu = 0.0, f_sigma = 1.0, g_mu = 0.0, g_sigma = 1.0;
    SimConfig config;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) {
            view = view.substr(0, hash);
        }
        view = detail::trim_view(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw std::domain_error("SimConfig: line " + std::to_string(line_number) +
                                    " is not a key = value pair");
        }
        const std::string key{detail::trim_view(view.substr(0, eq))};
        const std::string_view value = detail::trim_view(view.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::domain_error("SimConfig: line " + std::to_string(line_number) +
                                    " has an empty key or value");
        }
        if (key == "f_mu") f_mu = detail::parse_config_real(value, key);
        else if (key == "f_sigma") f_sigma = detail::parse_config_real(value, key);
        else if (key == "g_mu") g_mu = detail::parse_config_real(value, key);
        else if (key == "g_sigma") g_sigma = detail::parse_config_real(value, key);
        else if (key == "n") config.n = detail::parse_config_integer(value, key);
        else if (key == "m") config.m = detail::parse_config_integer(value, key);
        else if (key == "epsilon0") config.epsilon_0 = detail::parse_config_real(value, key);
        else if (key == "alpha") config.alpha = detail::parse_config_real(value, key);
        else if (key == "replications") {
            config.replications = detail::parse_config_integer(value, key);
        } else if (key == "variance_method") {
            config.variance_method = parse_variance_method(value);
        } else if (key == "bootstrap_B") {
            config.bootstrap_b = detail::parse_config_integer(value, key);
        } else if (key == "mode") {
            config.mode = parse_sim_mode(value);
        } else if (key == "master_seed") {
            config.master_seed = detail::parse_config_integer(value, key);
        } else {
            throw std::domain_error("SimConfig: unknown key '" + key + "' on line " +
                                    std::to_string(line_number));
        }
    }
    config.model_f = NormalParams(f_mu, f_sigma);
    config.model_g = NormalParams(g_mu, g_sigma);
    return config;
}

// One row per report: config echo, then the measured rate.
inline void write_sim_csv_header(std::ostream& os) {
    os << "f_mu,f_sigma,g_mu,g_sigma,n,m,epsilon0,alpha,replications,variance_method,"
          "bootstrap_B,mode,master_seed,rate,binomial_se,failures\n";
}

inline void write_sim_csv_row(std::ostream& os, const SimReport& report) {
    const SimConfig& c = report.config;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%zu,%zu,%.17g,%.17g,%zu,%s,%zu,%s,",
                  c.model_f.mu, c.model_f.sigma, c.model_g.mu, c.model_g.sigma, c.n, c.m,
                  c.epsilon_0, c.alpha, c.replications, variance_method_name(c.variance_method),
                  c.bootstrap_b, sim_mode_name(c.mode));
    os << buf;
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%zu\n",
                  static_cast<unsigned long long>(c.master_seed), report.rate,
                  report.binomial_se, report.failures);
    os << buf;
}

inline void write_sim_csv(std::ostream& os, const SimReport& report) {
    write_sim_csv_header(os);
    write_sim_csv_row(os, report);
}

}  // namespace stochdom
