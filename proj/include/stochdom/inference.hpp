#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "stochdom/common.hpp"
#include "stochdom/empirical.hpp"
#include "stochdom/normal.hpp"
#include "stochdom/order_distance.hpp"
#include "stochdom/rng.hpp"
#include "stochdom/u_functionals.hpp"

namespace stochdom {

enum class VarianceMethod { plug_in, bootstrap };

struct VarianceEstimate {
    double sigma_squared = 0.0;
    VarianceMethod method = VarianceMethod::plug_in;
    double lambda_hat = 0.0;  // n/(n+m); 0 when the second side is an analytic model
    std::map<std::string, double> details;
};

// Plug-in estimate of the limit variance of sqrt(nm/(n+m)) (eps_hat - eps):
// [(1-lambda) Var(u_-(X)) + lambda Var(u_+(Y))] / W2^8, with both u's built
// from the composed map s -> G_m^{-1}(F_n(s)) and evaluated at the
// respective sample points.
inline VarianceEstimate plug_in_sigma(const Sample& x, const Sample& y) {
    if (x.size() < 2 || y.size() < 2) {
        throw std::domain_error("plug_in_sigma: need at least two observations per sample");
    }
    const std::vector<double> xs = x.sorted_values();
    const std::vector<double> ys = y.sorted_values();
    const double w2sq =
        integrate_piecewise(empirical_quantile(x), empirical_quantile(y),
                            Kernel::squared_difference);
    if (!(w2sq > 0.0)) {
        throw std::domain_error("variance undefined for identical empirical distributions");
    }
    const PluginComposition comp = make_plugin_composition(xs, ys);
    const double var_minus = variance(u_at_points(comp, xs, USign::minus));
    const double var_plus = variance(u_at_points(comp, ys, USign::plus));
    const double dn = static_cast<double>(x.size());
    const double dm = static_cast<double>(y.size());
    const double lambda = dn / (dn + dm);
    const double w2_4 = (w2sq * w2sq) * (w2sq * w2sq);
    VarianceEstimate est;
    est.sigma_squared = ((1.0 - lambda) * var_minus + lambda * var_plus) / w2_4;
    est.method = VarianceMethod::plug_in;
    est.lambda_hat = lambda;
    est.details = {{"var_u_minus", var_minus},
                   {"var_u_plus", var_plus},
                   {"w2_squared", w2sq}};
    return est;
}

// Bootstrap estimate: resample both samples with replacement, recompute the
// index, and take the sample variance of sqrt(nm/(n+m)) eps*_b. Degenerate
// resampled pairs (identical empirical distributions) are redrawn from the
// same replicate stream, so results stay deterministic in the seed.
inline VarianceEstimate bootstrap_sigma(const Sample& x, const Sample& y,
                                        std::size_t replicates = 500,
                                        std::uint64_t seed = 0) {
    if (replicates < 2) {
        throw std::domain_error("bootstrap_sigma: need at least two replicates");
    }
    const std::vector<double>& xs = x.values();
    const std::vector<double>& ys = y.values();
    const std::size_t n = xs.size();
    const std::size_t m = ys.size();
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    const double factor = std::sqrt(dn * dm / (dn + dm));
    std::vector<double> stats(replicates);
    std::vector<double> rx(n);
    std::vector<double> ry(m);
    double redraws = 0.0;
    for (std::size_t b = 0; b < replicates; ++b) {
        auto eng = rng::engine_for(seed, b, /*role=*/2);
        bool done = false;
        for (int attempt = 0; attempt < 100 && !done; ++attempt) {
            for (std::size_t i = 0; i < n; ++i) rx[i] = xs[rng::next_index(eng, n)];
            for (std::size_t j = 0; j < m; ++j) ry[j] = ys[rng::next_index(eng, m)];
            try {
                stats[b] = factor * epsilon_index(Sample(rx), Sample(ry)).epsilon;
                done = true;
            } catch (const std::domain_error&) {
                redraws += 1.0;
            }
        }
        if (!done) {
            throw std::runtime_error(
                "bootstrap_sigma: resampling kept producing identical distributions");
        }
    }
    VarianceEstimate est;
    est.sigma_squared = variance(stats);
    est.method = VarianceMethod::bootstrap;
    est.lambda_hat = dn / (dn + dm);
    est.details = {{"replicates", static_cast<double>(replicates)},
                   {"redraws", redraws},
                   {"mean_statistic", mean(stats)}};
    return est;
}

// One-sample index of a sample against an analytic reference quantile.
template <class GQ, class = std::enable_if_t<std::is_invocable_r_v<double, GQ, double>>>
IndexReport one_sample_epsilon_index(const Sample& x, GQ&& g_quantile,
                                     double piece_abs_tol = 1e-12) {
    const StepQuantile qx = empirical_quantile(x);
    IndexReport report;
    report.violation_integral =
        step_vs_quantile_integral(qx, g_quantile, Kernel::positive_part_squared, piece_abs_tol);
    report.w2_squared =
        step_vs_quantile_integral(qx, g_quantile, Kernel::squared_difference, piece_abs_tol);
    if (!(report.w2_squared > 0.0)) {
        throw std::domain_error("index undefined for identical distributions");
    }
    report.violation_integral =
        std::min(std::max(report.violation_integral, 0.0), report.w2_squared);
    report.epsilon = report.violation_integral / report.w2_squared;
    report.n = x.size();
    report.m = 1;
    return report;
}

// One-sample variance: Var(v_-(U)) / W2^8 with v_- evaluated on the i/n
// grid, which coincides with u_- at the order statistics under the plug-in
// cdf. The reference cdf is only used to cross-check the quantile callable.
template <class GQ, class GC,
          class = std::enable_if_t<std::is_invocable_r_v<double, GQ, double> &&
                                   std::is_invocable_r_v<double, GC, double>>>
VarianceEstimate one_sample_sigma(const Sample& x, GQ&& g_quantile, GC&& g_cdf) {
    if (x.size() < 2) {
        throw std::domain_error("one_sample_sigma: need at least two observations");
    }
    for (const double t : {0.25, 0.5, 0.75}) {
        if (std::fabs(g_cdf(g_quantile(t)) - t) > 1e-8) {
            throw std::domain_error("one_sample_sigma: quantile and cdf are inconsistent");
        }
    }
    const std::vector<double> xs = x.sorted_values();
    const StepQuantile qx = empirical_quantile(x);
    const double w2sq =
        step_vs_quantile_integral(qx, g_quantile, Kernel::squared_difference);
    if (!(w2sq > 0.0)) {
        throw std::domain_error("variance undefined: sample matches the reference");
    }
    const PluginComposition comp = make_plugin_composition(xs, g_quantile);
    const double var_minus = variance(u_at_points(comp, xs, USign::minus));
    const double w2_4 = (w2sq * w2sq) * (w2sq * w2sq);
    VarianceEstimate est;
    est.sigma_squared = var_minus / w2_4;
    est.method = VarianceMethod::plug_in;
    est.lambda_hat = 0.0;  // limit of n/(n+m) as the reference side grows exact
    est.details = {{"var_v_minus", var_minus}, {"w2_squared", w2sq}};
    return est;
}

struct TestResult {
    double epsilon_hat = 0.0;
    double epsilon_0 = 0.0;
    double statistic = 0.0;
    double sigma_hat = 0.0;
    double alpha = 0.0;
    double p_value = 0.0;
    double upper_bound = 0.0;
    bool reject = false;
    bool degenerate = false;
    std::size_t n = 0;
    std::size_t m = 0;
    VarianceMethod method = VarianceMethod::bootstrap;
};

// Assemble the test decision from an index estimate and a variance estimate.
// Rejects H0: eps >= eps_0 when sqrt(nm/(n+m)) (eps_hat - eps_0) falls below
// sigma_hat * Phi^{-1}(alpha); upper_bound is the level 1-alpha upper
// confidence bound for eps. A zero variance estimate is flagged degenerate
// and decides by comparing eps_hat with eps_0 directly.
inline TestResult decide_almost_dominance(double epsilon_hat, double epsilon_0, std::size_t n,
                                          std::size_t m, double sigma_hat, double alpha,
                                          VarianceMethod method) {
    if (!(epsilon_0 > 0.0) || !(epsilon_0 < 1.0)) {
        throw std::domain_error("decide_almost_dominance: epsilon_0 must be in (0, 1)");
    }
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::domain_error("decide_almost_dominance: alpha must be in (0, 1)");
    }
    if (n == 0 || m == 0) {
        throw std::domain_error("decide_almost_dominance: empty sample");
    }
    if (!std::isfinite(epsilon_hat) || epsilon_hat < 0.0 || epsilon_hat > 1.0) {
        throw std::domain_error("decide_almost_dominance: epsilon_hat must be in [0, 1]");
    }
    if (!std::isfinite(sigma_hat) || sigma_hat < 0.0) {
        throw std::domain_error("decide_almost_dominance: sigma_hat must be nonnegative");
    }
    const double dn = static_cast<double>(n);
    const double dm = static_cast<double>(m);
    const double root = std::sqrt(dn * dm / (dn + dm));
    const double za = normal_quantile(alpha);
    TestResult r;
    r.epsilon_hat = epsilon_hat;
    r.epsilon_0 = epsilon_0;
    r.sigma_hat = sigma_hat;
    r.alpha = alpha;
    r.n = n;
    r.m = m;
    r.method = method;
    r.statistic = root * (epsilon_hat - epsilon_0);
    r.reject = r.statistic < sigma_hat * za;
    r.degenerate = sigma_hat == 0.0;
    r.p_value = r.degenerate ? (r.statistic < 0.0 ? 0.0 : 1.0)
                             : normal_cdf(r.statistic / sigma_hat);
    r.upper_bound = epsilon_hat - std::sqrt((dn + dm) / (dn * dm)) * sigma_hat * za;
    return r;
}

inline TestResult test_almost_dominance(const Sample& x, const Sample& y, double epsilon_0,
                                        double alpha,
                                        VarianceMethod method = VarianceMethod::bootstrap,
                                        std::uint64_t seed = 0,
                                        std::size_t bootstrap_replicates = 500) {
    const IndexReport idx = epsilon_index(x, y);
    const VarianceEstimate var = method == VarianceMethod::plug_in
                                     ? plug_in_sigma(x, y)
                                     : bootstrap_sigma(x, y, bootstrap_replicates, seed);
    return decide_almost_dominance(idx.epsilon, epsilon_0, x.size(), y.size(),
                                   std::sqrt(var.sigma_squared), alpha, method);
}

}  // namespace stochdom
