#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "stochdom/empirical.hpp"
#include "stochdom/quadrature.hpp"

namespace stochdom {

enum class USign { plus, minus };

namespace detail {

// Exact segment integrals of the one-sided kernels against a constant c:
//   int_p^q 2 (s - c)_+ ds  and  int_p^q 2 (s - c)_- ds,  p <= q.
inline double seg_pos(double p, double q, double c) noexcept {
    const double hq = std::max(q - c, 0.0);
    const double hp = std::max(p - c, 0.0);
    return hq * hq - hp * hp;
}

inline double seg_neg(double p, double q, double c) noexcept {
    const double hp = std::max(c - p, 0.0);
    const double hq = std::max(c - q, 0.0);
    return hp * hp - hq * hq;
}

inline double seg(double p, double q, double c, USign sign) noexcept {
    return sign == USign::plus ? seg_pos(p, q, c) : seg_neg(p, q, c);
}

}  // namespace detail

// Piecewise-constant description of the map s -> G^{-1}(F(s)) for a step
// cdf F: on [cut[k], cut[k+1]) the map equals center[k]; outside
// [cut.front(), cut.back()) the cdf level is 0 or 1 and the integrand of
// every u-functional is taken to be zero there (the regions contribute a
// constant shared by all windows that meet them, so variances are
// unaffected, and the convention stays finite for unbounded G).
struct PluginComposition {
    std::vector<double> cut;     // distinct sorted F-sample values
    std::vector<double> center;  // cut.size() - 1 values of G^{-1} at the step levels
};

// Two-sample composition: levels j/n map into the Y order statistics by
// exact integer arithmetic, y_(ceil(m j / n)).
inline PluginComposition make_plugin_composition(const std::vector<double>& sorted_x,
                                                 const std::vector<double>& sorted_y) {
    if (sorted_x.empty() || sorted_y.empty()) {
        throw std::domain_error("make_plugin_composition: empty sample");
    }
    const auto n = static_cast<std::int64_t>(sorted_x.size());
    const auto m = static_cast<std::int64_t>(sorted_y.size());
    PluginComposition comp;
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = sorted_x[static_cast<std::size_t>(i)];
        if (i + 1 < n && sorted_x[static_cast<std::size_t>(i + 1)] == v) continue;
        comp.cut.push_back(v);
        const std::int64_t j = i + 1;  // rank of v, so the level right of v is j/n
        if (j < n) {
            const std::int64_t idx = (m * j + n - 1) / n;  // ceil(m j / n), in [1, m]
            comp.center.push_back(sorted_y[static_cast<std::size_t>(idx - 1)]);
        }
    }
    return comp;
}

// One-sample composition against an analytic quantile: centers are
// G^{-1}(j/n) at the interior levels.
template <class GQ, class = std::enable_if_t<std::is_invocable_r_v<double, GQ, double>>>
PluginComposition make_plugin_composition(const std::vector<double>& sorted_x, GQ&& g_quantile) {
    if (sorted_x.empty()) throw std::domain_error("make_plugin_composition: empty sample");
    const auto n = static_cast<std::int64_t>(sorted_x.size());
    PluginComposition comp;
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = sorted_x[static_cast<std::size_t>(i)];
        if (i + 1 < n && sorted_x[static_cast<std::size_t>(i + 1)] == v) continue;
        comp.cut.push_back(v);
        const std::int64_t j = i + 1;
        if (j < n) {
            comp.center.push_back(g_quantile(static_cast<double>(j) / static_cast<double>(n)));
        }
    }
    return comp;
}

namespace detail {

// Integral of the chosen kernel of the composition over [lo, hi].
inline double composition_integral(const PluginComposition& comp, double lo, double hi,
                                   USign sign) {
    const double a = std::max(lo, comp.cut.front());
    const double b = std::min(hi, comp.cut.back());
    if (!(a < b)) return 0.0;
    const auto first =
        static_cast<std::size_t>(std::upper_bound(comp.cut.begin(), comp.cut.end(), a) -
                                 comp.cut.begin()) - 1;
    NeumaierSum acc;
    for (std::size_t k = first; k < comp.center.size(); ++k) {
        const double p = std::max(a, comp.cut[k]);
        const double q = std::min(b, comp.cut[k + 1]);
        if (p >= q) break;
        acc.add(seg(p, q, comp.center[k], sign));
    }
    return acc.value();
}

}  // namespace detail

// Signed u-functional of the composition: int_0^x of the kernel, negative x
// handled by orientation.
inline double u_plugin(double x, const PluginComposition& comp, USign sign) {
    if (!std::isfinite(x)) throw std::domain_error("u_plugin: non-finite evaluation point");
    if (x >= 0.0) return detail::composition_integral(comp, 0.0, x, sign);
    return -detail::composition_integral(comp, x, 0.0, sign);
}

// Batch evaluation at sorted points: one forward sweep accumulating the
// prefix integral, so the whole batch costs O(pieces + points).
inline std::vector<double> u_at_points(const PluginComposition& comp,
                                       const std::vector<double>& sorted_pts, USign sign) {
    std::vector<double> out(sorted_pts.size());
    if (sorted_pts.empty()) return out;
    double cursor = std::min(0.0, sorted_pts.front());
    NeumaierSum prefix;  // integral from `cursor0` up to `cursor`
    std::size_t next = 0;
    double prefix_at_zero = 0.0;
    bool seen_zero = false;
    std::vector<double> raw(sorted_pts.size());
    const auto advance_to = [&](double to) {
        if (to > cursor) {
            prefix.add(detail::composition_integral(comp, cursor, to, sign));
            cursor = to;
        }
    };
    while (next < out.size() || !seen_zero) {
        const bool zero_next =
            !seen_zero && (next >= out.size() || 0.0 <= sorted_pts[next]);
        const double target = zero_next ? 0.0 : sorted_pts[next];
        advance_to(target);
        if (zero_next) {
            prefix_at_zero = prefix.value();
            seen_zero = true;
        } else {
            raw[next++] = prefix.value();
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = raw[i] - prefix_at_zero;
    return out;
}

// Public u-functional, plug-in form: F is the empirical cdf of the first
// sample, G^{-1} the empirical quantile of the second.
inline double u_function(double x, const Sample& fx, const Sample& gy, USign sign) {
    return u_plugin(x, make_plugin_composition(fx.sorted_values(), gy.sorted_values()), sign);
}

// Step-quantile form: F's cdf steps at the distinct values of qf with levels
// given by the breakpoints; centers come from evaluating qg at those levels.
inline double u_function(double x, const StepQuantile& qf, const StepQuantile& qg, USign sign) {
    const StepQuantile cf = qf.canonicalized();
    PluginComposition comp;
    for (std::size_t i = 0; i < cf.piece_count(); ++i) {
        comp.cut.push_back(cf.piece_value(i));
        if (i + 1 < cf.piece_count()) comp.center.push_back(qg(cf.upper_as_double(i)));
    }
    return u_plugin(x, comp, sign);
}

// Analytic form: adaptive quadrature of the raw integrand; levels at 0 or 1
// follow the same zero-integrand convention as the step forms.
template <class Cdf, class GQ,
          class = std::enable_if_t<std::is_invocable_r_v<double, Cdf, double> &&
                                   std::is_invocable_r_v<double, GQ, double>>>
double u_function(double x, Cdf&& f_cdf, GQ&& g_quantile, USign sign, double abs_tol = 1e-10) {
    if (!std::isfinite(x)) throw std::domain_error("u_function: non-finite evaluation point");
    const auto integrand = [&](double s) {
        const double level = f_cdf(s);
        if (!(level > 0.0) || level >= 1.0) return 0.0;
        const double d = s - g_quantile(level);
        if (sign == USign::plus) return d > 0.0 ? 2.0 * d : 0.0;
        return d < 0.0 ? -2.0 * d : 0.0;
    };
    return quad::integrate_adaptive(integrand, 0.0, x, abs_tol);
}

// Integral over (0,1) of a kernel between a step quantile and an analytic
// quantile: exact piece boundaries, adaptive quadrature inside each piece
// (the analytic quantile may blow up at the endpoints; the 1e-15 clip
// truncates a negligible integrable sliver).
template <class GQ, class = std::enable_if_t<std::is_invocable_r_v<double, GQ, double>>>
double step_vs_quantile_integral(const StepQuantile& qf, GQ&& g_quantile, Kernel kernel,
                                 double piece_abs_tol = 1e-12) {
    NeumaierSum acc;
    const double hi_clamp = std::nextafter(1.0, 0.0);
    for (std::size_t i = 0; i < qf.piece_count(); ++i) {
        const double lo = i == 0 ? 0.0 : qf.upper_as_double(i - 1);
        const double a = std::max(lo, 1e-15);
        const double b = std::min(qf.upper_as_double(i), hi_clamp);
        if (!(a < b)) continue;
        const double v = qf.piece_value(i);
        acc.add(quad::integrate_adaptive(
            [&](double t) { return apply_kernel(kernel, v, g_quantile(t)); }, a, b,
            piece_abs_tol));
    }
    return acc.value();
}

}  // namespace stochdom
