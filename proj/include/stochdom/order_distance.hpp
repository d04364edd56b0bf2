#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stochdom/empirical.hpp"
#include "stochdom/trimming.hpp"

namespace stochdom {

// Decomposition of the order-violation index: epsilon is the share of the
// squared distance carried by the region where the first quantile exceeds
// the second. n and m echo sample sizes when known (1 for analytic inputs).
struct IndexReport {
    double epsilon{0.0};
    double violation_integral{0.0};
    double w2_squared{0.0};
    std::size_t n{1};
    std::size_t m{1};
};

inline bool is_stochastically_dominated(const StepQuantile& qf, const StepQuantile& qg) {
    bool ok = true;
    for_each_merged_piece(qf, qg, [&](double, double f, double g) { ok = ok && f <= g; });
    return ok;
}

inline double w2(const StepQuantile& qf, const StepQuantile& qg) {
    return std::sqrt(integrate_piecewise(qf, qg, Kernel::squared_difference));
}

inline IndexReport epsilon_index(const StepQuantile& qf, const StepQuantile& qg) {
    IndexReport r;
    NeumaierSum pos, tot;
    for_each_merged_piece(qf, qg, [&](double len, double f, double g) {
        const double d = f - g;
        tot.add(len * d * d);
        if (d > 0.0) pos.add(len * d * d);
    });
    r.w2_squared = tot.value();
    if (r.w2_squared <= 0.0) {
        throw std::domain_error("index undefined for identical distributions");
    }
    // Summation noise must not push the ratio outside [0, 1].
    r.violation_integral = std::min(std::max(pos.value(), 0.0), r.w2_squared);
    r.epsilon = r.violation_integral / r.w2_squared;
    return r;
}

inline IndexReport epsilon_index(const Sample& x, const Sample& y) {
    IndexReport r = epsilon_index(empirical_quantile(x), empirical_quantile(y));
    r.n = x.size();
    r.m = y.size();
    return r;
}

// Distance from the pair of trim envelopes to the stochastic-order cone:
// sqrt(1/2 * integral of the squared positive part of (lower-trimmed first
// argument minus upper-trimmed second argument)).
inline double trimmed_order_distance(const StepQuantile& qf, const StepQuantile& qg,
                                     const TrimLevel& pi) {
    const StepQuantile lo = lower_trim_quantile(qf, pi);
    const StepQuantile hi = upper_trim_quantile(qg, pi);
    return std::sqrt(0.5 * integrate_piecewise(lo, hi, Kernel::positive_part_squared));
}

// Nearest stochastically ordered pair to the trim envelopes, together with
// the attained distance.
struct OptimalOrderedPair {
    StepQuantile lower;
    StepQuantile upper;
    double distance{0.0};
};

inline OptimalOrderedPair optimal_ordered_pair(const StepQuantile& qf, const StepQuantile& qg,
                                               const TrimLevel& pi) {
    const StepQuantile f = lower_trim_quantile(qf, pi);
    const StepQuantile g = upper_trim_quantile(qg, pi);
    std::vector<Rational> edges;
    std::vector<double> lo_vals, hi_vals;
    for_each_merged_piece_edges(f, g, [&](const Rational& edge, double fv, double gv) {
        const double mid = 0.5 * (fv + gv);
        edges.push_back(edge);
        lo_vals.push_back(std::min(fv, mid));
        hi_vals.push_back(std::max(gv, mid));
    });
    OptimalOrderedPair out{StepQuantile(edges, std::move(lo_vals)).canonicalized(),
                           StepQuantile(std::move(edges), std::move(hi_vals)).canonicalized(),
                           0.0};
    out.distance = trimmed_order_distance(qf, qg, pi);
    return out;
}

// Smallest trim level that makes the order distance vanish, located by
// bisection; the reversed-order degenerate case cannot reach zero for any
// pi < 1 and is reported through the flag instead of an error.
struct MinimalTrimResult {
    TrimLevel pi;
    bool no_finite_trim{false};
};

inline MinimalTrimResult minimal_trim_for_order(const StepQuantile& qf, const StepQuantile& qg,
                                                double tol = 1e-6) {
    if (!(tol > 0.0) || tol >= 1.0) throw std::domain_error("minimal_trim_for_order: bad tol");
    constexpr double kZero = 1e-14;
    if (trimmed_order_distance(qf, qg, TrimLevel(0.0)) <= kZero) {
        return {TrimLevel(0.0), false};
    }
    if (qf.min_value() > qg.max_value()) {
        // Every trim level leaves the envelopes at constants min(F) > max(G).
        return {TrimLevel(1.0 - tol), true};
    }
    // Once 1 - pi is below both the first breakpoint of qf and the gap above
    // the last breakpoint of qg, the envelopes are the constants min(F) and
    // max(G), so the distance is exactly zero there.
    const Rational keep0 = std::min(qf.piece_upper(0),
                                    Rational(1, 1) - qg.piece_lower(qg.piece_count() - 1));
    double lo = 0.0;
    double hi = (Rational(1, 1) - keep0).to_double();
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (trimmed_order_distance(qf, qg, TrimLevel(mid)) <= kZero) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return {TrimLevel(hi), false};
}

// Mass-weighted share of the order violation under the L1 geometry,
// computed in quantile coordinates: integral of the positive part of the
// difference over the integral of its absolute value.
inline double l1_comparator_index(const StepQuantile& qf, const StepQuantile& qg) {
    NeumaierSum pos, abs;
    for_each_merged_piece(qf, qg, [&](double len, double f, double g) {
        const double d = f - g;
        abs.add(len * std::abs(d));
        if (d > 0.0) pos.add(len * d);
    });
    const double total = abs.value();
    if (total <= 0.0) {
        throw std::domain_error("comparator undefined for identical distributions");
    }
    return std::min(std::max(pos.value() / total, 0.0), 1.0);
}

}  // namespace stochdom
