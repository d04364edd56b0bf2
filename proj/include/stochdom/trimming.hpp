#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stochdom/empirical.hpp"
#include "stochdom/rational.hpp"

namespace stochdom {

// Fraction of mass allowed to be discarded, in [0, 1). Stored as an exact
// rational (snapped from the requested double; exact whenever the request is
// a fraction with denominator <= 1e9) so that trimmed breakpoints stay on
// the exact grid.
class TrimLevel {
public:
    explicit TrimLevel(double pi) : rat_(Rational::from_double(pi)) {
        if (!(pi >= 0.0) || pi >= 1.0) throw std::domain_error("TrimLevel: pi outside [0, 1)");
        if (rat_ < Rational(0, 1) || rat_ >= Rational(1, 1)) {
            throw std::domain_error("TrimLevel: pi outside [0, 1)");
        }
    }

    double value() const noexcept { return rat_.to_double(); }
    const Rational& as_rational() const noexcept { return rat_; }
    Rational keep_fraction() const { return Rational(1, 1) - rat_; }
    bool is_zero() const noexcept { return rat_.num() == 0; }

private:
    Rational rat_;
};

// Quantile of the maximal trimming F_pi (upper tail discarded):
// t -> q((1 - pi) t). Breakpoints move to t_i / (1 - pi); the piece covering
// the kept range is extended to 1 and later pieces drop out.
inline StepQuantile lower_trim_quantile(const StepQuantile& q, const TrimLevel& pi) {
    if (pi.is_zero()) return q;
    const Rational keep = pi.keep_fraction();
    const Rational one(1, 1);
    std::vector<Rational> up;
    std::vector<double> val;
    for (std::size_t i = 0; i < q.piece_count(); ++i) {
        const Rational nu = q.piece_upper(i) / keep;
        if (nu >= one) {
            up.push_back(one);
            val.push_back(q.piece_value(i));
            break;
        }
        up.push_back(nu);
        val.push_back(q.piece_value(i));
    }
    return StepQuantile(std::move(up), std::move(val));
}

// Quantile of the minimal trimming F^pi (lower tail discarded):
// t -> q(pi + (1 - pi) t). Pieces with upper edge <= pi vanish; survivors
// move to (t_i - pi) / (1 - pi), landing exactly on 1 for t_i = 1.
inline StepQuantile upper_trim_quantile(const StepQuantile& q, const TrimLevel& pi) {
    if (pi.is_zero()) return q;
    const Rational keep = pi.keep_fraction();
    std::vector<Rational> up;
    std::vector<double> val;
    for (std::size_t i = 0; i < q.piece_count(); ++i) {
        if (q.piece_upper(i) <= pi.as_rational()) continue;
        up.push_back((q.piece_upper(i) - pi.as_rational()) / keep);
        val.push_back(q.piece_value(i));
    }
    return StepQuantile(std::move(up), std::move(val));
}

enum class TrimSide { lower, upper };

// Trimmed cdf value at x: the lower side rescales mass from below,
// min(F(x)/(1-pi), 1); the upper side discards mass from below,
// max((F(x)-pi)/(1-pi), 0).
template <class Cdf>
double trimmed_cdf_value(Cdf&& cdf, const TrimLevel& pi, double x, TrimSide side) {
    const double f = cdf(x);
    if (!(f >= 0.0) || f > 1.0) throw std::domain_error("trimmed_cdf_value: cdf outside [0, 1]");
    const double keep = 1.0 - pi.value();
    if (side == TrimSide::lower) return std::min(f / keep, 1.0);
    return std::max((f - pi.value()) / keep, 0.0);
}

// True iff candidate lies inside the trimming envelope of base:
// lower_trim_quantile <= candidate <= upper_trim_quantile piecewise.
inline bool envelope_contains(const StepQuantile& candidate, const StepQuantile& base,
                              const TrimLevel& pi) {
    const StepQuantile lo = lower_trim_quantile(base, pi);
    const StepQuantile hi = upper_trim_quantile(base, pi);
    bool ok = true;
    for_each_merged_piece(lo, candidate, [&](double, double lv, double cv) { ok = ok && lv <= cv; });
    for_each_merged_piece(candidate, hi, [&](double, double cv, double hv) { ok = ok && cv <= hv; });
    return ok;
}

}  // namespace stochdom
