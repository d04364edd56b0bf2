#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stochdom/common.hpp"
#include "stochdom/rational.hpp"

namespace stochdom {

// Immutable batch of observations. Values must be finite; order is preserved
// as given, sorted views are produced on demand.
class Sample {
public:
    explicit Sample(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw std::domain_error("Sample: empty");
        for (double v : values_) {
            if (!std::isfinite(v)) throw std::domain_error("Sample: non-finite value");
        }
    }

    const std::vector<double>& values() const noexcept { return values_; }

    std::vector<double> sorted_values() const {
        std::vector<double> out = values_;
        std::sort(out.begin(), out.end());
        return out;
    }

    std::size_t size() const noexcept { return values_.size(); }

private:
    std::vector<double> values_;
};

// Left-continuous step function on (0, 1]: piece i takes value piece_value(i)
// on (piece_lower(i), piece_upper(i)]. Breakpoints are exact rationals with
// cached double images; values are non-decreasing. The last upper edge is
// exactly 1.
class StepQuantile {
public:
    StepQuantile(std::vector<Rational> piece_upper, std::vector<double> piece_value)
        : upper_(std::move(piece_upper)), value_(std::move(piece_value)) {
        if (upper_.empty() || upper_.size() != value_.size()) {
            throw std::domain_error("StepQuantile: piece arrays empty or mismatched");
        }
        const Rational zero(0, 1);
        const Rational one(1, 1);
        Rational prev = zero;
        for (std::size_t i = 0; i < upper_.size(); ++i) {
            if (upper_[i] <= prev) throw std::domain_error("StepQuantile: breakpoints not increasing");
            if (!std::isfinite(value_[i])) throw std::domain_error("StepQuantile: non-finite value");
            if (i > 0 && value_[i] < value_[i - 1]) {
                throw std::domain_error("StepQuantile: values not non-decreasing");
            }
            prev = upper_[i];
        }
        if (prev != one) throw std::domain_error("StepQuantile: last breakpoint must be 1");
        upper_dbl_.reserve(upper_.size());
        for (const Rational& r : upper_) upper_dbl_.push_back(r.to_double());
    }

    static StepQuantile constant(double v) {
        return StepQuantile({Rational(1, 1)}, {v});
    }

    std::size_t piece_count() const noexcept { return upper_.size(); }

    Rational piece_lower(std::size_t i) const {
        return i == 0 ? Rational(0, 1) : upper_[i - 1];
    }

    const Rational& piece_upper(std::size_t i) const { return upper_[i]; }

    double piece_value(std::size_t i) const { return value_[i]; }

    double upper_as_double(std::size_t i) const { return upper_dbl_[i]; }

    double min_value() const noexcept { return value_.front(); }
    double max_value() const noexcept { return value_.back(); }

    // Evaluation at t in (0, 1]; left-continuity means the piece whose upper
    // edge is the first one >= t.
    double operator()(double t) const {
        if (!(t > 0.0) || t > 1.0) {
            throw std::domain_error("StepQuantile: argument outside (0, 1]");
        }
        const auto it = std::lower_bound(upper_dbl_.begin(), upper_dbl_.end(), t);
        const auto idx = static_cast<std::size_t>(it - upper_dbl_.begin());
        return value_[idx < value_.size() ? idx : value_.size() - 1];
    }

    // Same function with adjacent equal-value pieces merged.
    StepQuantile canonicalized() const {
        std::vector<Rational> up;
        std::vector<double> val;
        for (std::size_t i = 0; i < upper_.size(); ++i) {
            if (!val.empty() && val.back() == value_[i]) {
                up.back() = upper_[i];
            } else {
                up.push_back(upper_[i]);
                val.push_back(value_[i]);
            }
        }
        return StepQuantile(std::move(up), std::move(val));
    }

    // Representation equality; canonicalize both sides to compare as functions.
    friend bool operator==(const StepQuantile& a, const StepQuantile& b) {
        return a.upper_ == b.upper_ && a.value_ == b.value_;
    }

private:
    std::vector<Rational> upper_;
    std::vector<double> value_;
    std::vector<double> upper_dbl_;
};

// Empirical quantile of a sample of size n: value x(i) on ((i-1)/n, i/n],
// returned with equal-value runs already merged.
inline StepQuantile empirical_quantile(const Sample& sample) {
    const std::vector<double> xs = sample.sorted_values();
    const auto n = static_cast<std::int64_t>(xs.size());
    std::vector<Rational> up;
    std::vector<double> val;
    for (std::int64_t i = 0; i < n; ++i) {
        if (!val.empty() && val.back() == xs[static_cast<std::size_t>(i)]) {
            up.back() = Rational(i + 1, n);
        } else {
            up.emplace_back(i + 1, n);
            val.push_back(xs[static_cast<std::size_t>(i)]);
        }
    }
    return StepQuantile(std::move(up), std::move(val));
}

// Visits the common refinement of two step quantiles. fn receives the exact
// piece length (as double) and the two piece values; lengths sum to 1.
template <class PieceFn>
void for_each_merged_piece(const StepQuantile& a, const StepQuantile& b, PieceFn&& fn) {
    std::size_t i = 0, j = 0;
    double prev = 0.0;
    const std::size_t ka = a.piece_count();
    const std::size_t kb = b.piece_count();
    while (i < ka && j < kb) {
        const auto cmp = a.piece_upper(i) <=> b.piece_upper(j);
        const double edge = cmp <= 0 ? a.upper_as_double(i) : b.upper_as_double(j);
        fn(edge - prev, a.piece_value(i), b.piece_value(j));
        prev = edge;
        if (cmp <= 0) ++i;
        if (cmp >= 0) ++j;
    }
}

// Merged walk that also exposes the exact upper edge of each refined piece,
// for callers that build new step functions on the common grid.
template <class PieceFn>
void for_each_merged_piece_edges(const StepQuantile& a, const StepQuantile& b, PieceFn&& fn) {
    std::size_t i = 0, j = 0;
    const std::size_t ka = a.piece_count();
    const std::size_t kb = b.piece_count();
    while (i < ka && j < kb) {
        const auto cmp = a.piece_upper(i) <=> b.piece_upper(j);
        const Rational& edge = cmp <= 0 ? a.piece_upper(i) : b.piece_upper(j);
        fn(edge, a.piece_value(i), b.piece_value(j));
        if (cmp <= 0) ++i;
        if (cmp >= 0) ++j;
    }
}

enum class Kernel {
    squared_difference,   // (a - b)^2
    positive_part_squared,  // max(a - b, 0)^2
    negative_part_squared,  // min(a - b, 0)^2
};

inline double apply_kernel(Kernel k, double a, double b) noexcept {
    const double d = a - b;
    switch (k) {
        case Kernel::squared_difference:
            return d * d;
        case Kernel::positive_part_squared:
            return d > 0.0 ? d * d : 0.0;
        case Kernel::negative_part_squared:
            return d < 0.0 ? d * d : 0.0;
    }
    return 0.0;
}

// Exact integral of the kernel over (0, 1]: each merged piece contributes
// length * kernel(va, vb), accumulated with compensation.
inline double integrate_piecewise(const StepQuantile& a, const StepQuantile& b, Kernel k) {
    NeumaierSum s;
    for_each_merged_piece(a, b, [&](double len, double va, double vb) {
        s.add(len * apply_kernel(k, va, vb));
    });
    return s.value();
}

}  // namespace stochdom
