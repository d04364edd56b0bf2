#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace stochdom {

// Neumaier variant of Kahan summation. Keeps integral identities stable at
// the 1e-12 level even when pieces nearly cancel.
class NeumaierSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_{0.0};
    double comp_{0.0};
};

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::domain_error("mean: empty range");
    NeumaierSum s;
    for (double x : xs) s.add(x);
    return s.value() / static_cast<double>(xs.size());
}

// Sample variance with divisor (n - ddof); ddof = 1 gives the unbiased form.
inline double variance(std::span<const double> xs, std::size_t ddof = 1) {
    if (xs.size() <= ddof) throw std::domain_error("variance: too few values");
    const double m = mean(xs);
    NeumaierSum s;
    for (double x : xs) {
        const double d = x - m;
        s.add(d * d);
    }
    return s.value() / static_cast<double>(xs.size() - ddof);
}

}  // namespace stochdom
