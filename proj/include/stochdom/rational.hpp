#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace stochdom {

// Exact fraction used for probability-axis breakpoints. Always stored in
// lowest terms with a positive denominator, so equality is member-wise.
// Comparisons and arithmetic go through 128-bit intermediates; results that
// do not fit back into 64 bits throw std::overflow_error.
class Rational {
public:
    constexpr Rational() = default;

    Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
        if (den_ == 0) throw std::domain_error("Rational: zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    // Nearest fraction with denominator <= max_den, by continued-fraction
    // convergents. Exact for dyadic inputs; otherwise the approximation
    // error is far below 1e-12 for max_den = 1e9.
    static Rational from_double(double x, std::int64_t max_den = 1'000'000'000) {
        if (!std::isfinite(x)) throw std::domain_error("Rational: non-finite value");
        const bool neg = x < 0;
        double r = neg ? -x : x;
        std::int64_t p0 = 1, q0 = 0, p1 = 0, q1 = 1;
        for (int iter = 0; iter < 64; ++iter) {
            const double fa = std::floor(r);
            if (fa > static_cast<double>(max_den)) break;
            const auto a = static_cast<std::int64_t>(fa);
            if (q0 > 0 && a > (max_den - q1) / q0) break;
            const std::int64_t p2 = a * p0 + p1;
            const std::int64_t q2 = a * q0 + q1;
            p1 = p0;
            q1 = q0;
            p0 = p2;
            q0 = q2;
            const double rem = r - fa;
            if (rem < 1e-15) break;
            r = 1.0 / rem;
        }
        return Rational(neg ? -p0 : p0, q0);
    }

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
        const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
        const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                    static_cast<__int128>(a.den_) * b.den_);
    }

    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                    static_cast<__int128>(a.den_) * b.den_);
    }

    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(static_cast<__int128>(a.num_) * b.num_,
                    static_cast<__int128>(a.den_) * b.den_);
    }

    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
        return make(static_cast<__int128>(a.num_) * b.den_,
                    static_cast<__int128>(a.den_) * b.num_);
    }

private:
    static __int128 gcd128(__int128 a, __int128 b) noexcept {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            const __int128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static Rational make(__int128 num, __int128 den) {
        if (den == 0) throw std::domain_error("Rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const __int128 g = gcd128(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        constexpr __int128 lim = INT64_MAX;
        if (num > lim || num < -lim || den > lim) {
            throw std::overflow_error("Rational: result does not fit in 64 bits");
        }
        Rational r;
        r.num_ = static_cast<std::int64_t>(num);
        r.den_ = static_cast<std::int64_t>(den);
        return r;
    }

    std::int64_t num_{0};
    std::int64_t den_{1};
};

}  // namespace stochdom
