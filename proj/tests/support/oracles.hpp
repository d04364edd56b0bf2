#pragma once

// Independent reference implementations used to check the library. These
// deliberately avoid the code paths under test: the quantile oracle is pure
// bisection on the cdf, and the normal-index oracle is a closed form found
// by integrating the squared affine quantile difference against the normal
// density.

#include <cmath>
#include <limits>

#include "stochdom/normal.hpp"

namespace oracles {

// Bisection on the cdf, tail-aware so the residual keeps relative accuracy
// on both sides. 200 halvings of [-40, 40] land far below 1e-9.
inline double bisect_normal_quantile(double p) {
    const auto residual = [&](double x) {
        return p <= 0.5 ? stochdom::normal_cdf(x) - p
                        : (1.0 - p) - stochdom::normal_cdf_upper(x);
    };
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (residual(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Violation index between N(mu1, s1^2) and N(mu2, s2^2) in closed form.
// The quantile difference is A + B z with A = mu1 - mu2, B = s1 - s2, z
// standard normal, and
//   integral_{z < c} (A + B z)^2 phi(z) dz
//     = (A^2 + B^2) Phi(c) - (2AB + B^2 c) phi(c),
// which at the sign change c = -A/B collapses to
//   (A^2 + B^2) Phi(c) - A B phi(c).
inline double normal_epsilon_closed_form(double mu1, double s1, double mu2, double s2) {
    const double a = mu1 - mu2;
    const double b = s1 - s2;
    if (b == 0.0) {
        if (a == 0.0) return std::numeric_limits<double>::quiet_NaN();
        return a > 0.0 ? 1.0 : 0.0;
    }
    const double c = -a / b;
    const double den = a * a + b * b;
    const double below = den * stochdom::normal_cdf(c) - a * b * stochdom::normal_pdf(c);
    return b < 0.0 ? below / den : 1.0 - below / den;
}

// Squared W2 distance between two normals (quantile difference integrates
// in closed form).
inline double normal_w2_squared_closed_form(double mu1, double s1, double mu2, double s2) {
    const double dm = mu1 - mu2;
    const double ds = s1 - s2;
    return dm * dm + ds * ds;
}

}  // namespace oracles
