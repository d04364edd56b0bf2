#pragma once

#include <cmath>
#include <stdexcept>

#include "stochdom/common.hpp"
#include "stochdom/empirical.hpp"

namespace stochdom {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;

inline double normal_pdf(double x) noexcept {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// Lower tail via erfc keeps full relative precision for x << 0.
inline double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

// Upper tail probability with full relative precision for x >> 0.
inline double normal_cdf_upper(double x) noexcept {
    return 0.5 * std::erfc(x * M_SQRT1_2);
}

namespace detail {

// Wichura's rational approximation for the standard normal quantile
// (double-precision variant), accurate to ~1e-16 relative on its own.
inline double normal_quantile_rational(double p) {
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            ((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0;
        const double den =
            ((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0;
        return q * num / den;
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
               3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
             4.63033784615654529590e0) * r + 1.42343711074968357734e0;
        const double den =
            ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
               6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
             2.05319162663775882187e0) * r + 1.0;
        x = num / den;
    } else {
        r -= 5.0;
        const double num =
            ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
               2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
             5.46378491116411436990e0) * r + 6.65790464350110377720e0;
        const double den =
            ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                 1.84631831751005468180e-6) * r + 7.86869131145613259100e-4) * r +
               1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
             5.99832206555887937690e-1) * r + 1.0;
        x = num / den;
    }
    return q < 0.0 ? -x : x;
}

}  // namespace detail

// Standard normal quantile on (0, 1): rational approximation plus one Newton
// step against the tail-accurate cdf. The refinement is skipped where the
// density underflows (|x| > ~37); the rational form is already exact to
// double precision there.
inline double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw std::domain_error("normal_quantile: argument outside (0, 1)");
    }
    double x = detail::normal_quantile_rational(p);
    const double pdf = normal_pdf(x);
    if (pdf > 1e-290) {
        const double f = p <= 0.5 ? normal_cdf(x) - p : (1.0 - p) - normal_cdf_upper(x);
        double step = f / pdf;
        if (step > 0.1) step = 0.1;
        if (step < -0.1) step = -0.1;
        x -= step;
    }
    return x;
}

// Location-scale family member. quantile/cdf/pdf compose the standard forms.
struct NormalParams {
    double mu{0.0};
    double sigma{1.0};

    NormalParams() = default;
    NormalParams(double mu_, double sigma_) : mu(mu_), sigma(sigma_) {
        if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
            throw std::domain_error("NormalParams: need finite mu and sigma > 0");
        }
    }

    double quantile(double t) const { return mu + sigma * normal_quantile(t); }
    double cdf(double x) const { return normal_cdf((x - mu) / sigma); }
    double pdf(double x) const { return normal_pdf((x - mu) / sigma) / sigma; }
};

// Maximum-likelihood fit: mean and sqrt of the divisor-n variance.
inline NormalParams fit_normal_ml(const Sample& sample) {
    if (sample.size() < 2) throw std::domain_error("fit_normal_ml: need at least 2 values");
    const double mu = mean(sample.values());
    NeumaierSum ss;
    for (double v : sample.values()) {
        const double d = v - mu;
        ss.add(d * d);
    }
    const double var = ss.value() / static_cast<double>(sample.size());
    if (!(var > 0.0)) throw std::domain_error("fit_normal_ml: degenerate sample");
    return NormalParams(mu, std::sqrt(var));
}

}  // namespace stochdom
