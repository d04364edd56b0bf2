#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stochdom/normal.hpp"
#include "stochdom/order_distance.hpp"
#include "stochdom/quadrature.hpp"

namespace stochdom {

// Violation index between two analytic distributions given by their quantile
// functions. Numerator (positive-part square) and denominator (full square)
// are integrated in one pass; optional split points mark known kinks such as
// quantile crossings.
template <class QF, class QG>
IndexReport epsilon_analytic(QF&& qf, QG&& qg, double rel_tol = 1e-8,
                             std::span<const double> splits = {}) {
    const auto [num, den] = quad::integrate_unit_pair(
        [&](double t) {
            const double d = qf(t) - qg(t);
            const double sq = d * d;
            return std::pair<double, double>(d > 0.0 ? sq : 0.0, sq);
        },
        rel_tol, splits);
    if (!(den > 0.0)) {
        throw std::domain_error("index undefined for identical distributions");
    }
    IndexReport r;
    r.w2_squared = den;
    r.violation_integral = std::min(std::max(num, 0.0), den);
    r.epsilon = r.violation_integral / den;
    return r;
}

// Normal-vs-normal index. The quantile difference (mu_f - mu_g) +
// (sigma_f - sigma_g) * z crosses zero at most once; the crossing
// t* = Phi((mu_f - mu_g) / (sigma_g - sigma_f)) is passed to the quadrature
// as an exact split so the positive-part kink never straddles a cell.
inline IndexReport epsilon_normal(const NormalParams& f, const NormalParams& g,
                                  double rel_tol = 1e-8) {
    if (f.mu == g.mu && f.sigma == g.sigma) {
        throw std::domain_error("index undefined for identical distributions");
    }
    std::vector<double> splits;
    if (f.sigma != g.sigma) {
        const double t_star = normal_cdf((f.mu - g.mu) / (g.sigma - f.sigma));
        if (t_star > 1e-12 && t_star < 1.0 - 1e-12) splits.push_back(t_star);
    }
    return epsilon_analytic([&](double t) { return f.quantile(t); },
                            [&](double t) { return g.quantile(t); }, rel_tol, splits);
}

struct ContourRow {
    double mu{0.0};
    double sigma{1.0};
    double epsilon{0.0};
};

// Index of N(0,1) against N(mu, sigma^2) over a rectangular parameter grid,
// row-major in mu then sigma. The undefined cell (0, 1) is emitted as NaN.
inline std::vector<ContourRow> contour_grid(double mu_min, double mu_max, double sigma_min,
                                            double sigma_max, int resolution,
                                            double rel_tol = 1e-8) {
    if (resolution < 1) throw std::domain_error("contour_grid: resolution must be >= 1");
    if (!(sigma_min > 0.0) || sigma_max < sigma_min || mu_max < mu_min) {
        throw std::domain_error("contour_grid: bad parameter ranges");
    }
    const NormalParams base(0.0, 1.0);
    std::vector<ContourRow> rows;
    rows.reserve(static_cast<std::size_t>(resolution) * resolution);
    for (int i = 0; i < resolution; ++i) {
        const double mu = resolution == 1
                              ? mu_min
                              : mu_min + (mu_max - mu_min) * i / (resolution - 1.0);
        for (int j = 0; j < resolution; ++j) {
            const double sigma = resolution == 1
                                     ? sigma_min
                                     : sigma_min + (sigma_max - sigma_min) * j / (resolution - 1.0);
            ContourRow row{mu, sigma, std::nan("")};
            try {
                row.epsilon = epsilon_normal(base, NormalParams(mu, sigma), rel_tol).epsilon;
            } catch (const std::domain_error&) {
                // identical parameters: leave NaN
            }
            rows.push_back(row);
        }
    }
    return rows;
}

// CSV emission, 6 significant digits per column.
inline void write_contour_csv(std::ostream& os, std::span<const ContourRow> rows) {
    os << "mu,sigma,epsilon\n";
    char buf[128];
    for (const ContourRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g\n", r.mu, r.sigma, r.epsilon);
        os << buf;
    }
}

}  // namespace stochdom
