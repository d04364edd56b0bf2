#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stochdom/common.hpp"

namespace stochdom::quad {

// 16-point Gauss-Legendre rule on [-1, 1], positive half.
inline constexpr std::array<double, 8> kGL16Nodes = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
inline constexpr std::array<double, 8> kGL16Weights = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

// Open rule: never evaluates at the interval endpoints.
template <class F>
double gauss16(F&& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
        const double x = h * kGL16Nodes[i];
        acc += kGL16Weights[i] * (f(c - x) + f(c + x));
    }
    return acc * h;
}

// Partition of [0, 1] graded geometrically toward both endpoints (dyadic
// points 2^-j and 1 - 2^-j down to 2^-depth), with caller-supplied interior
// split points inserted exactly.
inline std::vector<double> graded_unit_grid(int depth, std::span<const double> splits) {
    std::vector<double> pts;
    pts.push_back(0.0);
    for (int j = depth; j >= 1; --j) pts.push_back(std::ldexp(1.0, -j));
    for (int j = 2; j <= depth; ++j) pts.push_back(1.0 - std::ldexp(1.0, -j));
    pts.push_back(1.0);
    for (double s : splits) {
        if (s > 0.0 && s < 1.0) pts.push_back(s);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

// Adaptive-by-doubling quadrature of a pair-valued integrand over (0, 1).
// Each refinement level deepens the endpoint grading and doubles the number
// of Gauss cells per grid interval; stops when both components move by less
// than rel_tol relative to their magnitude.
template <class F2>
std::pair<double, double> integrate_unit_pair(F2&& f, double rel_tol = 1e-8,
                                              std::span<const double> splits = {}) {
    if (!(rel_tol > 0.0)) throw std::domain_error("integrate_unit_pair: bad tolerance");
    // Deep grading puts nodes closer to 1 than the double spacing there;
    // clamp arguments to the open representable interval so integrand
    // callables never see the endpoints.
    const double hi_clamp = std::nextafter(1.0, 0.0);
    constexpr double lo_clamp = 1e-300;
    const auto eval = [&](double t) { return f(std::min(std::max(t, lo_clamp), hi_clamp)); };
    double prev1 = 0.0, prev2 = 0.0;
    bool have_prev = false;
    for (int level = 0; level <= 8; ++level) {
        const int depth = 16 + 8 * level;
        const int sub = 1 << level;
        const std::vector<double> grid = graded_unit_grid(depth, splits);
        NeumaierSum s1, s2;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const double width = (grid[i + 1] - grid[i]) / sub;
            if (width <= 0.0) continue;
            for (int k = 0; k < sub; ++k) {
                const double a = grid[i] + k * width;
                const double b = a + width;
                const double c = 0.5 * (a + b);
                const double h = 0.5 * (b - a);
                for (std::size_t q = 0; q < 8; ++q) {
                    const double x = h * kGL16Nodes[q];
                    const auto [lo1, lo2] = eval(c - x);
                    const auto [hi1, hi2] = eval(c + x);
                    s1.add(h * kGL16Weights[q] * (lo1 + hi1));
                    s2.add(h * kGL16Weights[q] * (lo2 + hi2));
                }
            }
        }
        const double cur1 = s1.value();
        const double cur2 = s2.value();
        if (have_prev) {
            // Components converge relative to the pair's common magnitude: a
            // component that is negligible against the other only needs to be
            // stable at that joint scale.
            const double scale = std::max({std::abs(cur1), std::abs(cur2), 1e-300});
            if (std::abs(cur1 - prev1) <= rel_tol * scale &&
                std::abs(cur2 - prev2) <= rel_tol * scale) {
                return {cur1, cur2};
            }
        }
        prev1 = cur1;
        prev2 = cur2;
        have_prev = true;
    }
    throw std::runtime_error("integrate_unit_pair: did not converge");
}

template <class F>
double integrate_unit(F&& f, double rel_tol = 1e-8, std::span<const double> splits = {}) {
    return integrate_unit_pair([&](double t) { return std::pair<double, double>(f(t), 0.0); },
                               rel_tol, splits)
        .first;
}

// 15-point Kronrod extension of 7-point Gauss, positive half; node order
// matches kK15Nodes, with Gauss weights on the even-index nodes.
inline constexpr std::array<double, 8> kK15Nodes = {
    0.0000000000000000, 0.2077849550078985, 0.4058451513773972, 0.5860872354676911,
    0.7415311855993945, 0.8648644233597691, 0.9491079123427585, 0.9914553711208126};
inline constexpr std::array<double, 8> kK15Weights = {
    0.2094821410847278, 0.2044329400752989, 0.1903505780647854, 0.1690047266392679,
    0.1406532597155259, 0.1047900103222502, 0.0630920926299786, 0.0229353220105292};
inline constexpr std::array<double, 4> kG7Weights = {
    0.4179591836734694, 0.3818300505051189, 0.2797053914892767, 0.1294849661688697};

// Adaptive bisection with the Gauss-Kronrod error estimate, absolute
// tolerance. Intended for bounded integrands with isolated kinks.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol) {
    if (!(abs_tol > 0.0)) throw std::domain_error("integrate_adaptive: bad tolerance");
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    struct Seg {
        double a, b, tol;
    };
    std::vector<Seg> stack{{a, b, abs_tol}};
    NeumaierSum total;
    int hard_splits = 0;
    while (!stack.empty()) {
        const Seg seg = stack.back();
        stack.pop_back();
        const double c = 0.5 * (seg.a + seg.b);
        const double h = 0.5 * (seg.b - seg.a);
        const double fc = f(c);
        double k15 = kK15Weights[0] * fc;
        double g7 = kG7Weights[0] * fc;
        for (std::size_t i = 1; i < 8; ++i) {
            const double x = h * kK15Nodes[i];
            const double fsum = f(c - x) + f(c + x);
            k15 += kK15Weights[i] * fsum;
            if (i % 2 == 0) g7 += kG7Weights[i / 2] * fsum;
        }
        k15 *= h;
        g7 *= h;
        const double err = std::abs(k15 - g7);
        if (err <= seg.tol || h < 1e-14 * (std::abs(seg.a) + std::abs(seg.b) + 1.0) ||
            ++hard_splits > 200000) {
            total.add(k15);
        } else {
            stack.push_back({seg.a, c, 0.5 * seg.tol});
            stack.push_back({c, seg.b, 0.5 * seg.tol});
        }
    }
    return sign * total.value();
}

}  // namespace stochdom::quad
