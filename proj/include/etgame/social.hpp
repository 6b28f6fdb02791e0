#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "etgame/types.hpp"

namespace etgame {

struct SocialOptimum {
    double s1_lo = 0.0;  // first-start interval endpoints (equal when unique)
    double s1_hi = 0.0;
    double total_cost = 0.0;
    std::optional<std::vector<int>> permutation;  // heterogeneous case: job order
    double s_tilde = 0.0;                         // n*beta/(beta+gamma)
};

/// Total deviation cost of the no-idle schedule s1, s1+1, ..., s1+n-1 with a
/// common due date 0 and linear penalties.
inline double total_cost_of_start(double s1, int n, double beta, double gamma) {
    double tc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = s1 + static_cast<double>(i);
        tc += s < 0.0 ? -gamma * s : beta * s;
    }
    return tc;
}

/// Optimal no-idle schedule for n homogeneous customers with due date 0:
/// the proportion of early jobs equals beta/(beta+gamma).
inline SocialOptimum social_optimum_homogeneous(int n, double beta, double gamma) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!(beta > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("beta and gamma must be positive");
    SocialOptimum opt;
    opt.s_tilde = static_cast<double>(n) * beta / (beta + gamma);
    const double r = std::round(opt.s_tilde);
    if (std::abs(opt.s_tilde - r) < 1e-9 && r >= 1.0) {
        // zero-slope segment: a whole interval of optimal first starts
        opt.s1_lo = -r;
        opt.s1_hi = -r + 1.0;
    } else {
        opt.s1_lo = opt.s1_hi = -std::floor(opt.s_tilde);
    }
    opt.total_cost = total_cost_of_start(opt.s1_lo, n, beta, gamma);
    return opt;
}

namespace detail {

// 1-D minimization of the permutation's total cost over the first start.
// The sum of unimodal costs need not be unimodal, so use a fine grid followed
// by local refinement.
template <class F>
inline std::pair<double, double> grid_refine_min(F f, double lo, double hi,
                                                 double grid_step, double tol) {
    double best_x = lo, best_v = f(lo);
    for (double x = lo; x <= hi + 0.5 * grid_step; x += grid_step) {
        const double v = f(x);
        if (v < best_v) {
            best_v = v;
            best_x = x;
        }
    }
    // golden-section refinement on the bracketing grid cell pair
    double a = std::max(lo, best_x - grid_step);
    double b = std::min(hi, best_x + grid_step);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

}  // namespace detail

/// Brute force over job permutations with a no-idle schedule; inner 1-D
/// minimization over the first start. Ties between permutations break to the
/// lexicographically smallest. Rejects instances whose due dates are spread
/// enough that an idle-gap schedule would beat every no-idle one.
inline SocialOptimum social_optimum_heterogeneous(const std::vector<DeviationCost>& costs) {
    const int n = static_cast<int>(costs.size());
    if (n < 1) throw std::invalid_argument("need at least one cost");
    if (n > 10) throw unsupported_error("heterogeneous brute force limited to n <= 10");

    double d_min = costs[0].d, d_max = costs[0].d;
    for (const auto& c : costs) {
        d_min = std::min(d_min, c.d);
        d_max = std::max(d_max, c.d);
    }
    const double lo = d_min - static_cast<double>(n);
    const double hi = d_max + 1.0;

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);

    SocialOptimum opt;
    bool first = true;
    std::vector<int> best_perm;
    do {
        auto tc = [&](double s1) {
            double v = 0.0;
            for (int j = 0; j < n; ++j)
                v += costs[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])](
                    s1 + static_cast<double>(j));
            return v;
        };
        auto [s1, v] = detail::grid_refine_min(tc, lo, hi, 1e-3, 1e-9);
        if (first || v < opt.total_cost - 1e-12) {
            first = false;
            opt.total_cost = v;
            opt.s1_lo = opt.s1_hi = s1;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    opt.permutation = best_perm;

    // No-idle premise check: if shifting a strict prefix left (or suffix
    // right) of the chosen schedule lowers the cost, the true optimum has an
    // idle gap and the instance is out of scope.
    const double h = 1e-6;
    for (int k = 1; k < n; ++k) {
        double dpre = 0.0, dsuf = 0.0;
        for (int j = 0; j < n; ++j) {
            const auto& c = costs[static_cast<std::size_t>(best_perm[static_cast<std::size_t>(j)])];
            const double s = opt.s1_lo + static_cast<double>(j);
            if (j < k)
                dpre += c(s - h) - c(s);
            else
                dsuf += c(s + h) - c(s);
        }
        if (dpre < -1e-9 || dsuf < -1e-9)
            throw unsupported_error(
                "due dates too spread: optimal schedule would need server idle time");
    }
    return opt;
}

}  // namespace etgame
