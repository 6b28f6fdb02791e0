#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "etgame/social.hpp"
#include "etgame/types.hpp"

namespace etgame {

/// Expected cost of joining the simultaneous-arrival lottery when all n
/// customers arrive at t (common due date 0, unit service, linear penalties).
inline double symmetric_cost(double t, int n, double beta, double gamma) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = t + static_cast<double>(i);
        acc += s < 0.0 ? -gamma * s : beta * s;
    }
    return acc / static_cast<double>(n);
}

/// Expected cost of arriving at s when all n-1 others arrive at t:
/// first in service for s<t, the lottery at s=t, served after everyone
/// otherwise.
inline double deviation_cost_landscape(double s, double t, int n, double beta, double gamma) {
    auto pen = [&](double x) { return x < 0.0 ? -gamma * x : beta * x; };
    if (s < t) return pen(s);
    if (s == t) return symmetric_cost(t, n, beta, gamma);
    return pen(std::max(t + static_cast<double>(n - 1), s));
}

namespace detail {

// Root of line(t) - c(t;t) = 0 located by bracketing between the integer
// breakpoints of c(t;t) and solving the bracketed segment linearly (exact,
// since both sides are affine there).
template <class Line>
inline double segment_solve(Line line, int n, double beta, double gamma, bool increasing) {
    auto f = [&](double t) { return line(t) - symmetric_cost(t, n, beta, gamma); };
    const int lo_k = -(n - 1);
    double prev_t = static_cast<double>(lo_k);
    double prev_f = f(prev_t);
    for (int k = lo_k + 1; k <= 0; ++k) {
        const double t = static_cast<double>(k);
        const double cur_f = f(t);
        const bool crossed = increasing ? (prev_f <= 0.0 && cur_f >= 0.0)
                                        : (prev_f >= 0.0 && cur_f <= 0.0);
        if (crossed) {
            if (cur_f == prev_f) return prev_t;
            return prev_t + (0.0 - prev_f) * (t - prev_t) / (cur_f - prev_f);
        }
        prev_t = t;
        prev_f = cur_f;
    }
    throw std::runtime_error("segment_solve: no bracketing segment found");
}

}  // namespace detail

/// Base-model equilibrium set: lo solves beta*(t+n-1) = c(t;t), hi solves
/// -gamma*t = c(t;t). Always nonempty; a single point for n = 2.
inline EquilibriumInterval equilibrium_interval(int n, double beta, double gamma) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    if (!(beta > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("beta and gamma must be positive");
    EquilibriumInterval iv;
    iv.lo = detail::segment_solve(
        [&](double t) { return beta * (t + static_cast<double>(n - 1)); }, n, beta, gamma, true);
    iv.hi = detail::segment_solve([&](double t) { return -gamma * t; }, n, beta, gamma, false);
    iv.te = -static_cast<double>(n - 1) * beta / (beta + gamma);
    iv.empty = false;
    return iv;
}

enum class BestResponseKind { Point, MomentBefore, Interval };

struct BestResponse {
    BestResponseKind kind = BestResponseKind::Point;
    double point = 0.0;                 // Point / MomentBefore reference time
    double lo = 0.0, hi = 0.0;          // Interval
    bool lo_closed = false, hi_closed = true;
    bool extrapolated = false;          // beta != gamma extends the tabulated case
};

/// Two-customer best response to the other customer arriving at t. The
/// symmetric-penalty case analysis carries over to beta != gamma with the
/// indifference threshold at -beta/(beta+gamma); that extension is flagged.
inline BestResponse best_response_two(double t, double beta, double gamma) {
    if (!(beta > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("beta and gamma must be positive");
    const double te = -beta / (beta + gamma);
    BestResponse br;
    br.extrapolated = beta != gamma;
    if (t > 0.0 || t < -1.0) {
        br.kind = BestResponseKind::Point;
        br.point = 0.0;
    } else if (t > te) {
        // the infimum -gamma*t is approached by arriving momentarily earlier
        br.kind = BestResponseKind::MomentBefore;
        br.point = t;
    } else if (t == te) {
        br.kind = BestResponseKind::Interval;
        br.lo = t;
        br.hi = t + 1.0;
        br.lo_closed = true;
        br.hi_closed = true;
    } else {
        // -1 <= t < te: serve second at t+1, any arrival in (t, 1+t]
        br.kind = BestResponseKind::Interval;
        br.lo = t;
        br.hi = t + 1.0;
        br.lo_closed = false;
        br.hi_closed = true;
    }
    return br;
}

struct OptEquilibriumCheck {
    bool is_equilibrium = false;
    std::optional<double> witness;  // a time both socially optimal and in tau^e
};

/// A socially optimal symmetric arrival time is an equilibrium iff
/// beta/(beta+gamma) lies in [1/n, 1-1/n].
inline OptEquilibriumCheck is_social_opt_equilibrium(int n, double beta, double gamma) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    const double ratio = beta / (beta + gamma);
    const double inv_n = 1.0 / static_cast<double>(n);
    OptEquilibriumCheck res;
    res.is_equilibrium = ratio >= inv_n - 1e-12 && ratio <= 1.0 - inv_n + 1e-12;
    if (res.is_equilibrium) {
        const SocialOptimum opt = social_optimum_homogeneous(n, beta, gamma);
        const EquilibriumInterval iv = equilibrium_interval(n, beta, gamma);
        const double lo = std::max(opt.s1_lo, iv.lo);
        const double hi = std::min(opt.s1_hi, iv.hi);
        if (lo <= hi + 1e-9)
            res.witness = std::clamp(opt.s1_lo, lo, hi);
        else
            res.witness = iv.te;  // boundary rounding; te is both optimal and equilibrium
    }
    return res;
}

struct PriceOfAnarchyStability {
    double poa = 1.0;
    double pos = 1.0;
};

/// Worst/best equilibrium total cost n*c(t;t) over tau^e, relative to the
/// socially optimal total cost. n*c(t;t) is piecewise linear on tau^e, so
/// extrema are found among the endpoints and interior integer breakpoints.
inline PriceOfAnarchyStability price_of_anarchy_stability(int n, double beta, double gamma) {
    const EquilibriumInterval iv = equilibrium_interval(n, beta, gamma);
    const SocialOptimum opt = social_optimum_homogeneous(n, beta, gamma);
    std::vector<double> cand{iv.lo, iv.hi};
    for (double k = std::ceil(iv.lo); k <= std::floor(iv.hi); k += 1.0) cand.push_back(k);
    double worst = 0.0, best = std::numeric_limits<double>::infinity();
    for (double t : cand) {
        const double tc = static_cast<double>(n) * symmetric_cost(t, n, beta, gamma);
        worst = std::max(worst, tc);
        best = std::min(best, tc);
    }
    return {worst / opt.total_cost, best / opt.total_cost};
}

struct OptRegionRow {
    int n;
    double ratio_lo;  // 1/n
    double ratio_hi;  // 1 - 1/n
};

/// Boundary of the (n, beta/(beta+gamma)) region where a socially optimal
/// equilibrium exists.
inline std::vector<OptRegionRow> opt_equilibrium_region(int n_from, int n_to) {
    if (n_from < 2 || n_to < n_from) throw std::invalid_argument("need 2 <= n_from <= n_to");
    std::vector<OptRegionRow> rows;
    for (int n = n_from; n <= n_to; ++n)
        rows.push_back({n, 1.0 / static_cast<double>(n), 1.0 - 1.0 / static_cast<double>(n)});
    return rows;
}

}  // namespace etgame
