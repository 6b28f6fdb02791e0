#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "etgame/equilibrium.hpp"
#include "etgame/types.hpp"

namespace etgame {

// ---------------------------------------------------------------- restricted

/// Equilibria when arrivals are only admitted during [a, b]: the base-model
/// interval clipped to the window, or the nearest window endpoint when the
/// overlap is empty.
inline EquilibriumInterval restricted_equilibrium(int n, double beta, double gamma, double a,
                                                  double b) {
    if (!(a < b)) throw std::invalid_argument("availability window needs a < b");
    const EquilibriumInterval base = equilibrium_interval(n, beta, gamma);
    EquilibriumInterval iv;
    const double lo = std::max(a, base.lo);
    const double hi = std::min(b, base.hi);
    if (lo <= hi) {
        iv.lo = lo;
        iv.hi = hi;
    } else if (a > base.hi) {
        iv.lo = iv.hi = a;
    } else {  // b < base.lo
        iv.lo = iv.hi = b;
    }
    if (base.te && *base.te >= iv.lo && *base.te <= iv.hi) iv.te = base.te;
    return iv;
}

// -------------------------------------------------------------- waiting cost

struct WaitingCostResult {
    EquilibriumInterval interval;
    double alpha_bar = 0.0;  // largest waiting rate with a pure equilibrium
};

/// Pure symmetric equilibria with waiting rate alpha: everyone arriving at t
/// pays c(t;t) + alpha*(n-1)/2; the best early deviation still pays -gamma*t
/// and the best late deviation arrives exactly at t+n-1 with zero waiting.
inline WaitingCostResult waiting_cost_interval(int n, double beta, double gamma, double alpha) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
    if (!(beta > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("beta and gamma must be positive");

    const double w = alpha * static_cast<double>(n - 1) / 2.0;

    WaitingCostResult res;
    // alpha_bar: h(t) = min(-gamma*t, beta*(t+n-1)) - c(t;t) is concave
    // piecewise linear, so its maximum sits at an integer breakpoint or at
    // the crossing of the two deviation lines (t^e).
    {
        std::vector<double> cand;
        for (int k = -(n - 1); k <= 0; ++k) cand.push_back(static_cast<double>(k));
        cand.push_back(-static_cast<double>(n - 1) * beta / (beta + gamma));
        double hmax = 0.0;
        for (double t : cand) {
            const double h = std::min(-gamma * t, beta * (t + static_cast<double>(n - 1))) -
                             symmetric_cost(t, n, beta, gamma);
            hmax = std::max(hmax, h);
        }
        res.alpha_bar = 2.0 * hmax / static_cast<double>(n - 1);
    }

    try {
        res.interval.lo = detail::segment_solve(
            [&](double t) { return beta * (t + static_cast<double>(n - 1)) - w; }, n, beta, gamma,
            true);
        res.interval.hi =
            detail::segment_solve([&](double t) { return -gamma * t - w; }, n, beta, gamma, false);
        res.interval.empty = res.interval.lo > res.interval.hi + 1e-12;
    } catch (const std::runtime_error&) {
        // waiting rate large enough that a boundary equation has no root
        res.interval.lo = res.interval.hi = std::numeric_limits<double>::quiet_NaN();
        res.interval.empty = true;
    }
    if (!res.interval.empty) {
        const double te = -static_cast<double>(n - 1) * beta / (beta + gamma);
        if (te >= res.interval.lo && te <= res.interval.hi) res.interval.te = te;
    }
    return res;
}

// --------------------------------------------------------- two-point service

/// Two-customer game with service times {1, 2}, each with probability 1/2.
inline double two_point_service_equilibrium(double beta, double gamma) {
    if (!(beta > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("beta and gamma must be positive");
    if (beta <= 2.0 * gamma) return -1.5 * beta / (beta + gamma);
    return -(2.0 * beta - gamma) / (beta + gamma);
}

/// Scope-checked variant: only the analyzed instance (n=2, durations {1,2}
/// with probability 1/2 each) is supported.
inline double two_point_service_equilibrium(int n, const ServiceTimeModel& service, double beta,
                                            double gamma) {
    if (service.kind != ServiceKind::TwoPoint)
        throw unsupported_error("two-point solver needs a two-point service model");
    if (n != 2 || service.a != 1.0 || service.b != 2.0 || service.p != 0.5)
        throw unsupported_error(
            "two-point service solved only for n=2, durations {1,2} with probability 1/2");
    return two_point_service_equilibrium(beta, gamma);
}

// -------------------------------------------------------- exponential service

/// P(Y_k > x) for Y_k the sum of k unit-rate exponentials.
inline double erlang_tail(int k, double x) {
    if (k < 1) throw std::invalid_argument("erlang_tail needs k >= 1");
    if (!(x >= 0.0)) throw std::invalid_argument("erlang_tail needs x >= 0");
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < k; ++j) {
        term *= x / static_cast<double>(j);
        sum += term;
    }
    return std::exp(-x) * sum;
}

/// Expected cost of joining the lottery at t < 0 with unit-rate exponential
/// service, written through Erlang tail probabilities.
inline double exponential_symmetric_cost(double t, int n, double beta, double gamma) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!(t < 0.0)) throw std::invalid_argument("exponential_symmetric_cost needs t < 0");
    double early = -gamma * t;  // the first-in-service slot
    double acc = 0.0;
    for (int i = 1; i < n; ++i) {
        const double ti = erlang_tail(i, -t);
        const double ti1 = erlang_tail(i + 1, -t);
        acc += -gamma * (t * (1.0 - ti) + static_cast<double>(i) * (1.0 - ti1));
        acc += beta * (t * ti + static_cast<double>(i) * ti1);
    }
    return (early + acc) / static_cast<double>(n);
}

/// Expected cost of deviating to s = 0 while the n-1 others arrive at t < 0.
inline double exponential_deviation_to_zero(double t, int n, double beta, double gamma) {
    (void)gamma;
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    if (t >= 0.0) return beta * static_cast<double>(n - 1);
    return beta * (t * erlang_tail(n - 1, -t) +
                   static_cast<double>(n - 1) * erlang_tail(n, -t));
}

namespace detail {

template <class F>
inline double bisect(F f, double lo, double hi, double tol = 1e-13, int max_iter = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw std::runtime_error("bisect: no sign change");
    for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// First sign change of f scanning from `from` towards `to`; returns the
// bracketing pair.
template <class F>
inline std::pair<double, double> scan_bracket(F f, double from, double to, double step) {
    double prev = from;
    double fprev = f(prev);
    const double dir = to > from ? 1.0 : -1.0;
    for (double x = from + dir * step;; x += dir * step) {
        if ((dir > 0 && x > to) || (dir < 0 && x < to)) break;
        const double fx = f(x);
        if (fx == 0.0 || (fx > 0.0) != (fprev > 0.0)) return {std::min(prev, x), std::max(prev, x)};
        prev = x;
        fprev = fx;
    }
    throw std::runtime_error("scan_bracket: no sign change in range");
}

}  // namespace detail

/// Pure symmetric equilibria with exponential service. Empty for n = 2 (the
/// two boundary solutions cross); reported nonemptiness for n > 2 is numeric,
/// not a theorem.
inline EquilibriumInterval exponential_equilibrium_interval(int n, double beta, double gamma) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    const double bound = -20.0 * static_cast<double>(n);
    auto u = [&](double t) { return -gamma * t - exponential_symmetric_cost(t, n, beta, gamma); };
    auto v = [&](double t) {
        return exponential_deviation_to_zero(t, n, beta, gamma) -
               exponential_symmetric_cost(t, n, beta, gamma);
    };
    EquilibriumInterval iv;
    {
        auto [lo, hi] = detail::scan_bracket(u, -1e-9, bound, 0.05);
        iv.hi = detail::bisect(u, lo, hi);
    }
    {
        auto [lo, hi] = detail::scan_bracket(v, -1e-9, bound, 0.05);
        iv.lo = detail::bisect(v, lo, hi);
    }
    iv.empty = iv.lo > iv.hi + 1e-12;
    return iv;
}

// ---------------------------------------------------------- random population

struct PositionPmf {
    std::vector<double> p;  // p[i-1] = P(served i-th | arrive) = P(N>=i)/E[N]
    double tail_mass = 0.0;
    std::size_t truncation_index() const { return p.size(); }
};

inline PositionPmf position_pmf(const PopulationModel& pop, double truncation_eps = 1e-12) {
    const std::vector<double> pmf = pop.pmf(truncation_eps);
    double mean = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) mean += static_cast<double>(k) * pmf[k];
    if (!(mean > 0.0)) throw std::invalid_argument("population mean must be positive");
    PositionPmf out;
    // survival P(N >= i) via backwards accumulation of the truncated pmf
    std::vector<double> surv(pmf.size() + 1, 0.0);
    for (std::size_t k = pmf.size(); k-- > 0;) surv[k] = surv[k + 1] + pmf[k];
    for (std::size_t i = 1; i < surv.size(); ++i) {
        const double pi = surv[i] / mean;
        if (pi < truncation_eps && i > 1) {
            out.tail_mass += pi;
            continue;
        }
        out.p.push_back(pi);
    }
    return out;
}

struct RandomPopResult {
    EquilibriumInterval interval;
    double t_star_lo = 0.0;  // socially optimal symmetric arrival times
    double t_star_hi = 0.0;
    bool opt_is_equilibrium = false;
};

namespace detail {

struct RandomPopCosts {
    std::vector<double> p;  // p[i] = probability of service position i+1
    std::vector<double> q;  // q[m] = P(M = m) additional customers
    double beta, gamma;

    double symmetric(double t) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double s = t + static_cast<double>(i);
            acc += p[i] * (s < 0.0 ? -gamma * s : beta * s);
        }
        return acc;
    }

    double deviate_zero(double t) const {
        // arrive at 0: served after the M others, start max(t + M, 0)
        double acc = 0.0;
        for (std::size_t m = 0; m < q.size(); ++m) {
            const double s = std::max(t + static_cast<double>(m), 0.0);
            acc += q[m] * beta * s;
        }
        return acc;
    }

    // slope of symmetric(t) on the segment with i_t = k
    double slope(int k) const {
        double a = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            a += static_cast<int>(i) <= k ? -gamma * p[i] : beta * p[i];
        return a;
    }
};

inline RandomPopCosts make_random_pop_costs(const PopulationModel& pop, double beta, double gamma,
                                            double eps) {
    RandomPopCosts rc;
    rc.beta = beta;
    rc.gamma = gamma;
    rc.p = position_pmf(pop, eps).p;
    const std::vector<double> pmf = pop.pmf(eps);
    double mean = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) mean += static_cast<double>(k) * pmf[k];
    rc.q.resize(pmf.size() > 0 ? pmf.size() - 1 : 0);
    for (std::size_t m = 0; m + 1 < pmf.size(); ++m)
        rc.q[m] = static_cast<double>(m + 1) * pmf[m + 1] / mean;
    return rc;
}

// Both boundary differences are monotone and piecewise linear with integer
// breakpoints; locate the bracketing unit segment and interpolate exactly.
template <class F>
inline double integer_segment_root(F f, int k_max) {
    double prev_t = 0.0, prev_f = f(0.0);
    for (int k = 1; k <= k_max; ++k) {
        const double t = -static_cast<double>(k);
        const double cur_f = f(t);
        if (cur_f == 0.0) return t;
        if ((cur_f > 0.0) != (prev_f > 0.0))
            return prev_t + (0.0 - prev_f) * (t - prev_t) / (cur_f - prev_f);
        prev_t = t;
        prev_f = cur_f;
    }
    throw std::runtime_error("integer_segment_root: no sign change");
}

}  // namespace detail

/// Equilibrium interval and socially optimal symmetric arrival time when the
/// number of customers is random with position weights p_i = P(N>=i)/E[N].
inline RandomPopResult random_pop_interval(const PopulationModel& pop, double beta, double gamma,
                                           double truncation_eps = 1e-12) {
    if (!(beta > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("beta and gamma must be positive");
    const auto rc = detail::make_random_pop_costs(pop, beta, gamma, truncation_eps);
    const int k_max = static_cast<int>(rc.p.size()) + 1;

    RandomPopResult res;
    res.interval.hi = detail::integer_segment_root(
        [&](double t) { return -gamma * t - rc.symmetric(t); }, k_max);
    res.interval.lo = detail::integer_segment_root(
        [&](double t) { return rc.deviate_zero(t) - rc.symmetric(t); }, k_max);
    res.interval.empty = res.interval.lo > res.interval.hi + 1e-12;

    // social optimum: slopes are nonincreasing in the early-slot count k, so
    // the minimum sits at the integer where the slope changes sign
    int k_star = -1;  // largest k with slope > 0
    for (int k = 0; k < k_max; ++k) {
        if (rc.slope(k) > 1e-15)
            k_star = k;
        else
            break;
    }
    res.t_star_hi = -static_cast<double>(k_star + 1);
    if (k_star == -1 && rc.slope(0) >= -1e-15 && std::abs(rc.slope(0)) <= 1e-12) {
        // flat first segment
        res.t_star_hi = 0.0;
        res.t_star_lo = -1.0;
    } else if (k_star == -1) {
        res.t_star_lo = res.t_star_hi = rc.slope(0) > 0.0 ? -1.0 : 0.0;
    } else if (k_star + 1 < k_max && std::abs(rc.slope(k_star + 1)) <= 1e-12) {
        res.t_star_lo = -static_cast<double>(k_star + 2);
    } else {
        res.t_star_lo = res.t_star_hi;
    }

    res.opt_is_equilibrium = !res.interval.empty &&
                             std::max(res.t_star_lo, res.interval.lo) <=
                                 std::min(res.t_star_hi, res.interval.hi) + 1e-9;
    return res;
}

struct PoissonBoundaryRow {
    double lambda;
    double minimal_ratio;  // smallest beta/(beta+gamma) with an optimal equilibrium
};

/// Tabulated boundary of the region where arriving one service slot before
/// the socially optimal slot t* is supported. For each lambda, the minimal
/// tardiness share r = beta/(beta+gamma) (scanned over multiples of
/// ratio_step) such that the reference candidate u = t* - 1 weakly beats both
/// benchmark deviations: arriving momentarily earlier (cost -gamma*u) and
/// falling in behind the whole crowd (cost beta*(u + lambda + 1)).
inline std::vector<PoissonBoundaryRow> poisson_opt_equilibrium_boundary(
    const std::vector<double>& lambda_grid, double ratio_step = 0.02) {
    if (!(ratio_step > 0.0 && ratio_step < 1.0))
        throw std::invalid_argument("ratio_step must be in (0,1)");
    std::vector<PoissonBoundaryRow> rows;
    for (double lambda : lambda_grid) {
        const PopulationModel pop = PopulationModel::poisson(lambda);
        double found = std::numeric_limits<double>::quiet_NaN();
        for (int k = 1; static_cast<double>(k) * ratio_step < 1.0 - 0.5 * ratio_step; ++k) {
            const double r = static_cast<double>(k) * ratio_step;
            const double beta = r, gamma = 1.0 - r;
            const auto rc = detail::make_random_pop_costs(pop, beta, gamma, 1e-12);
            const double u = random_pop_interval(pop, beta, gamma).t_star_hi - 1.0;
            const double c = rc.symmetric(u);
            if (-gamma * u >= c - 1e-12 && beta * (u + lambda + 1.0) >= c - 1e-12) {
                found = r;
                break;
            }
        }
        rows.push_back({lambda, found});
    }
    return rows;
}

// ----------------------------------------------- heterogeneous / non-linear

struct TauI {
    int i = 0;      // customer id
    double lo = 0;  // smallest symmetric time the customer accepts
    double hi = 0;  // largest
};

namespace detail {

inline void require_unimodal(const DeviationCost& c, int n) {
    std::vector<double> samples;
    for (double x = c.d - 2.0 * static_cast<double>(n) - 2.0;
         x <= c.d + 2.0 * static_cast<double>(n) + 2.0; x += 0.25)
        samples.push_back(x);
    if (!satisfies_unimodal_assumption(c, samples))
        throw std::invalid_argument("cost violates the unimodality assumption");
}

// Root of f with f(start) < 0, widening the bracket away from `start` in
// direction `dir` (doubling up to 4 times) until the sign flips.
template <class F>
inline double widen_and_bisect(F f, double start, double dir, double initial_width) {
    double width = initial_width;
    for (int attempt = 0; attempt < 5; ++attempt) {
        const double far = start + dir * width;
        if (f(far) > 0.0) {
            double lo = std::min(start, far), hi = std::max(start, far);
            return bisect(f, lo, hi);
        }
        width *= 2.0;
    }
    throw std::runtime_error("root bracket not found");
}

}  // namespace detail

/// Interval of symmetric arrival times that customer i tolerates among n
/// customers: the boundaries equate the cost of the extreme service slot with
/// the average of the other slots.
inline TauI tau_i(const DeviationCost& cost, int n, int customer_id = 0) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    detail::require_unimodal(cost, n);
    const double nm1 = static_cast<double>(n - 1);

    auto up = [&](double t) {
        double avg = 0.0;
        for (int j = 1; j <= n - 1; ++j) avg += cost(t + static_cast<double>(j));
        return cost(t) - avg / nm1;  // > 0 left of hi
    };
    auto down = [&](double t) {
        double avg = 0.0;
        for (int j = 0; j <= n - 2; ++j) avg += cost(t + static_cast<double>(j));
        return cost(t + nm1) - avg / nm1;  // > 0 right of lo
    };

    TauI tau;
    tau.i = customer_id;
    tau.hi = detail::widen_and_bisect(up, cost.d, -1.0, static_cast<double>(n));
    tau.lo = detail::widen_and_bisect(down, cost.d - nm1, +1.0, static_cast<double>(n));
    if (tau.lo > tau.hi + 1e-9)
        throw std::runtime_error("tau_i: interval unexpectedly empty");
    tau.lo = std::min(tau.lo, tau.hi);
    return tau;
}

struct HeterogeneousResult {
    EquilibriumInterval interval;
    std::vector<TauI> taus;
    bool premise_verified = true;  // due dates close enough for the no-idle premise
};

/// Symmetric equilibria with heterogeneous unimodal costs, computed through
/// both representations (per-customer interval intersection, and the min-ratio
/// root characterization) and cross-checked.
inline HeterogeneousResult heterogeneous_interval(const std::vector<DeviationCost>& costs) {
    const int n = static_cast<int>(costs.size());
    if (n < 2) throw std::invalid_argument("need at least two customers");
    HeterogeneousResult res;

    double lo_a = -std::numeric_limits<double>::infinity();
    double hi_a = std::numeric_limits<double>::infinity();
    double d_min = costs[0].d, d_max = costs[0].d;
    for (int i = 0; i < n; ++i) {
        TauI tau = tau_i(costs[static_cast<std::size_t>(i)], n, i);
        lo_a = std::max(lo_a, tau.lo);
        hi_a = std::min(hi_a, tau.hi);
        d_min = std::min(d_min, costs[static_cast<std::size_t>(i)].d);
        d_max = std::max(d_max, costs[static_cast<std::size_t>(i)].d);
        res.taus.push_back(tau);
    }

    auto ratio_min = [&](double t, bool last_slot) {
        double mn = std::numeric_limits<double>::infinity();
        for (const auto& c : costs) {
            double denom = 0.0;
            for (int j = 1; j <= n; ++j) denom += c(t + static_cast<double>(j - 1));
            const double num = last_slot ? c(t + static_cast<double>(n - 1)) : c(t);
            mn = std::min(mn, denom > 0.0 ? num / denom : std::numeric_limits<double>::infinity());
        }
        return mn;
    };
    const double inv_n = 1.0 / static_cast<double>(n);
    // M(t) - 1/n crosses zero at the lower endpoint, m(t) - 1/n at the upper
    auto M = [&](double t) { return ratio_min(t, true) - inv_n; };
    auto m = [&](double t) { return ratio_min(t, false) - inv_n; };
    const double lo_b =
        detail::widen_and_bisect(M, d_min - static_cast<double>(n - 1), +1.0,
                                 2.0 * static_cast<double>(n));
    const double hi_b = detail::widen_and_bisect(m, d_max, -1.0, 2.0 * static_cast<double>(n));

    if (std::abs(lo_a - lo_b) > 1e-8 || std::abs(hi_a - hi_b) > 1e-8)
        throw std::runtime_error("heterogeneous_interval: representations disagree");

    res.interval.lo = lo_a;
    res.interval.hi = hi_a;
    res.interval.empty = lo_a > hi_a + 1e-9;
    // due dates spanning a full service slot leave the no-idle premise of the
    // interval characterization unverified; certification is then mandatory
    res.premise_verified = d_max - d_min < 1.0;
    return res;
}

/// Heterogeneous linear penalties with a common due date 0, customers ordered
/// by gamma_i/beta_i: the interval is pinned by the extreme customers.
inline EquilibriumInterval ordered_linear_interval(const std::vector<double>& gammas,
                                                   const std::vector<double>& betas) {
    const int n = static_cast<int>(gammas.size());
    if (n < 2 || betas.size() != gammas.size())
        throw std::invalid_argument("need matching gamma/beta lists, n >= 2");
    for (int i = 0; i < n; ++i)
        if (!(gammas[static_cast<std::size_t>(i)] > 0.0) ||
            !(betas[static_cast<std::size_t>(i)] > 0.0))
            throw std::invalid_argument("rates must be positive");

    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return gammas[static_cast<std::size_t>(a)] / betas[static_cast<std::size_t>(a)] <
               gammas[static_cast<std::size_t>(b)] / betas[static_cast<std::size_t>(b)];
    });
    const int first = idx.front(), last = idx.back();
    const TauI tau_first =
        tau_i(DeviationCost::linear(0.0, gammas[static_cast<std::size_t>(first)],
                                    betas[static_cast<std::size_t>(first)]),
              n, first);
    const TauI tau_last =
        tau_i(DeviationCost::linear(0.0, gammas[static_cast<std::size_t>(last)],
                                    betas[static_cast<std::size_t>(last)]),
              n, last);
    EquilibriumInterval iv;
    iv.lo = tau_last.lo;
    iv.hi = tau_first.hi;
    iv.empty = iv.lo > iv.hi + 1e-9;
    return iv;
}

}  // namespace etgame
