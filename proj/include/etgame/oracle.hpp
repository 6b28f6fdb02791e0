#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "etgame/core.hpp"
#include "etgame/extensions.hpp"
#include "etgame/types.hpp"

namespace etgame {

/// Brute-force verdict on a candidate symmetric equilibrium.
struct Certification {
    double candidate = 0.0;
    bool is_equilibrium = false;
    double best_deviation = 0.0;
    bool best_is_moment_before = false;
    double gain = 0.0;  // cost saved by the best deviation found
    double se = 0.0;    // standard error of the gain (0 for exact paths)
    double grid_step = 0.0;
    long mc_samples = 0;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
};

namespace detail {

inline double sample_duration(const ServiceTimeModel& m, std::mt19937_64& rng) {
    switch (m.kind) {
    case ServiceKind::DeterministicUnit: return 1.0;
    case ServiceKind::TwoPoint:
        return std::bernoulli_distribution(m.p)(rng) ? m.a : m.b;
    case ServiceKind::Exponential:
        return std::exponential_distribution<double>(m.rate)(rng);
    }
    return 1.0;
}

// Exact deviator cost with unit service and a deterministic population: the
// n-1 others arrive at t, the deviator (cost c) arrives at s.
inline double unit_deviator_cost(double s, double t, int n, const DeviationCost& c, double alpha) {
    if (s < t) return c(s);
    if (s == t) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
            acc += c(t + static_cast<double>(j)) + alpha * static_cast<double>(j);
        return acc / static_cast<double>(n);
    }
    const double start = std::max(s, t + static_cast<double>(n - 1));
    return c(start) + alpha * (start - s);
}

// Exact deviator cost with a random population (M others at t, position pmfs
// p and q as in RandomPopCosts).
inline double random_pop_deviator_cost(double s, double t, const RandomPopCosts& rc,
                                       const DeviationCost& c) {
    if (s < t) return c(s);
    if (s == t) {
        double acc = 0.0;
        for (std::size_t i = 0; i < rc.p.size(); ++i)
            acc += rc.p[i] * c(t + static_cast<double>(i));
        return acc;
    }
    double acc = 0.0;
    for (std::size_t m = 0; m < rc.q.size(); ++m)
        acc += rc.q[m] * c(std::max(t + static_cast<double>(m), s));
    return acc;
}

// E[c(t + B)] where B = a*K + b*(k-K), K ~ Binomial(k, p): the service start
// behind k two-point predecessors.
inline double twopoint_predecessor_cost(double t, int k, const ServiceTimeModel& srv,
                                        const DeviationCost& c) {
    if (k == 0) return c(t);
    double acc = 0.0;
    double logp = std::log(srv.p), logq = std::log1p(-srv.p);
    for (int j = 0; j <= k; ++j) {
        double logw = std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0) +
                      static_cast<double>(j) * logp + static_cast<double>(k - j) * logq;
        const double sum = srv.a * static_cast<double>(j) + srv.b * static_cast<double>(k - j);
        acc += std::exp(logw) * c(t + sum);
    }
    return acc;
}

// Exact deviator cost with two-point service (n-1 others at t, deviator at s).
inline double twopoint_deviator_cost(double s, double t, int n, const ServiceTimeModel& srv,
                                     const DeviationCost& c) {
    if (s < t) return c(s);
    if (s == t) {
        double acc = 0.0;
        for (int r = 0; r < n; ++r) acc += twopoint_predecessor_cost(t, r, srv, c);
        return acc / static_cast<double>(n);
    }
    // served last: start = max(s, t + total of the n-1 others)
    double acc = 0.0;
    const int k = n - 1;
    double logp = std::log(srv.p), logq = std::log1p(-srv.p);
    for (int j = 0; j <= k; ++j) {
        double logw = std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0) +
                      static_cast<double>(j) * logp + static_cast<double>(k - j) * logq;
        const double sum = srv.a * static_cast<double>(j) + srv.b * static_cast<double>(k - j);
        acc += std::exp(logw) * c(std::max(s, t + sum));
    }
    return acc;
}

struct Candidate {
    double s = 0.0;
    bool moment_before = false;  // left limit at s: serve-first cost c(s)
};

inline std::vector<Candidate> deviation_candidates(double t, int horizon, double grid_step,
                                                   const Scenario& scenario) {
    std::vector<Candidate> cand;
    const double lo_w = scenario.availability ? scenario.availability->first
                                              : -std::numeric_limits<double>::infinity();
    const double hi_w = scenario.availability ? scenario.availability->second
                                              : std::numeric_limits<double>::infinity();
    auto push = [&](double s) {
        if (s >= lo_w && s <= hi_w && s != t) cand.push_back({s, false});
    };
    if (t > lo_w) cand.push_back({t, true});
    push(t + static_cast<double>(horizon));
    push(0.0);
    for (const auto& c : scenario.costs) push(c.d);
    if (scenario.availability) {
        push(scenario.availability->first);
        push(scenario.availability->second);
    }
    for (double s = t - 1.0; s <= t + static_cast<double>(horizon) + 1.0 + 0.5 * grid_step;
         s += grid_step)
        push(s);
    return cand;
}

}  // namespace detail

/// Verifies that arriving at t along with everyone else is an equilibrium by
/// evaluating every deviation candidate: analytic points, the symbolic
/// "moment before t" left limit, and a grid over [t-1, t+n]. Deterministic
/// scenarios are evaluated exactly (two-point service by lottery enumeration);
/// exponential service uses common-random-numbers Monte Carlo.
inline Certification certify_symmetric(double t, const Scenario& scenario, double grid_step = 0.01,
                                       double epsilon = -1.0, long mc_samples = 200000,
                                       std::uint64_t seed = 12345) {
    scenario.validate();
    if (!(grid_step > 0.0)) throw std::invalid_argument("grid_step must be positive");
    const bool stochastic = scenario.service.stochastic();
    if (stochastic && scenario.alpha > 0.0)
        throw unsupported_error("waiting costs with stochastic service are out of scope");
    if (stochastic && scenario.availability)
        throw unsupported_error("availability windows with stochastic service are out of scope");
    if (stochastic && scenario.population.kind != PopulationKind::Deterministic)
        throw unsupported_error("random population with stochastic service is out of scope");
    if (scenario.population.kind != PopulationKind::Deterministic && scenario.alpha > 0.0)
        throw unsupported_error("waiting costs with random population are out of scope");
    const bool mc = scenario.service.kind == ServiceKind::Exponential;
    if (epsilon < 0.0) epsilon = mc ? 1e-3 : 1e-6;
    if (mc && mc_samples < 100000)
        throw std::invalid_argument("stochastic certification needs mc_samples >= 1e5");

    Certification cert;
    cert.candidate = t;
    cert.grid_step = grid_step;
    cert.seed = seed;
    cert.epsilon = epsilon;
    cert.gain = -std::numeric_limits<double>::infinity();

    const bool random_pop = scenario.population.kind != PopulationKind::Deterministic;
    const int n = random_pop ? 0 : scenario.deterministic_n();

    if (!mc) {
        std::optional<detail::RandomPopCosts> rc;
        int horizon = n - 1;
        if (random_pop) {
            rc = detail::make_random_pop_costs(scenario.population, scenario.costs[0].beta,
                                               scenario.costs[0].gamma, 1e-12);
            horizon = static_cast<int>(rc->p.size());
        }
        const auto cands = detail::deviation_candidates(t, std::max(horizon, 1), grid_step,
                                                        scenario);
        const int num_players = random_pop ? 1 : (scenario.costs.size() > 1 ? n : 1);
        for (int i = 0; i < num_players; ++i) {
            const DeviationCost& c = scenario.cost_of(i);
            double base;
            if (random_pop)
                base = detail::random_pop_deviator_cost(t, t, *rc, c);
            else if (scenario.service.kind == ServiceKind::TwoPoint)
                base = detail::twopoint_deviator_cost(t, t, n, scenario.service, c);
            else
                base = detail::unit_deviator_cost(t, t, n, c, scenario.alpha);
            for (const auto& cd : cands) {
                double v;
                if (cd.moment_before)
                    v = c(t);  // serve-first left limit, zero waiting
                else if (random_pop)
                    v = detail::random_pop_deviator_cost(cd.s, t, *rc, c);
                else if (scenario.service.kind == ServiceKind::TwoPoint)
                    v = detail::twopoint_deviator_cost(cd.s, t, n, scenario.service, c);
                else
                    v = detail::unit_deviator_cost(cd.s, t, n, c, scenario.alpha);
                const double g = base - v;
                if (g > cert.gain) {
                    cert.gain = g;
                    cert.best_deviation = cd.s;
                    cert.best_is_moment_before = cd.moment_before;
                }
            }
        }
        cert.is_equilibrium = cert.gain <= epsilon;
        return cert;
    }

    // exponential service: paired Monte Carlo with shared duration and rank
    // draws across all candidates
    cert.mc_samples = mc_samples;
    const DeviationCost& c = scenario.costs[0];
    const auto cands = detail::deviation_candidates(t, n - 1, grid_step, scenario);

    std::mt19937_64 rng(seed);
    std::vector<double> others(static_cast<std::size_t>(n - 1));
    std::vector<double> prefix(static_cast<std::size_t>(n));  // prefix sums of others
    std::uniform_int_distribution<int> rank_dist(0, n - 1);

    std::vector<double> mean_diff(cands.size(), 0.0), m2_diff(cands.size(), 0.0);
    for (long sidx = 0; sidx < mc_samples; ++sidx) {
        for (auto& d : others) d = detail::sample_duration(scenario.service, rng);
        prefix[0] = 0.0;
        for (std::size_t j = 0; j < others.size(); ++j) prefix[j + 1] = prefix[j] + others[j];
        const int rank = rank_dist(rng);  // deviator's lottery rank when tied
        const double base = c(t + prefix[static_cast<std::size_t>(rank)]);
        const double total = prefix.back();
        for (std::size_t k = 0; k < cands.size(); ++k) {
            double v;
            if (cands[k].moment_before || cands[k].s < t)
                v = c(cands[k].moment_before ? t : cands[k].s);
            else
                v = c(std::max(cands[k].s, t + total));
            const double diff = base - v;
            const double delta = diff - mean_diff[k];
            mean_diff[k] += delta / static_cast<double>(sidx + 1);
            m2_diff[k] += delta * (diff - mean_diff[k]);
        }
    }
    double best_bound = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cands.size(); ++k) {
        const double se =
            std::sqrt(m2_diff[k] / (static_cast<double>(mc_samples) *
                                    static_cast<double>(mc_samples - 1)));
        if (mean_diff[k] > cert.gain) {
            cert.gain = mean_diff[k];
            cert.best_deviation = cands[k].s;
            cert.best_is_moment_before = cands[k].moment_before;
            cert.se = se;
        }
        best_bound = std::max(best_bound, mean_diff[k] - 3.0 * se);
    }
    cert.is_equilibrium = cert.gain <= epsilon + 3.0 * cert.se;
    return cert;
}

/// Exhaustive scan over grid profiles with at least two distinct arrival
/// times; returns those where no player has a profitable deviation. Expected
/// empty: asymmetric pure equilibria should not exist.
inline std::vector<ArrivalProfile> asymmetric_scan(int n, double beta, double gamma,
                                                   double grid_step, double epsilon) {
    if (n < 2 || n > 4) throw std::invalid_argument("asymmetric_scan supports 2 <= n <= 4");
    if (!(grid_step > 0.0) || !(epsilon > 0.0))
        throw std::invalid_argument("grid_step and epsilon must be positive");

    const DeviationCost c = DeviationCost::linear(0.0, gamma, beta);
    Scenario scenario;
    scenario.population = PopulationModel::deterministic(n);
    scenario.costs = {c};

    std::vector<double> grid;
    for (double x = -static_cast<double>(n); x <= 1.0 + 0.5 * grid_step; x += grid_step)
        grid.push_back(x);
    const std::size_t g = grid.size();

    // busy-until at x contributed by the arrivals strictly before x
    auto busy_before = [&](const std::vector<double>& others, double x) {
        std::vector<double> early;
        for (double v : others)
            if (v < x) early.push_back(v);
        std::sort(early.begin(), early.end());
        double busy = -std::numeric_limits<double>::infinity();
        for (double v : early) busy = std::max(busy, v) + 1.0;
        return busy;
    };

    std::vector<ArrivalProfile> survivors;
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        bool distinct = false;
        for (int j = 1; j < n; ++j)
            if (idx[static_cast<std::size_t>(j)] != idx[0]) distinct = true;
        if (distinct) {
            ArrivalProfile profile;
            for (std::size_t j = 0; j < idx.size(); ++j)
                profile.times.push_back(grid[idx[j]]);
            const std::vector<double> costs = expected_profile_cost(profile, scenario);

            bool refuted = false;
            for (int i = 0; i < n && !refuted; ++i) {
                std::vector<double> others;
                for (int j = 0; j < n; ++j)
                    if (j != i) others.push_back(profile.times[static_cast<std::size_t>(j)]);
                // moment-before candidates first: the cheapest refutations
                for (double x : others) {
                    const double start = std::max(x, busy_before(others, x));
                    if (costs[static_cast<std::size_t>(i)] - c(start) > epsilon) {
                        refuted = true;
                        break;
                    }
                }
                if (refuted) break;
                double end = -std::numeric_limits<double>::infinity();
                {
                    std::vector<double> sorted = others;
                    std::sort(sorted.begin(), sorted.end());
                    for (double v : sorted) end = std::max(end, v) + 1.0;
                }
                std::vector<double> extra{0.0, end};
                for (double s : extra) {
                    ArrivalProfile dev = profile;
                    dev.times[static_cast<std::size_t>(i)] = s;
                    const double v = expected_profile_cost(dev, scenario)[static_cast<std::size_t>(i)];
                    if (costs[static_cast<std::size_t>(i)] - v > epsilon) {
                        refuted = true;
                        break;
                    }
                }
                for (std::size_t k = 0; k < g && !refuted; ++k) {
                    ArrivalProfile dev = profile;
                    dev.times[static_cast<std::size_t>(i)] = grid[k];
                    const double v = expected_profile_cost(dev, scenario)[static_cast<std::size_t>(i)];
                    if (costs[static_cast<std::size_t>(i)] - v > epsilon) refuted = true;
                }
            }
            if (!refuted) survivors.push_back(std::move(profile));
        }
        // next nondecreasing index tuple
        int pos = n - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == g - 1) --pos;
        if (pos < 0) break;
        const std::size_t v = ++idx[static_cast<std::size_t>(pos)];
        for (int j = pos + 1; j < n; ++j) idx[static_cast<std::size_t>(j)] = v;
    }
    return survivors;
}

/// Monte Carlo estimate of the symmetric arrival cost at t (customer 0's
/// expected cost when everyone arrives at t). The tie lottery is enumerated
/// exactly for unit service with n <= 7; otherwise tie orders and durations
/// are sampled through fcfs_schedule.
inline std::pair<double, double> mc_symmetric_cost(double t, const Scenario& scenario,
                                                   long samples, std::uint64_t seed) {
    scenario.validate();
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    const int n = scenario.deterministic_n();

    if (!scenario.service.stochastic() && n <= 7) {
        const DeviationCost& c = scenario.cost_of(0);
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
            acc += c(t + static_cast<double>(j)) + scenario.alpha * static_cast<double>(j);
        return {acc / static_cast<double>(n), 0.0};
    }

    std::mt19937_64 rng(seed);
    ArrivalProfile profile;
    profile.times.assign(static_cast<std::size_t>(n), t);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> durations(static_cast<std::size_t>(n));
    const DeviationCost& c = scenario.cost_of(0);

    double mean = 0.0, m2 = 0.0;
    for (long sidx = 0; sidx < samples; ++sidx) {
        std::shuffle(order.begin(), order.end(), rng);
        for (auto& d : durations) d = detail::sample_duration(scenario.service, rng);
        const ServiceSchedule sched = fcfs_schedule(profile, durations, order);
        double start = 0.0;
        for (std::size_t j = 0; j < order.size(); ++j)
            if (order[j] == 0) start = sched.starts[j];
        const double x = c(start) + scenario.alpha * (start - t);
        const double delta = x - mean;
        mean += delta / static_cast<double>(sidx + 1);
        m2 += delta * (x - mean);
    }
    const double se = samples > 1 ? std::sqrt(m2 / (static_cast<double>(samples) *
                                                    static_cast<double>(samples - 1)))
                                  : 0.0;
    return {mean, se};
}

}  // namespace etgame
