#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "etgame/types.hpp"

namespace etgame {

inline double deviation_cost(const DeviationCost& cost, double s) { return cost(s); }

/// FCFS admission dynamics. `service_order` is a permutation of customer ids
/// that must be nondecreasing in arrival time; within each group of equal
/// arrival times it encodes the lottery outcome.
inline ServiceSchedule fcfs_schedule(const ArrivalProfile& profile,
                                     const std::vector<double>& durations,
                                     const std::vector<int>& service_order) {
    const std::size_t n = profile.times.size();
    if (durations.size() != n || service_order.size() != n)
        throw std::invalid_argument("fcfs_schedule: mismatched input lengths");
    for (double x : durations)
        if (!(x > 0.0)) throw std::invalid_argument("fcfs_schedule: durations must be positive");

    std::vector<char> seen(n, 0);
    for (int id : service_order) {
        if (id < 0 || static_cast<std::size_t>(id) >= n || seen[static_cast<std::size_t>(id)])
            throw std::invalid_argument("fcfs_schedule: service_order is not a permutation");
        seen[static_cast<std::size_t>(id)] = 1;
    }
    for (std::size_t j = 1; j < n; ++j)
        if (profile.times[static_cast<std::size_t>(service_order[j])] <
            profile.times[static_cast<std::size_t>(service_order[j - 1])])
            throw std::invalid_argument("fcfs_schedule: service_order must respect arrival order");

    ServiceSchedule sched;
    sched.order = service_order;
    sched.starts.resize(n);
    double prev_completion = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const int id = service_order[j];
        const double t = profile.times[static_cast<std::size_t>(id)];
        const double s = std::max(prev_completion, t);
        sched.starts[j] = s;
        prev_completion = s + durations[static_cast<std::size_t>(id)];
    }
    return sched;
}

namespace detail {

struct TieGroup {
    double arrival;
    std::vector<int> members;  // customer ids
    double first_start;        // start of the group's first slot
};

// Unit-service tie groups: a group of k equal arrivals occupies k consecutive
// unit-spaced slots starting at max(prev completion, arrival), independent of
// the within-group order.
inline std::vector<TieGroup> tie_groups_unit(const ArrivalProfile& profile) {
    const std::size_t n = profile.times.size();
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return profile.times[static_cast<std::size_t>(a)] < profile.times[static_cast<std::size_t>(b)];
    });
    std::vector<TieGroup> groups;
    double busy_until = -std::numeric_limits<double>::infinity();
    std::size_t j = 0;
    while (j < n) {
        const double t = profile.times[static_cast<std::size_t>(idx[j])];
        TieGroup g;
        g.arrival = t;
        while (j < n && profile.times[static_cast<std::size_t>(idx[j])] == t)
            g.members.push_back(idx[j++]);
        g.first_start = std::max(busy_until, t);
        busy_until = g.first_start + static_cast<double>(g.members.size());
        groups.push_back(std::move(g));
    }
    return groups;
}

}  // namespace detail

/// Exact per-customer expected cost of an arrival profile under unit service
/// and a deterministic population. The expectation over the uniform tie
/// lottery is computed by position-averaging: each member of a k-tie occupies
/// each of the group's k consecutive slots with probability 1/k.
inline std::vector<double> expected_profile_cost(const ArrivalProfile& profile,
                                                 const Scenario& scenario) {
    scenario.validate();
    if (scenario.service.stochastic())
        throw unsupported_error(
            "exact profile evaluation needs deterministic unit service; "
            "use the Monte Carlo oracle for stochastic service");
    const int n = scenario.deterministic_n();
    if (static_cast<int>(profile.times.size()) != n)
        throw std::invalid_argument("profile length must match population size");
    if (scenario.availability)
        for (double t : profile.times)
            if (t < scenario.availability->first - 1e-12 ||
                t > scenario.availability->second + 1e-12)
                throw std::invalid_argument("arrival outside the availability window");

    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (const auto& g : detail::tie_groups_unit(profile)) {
        const double k = static_cast<double>(g.members.size());
        for (int id : g.members) {
            const DeviationCost& c = scenario.cost_of(id);
            double acc = 0.0;
            for (std::size_t slot = 0; slot < g.members.size(); ++slot) {
                const double s = g.first_start + static_cast<double>(slot);
                acc += c(s) + scenario.alpha * (s - g.arrival);
            }
            out[static_cast<std::size_t>(id)] = acc / k;
        }
    }
    return out;
}

}  // namespace etgame
