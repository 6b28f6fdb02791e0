#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace etgame {

// Offset used when a "momentarily before" arrival has to be realized as an
// actual grid candidate. Analytic paths evaluate the left limit symbolically
// instead.
inline constexpr double EPS_BEFORE = 1e-9;

// Thrown when a scenario combines features outside the analyzed model space
// (e.g. waiting costs together with stochastic service).
class unsupported_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CostKind { LinearAsymmetric, QuadraticAsymmetric, Tabulated };

/// Per-customer penalty as a function of the service start time.
/// Zero at the due date d, decreasing before it, increasing after it.
struct DeviationCost {
    CostKind kind = CostKind::LinearAsymmetric;
    double d = 0.0;      // due date (ideal service start)
    double gamma = 0.0;  // earliness rate
    double beta = 0.0;   // tardiness rate
    // Tabulated only: sampled (s, value) breakpoints of a unimodal function,
    // strictly increasing in s, value 0 at s = d.
    std::vector<std::pair<double, double>> table;

    double operator()(double s) const {
        switch (kind) {
        case CostKind::LinearAsymmetric:
            return gamma * std::max(0.0, d - s) + beta * std::max(0.0, s - d);
        case CostKind::QuadraticAsymmetric: {
            const double x = s - d;
            return (x < 0.0 ? gamma : beta) * x * x;
        }
        case CostKind::Tabulated:
            return eval_table(s);
        }
        return 0.0;
    }

    static DeviationCost linear(double d, double gamma, double beta) {
        check_rates(gamma, beta);
        return {CostKind::LinearAsymmetric, d, gamma, beta, {}};
    }

    static DeviationCost quadratic(double d, double gamma, double beta) {
        check_rates(gamma, beta);
        return {CostKind::QuadraticAsymmetric, d, gamma, beta, {}};
    }

    static DeviationCost tabulated(double d, std::vector<std::pair<double, double>> pts) {
        if (pts.size() < 3)
            throw std::invalid_argument("tabulated cost needs at least 3 breakpoints");
        for (std::size_t i = 1; i < pts.size(); ++i)
            if (!(pts[i].first > pts[i - 1].first))
                throw std::invalid_argument("tabulated breakpoints must be strictly increasing in s");
        DeviationCost c{CostKind::Tabulated, d, 0.0, 0.0, std::move(pts)};
        c.check_unimodal_table();
        return c;
    }

private:
    static void check_rates(double gamma, double beta) {
        if (!(gamma >= 0.0) || !(beta >= 0.0))
            throw std::invalid_argument("cost rates must be nonnegative");
    }

    double eval_table(double s) const {
        // Piecewise-linear interpolation; extrapolate with the end slopes.
        const auto& t = table;
        if (s <= t.front().first) {
            const double sl = (t[1].second - t[0].second) / (t[1].first - t[0].first);
            return t[0].second + sl * (s - t[0].first);
        }
        if (s >= t.back().first) {
            const std::size_t m = t.size();
            const double sl =
                (t[m - 1].second - t[m - 2].second) / (t[m - 1].first - t[m - 2].first);
            return t[m - 1].second + sl * (s - t[m - 1].first);
        }
        auto it = std::upper_bound(t.begin(), t.end(), s,
                                   [](double v, const auto& p) { return v < p.first; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = (s - lo.first) / (hi.first - lo.first);
        return lo.second + w * (hi.second - lo.second);
    }

    void check_unimodal_table() const {
        // Decreasing strictly before d, increasing strictly after, zero at d.
        if (std::abs((*this)(d)) > 1e-12)
            throw std::invalid_argument("tabulated cost must be 0 at the due date");
        for (std::size_t i = 1; i < table.size(); ++i) {
            const auto& a = table[i - 1];
            const auto& b = table[i];
            if (b.first <= d && !(b.second < a.second))
                throw std::invalid_argument("tabulated cost must decrease before the due date");
            if (a.first >= d && !(b.second > a.second))
                throw std::invalid_argument("tabulated cost must increase after the due date");
        }
    }
};

/// Finite-sample Assumption check: zero at d, strictly decreasing before it,
/// strictly increasing after it, on the given sample points.
inline bool satisfies_unimodal_assumption(const DeviationCost& c,
                                          const std::vector<double>& samples) {
    if (std::abs(c(c.d)) > 1e-9) return false;
    std::vector<double> pts = samples;
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double a = pts[i - 1], b = pts[i];
        if (a < b && b <= c.d && !(c(b) < c(a))) return false;
        if (c.d <= a && a < b && !(c(b) > c(a))) return false;
    }
    return true;
}

enum class ServiceKind { DeterministicUnit, TwoPoint, Exponential };

struct ServiceTimeModel {
    ServiceKind kind = ServiceKind::DeterministicUnit;
    double a = 1.0, b = 1.0, p = 0.5;  // TwoPoint: P(duration=a) = p
    double rate = 1.0;                 // Exponential

    static ServiceTimeModel unit() { return {}; }

    static ServiceTimeModel two_point(double a, double b, double p) {
        if (!(0.0 < a && a <= b)) throw std::invalid_argument("two-point service needs 0 < a <= b");
        if (!(0.0 <= p && p <= 1.0)) throw std::invalid_argument("two-point p must be in [0,1]");
        return {ServiceKind::TwoPoint, a, b, p, 1.0};
    }

    static ServiceTimeModel exponential(double rate) {
        if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");
        return {ServiceKind::Exponential, 1.0, 1.0, 0.5, rate};
    }

    bool stochastic() const { return kind != ServiceKind::DeterministicUnit; }

    double mean() const {
        switch (kind) {
        case ServiceKind::DeterministicUnit: return 1.0;
        case ServiceKind::TwoPoint: return p * a + (1.0 - p) * b;
        case ServiceKind::Exponential: return 1.0 / rate;
        }
        return 1.0;
    }
};

enum class PopulationKind { Deterministic, Poisson, GeneralPmf };

struct PopulationModel {
    PopulationKind kind = PopulationKind::Deterministic;
    int n = 1;
    double lambda = 1.0;
    std::vector<double> pi;  // pi[k] = P(N = k), k = 0,1,...

    static PopulationModel deterministic(int n) {
        if (n < 1) throw std::invalid_argument("population size must be >= 1");
        PopulationModel m;
        m.kind = PopulationKind::Deterministic;
        m.n = n;
        return m;
    }

    static PopulationModel poisson(double lambda) {
        if (!(lambda > 0.0)) throw std::invalid_argument("poisson mean must be positive");
        PopulationModel m;
        m.kind = PopulationKind::Poisson;
        m.lambda = lambda;
        return m;
    }

    static PopulationModel general(std::vector<double> pi) {
        double sum = 0.0;
        for (double q : pi) {
            if (!(q >= 0.0)) throw std::invalid_argument("pmf entries must be nonnegative");
            sum += q;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("pmf must sum to 1");
        PopulationModel m;
        m.kind = PopulationKind::GeneralPmf;
        m.pi = std::move(pi);
        return m;
    }

    double mean() const {
        switch (kind) {
        case PopulationKind::Deterministic: return static_cast<double>(n);
        case PopulationKind::Poisson: return lambda;
        case PopulationKind::GeneralPmf: {
            double m = 0.0;
            for (std::size_t k = 0; k < pi.size(); ++k) m += static_cast<double>(k) * pi[k];
            return m;
        }
        }
        return 0.0;
    }

    /// Materialized pmf, truncated where the remaining tail mass < eps.
    std::vector<double> pmf(double eps = 1e-12) const {
        switch (kind) {
        case PopulationKind::Deterministic: {
            std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
            v[static_cast<std::size_t>(n)] = 1.0;
            return v;
        }
        case PopulationKind::GeneralPmf: return pi;
        case PopulationKind::Poisson: {
            std::vector<double> v;
            double term = std::exp(-lambda);  // P(N=0)
            double cum = term;
            v.push_back(term);
            for (int k = 1;; ++k) {
                term *= lambda / static_cast<double>(k);
                v.push_back(term);
                cum += term;
                if (1.0 - cum < eps && k > lambda) break;
                if (k > 10000) break;
            }
            return v;
        }
        }
        return {};
    }
};

/// Full game description.
struct Scenario {
    PopulationModel population;
    std::vector<DeviationCost> costs;  // length n (deterministic pop) or 1 shared
    ServiceTimeModel service;
    std::optional<std::pair<double, double>> availability;
    double alpha = 0.0;  // waiting cost rate

    void validate() const {
        if (costs.empty()) throw std::invalid_argument("scenario needs at least one cost");
        if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
        if (availability && !(availability->first < availability->second))
            throw std::invalid_argument("availability window needs a < b");
        if (costs.size() > 1) {
            if (population.kind != PopulationKind::Deterministic)
                throw std::invalid_argument("heterogeneous costs need a deterministic population");
            if (service.kind != ServiceKind::DeterministicUnit)
                throw std::invalid_argument("heterogeneous costs need unit service");
            if (static_cast<int>(costs.size()) != population.n)
                throw std::invalid_argument("costs length must match population size");
        }
    }

    int deterministic_n() const {
        if (population.kind != PopulationKind::Deterministic)
            throw unsupported_error("operation requires a deterministic population");
        return population.n;
    }

    const DeviationCost& cost_of(int i) const {
        return costs.size() == 1 ? costs[0] : costs[static_cast<std::size_t>(i)];
    }
};

struct ArrivalProfile {
    std::vector<double> times;  // one per customer id, unsorted
};

struct ServiceSchedule {
    std::vector<int> order;      // customer ids in service order
    std::vector<double> starts;  // start times in service order, nondecreasing
};

/// Set of symmetric pure equilibria [lo, hi]; possibly a point or empty.
/// When empty, lo/hi still carry the two boundary solutions when they exist
/// (lo > hi in that case).
struct EquilibriumInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool empty = false;
    std::optional<double> te;  // closed-form witness when defined

    bool contains(double t, double tol = 1e-12) const {
        return !empty && t >= lo - tol && t <= hi + tol;
    }
    double midpoint() const { return 0.5 * (lo + hi); }
};

}  // namespace etgame
