#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "etgame/oracle.hpp"

using namespace etgame;

namespace {

Scenario base_scenario(int n, double gamma, double beta) {
    Scenario sc;
    sc.population = PopulationModel::deterministic(n);
    sc.costs = {DeviationCost::linear(0.0, gamma, beta)};
    return sc;
}

}  // namespace

TEST_CASE("certify base-model candidates") {
    const Scenario sc = base_scenario(5, 1.0, 1.0);
    {
        const auto cert = certify_symmetric(-2.0, sc);
        CHECK(cert.is_equilibrium);
        CHECK(cert.gain <= cert.epsilon);
    }
    {
        // c(-1;-1) = 1.4 but arriving a moment before costs 1: gain 0.4
        const auto cert = certify_symmetric(-1.0, sc);
        CHECK_FALSE(cert.is_equilibrium);
        CHECK(cert.best_is_moment_before);
        CHECK(cert.gain == doctest::Approx(0.4).epsilon(1e-9));
    }
    {
        const auto cert = certify_symmetric(-3.0, sc);
        CHECK_FALSE(cert.is_equilibrium);
    }
}

TEST_CASE("certify interval endpoints, inside and outside") {
    for (double beta : {1.0, 5.0}) {
        const Scenario sc = base_scenario(5, 1.0, beta);
        const auto iv = equilibrium_interval(5, beta, 1.0);
        for (double t : {iv.lo, iv.hi, iv.midpoint()})
            CHECK(certify_symmetric(t, sc).is_equilibrium);
        CHECK_FALSE(certify_symmetric(iv.lo - 0.05, sc).is_equilibrium);
        CHECK_FALSE(certify_symmetric(iv.hi + 0.05, sc).is_equilibrium);
    }
}

TEST_CASE("certify waiting-cost scenario") {
    Scenario sc = base_scenario(5, 1.0, 1.0);
    sc.alpha = 0.2;
    const auto res = waiting_cost_interval(5, 1.0, 1.0, 0.2);
    CHECK(certify_symmetric(res.interval.midpoint(), sc).is_equilibrium);
    CHECK(certify_symmetric(res.interval.lo, sc).is_equilibrium);
    CHECK_FALSE(certify_symmetric(res.interval.lo - 0.05, sc).is_equilibrium);
    CHECK_FALSE(certify_symmetric(res.interval.hi + 0.05, sc).is_equilibrium);
}

TEST_CASE("certify restricted-window point equilibrium") {
    Scenario sc = base_scenario(5, 1.0, 1.0);
    sc.availability = {{-1.0, 0.0}};
    // base interval ends at -4/3; the window forces the point -1
    CHECK(certify_symmetric(-1.0, sc).is_equilibrium);
    CHECK_FALSE(certify_symmetric(-0.8, sc).is_equilibrium);
    sc.availability = {{-5.0, -3.0}};
    CHECK(certify_symmetric(-3.0, sc).is_equilibrium);
}

TEST_CASE("certify two-point service by exact lottery enumeration") {
    Scenario sc;
    sc.population = PopulationModel::deterministic(2);
    sc.costs = {DeviationCost::linear(0.0, 1.0, 1.0)};
    sc.service = ServiceTimeModel::two_point(1.0, 2.0, 0.5);
    CHECK(certify_symmetric(-0.75, sc).is_equilibrium);
    CHECK_FALSE(certify_symmetric(-0.3, sc).is_equilibrium);
    CHECK_FALSE(certify_symmetric(-1.4, sc).is_equilibrium);
    // steep tardiness (beta=3, gamma=1): the symmetric candidate -1.25 is
    // refuted -- the other customer can finish before the due date, so
    // arriving exactly at 0 costs (1/2)*0 + (1/2)*3*(3/4) = 9/8 against the
    // symmetric 5/4, a gain of exactly 1/8
    sc.costs = {DeviationCost::linear(0.0, 1.0, 3.0)};
    const auto cert = certify_symmetric(-1.25, sc);
    CHECK_FALSE(cert.is_equilibrium);
    CHECK(cert.best_deviation == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(cert.best_is_moment_before);
    CHECK(cert.gain == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("certify random-population scenario") {
    Scenario sc;
    sc.population = PopulationModel::poisson(2.0);
    sc.costs = {DeviationCost::linear(0.0, 1.0, 1.0)};
    const auto res = random_pop_interval(sc.population, 1.0, 1.0);
    REQUIRE_FALSE(res.interval.empty);
    CHECK(certify_symmetric(res.interval.midpoint(), sc).is_equilibrium);
    CHECK_FALSE(certify_symmetric(res.interval.lo - 0.05, sc).is_equilibrium);
}

TEST_CASE("certify heterogeneous quadratic equilibrium") {
    Scenario sc;
    sc.population = PopulationModel::deterministic(3);
    sc.costs = {DeviationCost::quadratic(-0.5, 5.0, 1.0), DeviationCost::quadratic(0.0, 1.0, 1.0),
                DeviationCost::quadratic(0.5, 1.0, 5.0)};
    CHECK(certify_symmetric(-1.0, sc).is_equilibrium);
    CHECK_FALSE(certify_symmetric(-0.7, sc).is_equilibrium);

    // steeper outer penalties keep a window around -1...
    sc.costs = {DeviationCost::quadratic(-0.5, 10.0, 1.0), DeviationCost::quadratic(0.0, 1.0, 1.0),
                DeviationCost::quadratic(0.5, 1.0, 10.0)};
    const auto window = heterogeneous_interval(sc.costs);
    REQUIRE_FALSE(window.interval.empty);
    CHECK(certify_symmetric(window.interval.midpoint(), sc).is_equilibrium);
    CHECK(certify_symmetric(window.interval.lo, sc).is_equilibrium);
    CHECK_FALSE(certify_symmetric(window.interval.lo - 0.05, sc).is_equilibrium);

    // ...until the outer customers' tolerated intervals separate entirely
    sc.costs = {DeviationCost::quadratic(-0.5, 20.0, 1.0), DeviationCost::quadratic(0.0, 1.0, 1.0),
                DeviationCost::quadratic(0.5, 1.0, 20.0)};
    for (double t : {-1.1, -1.0, -0.9}) CHECK_FALSE(certify_symmetric(t, sc).is_equilibrium);
}

TEST_CASE("certify exponential service with common random numbers") {
    Scenario sc;
    sc.population = PopulationModel::deterministic(2);
    sc.costs = {DeviationCost::linear(0.0, 1.0, 1.0)};
    sc.service = ServiceTimeModel::exponential(1.0);
    // no equilibrium for n=2: every candidate is refuted
    const auto cert = certify_symmetric(-0.6, sc, 0.05, 1e-3, 200000, 99);
    CHECK_FALSE(cert.is_equilibrium);
    // identical seed reproduces the verdict and the gain exactly
    const auto cert2 = certify_symmetric(-0.6, sc, 0.05, 1e-3, 200000, 99);
    CHECK(cert.gain == cert2.gain);
    CHECK(cert.best_deviation == cert2.best_deviation);
}

TEST_CASE("profile (-0.6,-0.4) refuted: first player gains by rejoining") {
    Scenario sc = base_scenario(2, 1.0, 1.0);
    const auto costs = expected_profile_cost(ArrivalProfile{{-0.6, -0.4}}, sc);
    CHECK(costs[0] == doctest::Approx(0.6));
    // moment before -0.4 starts service at the -0.4 left limit: cost 0.4
    CHECK(costs[0] - 0.4 >= 0.19);
}

TEST_CASE("asymmetric scan finds nothing for n=2") {
    const auto survivors = asymmetric_scan(2, 1.0, 1.0, 0.05, 0.01);
    CHECK(survivors.empty());
    const auto skewed = asymmetric_scan(2, 2.0, 1.0, 0.05, 0.01);
    CHECK(skewed.empty());
}

TEST_CASE("mc symmetric cost, exact and sampled paths") {
    {
        const Scenario sc = base_scenario(5, 1.0, 1.0);
        const auto [mean, se] = mc_symmetric_cost(-2.0, sc, 1, 1);
        CHECK(mean == doctest::Approx(1.2));
        CHECK(se == 0.0);
    }
    {
        // n=9 takes the sampled path; compare with the position average
        const Scenario sc = base_scenario(9, 1.0, 1.0);
        const auto [mean, se] = mc_symmetric_cost(-4.0, sc, 200000, 5);
        CHECK(se > 0.0);
        CHECK(std::abs(mean - symmetric_cost(-4.0, 9, 1.0, 1.0)) <= 3.0 * se);
    }
    {
        Scenario sc = base_scenario(2, 1.0, 1.0);
        sc.service = ServiceTimeModel::exponential(1.0);
        const double t = -std::log(2.0);
        const auto [mean, se] = mc_symmetric_cost(t, sc, 1000000, 7);
        CHECK(std::abs(mean - exponential_symmetric_cost(t, 2, 1.0, 1.0)) <= 3.0 * se);
        // single-draw reproducibility
        const auto a = mc_symmetric_cost(t, sc, 1, 42);
        const auto b = mc_symmetric_cost(t, sc, 1, 42);
        CHECK(a.first == b.first);
    }
}
