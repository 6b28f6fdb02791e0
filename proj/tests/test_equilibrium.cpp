#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "etgame/equilibrium.hpp"

using namespace etgame;

namespace {

// direct two-sided bisection of line(t) = c(t;t), no segment structure
template <class F>
double bisect_ref(F f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("symmetric cost values") {
    CHECK(symmetric_cost(-2.0, 5, 1.0, 1.0) == doctest::Approx(1.2));
    CHECK(symmetric_cost(-0.5, 2, 1.0, 1.0) == doctest::Approx(0.5));
    // segment form on (-2,-1) for n=5, beta=gamma=1: (t+8)/5
    for (double t : {-1.9, -1.5, -1.1})
        CHECK(symmetric_cost(t, 5, 1.0, 1.0) == doctest::Approx((t + 8.0) / 5.0));
}

TEST_CASE("segment slope counts the full early block") {
    // on the segment with i_t = k the slope is (beta*(n-1-k) - gamma*(k+1))/n
    const double h = 1e-6;
    for (int n : {3, 5, 8}) {
        for (double beta : {1.0, 5.0}) {
            for (double gamma : {1.0, 2.0}) {
                for (int k = 0; k < n - 1; ++k) {
                    const double t = -static_cast<double>(k) - 0.5;
                    const double num =
                        (symmetric_cost(t + h, n, beta, gamma) -
                         symmetric_cost(t - h, n, beta, gamma)) /
                        (2.0 * h);
                    const double expect =
                        (beta * static_cast<double>(n - 1 - k) -
                         gamma * static_cast<double>(k + 1)) /
                        static_cast<double>(n);
                    CHECK(num == doctest::Approx(expect).epsilon(1e-6));
                }
            }
        }
    }
}

TEST_CASE("deviation landscape branches") {
    const int n = 5;
    CHECK(deviation_cost_landscape(-3.0, -2.0, n, 1.0, 1.0) == doctest::Approx(3.0));
    CHECK(deviation_cost_landscape(-2.0, -2.0, n, 1.0, 1.0) == doctest::Approx(1.2));
    CHECK(deviation_cost_landscape(-0.5, -2.0, n, 1.0, 1.0) == doctest::Approx(2.0));
    CHECK(deviation_cost_landscape(2.0, -2.0, n, 1.0, 1.0) == doctest::Approx(2.0));
    CHECK(deviation_cost_landscape(3.5, -2.0, n, 1.0, 1.0) == doctest::Approx(3.5));
}

TEST_CASE("equilibrium interval, symmetric and skewed penalties") {
    {
        const auto iv = equilibrium_interval(5, 1.0, 1.0);
        CHECK(iv.lo == doctest::Approx(-8.0 / 3.0).epsilon(1e-12));
        CHECK(iv.hi == doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
        REQUIRE(iv.te.has_value());
        CHECK(*iv.te == doctest::Approx(-2.0));
        CHECK(iv.contains(*iv.te));
    }
    {
        const auto iv = equilibrium_interval(5, 5.0, 1.0);
        CHECK(iv.lo == doctest::Approx(-43.0 / 12.0).epsilon(1e-12));
        CHECK(iv.hi == doctest::Approx(-8.0 / 3.0).epsilon(1e-12));
        CHECK(*iv.te == doctest::Approx(-10.0 / 3.0));
    }
    {
        const auto iv = equilibrium_interval(2, 3.0, 1.0);
        CHECK(iv.lo == doctest::Approx(iv.hi));
        CHECK(iv.lo == doctest::Approx(-0.75));
    }
}

TEST_CASE("interval endpoints agree with a blind bisection") {
    for (int n : {2, 3, 5, 9, 14}) {
        for (double beta : {0.5, 1.0, 4.0}) {
            for (double gamma : {1.0, 2.0}) {
                const auto iv = equilibrium_interval(n, beta, gamma);
                const double lo_ref = bisect_ref(
                    [&](double t) {
                        return beta * (t + static_cast<double>(n - 1)) -
                               symmetric_cost(t, n, beta, gamma);
                    },
                    -static_cast<double>(n - 1), 0.0);
                const double hi_ref = bisect_ref(
                    [&](double t) { return symmetric_cost(t, n, beta, gamma) + gamma * t; },
                    -static_cast<double>(n - 1), 0.0);
                CHECK(iv.lo == doctest::Approx(lo_ref).epsilon(1e-10));
                CHECK(iv.hi == doctest::Approx(hi_ref).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("no profitable deviation inside, profitable outside") {
    for (int n : {3, 5, 8}) {
        for (double beta : {1.0, 2.5}) {
            const double gamma = 1.3;
            const auto iv = equilibrium_interval(n, beta, gamma);
            for (double w : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                const double t = iv.lo + w * (iv.hi - iv.lo);
                const double c = symmetric_cost(t, n, beta, gamma);
                CHECK(-gamma * t >= c - 1e-9);
                CHECK(beta * (t + static_cast<double>(n - 1)) >= c - 1e-9);
            }
            for (double t : {iv.lo - 0.05, iv.hi + 0.05}) {
                const double c = symmetric_cost(t, n, beta, gamma);
                const bool dev = -gamma * t < c - 1e-12 ||
                                 beta * (t + static_cast<double>(n - 1)) < c - 1e-12;
                CHECK(dev);
            }
        }
    }
}

TEST_CASE("two-customer best response cases") {
    {
        const auto br = best_response_two(0.2, 1.0, 1.0);
        CHECK(br.kind == BestResponseKind::Point);
        CHECK(br.point == doctest::Approx(0.0));
    }
    {
        const auto br = best_response_two(-1.3, 1.0, 1.0);
        CHECK(br.kind == BestResponseKind::Point);
        CHECK(br.point == doctest::Approx(0.0));
    }
    {
        const auto br = best_response_two(-0.3, 1.0, 1.0);
        CHECK(br.kind == BestResponseKind::MomentBefore);
        CHECK(br.point == doctest::Approx(-0.3));
    }
    {
        const auto br = best_response_two(-0.5, 1.0, 1.0);
        CHECK(br.kind == BestResponseKind::Interval);
        CHECK(br.lo_closed);
        CHECK(br.lo == doctest::Approx(-0.5));
        CHECK(br.hi == doctest::Approx(0.5));
        CHECK_FALSE(br.extrapolated);
    }
    {
        const auto br = best_response_two(-0.8, 1.0, 1.0);
        CHECK(br.kind == BestResponseKind::Interval);
        CHECK_FALSE(br.lo_closed);
        CHECK(br.hi_closed);
    }
    CHECK(best_response_two(-0.4, 2.0, 1.0).extrapolated);
}

TEST_CASE("two-customer best response value matches a grid search") {
    for (int k = 0; k < 20; ++k) {
        const double t = -1.6 + 0.1 * static_cast<double>(k);
        for (double beta : {1.0, 2.0}) {
            for (double gamma : {1.0, 3.0}) {
                const auto br = best_response_two(t, beta, gamma);
                double predicted;
                switch (br.kind) {
                case BestResponseKind::Point:
                    predicted = deviation_cost_landscape(br.point, t, 2, beta, gamma);
                    break;
                case BestResponseKind::MomentBefore:
                    predicted = -gamma * t;  // left limit
                    break;
                case BestResponseKind::Interval:
                    predicted = deviation_cost_landscape(br.hi, t, 2, beta, gamma);
                    break;
                }
                double grid_best = 1e100;
                for (double s = t - 1.5; s <= t + 2.5; s += 1e-3)
                    grid_best =
                        std::min(grid_best, deviation_cost_landscape(s, t, 2, beta, gamma));
                grid_best = std::min(grid_best, deviation_cost_landscape(t, t, 2, beta, gamma));
                grid_best = std::min(grid_best, deviation_cost_landscape(0.0, t, 2, beta, gamma));
                CHECK(predicted == doctest::Approx(grid_best).epsilon(5e-3));
            }
        }
    }
}

TEST_CASE("socially optimal equilibrium criterion") {
    CHECK(is_social_opt_equilibrium(5, 1.0, 1.0).is_equilibrium);
    CHECK_FALSE(is_social_opt_equilibrium(5, 5.0, 1.0).is_equilibrium);
    CHECK(is_social_opt_equilibrium(2, 1.0, 1.0).is_equilibrium);
    CHECK_FALSE(is_social_opt_equilibrium(2, 2.0, 1.0).is_equilibrium);
    const auto chk = is_social_opt_equilibrium(5, 1.0, 1.0);
    REQUIRE(chk.witness.has_value());
    const auto iv = equilibrium_interval(5, 1.0, 1.0);
    CHECK(iv.contains(*chk.witness, 1e-9));
    CHECK(*chk.witness == doctest::Approx(-2.0));
}

TEST_CASE("prices of anarchy and stability") {
    const auto pp = price_of_anarchy_stability(5, 1.0, 1.0);
    CHECK(pp.poa == doctest::Approx(10.0 / 9.0).epsilon(1e-12));
    CHECK(pp.pos == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("opt-equilibrium region rows") {
    const auto rows = opt_equilibrium_region(2, 20);
    REQUIRE(rows.size() == 19);
    CHECK(rows[0].n == 2);
    CHECK(rows[0].ratio_lo == doctest::Approx(0.5));
    CHECK(rows[0].ratio_hi == doctest::Approx(0.5));
    CHECK(rows[3].n == 5);
    CHECK(rows[3].ratio_lo == doctest::Approx(0.2));
    CHECK(rows[3].ratio_hi == doctest::Approx(0.8));
}
