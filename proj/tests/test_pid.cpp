#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "arc/pid.hpp"

using arc::PiController;
using Catch::Approx;

TEST_CASE("propose evaluates the PI law without touching the integral") {
    PiController c("pc", -10.0, 350.0, 20.0);
    c.set_integral(0.0);
    CHECK(c.propose(21.0) == Approx(10.0)); // pure proportional, e = -1
    CHECK(c.integral() == 0.0);

    PiController z("zc", -0.1, 350.0, 1000.0);
    z.set_integral(45.6);
    CHECK(z.propose(1000.0) == Approx(45.6)); // zero error returns integral
    CHECK(z.integral() == 45.6);
}

TEST_CASE("propose clamps the output but stores the unclamped candidate") {
    PiController c("tc", 22.0, 350.0, 4.0);
    c.set_integral(80.0);
    CHECK(c.propose(3.5) == Approx(91.0));
    CHECK(c.last_candidate() == Approx(91.0));

    c.set_integral(120.0);
    CHECK(c.propose(4.0) == Approx(100.0)); // clamped at u_max
    CHECK(c.last_candidate() == Approx(120.0));
}

TEST_CASE("propose rejects non-finite measurements with the controller name") {
    PiController c("cc1", -0.02, 1750.0, 3000.0);
    CHECK_THROWS_WITH(c.propose(std::nan("")),
                      Catch::Matchers::ContainsSubstring("cc1"));
}

TEST_CASE("commit integrates error and tracking terms") {
    SECTION("selected with zero error leaves the integral unchanged") {
        PiController c("pc", -10.0, 350.0, 20.0);
        c.set_integral(42.0);
        double u = c.propose(20.0);
        c.commit(u, 1.0);
        CHECK(c.integral() == Approx(42.0));
    }
    SECTION("deselected with zero error tracks the selected value") {
        PiController c("pc", -10.0, 350.0, 20.0);
        c.set_integral(30.0);
        double u = c.propose(20.0);
        c.commit(u - 5.0, 1.0);
        CHECK(c.integral() - 30.0 == Approx(-5.0 / 350.0));
    }
    SECTION("selected with error integrates the error") {
        PiController c("pc", -10.0, 350.0, 20.0);
        c.set_integral(0.0);
        c.propose(21.0); // e = -1
        c.commit(c.last_candidate(), 1.0);
        CHECK(c.integral() == Approx(10.0 / 350.0));
    }
}

TEST_CASE("commit requires a preceding propose") {
    PiController c("pc", -10.0, 350.0, 20.0);
    CHECK_THROWS_AS(c.commit(50.0, 1.0), std::logic_error);
    c.propose(19.0);
    c.commit(50.0, 1.0);
    CHECK_THROWS_AS(c.commit(50.0, 1.0), std::logic_error);
}

TEST_CASE("constructor validates time constants and limits") {
    CHECK_THROWS_AS(PiController("x", 1.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(PiController("x", 1.0, 100.0, 0.0, -1.0, 50.0, 50.0),
                    std::invalid_argument);
    PiController defaulted("x", 1.0, 100.0, 0.0);
    CHECK(defaulted.tau_t() == 100.0); // tau_t defaults to tau_i
}

TEST_CASE("deselected candidate converges geometrically at rate dt/tau_t") {
    PiController c("pc", -10.0, 350.0, 20.0);
    c.set_integral(80.0);
    const double u_sel = 30.0, dt = 1.0;
    double gap = c.propose(20.0) - u_sel;
    for (int k = 0; k < 200; ++k) {
        double cand = c.propose(20.0);
        c.commit(u_sel, dt);
        double expected = gap * std::pow(1.0 - dt / c.tau_t(), k);
        CHECK(cand - u_sel == Approx(expected).margin(1e-9));
    }
}

TEST_CASE("tracking keeps the integral bounded under persistent deselection") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> meas(15.0, 25.0);
    std::uniform_real_distribution<double> sel(0.0, 100.0);

    PiController tracked("a", -10.0, 350.0, 20.0);
    PiController untracked("b", -10.0, 350.0, 20.0);
    untracked.set_tracking_enabled(false);

    double max_tracked = 0.0, max_untracked = 0.0;
    for (int k = 0; k < 20000; ++k) {
        double y = meas(rng), u = sel(rng);
        tracked.propose(y);
        tracked.commit(u, 1.0);
        untracked.propose(10.0); // persistent error, never selected
        untracked.commit(0.0, 1.0);
        max_tracked = std::max(max_tracked, std::fabs(tracked.integral()));
        max_untracked = std::max(max_untracked, std::fabs(untracked.integral()));
    }
    // bounded by u limits plus the proportional span of the error
    CHECK(max_tracked <= 100.0 + 10.0 * 5.0);
    CHECK(max_untracked > 10.0 * (100.0 + 10.0 * 5.0)); // windup, for contrast
}

TEST_CASE("warm start puts the controller at tracking equilibrium") {
    PiController c("pc", -3.33, 1050.0, 0.0);
    c.warm_start(-6.4, 9.7);
    double cand = c.propose(-6.4);
    c.commit(9.7, 1.0);
    double cand2 = c.propose(-6.4);
    CHECK(cand == Approx(cand2)); // no drift at the equilibrium
    c.commit(9.7, 1.0);
    CHECK(c.propose(-6.4) == Approx(cand));
}
