#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "arc/tuning.hpp"

using namespace arc;
using Catch::Approx;

TEST_CASE("nominal linearization matches the closed-form gains") {
    BarnParams p;
    auto lp = linearize_barn(50.0, 0.0, 0.0, p);
    CHECK(lp.k_c_u1 == Approx(-10.456).margin(0.01));
    CHECK(lp.k_t_u1 == Approx(-0.1165).margin(0.0005));
    CHECK(lp.k_t_u2 == Approx(0.04502).margin(0.0001));
    CHECK(lp.tau_c_co2 == Approx(397.4).margin(0.1));
    CHECK(lp.tau_t_temp == Approx(325.8).margin(0.1));
}

TEST_CASE("no cows means no CO2 gain") {
    BarnParams p;
    p.n_cows = 0.0;
    auto lp = linearize_barn(50.0, 0.0, 0.0, p);
    CHECK(lp.k_c_u1 == 0.0);
}

TEST_CASE("analytic gains agree with finite differences of the steady state") {
    BarnParams p;
    const double h = 0.01;
    struct Point { double u1, u2, t_out; };
    const Point points[] = {
        {50.0, 0.0, 0.0}, {30.0, 20.0, -10.0}, {70.0, 0.0, 10.0},
        {20.0, 80.0, -25.0}, {45.6, 100.0, -10.0},
    };
    for (const auto& pt : points) {
        auto lp = linearize_barn(pt.u1, pt.u2, pt.t_out, p);
        auto at = [&](double u1, double u2) {
            return barn_steady_state(u1, u2, pt.t_out, p);
        };
        double fd_c_u1 =
            (at(pt.u1 + h, pt.u2).c_ppm - at(pt.u1 - h, pt.u2).c_ppm) / (2 * h);
        double fd_t_u1 = (at(pt.u1 + h, pt.u2).t - at(pt.u1 - h, pt.u2).t) / (2 * h);
        double fd_t_u2 = (at(pt.u1, pt.u2 + h).t - at(pt.u1, pt.u2 - h).t) / (2 * h);
        CHECK(lp.k_c_u1 == Approx(fd_c_u1).epsilon(1e-4));
        CHECK(lp.k_t_u1 == Approx(fd_t_u1).epsilon(1e-4));
        CHECK(lp.k_t_u2 == Approx(fd_t_u2).epsilon(1e-4));
    }
}

TEST_CASE("heater initial slope is independent of the operating point") {
    BarnParams p;
    auto ref = linearize_barn(50.0, 0.0, 0.0, p).kprime_t_u2();
    for (double t_out = -40.0; t_out <= 15.0; t_out += 5.0)
        for (double u1 : {10.0, 45.0, 80.0}) {
            auto lp = linearize_barn(u1, 50.0, t_out, p);
            CHECK(lp.kprime_t_u2() == Approx(ref).epsilon(1e-9));
        }
}

TEST_CASE("cold operating point scales slope and time constant about 5x") {
    BarnParams p;
    auto nominal = linearize_barn(50.0, 0.0, 0.0, p);
    // u1 at the coldest steady state (CO2 held at 3000 ppm)
    auto cold = linearize_barn(9.734, 100.0, -40.0, p);
    double tau_ratio = cold.tau_c_co2 / nominal.tau_c_co2;
    double kprime_ratio =
        std::fabs(cold.kprime_c_u1()) / std::fabs(nominal.kprime_c_u1());
    CHECK(tau_ratio > 4.0);
    CHECK(tau_ratio < 6.0);
    CHECK(kprime_ratio > 4.0);
    CHECK(kprime_ratio < 6.0);
}

TEST_CASE("simc rule") {
    auto fan = simc_pi(-0.12 / 350.0, 350.0, 350.0);
    CHECK(fan.kc == Approx(-8.33).margin(0.01));
    CHECK(fan.tau_i_s == 350.0);

    auto slow = simc_pi(1e-3, 2000.0, 350.0);
    CHECK(slow.tau_i_s == 1400.0); // 4*tau_c branch

    auto heater = simc_pi(0.045 / 350.0, 350.0, 350.0);
    CHECK(heater.kc == Approx(22.2).margin(0.05));
    CHECK(heater.tau_i_s == 350.0);

    CHECK_THROWS_AS(simc_pi(0.0, 350.0, 350.0), std::invalid_argument);
}

TEST_CASE("tuning table carries the six simulated loops") {
    auto rows = tuning_table(BarnParams{});
    REQUIRE(rows.size() == 6);
    auto row = [&](const std::string& n) {
        for (const auto& r : rows)
            if (r.name == n)
                return r;
        throw std::runtime_error("missing row");
    };
    CHECK(row("TC1").kc == -10.0);
    CHECK(row("TC1").tau_i_s == 350.0);
    CHECK(row("TC1").setpoint == 20.0);
    CHECK(row("TC3").kc == -10.0);
    CHECK(row("TC3").setpoint == 5.0);
    CHECK(row("TC2").kc == -3.33);
    CHECK(row("TC2").tau_i_s == 1050.0);
    CHECK(row("TC2").setpoint == 0.0);
    CHECK(row("CC2").kc == -0.1);
    CHECK(row("CC2").setpoint == 1000.0);
    CHECK(row("CC1").kc == -0.02);
    CHECK(row("CC1").tau_i_s == 1750.0);
    CHECK(row("CC1").setpoint == 3000.0);
    CHECK(row("TC").kc == 22.0);
    CHECK(row("TC").tau_i_s == 350.0);
    CHECK(row("TC").setpoint == 4.0);
    CHECK(row("TC").mv == "u2");
}

TEST_CASE("off-nominal factor is adjustable") {
    auto rows = tuning_table(BarnParams{}, 5.0);
    for (const auto& r : rows)
        if (r.name == "TC2") {
            CHECK(r.kc == Approx(-2.0));
            CHECK(r.tau_i_s == 1750.0);
        }
}
