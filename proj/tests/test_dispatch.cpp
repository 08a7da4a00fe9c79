#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lvgrid/dispatch.hpp"
#include "oracles.hpp"

using namespace lvgrid;

namespace {

DispatchProblem toy(int steps) {
    DispatchProblem p;
    p.load_kw.assign(steps, 0.0);
    p.pv_kw.assign(steps, 0.0);
    p.import_ct.assign(steps, 20.0);
    p.export_ct.assign(steps, 9.5);
    p.step_hours = 0.25;
    return p;
}

/// Random 8-step instances whose optimal trajectories live on the 201-level
/// SOC lattice: unit efficiencies, 0.5C power (25 grid units per saturated
/// move), loads/pv on the lattice power unit. On this family the discretized
/// DP is exact, so LP and DP must agree to rounding.
DispatchProblem random_lattice_toy(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> units(0, 80);
    DispatchProblem p = toy(8);
    double batt = 0.5 + 0.01 * std::floor(150.0 * u(rng));  // 0.5 .. 2 kWh
    p.batt_kwh = batt;
    p.batt_power_kw = 0.5 * batt;
    p.eta_charge = p.eta_discharge = 1.0;
    double power_unit = batt / 50.0;  // one SOC grid step per timestep
    for (int t = 0; t < 8; ++t) {
        p.load_kw[t] = u(rng) < 0.3 ? 0.0 : units(rng) * power_unit;
        p.pv_kw[t] = u(rng) < 0.4 ? 0.0 : units(rng) * power_unit;
        p.export_ct[t] = 2.0 + 10.0 * u(rng);
        p.import_ct[t] = p.export_ct[t] + 1.0 + 20.0 * u(rng);  // price spike structure
    }
    if (u(rng) < 0.5) p.export_cap_kw = units(rng) * power_unit;  // curtailment cap
    return p;
}

/// Random instances with the study's 0.95 battery efficiencies; optimal SOC
/// paths leave the 201-level lattice, so these are checked against a fine DP.
DispatchProblem random_toy(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DispatchProblem p = toy(8);
    double batt = 0.5 + 1.5 * u(rng);  // <= 2 kWh
    p.batt_kwh = batt;
    p.batt_power_kw = 0.5 * batt;
    p.eta_charge = p.eta_discharge = 0.95;
    for (int t = 0; t < 8; ++t) {
        p.load_kw[t] = u(rng) < 0.3 ? 0.0 : 2.0 * u(rng);
        p.pv_kw[t] = u(rng) < 0.4 ? 0.0 : 2.5 * u(rng);
        p.export_ct[t] = 2.0 + 10.0 * u(rng);
        p.import_ct[t] = p.export_ct[t] + 1.0 + 20.0 * u(rng);
    }
    if (u(rng) < 0.5) p.export_cap_kw = 0.3 + 0.7 * u(rng);
    return p;
}

void check_invariants(const DispatchProblem& p, const DispatchSeries& s, double tol = 1e-6) {
    for (int t = 0; t < p.steps(); ++t) {
        // power balances
        double lhs = s.selfcons_kw[t] + p.eta_discharge * s.discharge_kw[t] + s.import_kw[t];
        CHECK(std::abs(lhs - p.load_kw[t]) <= tol);
        double pvside = s.selfcons_kw[t] + s.charge_kw[t] + s.export_kw[t] + s.curtail_kw[t];
        CHECK(std::abs(pvside - p.pv_kw[t]) <= tol);
        // no grid charging, nonnegativity, complementarity
        CHECK(s.charge_kw[t] <= (p.pv_kw[t] + 1e-9));
        CHECK(s.import_kw[t] >= 0);
        CHECK(s.export_kw[t] >= 0);
        CHECK(s.import_kw[t] * s.export_kw[t] == 0.0);
        CHECK(s.export_kw[t] <= (p.export_cap_kw + 1e-9));
        // battery state
        CHECK(s.soc_kwh[t + 1] >= -1e-9);
        CHECK(s.soc_kwh[t + 1] <= (p.batt_kwh + 1e-9));
        double soc_step = s.soc_kwh[t] +
                          (p.eta_charge * s.charge_kw[t] - s.discharge_kw[t]) * p.step_hours;
        CHECK(std::abs(soc_step - s.soc_kwh[t + 1]) <= tol);
    }
}

} // namespace

TEST_CASE("no pv, no battery: import equals load") {
    DispatchProblem p = toy(16);
    for (int t = 0; t < 16; ++t) p.load_kw[t] = 1.0;
    DispatchSolution s = solve_dispatch(p);
    double expect = 0;
    for (int t = 0; t < 16; ++t) {
        CHECK(s.series.import_kw[t] == doctest::Approx(1.0));
        expect += 1.0 * p.import_ct[t] * 0.25;
    }
    CHECK(s.cost_ct == doctest::Approx(expect).epsilon(1e-9));
    CHECK_FALSE(s.used_lp);
}

TEST_CASE("pv above load, no battery, flat feed-in: export the surplus") {
    DispatchProblem p = toy(8);
    for (int t = 0; t < 8; ++t) {
        p.load_kw[t] = 1.0;
        p.pv_kw[t] = 2.0;
    }
    DispatchSolution s = solve_dispatch(p);
    for (int t = 0; t < 8; ++t) {
        CHECK(s.series.export_kw[t] == doctest::Approx(1.0));
        CHECK(s.series.import_kw[t] == doctest::Approx(0.0).scale(1));
        CHECK(s.series.curtail_kw[t] == doctest::Approx(0.0).scale(1));
    }
}

TEST_CASE("price spike with a 1 kWh battery matches the DP oracle") {
    DispatchProblem p = toy(8);
    p.batt_kwh = 1.0;
    p.batt_power_kw = 0.5;
    for (int t = 0; t < 8; ++t) {
        p.pv_kw[t] = t < 4 ? 1.2 : 0.0;
        p.load_kw[t] = t < 4 ? 0.2 : 1.0;
        p.import_ct[t] = t == 6 ? 60.0 : 18.0;  // evening spike
        p.export_ct[t] = 8.0;
    }
    DispatchSolution s = solve_dispatch(p);
    CHECK(s.used_lp);
    double dp = lvgrid::testing::dp_dispatch_cost(p, 201);
    CHECK(s.cost_ct <= (dp + 1e-3 * std::abs(dp) + 1e-9));
    CHECK(s.cost_ct >= (dp - 1e-3 * std::abs(dp) - 1e-9));
    check_invariants(p, s.series);
}

TEST_CASE("dispatch LP equals the DP oracle on random 8-step instances") {
    std::mt19937 rng(2025);
    for (int k = 0; k < 25; ++k) {
        DispatchProblem p = random_toy(rng);
        DispatchSolution s = solve_dispatch(p);
        double dp = lvgrid::testing::dp_dispatch_cost(p, 201);
        double scale = std::max(1.0, std::abs(dp));
        CHECK(s.cost_ct <= (dp + 2e-3 * scale));
        CHECK(s.cost_ct >= (dp - 2e-3 * scale));
        check_invariants(p, s.series);
    }
}

TEST_CASE("curtailment cap binds on a clear-sky step") {
    DispatchProblem p = toy(8);
    p.batt_kwh = 2.0;
    p.batt_power_kw = 1.0;
    p.export_cap_kw = 3.0;  // 30% of 10 kW
    for (int t = 0; t < 8; ++t) {
        p.pv_kw[t] = 9.0;  // 0.9 unit output on 10 kW
        p.load_kw[t] = 0.5;
    }
    DispatchSolution s = solve_dispatch(p);
    for (int t = 0; t < 8; ++t) CHECK(s.series.export_kw[t] <= (3.0 + 1e-9));
    CHECK(s.series.curtailed_energy_kwh() > 0.0);
    check_invariants(p, s.series);
}

TEST_CASE("block tiers fill from the highest price") {
    DispatchProblem p = toy(4);
    p.block = true;
    p.block_active.assign(4, 1);
    p.pv_cap_kw = 10.0;
    for (int t = 0; t < 4; ++t) {
        p.pv_kw[t] = 8.0;
        p.load_kw[t] = 0.0;
    }
    DispatchSolution s = solve_dispatch(p);
    // export everything (all prices positive): revenue = tiered formula
    double expect_rev = (2.5 * 9.5 + 5.0 * 4.79 + 0.5 * 2.395) * 0.25 * 4;
    CHECK(s.cost_ct == doctest::Approx(-expect_rev).epsilon(1e-9));
}

TEST_CASE("import capacity charge triggers peak shaving with the battery") {
    // two "days" of 4 steps; evening peaks; battery charged from midday pv
    DispatchProblem p = toy(8);
    p.batt_kwh = 4.0;
    p.batt_power_kw = 2.0;
    p.import_cap_ct_kw = 200.0;  // 2 CHF/kW-day: strong incentive
    p.import_period = {0, 0, 0, 0, 1, 1, 1, 1};
    p.n_import_periods = 2;
    for (int d = 0; d < 2; ++d) {
        p.pv_kw[4 * d + 1] = 3.0;
        p.load_kw[4 * d + 2] = 1.0;
        p.load_kw[4 * d + 3] = 4.0;  // would be the peak without battery
    }
    DispatchSolution with_batt = solve_dispatch(p);
    DispatchProblem p0 = p;
    p0.batt_kwh = 0;
    p0.batt_power_kw = 0;
    DispatchSolution without = solve_dispatch(p0);
    CHECK(with_batt.cost_ct < without.cost_ct - 1.0);
    // peak must drop below the no-battery 4 kW
    double peak = 0;
    for (int t = 4; t < 8; ++t) peak = std::max(peak, with_batt.series.import_kw[t]);
    CHECK(peak < 4.0 - 0.5);
    check_invariants(p, with_batt.series);
}

TEST_CASE("export capacity charge suppresses exports without battery") {
    DispatchProblem p = toy(96);
    p.export_cap_ct_kw = 101.08;  // 1.0108 CHF/kW-day
    p.export_period.assign(96, 0);
    p.n_export_periods = 1;
    for (int t = 36; t < 60; ++t) p.pv_kw[t] = 5.0 * std::sin(3.14159 * (t - 36) / 24.0);
    DispatchSolution s = solve_dispatch(p);
    // exporting the full arc would cost more in capacity than it earns
    double max_export = 0;
    for (double e : s.series.export_kw) max_export = std::max(max_export, e);
    CHECK(max_export < 5.0);
    // and the chosen cap must beat both all-or-nothing alternatives
    DispatchProblem pl = p;
    pl.force_lp = true;
    DispatchSolution lp_sol = solve_dispatch(pl);
    CHECK(s.cost_ct <= (lp_sol.cost_ct + 1e-4 * std::abs(lp_sol.cost_ct) + 1e-6));
    CHECK(s.cost_ct >= (lp_sol.cost_ct - 1e-4 * std::abs(lp_sol.cost_ct) - 1e-6));
}

TEST_CASE("greedy fast path agrees with the forced LP on no-battery instances") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        DispatchProblem p = toy(48);
        for (int t = 0; t < 48; ++t) {
            p.load_kw[t] = 2.0 * u(rng);
            p.pv_kw[t] = t > 12 && t < 36 ? 4.0 * u(rng) : 0.0;
            p.import_ct[t] = 12.0 + 10.0 * u(rng);
            p.export_ct[t] = 4.0 + 6.0 * u(rng);
        }
        if (k % 2) p.export_cap_kw = 1.5;
        DispatchSolution greedy = solve_dispatch(p);
        CHECK_FALSE(greedy.used_lp);
        DispatchProblem pl = p;
        pl.force_lp = true;
        DispatchSolution lp_sol = solve_dispatch(pl);
        CHECK(lp_sol.used_lp);
        double scale = std::max(1.0, std::abs(greedy.cost_ct));
        CHECK(std::abs(greedy.cost_ct - lp_sol.cost_ct) <= 1e-5 * scale);
    }
}

TEST_CASE("relaxing the curtailment cap never raises the optimal cost") {
    DispatchProblem base = toy(96);
    base.batt_kwh = 3.0;
    base.batt_power_kw = 1.5;
    base.pv_cap_kw = 8.0;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 96; ++t) {
        base.load_kw[t] = 0.4 + 1.2 * u(rng);
        base.pv_kw[t] = t > 28 && t < 68 ? 8.0 * std::sin(3.14159 * (t - 28) / 40.0) * 0.9 : 0.0;
    }
    double prev = kInf;
    for (double frac : {0.3, 0.5, 0.7, 1.0}) {
        DispatchProblem p = base;
        p.export_cap_kw = frac * p.pv_cap_kw;
        DispatchSolution s = solve_dispatch(p);
        CHECK(s.cost_ct <= (prev + 1e-6));
        prev = s.cost_ct;
        check_invariants(p, s.series);
    }
}
