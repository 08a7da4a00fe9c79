#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lvgrid/common.hpp"
#include "lvgrid/tariff.hpp"

using namespace lvgrid;

namespace {
const YearCalendar kCal(2025);
const int kSteps = kCal.steps();

std::vector<double> zeros() { return std::vector<double>(kSteps, 0.0); }
} // namespace

TEST_CASE("all fourteen study tariffs construct") {
    std::vector<double> irr(12, 100.0);
    for (int m = 0; m < 12; ++m) irr[m] = 50.0 + 10.0 * m;
    CHECK(tariff_ids().size() == 14);
    for (const auto& id : tariff_ids()) CHECK(make_tariff(id, kCal, PriceLevel::mid, &irr).id == id);
    CHECK_THROWS_AS(make_tariff("nope", kCal), ConfigError);
    CHECK_THROWS_AS(make_tariff("irr_monthly", kCal), ConfigError);  // needs irradiance context
}

TEST_CASE("price_at: study examples") {
    TariffPolicy var = make_tariff("dt_variable", kCal);
    // 2025-05-10 is a Saturday in the summer window
    int may10 = kCal.step_of_timestamp("2025-05-10T10:00");
    CHECK(var.price_at(may10).second == doctest::Approx(5.0));
    int jan10 = kCal.step_of_timestamp("2025-01-10T10:00");
    CHECK(var.price_at(jan10).second == doctest::Approx(9.5));

    TariffPolicy ref = make_tariff("dt_reference", kCal);
    CHECK(ref.price_at(may10).first == doctest::Approx(14.05));  // Saturday -> off-peak import
    int fri10 = kCal.step_of_timestamp("2025-05-09T10:00");
    CHECK(ref.price_at(fri10).first == doctest::Approx(21.95));
    int fri23 = kCal.step_of_timestamp("2025-05-09T23:00");
    CHECK(ref.price_at(fri23).first == doctest::Approx(14.05));

    TariffPolicy block = make_tariff("block_rate", kCal);
    // summer, 8 kW exported on 10 kW PV: 2.5@9.5 + 5@4.79 + 0.5@2.395 blended
    double expected = (2.5 * 9.5 + 5.0 * 4.79 + 0.5 * 2.395) / 8.0;
    CHECK(block.price_at(may10, 8.0, 10.0).second == doctest::Approx(expected).epsilon(1e-12));
    CHECK(block.price_at(jan10, 8.0, 10.0).second == doctest::Approx(9.5));  // winter flat
    CHECK_THROWS_AS(block.price_at(may10, 8.0, 0.0), ConfigError);  // needs PV capacity
}

TEST_CASE("irr_monthly price is affine in monthly irradiance, hitting both ends") {
    std::vector<double> irr(12);
    for (int m = 0; m < 12; ++m) irr[m] = 40.0 + 15.0 * m;  // min at Jan, max at Dec
    TariffPolicy t = make_tariff("irr_monthly", kCal, PriceLevel::mid, &irr);
    int jan = kCal.step_of_timestamp("2025-01-15T12:00");
    int dec = kCal.step_of_timestamp("2025-12-15T12:00");
    CHECK(t.price_at(jan).second == doctest::Approx(14.05).epsilon(1e-12));
    CHECK(t.price_at(dec).second == doctest::Approx(3.6).epsilon(1e-12));
    // affine: interior months interpolate linearly
    int mar = kCal.step_of_timestamp("2025-03-15T12:00");
    double expect = 14.05 + (3.6 - 14.05) * (irr[2] - irr[0]) / (irr[11] - irr[0]);
    CHECK(t.price_at(mar).second == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("bill: capacity examples from the study") {
    SUBCASE("ct_monthly: max import 5 kW every month at 0.70 CHF/kW-month -> 42 CHF") {
        TariffPolicy t = make_tariff("ct_monthly_50", kCal);
        auto imp = std::vector<double>(kSteps, 5.0);
        Bill b = compute_bill(imp, zeros(), 10.0, t);
        CHECK(b.import_cap_ct == doctest::Approx(4200.0));
        CHECK(b.cap_ct() / 100.0 == 42.0);  // binary-exact: 12 * (5 * 0.70) sums to 42
        CHECK(b.import_period_max_kw.size() == 12);
    }
    SUBCASE("zero dispatch -> zero bill") {
        TariffPolicy t = make_tariff("ct_daily_30", kCal);
        Bill b = compute_bill(zeros(), zeros(), 10.0, t);
        CHECK(b.total_chf() == 0.0);
    }
    SUBCASE("ct_export_daily: one day with 3 kW peak at 1.0108 CHF/kW-day") {
        TariffPolicy t = make_tariff("ct_export_daily", kCal);
        auto exp = zeros();
        exp[200 * 96 + 48] = 3.0;
        Bill b = compute_bill(zeros(), exp, 10.0, t);
        CHECK(b.export_cap_ct / 100.0 == doctest::Approx(3.0324).epsilon(1e-12));
        CHECK(b.import_cap_ct == 0.0);
    }
    SUBCASE("100 kWh imported at peak price -> 21.95 CHF") {
        TariffPolicy t = make_tariff("dt_reference", kCal);
        auto imp = zeros();
        // Monday 2025-05-05, 10:00 onwards: 400 quarter hours of 1 kW = 100 kWh
        int start = kCal.step_of_timestamp("2025-05-05T08:00");
        int placed = 0;
        for (int s = start; placed < 400; ++s) {
            if (t.import_ct[s] == 21.95) {
                imp[s] = 1.0;
                ++placed;
            }
        }
        Bill b = compute_bill(imp, zeros(), 0.0, t);
        CHECK(b.import_vol_ct == doctest::Approx(2195.0).epsilon(1e-12));
    }
    SUBCASE("capacity price without a billing period is a config error") {
        TariffPolicy t = make_tariff("dt_reference", kCal);
        t.import_cap_chf_kw = 0.5;
        CHECK_THROWS_AS(compute_bill(zeros(), zeros(), 0.0, t), ConfigError);
    }
}

TEST_CASE("bill invariants") {
    TariffPolicy t = make_tariff("ct_daily_50", kCal);
    std::vector<double> imp(kSteps), exp(kSteps);
    for (int s = 0; s < kSteps; ++s) {
        imp[s] = 0.5 + 0.5 * std::sin(0.01 * s) + ((s % 7) == 0 ? 1.5 : 0.0);
        imp[s] = std::max(0.0, imp[s]);
        exp[s] = (s % 96) > 40 && (s % 96) < 60 ? 2.0 + (s % 5) * 0.3 : 0.0;
    }
    Bill b1 = compute_bill(imp, exp, 12.0, t);

    SUBCASE("homogeneity: doubling dispatch doubles both components exactly") {
        auto imp2 = imp, exp2 = exp;
        for (auto& v : imp2) v *= 2.0;
        for (auto& v : exp2) v *= 2.0;
        Bill b2 = compute_bill(imp2, exp2, 24.0, t);
        CHECK(b2.import_vol_ct == 2.0 * b1.import_vol_ct);
        CHECK(b2.export_vol_ct == 2.0 * b1.export_vol_ct);
        CHECK(b2.import_cap_ct == 2.0 * b1.import_cap_ct);
    }
    SUBCASE("volumetric additivity over a half-year split") {
        auto imp_a = imp, imp_b = imp;
        int half = 182 * 96;  // split on a day boundary so periods stay whole
        for (int s = 0; s < kSteps; ++s) (s < half ? imp_b : imp_a)[s] = 0.0;
        Bill ba = compute_bill(imp_a, zeros(), 12.0, t);
        Bill bb = compute_bill(imp_b, zeros(), 12.0, t);
        Bill bf = compute_bill(imp, zeros(), 12.0, t);
        CHECK(ba.import_vol_ct + bb.import_vol_ct ==
              doctest::Approx(bf.import_vol_ct).epsilon(1e-12));
        // capacity: additive over periods when the split respects period edges
        CHECK(ba.import_cap_ct + bb.import_cap_ct == doctest::Approx(bf.import_cap_ct).epsilon(1e-9));
    }
    SUBCASE("block-rate revenue is concave in exported power") {
        TariffPolicy block = make_tariff("block_rate", kCal);
        int s = kCal.step_of_timestamp("2025-06-15T12:00");
        double prev_marginal = kInf;
        for (double kw = 0.5; kw <= 12.0; kw += 0.5) {
            double marginal = block.export_revenue_ct_per_h(s, kw, 10.0) -
                              block.export_revenue_ct_per_h(s, kw - 0.5, 10.0);
            CHECK(marginal <= (prev_marginal + 1e-9));
            prev_marginal = marginal;
        }
    }
}

TEST_CASE("grid cost recovery") {
    Bill b;
    b.import_vol_ct = 50000;  // 500 CHF
    b.import_cap_ct = 4200;   // 42 CHF
    b.export_vol_ct = 9500;   // 95 CHF remuneration, excluded
    CHECK(grid_cost_recovery({b}) == doctest::Approx(542.0));
    CHECK(grid_cost_recovery({}) == 0.0);
    CHECK(grid_cost_recovery({b, b}) == doctest::Approx(1084.0));
}

TEST_CASE("calibration") {
    SUBCASE("tariff without capacity component is a fixed point") {
        TariffPolicy ref = make_tariff("dt_reference", kCal);
        auto res = calibrate(ref, [](const TariffPolicy&) { return 1000.0; }, 1000.0, 0.02);
        CHECK(res.multiplier == 1.0);
        CHECK(res.achieved_ratio == doctest::Approx(1.0));
        CHECK(res.evaluations == 1);
    }
    SUBCASE("affine recovery converges within three evaluations") {
        TariffPolicy t = make_tariff("ct_daily_50", kCal);
        auto res = calibrate(
            t, [](const TariffPolicy& p) { return 400.0 + 300.0 * p.capacity_multiplier; }, 1000.0,
            0.02);
        CHECK(res.evaluations <= 3);
        CHECK(std::abs(res.achieved_ratio - 1.0) <= 0.02);
        CHECK(res.policy.capacity_multiplier == doctest::Approx(2.0).epsilon(0.05));
    }
    SUBCASE("unreachable target fails with the best ratio attached") {
        TariffPolicy t = make_tariff("ct_daily_50", kCal);
        try {
            calibrate(t, [](const TariffPolicy& p) { return 500.0 * p.capacity_multiplier /
                                                            (1.0 + p.capacity_multiplier); },
                      1000.0, 0.02);
            FAIL("expected CalibrationError");
        } catch (const CalibrationError& e) {
            CHECK(e.best_ratio() < 0.55);
            CHECK(e.best_ratio() > 0.0);
        }
    }
}
