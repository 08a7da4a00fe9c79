#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lvgrid/buildings.hpp"
#include "lvgrid/common.hpp"

using namespace lvgrid;

namespace {
const YearCalendar kCal(2025);

std::vector<double> flat_profile(double kw) { return std::vector<double>(kCal.steps(), kw); }

BuildingRecord building(const std::string& id, const std::string& cat, double annual) {
    BuildingRecord b;
    b.id = id;
    b.bus_id = "b1";
    b.category = cat;
    b.floor_area_m2 = 100;
    b.annual_kwh = annual;
    return b;
}
} // namespace

TEST_CASE("estimate_annual") {
    IntensityTable tbl{{"house", 28.0}, {"office", 40.0}};
    CHECK(estimate_annual("house", 200.0, tbl) == doctest::Approx(5600.0));
    CHECK(estimate_annual("house", 150.0, tbl) == doctest::Approx(150.0 * 28.0));
    CHECK_THROWS_AS(estimate_annual("house", 0.0, tbl), ValidationError);
    CHECK_THROWS_AS(estimate_annual("villa", 100.0, tbl), ConfigError);
}

TEST_CASE("build_profiles scales reference to the annual estimate") {
    ReferenceProfiles refs;
    refs["house"] = {flat_profile(4000.0 / (kCal.steps() * kStepHours))};  // 4000 kWh/yr

    SUBCASE("target double the reference doubles every sample") {
        std::vector<BuildingRecord> bs{building("a", "house", 8000)};
        build_profiles(bs, refs, kCal);
        CHECK(bs[0].load_kw[0] == doctest::Approx(2.0 * 4000.0 / (kCal.steps() * kStepHours)));
        CHECK(bs[0].annual_load_kwh() == doctest::Approx(8000).epsilon(1e-9));
    }
    SUBCASE("target equal to the reference leaves the profile unchanged") {
        std::vector<BuildingRecord> bs{building("a", "house", 4000)};
        build_profiles(bs, refs, kCal);
        CHECK(bs[0].load_kw[123] == doctest::Approx(4000.0 / (kCal.steps() * kStepHours)));
    }
    SUBCASE("round-robin with one profile serves both houses, scaled individually") {
        std::vector<BuildingRecord> bs{building("a", "house", 2000), building("b", "house", 6000)};
        build_profiles(bs, refs, kCal);
        CHECK(bs[0].annual_load_kwh() == doctest::Approx(2000).epsilon(1e-9));
        CHECK(bs[1].annual_load_kwh() == doctest::Approx(6000).epsilon(1e-9));
    }
    SUBCASE("missing category fails") {
        std::vector<BuildingRecord> bs{building("a", "shed", 100)};
        CHECK_THROWS_AS(build_profiles(bs, refs, kCal), ConfigError);
    }
    SUBCASE("stage-1 invariant: annual energy within 0.1% of the estimate") {
        std::vector<BuildingRecord> bs{building("a", "house", 3456.7)};
        build_profiles(bs, refs, kCal);
        CHECK(std::abs(bs[0].annual_load_kwh() - 3456.7) <= 0.001 * 3456.7);
    }
}

TEST_CASE("reconcile") {
    auto two_buildings = [](double kw_a, double kw_b) {
        std::vector<BuildingRecord> bs{building("a", "house", 0), building("b", "house", 0)};
        bs[0].load_kw = flat_profile(kw_a);
        bs[1].load_kw = flat_profile(kw_b);
        return bs;
    };

    SUBCASE("aggregate already matching leaves profiles unchanged") {
        auto bs = two_buildings(4, 6);
        auto diag = reconcile(bs, flat_profile(10));
        CHECK(diag.clamped_steps == 0);
        CHECK(bs[0].load_kw[0] == doctest::Approx(4.0));
        CHECK(bs[1].load_kw[17] == doctest::Approx(6.0));
    }
    SUBCASE("proportional scaling at a mismatched step") {
        auto bs = two_buildings(4, 6);
        auto trafo = flat_profile(10);
        trafo[5] = 12.0;
        reconcile(bs, trafo);
        CHECK(bs[0].load_kw[5] == doctest::Approx(4.8));
        CHECK(bs[1].load_kw[5] == doctest::Approx(7.2));
        CHECK(bs[0].load_kw[4] == doctest::Approx(4.0));
    }
    SUBCASE("factor clamped at 5 with residual reported") {
        auto bs = two_buildings(4, 6);
        auto trafo = flat_profile(10);
        trafo[7] = 100.0;
        auto diag = reconcile(bs, trafo);
        CHECK(diag.clamped_steps == 1);
        CHECK(bs[0].load_kw[7] == doctest::Approx(20.0));
        CHECK(bs[1].load_kw[7] == doctest::Approx(30.0));
        CHECK(diag.residual_energy_kwh == doctest::Approx(50.0 * kStepHours));
    }
    SUBCASE("transformer load with zero aggregate is an error") {
        auto bs = two_buildings(0, 0);
        CHECK_THROWS_AS(reconcile(bs, flat_profile(5)), ValidationError);
    }
    SUBCASE("unclamped aggregate matches exactly; ratios invariant; nonnegative") {
        auto bs = two_buildings(2, 8);
        auto trafo = flat_profile(10);
        for (int t = 0; t < kCal.steps(); ++t) trafo[t] = 6.0 + 6.0 * ((t * 37) % 100) / 100.0;
        auto diag = reconcile(bs, trafo);
        CHECK(diag.clamped_steps == 0);
        for (int t = 0; t < kCal.steps(); t += 997) {
            CHECK(bs[0].load_kw[t] + bs[1].load_kw[t] == doctest::Approx(trafo[t]).epsilon(1e-12));
            CHECK(bs[0].load_kw[t] / bs[1].load_kw[t] == doctest::Approx(0.25).epsilon(1e-12));
            CHECK(bs[0].load_kw[t] >= 0);
        }
    }
}
