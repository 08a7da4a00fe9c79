#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lvgrid/common.hpp"
#include "lvgrid/pv.hpp"

using namespace lvgrid;

TEST_CASE("roof_capacity: whole modules only") {
    // one segment exactly 10 module areas
    CHECK(roof_capacity({{16.31, 30, 180}}, 1.6310, 0.315, 1.0) == doctest::Approx(3.15));
    CHECK(roof_capacity({{0.0, 30, 180}}, 1.6310, 0.315, 1.0) == 0.0);
    // 16.31 * 0.7 / 1.6310 = 7.0 -> 7 modules
    CHECK(roof_capacity({{16.31, 30, 180}}, 1.6310, 0.315, 0.7) == doctest::Approx(2.205));
    CHECK_THROWS_AS(roof_capacity({{10, 30, 180}}, 1.6310, 0.315, 0.0), ValidationError);
    CHECK_THROWS_AS(roof_capacity({{-1, 30, 180}}, 1.6310, 0.315, 0.5), ValidationError);
}

TEST_CASE("generation_profile formula") {
    WeatherSeries w;
    w.ghi_wm2 = {0.0, 1000.0, 1000.0, 500.0, 800.0};
    w.temp_c = {20.0, -6.25, 25.0, 10.0, 10.0};

    auto p = generation_profile(w, "flat", -0.0035, 45.0);
    CHECK(p[0] == 0.0);  // night
    // T_cell = -6.25 + 25/800*1000 = 25 -> STC
    CHECK(p[1] == doctest::Approx(1.0).epsilon(1e-12));
    // T_cell = 25 + 31.25 = 56.25 -> 1 - 0.0035*31.25 = 0.890625
    CHECK(p[2] == doctest::Approx(0.890625).epsilon(1e-12));

    SUBCASE("monotone in irradiance at fixed temperature") {
        WeatherSeries w2;
        for (int g = 0; g <= 1200; g += 50) {
            w2.ghi_wm2.push_back(g);
            w2.temp_c.push_back(15.0);
        }
        auto q = generation_profile(w2, "flat", -0.0035, 45.0);
        for (size_t i = 1; i < q.size(); ++i) CHECK(q[i] >= (q[i - 1] - 1e-12));
    }
    SUBCASE("clipped at 1.25 and never negative") {
        WeatherSeries w3;
        w3.ghi_wm2 = {2000.0, 1500.0};
        w3.temp_c = {-30.0, 500.0};
        auto q = generation_profile(w3, "flat", -0.0035, 45.0);
        CHECK(q[0] <= 1.25);
        CHECK(q[1] >= 0.0);
    }
    CHECK_THROWS_AS(generation_profile(w, "flat", 0.001, 45.0), ValidationError);
}

TEST_CASE("orientation classes and weather fallbacks") {
    CHECK(orientation_class({10, 5, 123}) == "flat");
    CHECK(orientation_class({10, 28, 187}) == "t30az180");
    WeatherSeries w;
    w.temp_c = {10};
    SUBCASE("no ghi and no poa column is a configuration error") {
        CHECK_THROWS_AS(generation_profile(w, "t30az180", -0.0035, 45.0), ConfigError);
    }
    SUBCASE("poa column wins over transposition") {
        w.ghi_wm2 = {100};
        w.poa_wm2["t30az180"] = {400.0};
        auto p = generation_profile(w, "t30az180", -0.0035, 45.0);
        CHECK(p[0] > 0.3);  // driven by the measured 400 W/m2
    }
}

TEST_CASE("building unit profile is a capacity-weighted blend") {
    WeatherSeries w;
    w.ghi_wm2 = {800.0};
    w.temp_c = {15.0};
    BuildingRecord b;
    b.roof = {{20, 30, 180}, {20, 30, 0}};  // south + north at same size
    PvModelParams params;
    auto unit = building_unit_profile(b, w, params);
    auto south = generation_profile(w, "t30az180", params.temp_coeff_per_k, params.noct_c);
    auto north = generation_profile(w, "t30az0", params.temp_coeff_per_k, params.noct_c);
    CHECK(unit[0] == doctest::Approx(0.5 * (south[0] + north[0])).epsilon(1e-12));
    CHECK(unit[0] < south[0]);  // the north half drags the blend down
}
