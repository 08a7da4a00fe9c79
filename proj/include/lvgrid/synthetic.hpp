#pragma once

#include <string>

#include "lvgrid/buildings.hpp"
#include "lvgrid/network.hpp"
#include "lvgrid/pv.hpp"

namespace lvgrid {

struct FixtureOptions {
    int n_buildings = 4;
    int year = 2025;
    unsigned seed = 1;
    bool clear_sky = true;        // false adds deterministic cloud days
    double transformer_kva = 250;
    double line_km = 0.04;
    double line_r_ohm_km = 0.32;
    double line_x_ohm_km = 0.08;
    double line_ampacity_a = 300;
};

/// Self-contained synthetic scenario: feeder network, buildings with roofs,
/// category reference profiles, matching transformer series and weather.
struct Fixture {
    YearCalendar cal{2025};
    NetworkModel net;
    std::vector<BuildingRecord> buildings;  // profiles filled, pv bounds set
    WeatherSeries weather;
    std::vector<double> transformer_kw;     // equals the load aggregate
    ReferenceProfiles reference_profiles;
    IntensityTable intensities;
};

Fixture make_fixture(const FixtureOptions& opts = {});

/// Writes the fixture as the on-disk scenario layout (network.csv,
/// buildings.csv, roofs.csv, profiles/, weather.csv, transformer.csv,
/// scenario.cfg, sweep.cfg) under `dir`.
void write_fixture(const Fixture& fx, const std::string& dir);

} // namespace lvgrid
