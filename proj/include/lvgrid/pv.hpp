#pragma once

#include <map>
#include <string>
#include <vector>

#include "lvgrid/buildings.hpp"
#include "lvgrid/calendar.hpp"

namespace lvgrid {

struct WeatherSeries {
    std::vector<double> ghi_wm2;   // global horizontal irradiance
    std::vector<double> temp_c;    // ambient temperature
    std::map<std::string, std::vector<double>> poa_wm2;  // measured plane-of-array per class

    /// Irradiance for an orientation class: measured POA column when present,
    /// otherwise a flat-plate transposition from GHI.
    std::vector<double> irradiance_for(const std::string& orientation_class) const;

    /// Sum of GHI per calendar month (W/m2 accumulated over steps), used by
    /// irradiance-indexed tariffs.
    std::vector<double> monthly_ghi(const YearCalendar& cal) const;
};

WeatherSeries read_weather_csv(const std::string& path, const YearCalendar& cal);

struct PvModelParams {
    double module_area_m2 = 1.6310;
    double module_power_kw = 0.315;
    double usable_roof_fraction = 0.7;
    double temp_coeff_per_k = -0.0035;
    double noct_c = 45.0;
};

/// Installable PV capacity from roof segments: whole modules only.
double roof_capacity(const std::vector<RoofSegment>& roof, double module_area_m2,
                     double module_power_kw, double usable_fraction);

/// Orientation class label for a roof segment, e.g. "flat", "t30az180".
/// Tilt rounds to 5 degrees, azimuth to 45; tilt < 10 deg is "flat".
std::string orientation_class(const RoofSegment& seg);

/// Normalized generation (kW per kW installed) for one orientation class:
/// p = (G/1000) * max(0, 1 + gamma*(Tcell - 25)), Tcell = Tamb + (NOCT-20)/800 * G,
/// clipped at 1.25.
std::vector<double> generation_profile(const WeatherSeries& weather,
                                       const std::string& orientation_cls,
                                       double temp_coeff_per_k, double noct_c);

/// Capacity-weighted unit profile over a building's roof segments.
std::vector<double> building_unit_profile(const BuildingRecord& building,
                                          const WeatherSeries& weather, const PvModelParams& params);

} // namespace lvgrid
