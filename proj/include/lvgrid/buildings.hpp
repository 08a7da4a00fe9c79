#pragma once

#include <map>
#include <string>
#include <vector>

#include "lvgrid/calendar.hpp"

namespace lvgrid {

struct RoofSegment {
    double area_m2 = 0;
    double tilt_deg = 0;
    double azimuth_deg = 0;  // 0 = north, 180 = south
};

struct BuildingRecord {
    std::string id;
    std::string bus_id;
    std::string category;        // apartment | house | non-residential
    double floor_area_m2 = 0;
    double annual_kwh = 0;       // annual consumption estimate
    std::vector<double> load_kw; // one year at 15-min steps
    std::vector<RoofSegment> roof;
    double pv_cap_bound_kw = 0;

    double annual_load_kwh() const;
};

/// kWh per m2 and year, per building category.
using IntensityTable = std::map<std::string, double>;

/// Reference load profiles per category (each one year at 15-min steps, kW).
using ReferenceProfiles = std::map<std::string, std::vector<std::vector<double>>>;

/// Stage (i): annual consumption from floor area and category intensity.
double estimate_annual(const std::string& category, double floor_area_m2,
                       const IntensityTable& intensities);

/// Stage (ii): assign each building the reference profile of its category
/// (round-robin over the category's profiles, buildings ordered by id) scaled
/// so annual energy matches the building's estimate.
void build_profiles(std::vector<BuildingRecord>& buildings, const ReferenceProfiles& refs,
                    const YearCalendar& cal);

struct ReconcileDiagnostics {
    int clamped_steps = 0;
    double residual_energy_kwh = 0;  // |aggregate - transformer| integrated over clamped steps
};

/// Stage (iii): per-timestep proportional scaling of all building loads so the
/// aggregate matches the measured transformer series; factors clamped to [0.2, 5].
ReconcileDiagnostics reconcile(std::vector<BuildingRecord>& buildings,
                               const std::vector<double>& transformer_kw);

/// Reads `buildings.csv` (id,bus,category,floor_area_m2[,annual_kwh]) and
/// `roofs.csv` (building_id,area_m2,tilt_deg,azimuth_deg).
std::vector<BuildingRecord> read_buildings_csv(const std::string& buildings_path,
                                               const std::string& roofs_path);

} // namespace lvgrid
