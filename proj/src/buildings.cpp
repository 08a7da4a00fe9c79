#include "lvgrid/buildings.hpp"

#include <algorithm>
#include <cmath>

#include "lvgrid/common.hpp"
#include "lvgrid/csv.hpp"

namespace lvgrid {

double BuildingRecord::annual_load_kwh() const {
    double e = 0;
    for (double p : load_kw) e += p;
    return e * kStepHours;
}

double estimate_annual(const std::string& category, double floor_area_m2,
                       const IntensityTable& intensities) {
    if (floor_area_m2 <= 0)
        throw ValidationError("demand-alloc", "floor area must be > 0 (got " +
                                                  std::to_string(floor_area_m2) + ")");
    auto it = intensities.find(category);
    if (it == intensities.end())
        throw ConfigError("demand-alloc", "no consumption intensity for category '" + category + "'");
    return floor_area_m2 * it->second;
}

void build_profiles(std::vector<BuildingRecord>& buildings, const ReferenceProfiles& refs,
                    const YearCalendar& cal) {
    for (const auto& [cat, profiles] : refs) {
        if (profiles.empty())
            throw ConfigError("demand-alloc", "category '" + cat + "' has no reference profiles");
        for (const auto& p : profiles) {
            if (static_cast<int>(p.size()) != cal.steps())
                throw ConfigError("demand-alloc", "reference profile for '" + cat + "' has " +
                                                      std::to_string(p.size()) + " steps, expected " +
                                                      std::to_string(cal.steps()));
            for (double v : p)
                if (v < 0) throw ConfigError("demand-alloc", "negative reference load for '" + cat + "'");
        }
    }
    // deterministic assignment: buildings of a category in id order, round-robin
    std::vector<int> idx(buildings.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return buildings[a].id < buildings[b].id; });
    std::map<std::string, int> next_profile;
    for (int i : idx) {
        BuildingRecord& b = buildings[i];
        auto it = refs.find(b.category);
        if (it == refs.end())
            throw ConfigError("demand-alloc", "no reference profile for category '" + b.category + "'");
        const auto& pool = it->second;
        const std::vector<double>& ref = pool[next_profile[b.category] % pool.size()];
        next_profile[b.category]++;
        double ref_annual = 0;
        for (double v : ref) ref_annual += v;
        ref_annual *= kStepHours;
        if (ref_annual <= 0)
            throw ConfigError("demand-alloc", "reference profile for '" + b.category +
                                                  "' has zero annual energy");
        double scale = b.annual_kwh / ref_annual;
        b.load_kw.resize(ref.size());
        for (size_t t = 0; t < ref.size(); ++t) b.load_kw[t] = ref[t] * scale;
    }
}

ReconcileDiagnostics reconcile(std::vector<BuildingRecord>& buildings,
                               const std::vector<double>& transformer_kw) {
    const double lo = 0.2, hi = 5.0;
    size_t n_steps = transformer_kw.size();
    for (const auto& b : buildings)
        if (b.load_kw.size() != n_steps)
            throw ValidationError("demand-alloc", "building '" + b.id +
                                                      "' profile length does not match transformer series");
    ReconcileDiagnostics diag;
    for (size_t t = 0; t < n_steps; ++t) {
        double agg = 0;
        for (const auto& b : buildings) agg += b.load_kw[t];
        double target = transformer_kw[t];
        double factor;
        if (agg <= 0) {
            if (target > 0)
                throw ValidationError("demand-alloc",
                                      "reconciliation impossible at step " + std::to_string(t) +
                                          ": transformer load " + std::to_string(target) +
                                          " kW with zero aggregate building load");
            continue;  // both zero (or target <= 0): nothing to scale
        }
        factor = target / agg;
        double clamped = std::clamp(factor, lo, hi);
        if (clamped != factor) {
            diag.clamped_steps++;
            diag.residual_energy_kwh += std::abs(target - clamped * agg) * kStepHours;
        }
        for (auto& b : buildings) b.load_kw[t] *= clamped;
    }
    return diag;
}

std::vector<BuildingRecord> read_buildings_csv(const std::string& buildings_path,
                                               const std::string& roofs_path) {
    csv::Table bt = csv::read(buildings_path);
    int c_id = bt.column("id"), c_bus = bt.column("bus"), c_cat = bt.column("category");
    int c_area = bt.column("floor_area_m2"), c_annual = bt.column("annual_kwh");
    if (c_id < 0 || c_bus < 0 || c_cat < 0 || c_area < 0)
        throw ParseError("demand-alloc",
                         buildings_path + ": expected columns id,bus,category,floor_area_m2[,annual_kwh]");
    std::vector<BuildingRecord> out;
    for (size_t i = 0; i < bt.rows.size(); ++i) {
        const auto& r = bt.rows[i];
        std::string where = buildings_path + ":" + std::to_string(bt.line_numbers[i]);
        BuildingRecord b;
        b.id = r.at(c_id);
        b.bus_id = r.at(c_bus);
        b.category = r.at(c_cat);
        b.floor_area_m2 = csv::to_double(r.at(c_area), where);
        if (c_annual >= 0 && c_annual < static_cast<int>(r.size()) && !r[c_annual].empty())
            b.annual_kwh = csv::to_double(r[c_annual], where);
        out.push_back(b);
    }
    csv::Table rt = csv::read(roofs_path);
    int r_b = rt.column("building_id"), r_a = rt.column("area_m2");
    int r_t = rt.column("tilt_deg"), r_z = rt.column("azimuth_deg");
    if (r_b < 0 || r_a < 0 || r_t < 0 || r_z < 0)
        throw ParseError("demand-alloc",
                         roofs_path + ": expected columns building_id,area_m2,tilt_deg,azimuth_deg");
    for (size_t i = 0; i < rt.rows.size(); ++i) {
        const auto& r = rt.rows[i];
        std::string where = roofs_path + ":" + std::to_string(rt.line_numbers[i]);
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const BuildingRecord& b) { return b.id == r.at(r_b); });
        if (it == out.end())
            throw ValidationError("demand-alloc", where + ": roof references unknown building '" +
                                                      r.at(r_b) + "'");
        RoofSegment seg;
        seg.area_m2 = csv::to_double(r.at(r_a), where);
        seg.tilt_deg = csv::to_double(r.at(r_t), where);
        seg.azimuth_deg = csv::to_double(r.at(r_z), where);
        it->roof.push_back(seg);
    }
    return out;
}

} // namespace lvgrid
