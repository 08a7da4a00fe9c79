#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace lvgrid {

struct Bus {
    std::string id;
    bool is_slack = false;
    std::vector<std::string> building_ids;
};

struct Line {
    int from = -1, to = -1;             // bus indices
    double length_km = 0;
    double r_ohm_per_km = 0, x_ohm_per_km = 0;
    double ampacity_a = 0;
    std::complex<double> z_pu;          // series impedance in per-unit
    std::complex<double> z_ohm() const { return {r_ohm_per_km * length_km, x_ohm_per_km * length_km}; }
};

struct Transformer {
    double rated_kva = 0;
    double lv_voltage_v = 0;
};

/// Radial LV network in per-unit form. Immutable after parse; the tree arrays
/// (parent/order) are rooted at the slack bus.
struct NetworkModel {
    std::vector<Bus> buses;
    std::vector<Line> lines;
    Transformer transformer;
    double s_base_kva = 0;  // = transformer rating
    double v_base_v = 0;    // = LV nominal voltage
    int slack = -1;

    std::vector<int> parent;       // parent bus index (-1 at slack)
    std::vector<int> parent_line;  // line index toward parent (-1 at slack)
    std::vector<int> order;        // buses in root-first traversal order

    int bus_index(const std::string& id) const;
    double z_base_ohm() const { return v_base_v * v_base_v / (s_base_kva * 1e3); }
    double i_base_a() const { return s_base_kva * 1e3 / (std::sqrt(3.0) * v_base_v); }
};

NetworkModel parse_network(const std::string& path);
NetworkModel parse_network_stream(std::istream& in, const std::string& name);

struct BuildingRecord;

/// Maps bus index -> indices into `buildings`. Every building must reference
/// an existing bus; buses may host several buildings.
std::vector<std::vector<int>> validate_building_mapping(const NetworkModel& net,
                                                        const std::vector<BuildingRecord>& buildings);

} // namespace lvgrid
