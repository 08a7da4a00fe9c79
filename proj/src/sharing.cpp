#include "lvgrid/sharing.hpp"

#include <algorithm>

#include "lvgrid/common.hpp"

namespace lvgrid {

std::vector<BuildingRecord> merge_for_sharing(const std::vector<BuildingRecord>& buildings,
                                              FusionRecord& record) {
    if (buildings.size() < 2)
        throw ValidationError("prosumer-opt", "resource sharing needs at least two buildings");
    size_t consumer = 0, producer = 0;
    double max_load = -1, max_bound = -1;
    for (size_t i = 0; i < buildings.size(); ++i) {
        double e = buildings[i].annual_load_kwh();
        if (e > max_load) {
            max_load = e;
            consumer = i;
        }
        if (buildings[i].pv_cap_bound_kw > max_bound) {
            max_bound = buildings[i].pv_cap_bound_kw;
            producer = i;
        }
    }
    record.consumer_id = buildings[consumer].id;
    record.producer_id = buildings[producer].id;
    record.consumer_bus = buildings[consumer].bus_id;
    record.producer_bus = buildings[producer].bus_id;
    record.consumer_load_kw = buildings[consumer].load_kw;
    record.producer_load_kw = buildings[producer].load_kw;
    if (consumer == producer) {
        record.degenerate = true;
        return buildings;
    }
    record.degenerate = false;

    std::vector<BuildingRecord> out;
    out.reserve(buildings.size() - 1);
    for (size_t i = 0; i < buildings.size(); ++i) {
        if (i == consumer) continue;
        if (i == producer) {
            BuildingRecord merged = buildings[producer];
            merged.id = buildings[producer].id + "+" + buildings[consumer].id;
            merged.floor_area_m2 += buildings[consumer].floor_area_m2;
            merged.annual_kwh += buildings[consumer].annual_kwh;
            for (size_t t = 0; t < merged.load_kw.size(); ++t)
                merged.load_kw[t] += buildings[consumer].load_kw[t];
            out.push_back(std::move(merged));
        } else {
            out.push_back(buildings[i]);
        }
    }
    return out;
}

namespace {
// same grid the dispatch series are quantized to; keeps every sum below exact
double quantize_kw(double v) { return std::ldexp(std::round(std::ldexp(v, 30)), -30); }
} // namespace

SplitInjections split_after_sharing(const DispatchSeries& merged, const FusionRecord& record) {
    size_t n = merged.import_kw.size();
    if (record.consumer_load_kw.size() != n || record.producer_load_kw.size() != n)
        throw ValidationError("prosumer-opt", "fusion record does not match dispatch length");
    SplitInjections out;
    out.producer_net_kw.resize(n);
    out.consumer_net_kw.resize(n);
    for (size_t t = 0; t < n; ++t) {
        double sc = merged.selfcons_kw[t];
        double sc_producer = std::min(sc, quantize_kw(record.producer_load_kw[t]));
        double sc_consumer = std::min(sc - sc_producer, quantize_kw(record.consumer_load_kw[t]));
        double residual_consumer = quantize_kw(record.consumer_load_kw[t]) - sc_consumer;
        // dispatch series live on the dyadic kW grid, so these are exact:
        // producer + consumer == export - import holds bit for bit
        double net = merged.export_kw[t] - merged.import_kw[t];
        out.producer_net_kw[t] = net + residual_consumer;
        out.consumer_net_kw[t] = -residual_consumer;
    }
    return out;
}

} // namespace lvgrid
