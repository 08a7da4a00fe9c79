#pragma once

#include "lvgrid/buildings.hpp"
#include "lvgrid/dispatch.hpp"

namespace lvgrid {

struct FusionRecord {
    std::string consumer_id, producer_id;
    std::string consumer_bus, producer_bus;
    bool degenerate = false;  // largest consumer == largest producer
    std::vector<double> consumer_load_kw, producer_load_kw;
};

/// Virtual fusion of the largest consumer (by annual load energy) with the
/// largest producer (by roof PV bound): their loads are summed into one record
/// carrying the producer's roof; the consumer's record is removed. Degenerate
/// when both are the same building (set returned unchanged).
std::vector<BuildingRecord> merge_for_sharing(const std::vector<BuildingRecord>& buildings,
                                              FusionRecord& record);

struct SplitInjections {
    std::vector<double> producer_net_kw;  // positive = injecting into the grid
    std::vector<double> consumer_net_kw;
};

/// Splits the merged entity's net grid exchange back onto the two buses:
/// PV self-consumption covers the producer's load first, the remainder the
/// consumer's; the consumer's residual demand is its net draw, everything
/// else (export, battery, residual import) sits at the producer's bus. The
/// two series sum to the merged net injection bit-exactly.
SplitInjections split_after_sharing(const DispatchSeries& merged, const FusionRecord& record);

} // namespace lvgrid
