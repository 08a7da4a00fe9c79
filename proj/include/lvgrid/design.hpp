#pragma once

#include "lvgrid/dispatch.hpp"

namespace lvgrid {

struct CostModel {
    double lifetime_yr = 25;
    double discount_rate = 0.03;
    double pv_fixed_cost = 10049;       // applies only when pv_kw > 0
    double pv_cost_per_kw = 1050;       // 1.05 per W
    double battery_fixed_cost = 0;
    double battery_cost_per_kwh = 229;
    double battery_lifetime_yr = 10;
    double pv_maintenance_frac = 0.01;  // of PV capex, per year

    /// Capital recovery factor r / (1 - (1+r)^-n).
    static double crf(double rate, double years);

    double pv_capex(double pv_kw) const {
        return pv_kw > 0 ? pv_fixed_cost + pv_cost_per_kw * pv_kw : 0.0;
    }
    double battery_capex(double kwh) const {
        return kwh > 0 ? battery_fixed_cost + battery_cost_per_kwh * kwh : 0.0;
    }
    /// CRF-annualized investment plus PV maintenance, per year.
    double annual_capex(double pv_kw, double battery_kwh) const;
};

struct DesignOptions {
    double pv_resolution_kw = 0.1;
    double batt_resolution_kwh = 0.5;
    int coarse_points = 5;          // per axis in the first grid pass
    double battery_max_kwh = -1;    // override; default 3x mean daily load energy
};

struct DesignResult {
    SystemDesign design;
    DispatchResult dispatch;
    double annual_cost_chf = 0;  // annualized capex + OPEX
    int evaluations = 0;
};

/// Minimizes annualized total cost of ownership over (pv_kw, battery_kwh) by
/// coarse gridding plus local refinement down to the stated resolution. The
/// zero-PV candidate is always evaluated explicitly (fixed-cost jump at 0).
DesignResult optimize_design(const std::vector<double>& load_kw, const std::vector<double>& pv_unit,
                             double roof_bound_kw, const TariffPolicy& tariff,
                             const CostModel& costs, const BatteryParams& batt = {},
                             const DesignOptions& opts = {});

/// Battery-only optimization with the PV size pinned (pv_mode = max-roof).
DesignResult optimize_battery_for_pv(const std::vector<double>& load_kw,
                                     const std::vector<double>& pv_unit, double pv_kw,
                                     const TariffPolicy& tariff, const CostModel& costs,
                                     const BatteryParams& batt = {}, const DesignOptions& opts = {});

} // namespace lvgrid
