#pragma once

#include <vector>

#include "lvgrid/common.hpp"
#include "lvgrid/tariff.hpp"

namespace lvgrid {

struct SystemDesign {
    double pv_kw = 0;
    double battery_kwh = 0;
};

struct BatteryParams {
    double eta_charge = 0.95;
    double eta_discharge = 0.95;
    double c_rate = 0.5;  // charge/discharge power limit as fraction of capacity
    double soc0_kwh = 0.0;
};

struct DispatchSeries {
    std::vector<double> import_kw, export_kw, charge_kw, discharge_kw, curtail_kw;
    std::vector<double> selfcons_kw;  // PV power serving the load directly
    std::vector<double> soc_kwh;      // length T+1, soc_kwh[0] = initial state

    double import_energy_kwh() const;
    double export_energy_kwh() const;
    double curtailed_energy_kwh() const;
};

/// Self-contained dispatch instance. Prices are explicit per step so tests can
/// build instances of any horizon; optimize_dispatch() assembles one from a
/// TariffPolicy for the full year.
struct DispatchProblem {
    std::vector<double> load_kw, pv_kw;        // pv already scaled to installed capacity
    std::vector<double> import_ct, export_ct;  // volumetric prices per step
    double step_hours = 0.25;

    // tiered (block) export pricing on flagged steps; requires pv_cap_kw
    bool block = false;
    std::vector<uint8_t> block_active;
    double block_price_ct[3] = {9.5, 4.79, 2.395};
    double block_band_frac[3] = {0.25, 0.50, 0.25};
    double pv_cap_kw = 0;

    double export_cap_kw = kInf;  // feed-in limit (curtailment policy)

    double batt_kwh = 0, batt_power_kw = 0;
    double eta_charge = 0.95, eta_discharge = 0.95;
    double soc0_kwh = 0;

    // capacity charges: like periods are indexed 0..n_periods-1 per step
    std::vector<int> import_period, export_period;  // empty = no charge
    int n_import_periods = 0, n_export_periods = 0;
    double import_cap_ct_kw = 0, export_cap_ct_kw = 0;  // ct per kW and period

    bool force_lp = false;  // route past the greedy fast path (cross-checking)

    int steps() const { return static_cast<int>(load_kw.size()); }

    /// Export remuneration in ct/h at step t for the given power.
    double export_revenue_ct_h(int t, double kw) const;

    /// Exact cost (ct) of a dispatch under this instance's prices, including
    /// capacity charges on period peaks. No tie-break epsilon included.
    double cost_ct(const DispatchSeries& s) const;
};

struct DispatchSolution {
    DispatchSeries series;
    double cost_ct = 0;
    int lp_iterations = 0;
    bool used_lp = false;
};

/// Cost-minimizing dispatch under perfect foresight. Closed-form greedy when
/// no battery is present, LP otherwise.
DispatchSolution solve_dispatch(const DispatchProblem& p);

struct DispatchResult {
    DispatchSeries series;
    Bill bill;
    double opex_ct = 0;
    int lp_iterations = 0;
    bool used_lp = false;
};

/// Year-long dispatch of a building with the given design under a tariff.
DispatchResult optimize_dispatch(const std::vector<double>& load_kw,
                                 const std::vector<double>& pv_unit, const SystemDesign& design,
                                 const TariffPolicy& tariff, const BatteryParams& batt = {});

/// Assembles the solver instance optimize_dispatch uses (exposed for tests).
DispatchProblem make_dispatch_problem(const std::vector<double>& load_kw,
                                      const std::vector<double>& pv_unit,
                                      const SystemDesign& design, const TariffPolicy& tariff,
                                      const BatteryParams& batt);

} // namespace lvgrid
