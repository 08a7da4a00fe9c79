#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lvgrid/powerflow.hpp"
#include "lvgrid/tariff.hpp"

namespace lvgrid {

/// Annual PV generation over annual consumption, in percent. May exceed 100.
double pv_penetration(double p_pv_mwh, double p_load_mwh);

/// Discounted-cost over discounted-energy ratio, t = 1..T (arrays of length T).
double lcoe(const std::vector<double>& cost_per_year, const std::vector<double>& energy_per_year,
            double discount_rate);

struct IrrResult {
    bool found = false;
    double rate = 0;  // fraction per year
};

/// Root of the net-present-value of `net_cashflows` (t = 0..T). Requires a
/// single sign change; bisection on [-0.99, 10].
IrrResult irr(const std::vector<double>& net_cashflows);

double npv(const std::vector<double>& net_cashflows, double rate);

/// Yearly revenue/cost/production streams for one building's system.
struct CashflowSeries {
    std::vector<double> revenue, cost;  // t = 0..T (index 0 = investment year)
    std::vector<double> energy_kwh;     // produced energy, t = 1..T
    double discount_rate = 0.03;
    int horizon_yr = 25;
};

struct Totals {
    double c_power_chf = 0;   // fixed + capacity charges
    double c_energy_chf = 0;  // net volumetric charges
    double total_chf = 0;
    double profit_chf = 0;    // baseline cost minus cost with the system
};

/// Eq-style cost split for one bill, plus avoided-cost profit against a
/// no-system baseline under the same tariff. `annual_capex_chf` enters the
/// profit only.
Totals totals(const Bill& bill, double annual_capex_chf, double baseline_annual_chf);

struct BuildingKpi {
    std::string scenario;  // network/tariff tag for aggregation safety
    std::string id;
    double pv_kw = 0, battery_kwh = 0;
    double pv_production_mwh = 0;  // potential (pre-curtailment) production
    double load_mwh = 0;
    double import_mwh = 0, export_mwh = 0, curtailed_mwh = 0;
    double lcoe_chf_kwh = std::nan("");  // nan when no PV energy
    double irr_pct = std::nan("");       // nan when undefined
    double total_cost_chf = 0, profit_chf = 0;
};

/// One kpi.csv row: economic KPIs averaged over buildings, energies summed.
struct NetworkKpi {
    std::string network, tariff;
    double pv_penetration_pct = 0;
    double battery_kwh = 0;
    double import_mwh = 0, export_mwh = 0;
    double max_feedin_kw = 0, max_drawn_kw = 0;
    double curtailed_pct = 0;
    double lcoe = std::nan("");
    double irr_pct = std::nan("");
    double total_cost = 0, profit = 0;
    double recovery = 0;
};

NetworkKpi aggregate_report(const std::string& network, const std::string& tariff,
                            const std::vector<BuildingKpi>& kpis, const DurationCurve& curve,
                            double recovery_chf);

} // namespace lvgrid
