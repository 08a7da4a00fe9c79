#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lvgrid/calendar.hpp"

namespace lvgrid {

enum class PeriodKind { none, daily, monthly };
enum class PriceLevel { low, mid, high };

/// One tariff of the study set. Volumetric prices are precomputed per step in
/// ct/kWh; capacity prices are CHF per kW and billing period. The import side
/// is the reference double tariff for every id; ids differ in export price
/// shape, curtailment fraction, and capacity components.
struct TariffPolicy {
    std::string id;
    YearCalendar cal{2025};

    std::vector<double> import_ct;  // per step
    std::vector<double> export_ct;  // per step; for block tariffs the top-tier marginal price

    bool block_rate = false;        // tiered export pricing during summer steps
    std::vector<uint8_t> block_active;          // per step, summer mask when block_rate
    double block_price_ct[3] = {9.5, 4.79, 2.395};
    double block_band_frac[3] = {0.25, 0.50, 0.25};  // of installed PV capacity

    PeriodKind import_period = PeriodKind::none;
    PeriodKind export_period = PeriodKind::none;
    double import_cap_chf_kw = 0;   // per billing period, before multiplier
    double export_cap_chf_kw = 0;
    double capacity_multiplier = 1.0;  // set by calibration

    std::optional<double> curtailment_fraction;  // of installed PV capacity

    double effective_import_cap() const { return import_cap_chf_kw * capacity_multiplier; }
    double effective_export_cap() const { return export_cap_chf_kw * capacity_multiplier; }

    /// Export remuneration at step t for power `exported_kw`, in ct per hour.
    /// Handles the tiered summer blocks; pv_cap_kw is required for block tariffs.
    double export_revenue_ct_per_h(int step, double exported_kw, double pv_cap_kw) const;

    /// (import, export) price in ct/kWh. The export value is the average rate
    /// at the given context (blended across blocks for block tariffs).
    std::pair<double, double> price_at(int step, double exported_kw = 0, double pv_cap_kw = 0) const;

    int periods(PeriodKind kind) const;
    int period_of_step(PeriodKind kind, int step) const;
};

/// All tariff ids of the study, in presentation order.
const std::vector<std::string>& tariff_ids();

/// Builds a tariff by id. `monthly_irradiance` (12 sums) is required for
/// irr_monthly, `level` picks the published low/mid/high capacity price.
TariffPolicy make_tariff(const std::string& id, const YearCalendar& cal,
                         PriceLevel level = PriceLevel::mid,
                         const std::vector<double>* monthly_irradiance = nullptr);

struct Bill {
    double import_vol_ct = 0;
    double export_vol_ct = 0;  // remuneration, positive
    double import_cap_ct = 0;
    double export_cap_ct = 0;
    std::vector<double> import_period_max_kw;
    std::vector<double> export_period_max_kw;

    double vol_ct() const { return import_vol_ct - export_vol_ct; }
    double cap_ct() const { return import_cap_ct + export_cap_ct; }
    double total_chf() const { return (vol_ct() + cap_ct()) / 100.0; }
};

/// Yearly bill for an import/export trajectory (kW per 15-min step).
Bill compute_bill(const std::vector<double>& import_kw, const std::vector<double>& export_kw,
                  double pv_cap_kw, const TariffPolicy& tariff);

/// Network charges actually collected: import volumetric plus capacity charges
/// on both sides; export remuneration is not netted against it.
double grid_cost_recovery(const std::vector<Bill>& bills);

struct CalibrationResult {
    TariffPolicy policy;
    double multiplier = 1.0;
    double achieved_ratio = 1.0;
    int evaluations = 0;
};

/// Scales the tariff's capacity-price component until the scenario recovery
/// (from `recovery_of`) matches `reference_chf_yr` within `tol` (relative).
/// Tariffs without a capacity component are returned unchanged with their
/// achieved ratio. Secant search with geometric bracketing, at most 30
/// evaluations; throws CalibrationError when no bracket exists.
CalibrationResult calibrate(const TariffPolicy& base,
                            const std::function<double(const TariffPolicy&)>& recovery_of,
                            double reference_chf_yr, double tol);

} // namespace lvgrid
