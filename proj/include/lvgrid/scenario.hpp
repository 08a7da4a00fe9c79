#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lvgrid/buildings.hpp"
#include "lvgrid/design.hpp"
#include "lvgrid/kpi.hpp"
#include "lvgrid/network.hpp"
#include "lvgrid/pv.hpp"
#include "lvgrid/sharing.hpp"
#include "lvgrid/synthetic.hpp"

namespace lvgrid {

/// In-memory scenario: everything needed to run the pipeline without files.
struct ScenarioInputs {
    YearCalendar cal{2025};
    NetworkModel net;
    std::vector<BuildingRecord> buildings;
    WeatherSeries weather;
    std::vector<double> transformer_kw;  // empty = skip reconciliation
    ReferenceProfiles reference_profiles;  // used for buildings without profiles
    IntensityTable intensities;
    PvModelParams pv_params;
    BatteryParams battery;
    CostModel costs;
};

struct ScenarioSettings {
    std::string network_name = "net";
    std::string tariff_id = "dt_reference";
    PriceLevel level = PriceLevel::mid;
    std::string pv_mode = "optimized";  // optimized | max_roof
    bool sharing = false;
    bool calibration = false;
    double reference_recovery_chf = 0;
    double calibration_tol = 0.05;
    std::optional<double> curtailment_override;
    int threads = 0;
    double power_factor = 1.0;
    DesignOptions design;
};

struct EntityResult {
    std::string id;
    SystemDesign design;
    DispatchResult dispatch;
    double annual_capex_chf = 0;
    double baseline_annual_chf = 0;  // bill of the no-system dispatch
};

struct ScenarioOutcome {
    NetworkKpi kpi;
    std::vector<BuildingKpi> building_kpis;
    std::vector<EntityResult> entities;  // post-sharing optimization entities
    std::vector<Bill> bills;
    CongestionStats congestion;
    DurationCurve curve;
    PowerFlowResult flow;
    ReconcileDiagnostics reconcile_diag;
    bool shared = false;
    FusionRecord fusion;
    bool calibrated = false;
    double calibration_multiplier = 1.0;
    double calibration_ratio = 1.0;
};

/// Demand allocation -> optional fusion -> per-building design/dispatch ->
/// power flow -> KPI aggregation.
ScenarioOutcome run_pipeline(const ScenarioInputs& in, const ScenarioSettings& st);

/// File-backed scenario configuration (key = value text).
struct ScenarioConfig {
    std::string base_dir;
    std::string network_file, buildings_file, roofs_file, profiles_dir, transformer_file,
        weather_file;
    std::vector<std::pair<std::string, std::string>> networks;  // sweep: (name, dir)
    int year = 2025;
    ScenarioSettings settings;
    PvModelParams pv_params;
    BatteryParams battery;
    CostModel costs;
    IntensityTable intensities = {
        {"apartment", 28.0}, {"house", 28.0}, {"non-residential", 40.0}};

    static ScenarioConfig parse(const std::string& path);
};

ScenarioInputs load_inputs(const ScenarioConfig& cfg);
ScenarioInputs load_inputs_from_dir(const ScenarioConfig& cfg, const std::string& dir,
                                    const std::string& network_name);

/// Runs one scenario and writes the output CSV set into out_dir.
ScenarioOutcome run_scenario(const ScenarioConfig& cfg, const std::string& out_dir);

/// All tariffs x all configured networks; per-run subdirectories plus a
/// combined kpi.csv.
void run_sweep(const ScenarioConfig& cfg, const std::string& out_dir);

void write_outputs(const ScenarioOutcome& outcome, const NetworkModel& net,
                   const std::string& out_dir);

} // namespace lvgrid
