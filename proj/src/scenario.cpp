#include "lvgrid/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include "lvgrid/common.hpp"
#include "lvgrid/csv.hpp"

namespace lvgrid {

namespace fs = std::filesystem;

namespace {

/// Per-entity optimization under one tariff; parallel over entities with
/// results written into fixed slots (deterministic aggregation order).
std::vector<EntityResult> optimize_entities(const std::vector<BuildingRecord>& buildings,
                                            const std::vector<std::vector<double>>& unit_profiles,
                                            const TariffPolicy& tariff, const ScenarioInputs& in,
                                            const ScenarioSettings& st) {
    std::vector<EntityResult> out(buildings.size());
    std::atomic<size_t> next{0};
    auto work = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= buildings.size()) break;
            const BuildingRecord& b = buildings[i];
            EntityResult& e = out[i];
            e.id = b.id;
            DesignResult dr;
            if (st.pv_mode == "max_roof")
                dr = optimize_battery_for_pv(b.load_kw, unit_profiles[i], b.pv_cap_bound_kw, tariff,
                                             in.costs, in.battery, st.design);
            else
                dr = optimize_design(b.load_kw, unit_profiles[i], b.pv_cap_bound_kw, tariff,
                                     in.costs, in.battery, st.design);
            e.design = dr.design;
            e.dispatch = std::move(dr.dispatch);
            e.annual_capex_chf = in.costs.annual_capex(e.design.pv_kw, e.design.battery_kwh);
            DispatchResult base =
                optimize_dispatch(b.load_kw, unit_profiles[i], SystemDesign{0, 0}, tariff, in.battery);
            e.baseline_annual_chf = base.bill.total_chf();
        }
    };
    int n_threads = st.threads > 0 ? st.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(buildings.size())));
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n_threads; ++k) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return out;
}

double entity_recovery(const std::vector<EntityResult>& entities) {
    std::vector<Bill> bills;
    bills.reserve(entities.size());
    for (const auto& e : entities) bills.push_back(e.dispatch.bill);
    return grid_cost_recovery(bills);
}

struct PipelinePrep {
    std::vector<BuildingRecord> buildings;  // post-sharing entity list
    std::vector<std::vector<double>> unit_profiles;
    bool shared = false;
    FusionRecord fusion;
};

} // namespace

ScenarioOutcome run_pipeline(const ScenarioInputs& in, const ScenarioSettings& st) {
    ScenarioOutcome out;
    const int n = in.cal.steps();

    // ---- demand allocation --------------------------------------------------
    std::vector<BuildingRecord> buildings = in.buildings;
    bool need_profiles = false;
    for (auto& b : buildings) {
        if (b.annual_kwh <= 0) b.annual_kwh = estimate_annual(b.category, b.floor_area_m2, in.intensities);
        if (b.load_kw.empty()) need_profiles = true;
    }
    if (need_profiles) {
        if (in.reference_profiles.empty())
            throw ConfigError("demand-alloc", "buildings lack load profiles and no reference "
                                              "profiles were provided");
        build_profiles(buildings, in.reference_profiles, in.cal);
    }
    for (const auto& b : buildings)
        if (static_cast<int>(b.load_kw.size()) != n)
            throw ValidationError("demand-alloc", "building '" + b.id + "' profile length mismatch");
    if (!in.transformer_kw.empty()) out.reconcile_diag = reconcile(buildings, in.transformer_kw);

    // ---- pv bounds and unit profiles ----------------------------------------
    for (auto& b : buildings)
        b.pv_cap_bound_kw = roof_capacity(b.roof, in.pv_params.module_area_m2,
                                          in.pv_params.module_power_kw,
                                          in.pv_params.usable_roof_fraction);
    validate_building_mapping(in.net, buildings);

    // ---- optional resource sharing -------------------------------------------
    PipelinePrep prep;
    if (st.sharing) {
        prep.buildings = merge_for_sharing(buildings, prep.fusion);
        prep.shared = !prep.fusion.degenerate;
    } else {
        prep.buildings = buildings;
    }
    out.shared = prep.shared;
    out.fusion = prep.fusion;

    prep.unit_profiles.resize(prep.buildings.size());
    for (size_t i = 0; i < prep.buildings.size(); ++i)
        prep.unit_profiles[i] = building_unit_profile(prep.buildings[i], in.weather, in.pv_params);

    // ---- tariff (with optional recovery calibration) --------------------------
    std::vector<double> monthly_irr = in.weather.monthly_ghi(in.cal);
    TariffPolicy tariff = make_tariff(st.tariff_id, in.cal, st.level, &monthly_irr);
    if (st.curtailment_override) tariff.curtailment_fraction = st.curtailment_override;

    std::vector<EntityResult> entities;
    if (st.calibration) {
        if (st.reference_recovery_chf <= 0)
            throw ConfigError("scenario-cli", "calibration requires reference_recovery > 0");
        auto evaluator = [&](const TariffPolicy& p) {
            return entity_recovery(optimize_entities(prep.buildings, prep.unit_profiles, p, in, st));
        };
        CalibrationResult cr =
            calibrate(tariff, evaluator, st.reference_recovery_chf, st.calibration_tol);
        tariff = cr.policy;
        out.calibrated = true;
        out.calibration_multiplier = cr.multiplier;
        out.calibration_ratio = cr.achieved_ratio;
    }
    entities = optimize_entities(prep.buildings, prep.unit_profiles, tariff, in, st);

    // ---- per-bus net injections ----------------------------------------------
    std::vector<std::vector<double>> injections(in.net.buses.size(), std::vector<double>(n, 0.0));
    auto add_net = [&](const std::string& bus_id, const std::vector<double>& net_kw) {
        int bus = in.net.bus_index(bus_id);
        if (bus < 0) throw ValidationError("scenario-cli", "unknown bus '" + bus_id + "'");
        for (int t = 0; t < n; ++t) injections[bus][t] += net_kw[t];
    };
    for (size_t i = 0; i < prep.buildings.size(); ++i) {
        const auto& d = entities[i].dispatch.series;
        if (prep.shared && prep.buildings[i].id == prep.fusion.producer_id + "+" + prep.fusion.consumer_id) {
            SplitInjections split = split_after_sharing(d, prep.fusion);
            add_net(prep.fusion.producer_bus, split.producer_net_kw);
            add_net(prep.fusion.consumer_bus, split.consumer_net_kw);
        } else {
            std::vector<double> net(n);
            for (int t = 0; t < n; ++t) net[t] = d.export_kw[t] - d.import_kw[t];
            add_net(prep.buildings[i].bus_id, net);
        }
    }

    // ---- power flow -----------------------------------------------------------
    PowerFlowOptions pf_opts;
    pf_opts.power_factor = st.power_factor;
    pf_opts.threads = st.threads;
    out.flow = run_timeseries(in.net, injections, pf_opts);
    out.congestion = congestion_stats(out.flow);
    out.curve = duration_curve(out.flow.transformer_kw, in.net.transformer.rated_kva);

    // ---- KPIs ------------------------------------------------------------------
    const std::string scenario_tag = st.network_name + "/" + st.tariff_id;
    for (size_t i = 0; i < prep.buildings.size(); ++i) {
        const BuildingRecord& b = prep.buildings[i];
        const EntityResult& e = entities[i];
        BuildingKpi k;
        k.scenario = scenario_tag;
        k.id = b.id;
        k.pv_kw = e.design.pv_kw;
        k.battery_kwh = e.design.battery_kwh;
        double unit_annual_kwh = sum(prep.unit_profiles[i]) * kStepHours;
        k.pv_production_mwh = e.design.pv_kw * unit_annual_kwh / 1000.0;
        k.load_mwh = b.annual_load_kwh() / 1000.0;
        k.import_mwh = e.dispatch.series.import_energy_kwh() / 1000.0;
        k.export_mwh = e.dispatch.series.export_energy_kwh() / 1000.0;
        k.curtailed_mwh = e.dispatch.series.curtailed_energy_kwh() / 1000.0;

        Totals tt = totals(e.dispatch.bill, e.annual_capex_chf, e.baseline_annual_chf);
        k.total_cost_chf = tt.total_chf;
        k.profit_chf = tt.profit_chf;

        // cashflows over the system lifetime; battery replaced after its lifetime
        int T = static_cast<int>(in.costs.lifetime_yr);
        double capex0 = in.costs.pv_capex(e.design.pv_kw) + in.costs.battery_capex(e.design.battery_kwh);
        double maint = in.costs.pv_maintenance_frac * in.costs.pv_capex(e.design.pv_kw);
        double delivered_kwh = (k.pv_production_mwh - k.curtailed_mwh) * 1000.0;
        if (delivered_kwh > 0 && e.design.pv_kw > 0) {
            std::vector<double> costs_t(T, 0.0), energy_t(T, delivered_kwh);
            std::vector<double> cash(T + 1, 0.0);
            cash[0] = -capex0;
            costs_t[0] += capex0;
            for (int t = 1; t <= T; ++t) {
                double year_cost = maint + e.dispatch.bill.total_chf();
                costs_t[t - 1] += t == 1 ? maint + e.dispatch.bill.total_chf() - 0 : 0;
                if (t > 1) costs_t[t - 1] += year_cost;
                double repl = 0;
                int life = static_cast<int>(in.costs.battery_lifetime_yr);
                if (life > 0 && life < T && ((t - 1) % life == 0) && t > 1)
                    repl = in.costs.battery_capex(e.design.battery_kwh);
                costs_t[t - 1] += repl;
                cash[t] = e.baseline_annual_chf - e.dispatch.bill.total_chf() - maint - repl;
            }
            k.lcoe_chf_kwh = lcoe(costs_t, energy_t, in.costs.discount_rate);
            IrrResult ir = irr(cash);
            if (ir.found) k.irr_pct = ir.rate * 100.0;
        }
        out.building_kpis.push_back(k);
        out.bills.push_back(e.dispatch.bill);
    }
    out.entities = std::move(entities);
    double recovery = grid_cost_recovery(out.bills);
    out.kpi = aggregate_report(st.network_name, st.tariff_id, out.building_kpis, out.curve, recovery);
    return out;
}

// ---------------------------------------------------------------------------
// configuration file, loading, output writing

namespace {

std::map<std::string, std::string> read_kv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scenario-cli", "cannot open config '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t c = line.find('#');
        if (c != std::string::npos) line = line.substr(0, c);
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r\n");
            if (a == std::string::npos) return std::string();
            size_t b = s.find_last_not_of(" \t\r\n");
            return s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("scenario-cli",
                              path + ":" + std::to_string(lineno) + ": empty key");
        kv[key] = val;
    }
    return kv;
}

double to_num(const std::map<std::string, std::string>& kv, const std::string& key, double dflt) {
    auto it = kv.find(key);
    if (it == kv.end()) return dflt;
    return csv::to_double(it->second, "config key " + key);
}

std::string get(const std::map<std::string, std::string>& kv, const std::string& key,
                const std::string& dflt) {
    auto it = kv.find(key);
    return it == kv.end() ? dflt : it->second;
}

} // namespace

ScenarioConfig ScenarioConfig::parse(const std::string& path) {
    auto kv = read_kv(path);
    ScenarioConfig cfg;
    cfg.base_dir = fs::path(path).parent_path().string();
    if (cfg.base_dir.empty()) cfg.base_dir = ".";
    cfg.network_file = get(kv, "network", "");
    cfg.buildings_file = get(kv, "buildings", "");
    cfg.roofs_file = get(kv, "roofs", "");
    cfg.profiles_dir = get(kv, "profiles_dir", "");
    cfg.transformer_file = get(kv, "transformer", "");
    cfg.weather_file = get(kv, "weather", "");
    cfg.year = static_cast<int>(to_num(kv, "year", 2025));

    std::string nets = get(kv, "networks", "");
    if (!nets.empty()) {
        for (const std::string& part : csv::split(nets, ';')) {
            if (part.empty()) continue;
            size_t colon = part.find(':');
            if (colon == std::string::npos)
                throw ConfigError("scenario-cli", "networks entries must be name:dir, got '" + part + "'");
            cfg.networks.push_back({part.substr(0, colon), part.substr(colon + 1)});
        }
    }

    ScenarioSettings& st = cfg.settings;
    st.tariff_id = get(kv, "tariff", "dt_reference");
    std::string level = get(kv, "level", "mid");
    if (level == "low") st.level = PriceLevel::low;
    else if (level == "mid") st.level = PriceLevel::mid;
    else if (level == "high") st.level = PriceLevel::high;
    else throw ConfigError("scenario-cli", "level must be low|mid|high, got '" + level + "'");
    st.pv_mode = get(kv, "pv_mode", "optimized");
    if (st.pv_mode != "optimized" && st.pv_mode != "max_roof")
        throw ConfigError("scenario-cli", "pv_mode must be optimized|max_roof");
    st.sharing = get(kv, "sharing", "off") == "on";
    st.calibration = get(kv, "calibration", "off") == "on";
    st.reference_recovery_chf = to_num(kv, "reference_recovery", 0);
    st.calibration_tol = to_num(kv, "calibration_tol", 0.05);
    if (kv.count("curtailment")) st.curtailment_override = to_num(kv, "curtailment", 0);
    st.threads = static_cast<int>(to_num(kv, "threads", 0));
    st.power_factor = to_num(kv, "power_factor", 1.0);

    PvModelParams& pv = cfg.pv_params;
    pv.module_area_m2 = to_num(kv, "module_area_m2", pv.module_area_m2);
    pv.module_power_kw = to_num(kv, "module_power_kw", pv.module_power_kw);
    pv.usable_roof_fraction = to_num(kv, "usable_roof_fraction", pv.usable_roof_fraction);
    pv.temp_coeff_per_k = to_num(kv, "temp_coeff_per_k", pv.temp_coeff_per_k);
    pv.noct_c = to_num(kv, "noct_c", pv.noct_c);

    BatteryParams& bp = cfg.battery;
    bp.eta_charge = to_num(kv, "eta_charge", bp.eta_charge);
    bp.eta_discharge = to_num(kv, "eta_discharge", bp.eta_discharge);
    bp.c_rate = to_num(kv, "battery_c_rate", bp.c_rate);

    CostModel& cm = cfg.costs;
    cm.lifetime_yr = to_num(kv, "system_lifetime_yr", cm.lifetime_yr);
    cm.discount_rate = to_num(kv, "discount_rate", cm.discount_rate);
    cm.pv_fixed_cost = to_num(kv, "pv_fixed_cost", cm.pv_fixed_cost);
    cm.pv_cost_per_kw = to_num(kv, "pv_cost_per_kw", cm.pv_cost_per_kw);
    cm.battery_cost_per_kwh = to_num(kv, "battery_cost_per_kwh", cm.battery_cost_per_kwh);
    cm.battery_lifetime_yr = to_num(kv, "battery_lifetime_yr", cm.battery_lifetime_yr);
    cm.pv_maintenance_frac = to_num(kv, "pv_maintenance_frac", cm.pv_maintenance_frac);

    for (const auto& [key, val] : kv)
        if (key.rfind("intensity.", 0) == 0)
            cfg.intensities[key.substr(10)] = csv::to_double(val, key);
    return cfg;
}

namespace {

std::string join_path(const std::string& base, const std::string& rel) {
    if (rel.empty()) return rel;
    fs::path p(rel);
    return p.is_absolute() ? rel : (fs::path(base) / p).string();
}

ReferenceProfiles load_reference_profiles(const std::string& dir, const YearCalendar& cal) {
    ReferenceProfiles refs;
    if (dir.empty()) return refs;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::string stem = f.stem().string();
        size_t us = stem.rfind('_');
        std::string cat = us == std::string::npos ? stem : stem.substr(0, us);
        refs[cat].push_back(read_profile_csv(f.string(), cal));
    }
    return refs;
}

} // namespace

ScenarioInputs load_inputs_from_dir(const ScenarioConfig& cfg, const std::string& dir,
                                    const std::string& network_name) {
    (void)network_name;
    ScenarioInputs in;
    in.cal = YearCalendar(cfg.year);
    if (in.cal.steps() != 35040)
        throw ConfigError("scenario-cli", "simulation year must have 365 days (got " +
                                              std::to_string(in.cal.days()) + ")");
    auto path = [&](const std::string& rel, const std::string& dflt) {
        return join_path(dir, rel.empty() ? dflt : rel);
    };
    in.net = parse_network(path(cfg.network_file, "network.csv"));
    in.buildings = read_buildings_csv(path(cfg.buildings_file, "buildings.csv"),
                                      path(cfg.roofs_file, "roofs.csv"));
    in.reference_profiles =
        load_reference_profiles(path(cfg.profiles_dir, "profiles"), in.cal);
    std::string trafo = cfg.transformer_file.empty()
                            ? (fs::exists(fs::path(dir) / "transformer.csv") ? "transformer.csv" : "")
                            : cfg.transformer_file;
    if (!trafo.empty()) in.transformer_kw = read_profile_csv(join_path(dir, trafo), in.cal);
    std::string weather = cfg.weather_file.empty() ? "weather.csv" : cfg.weather_file;
    std::string wpath = join_path(dir, weather);
    if (!fs::exists(wpath)) wpath = join_path(cfg.base_dir, weather);  // sweep: shared weather
    in.weather = read_weather_csv(wpath, in.cal);
    in.intensities = cfg.intensities;
    in.pv_params = cfg.pv_params;
    in.battery = cfg.battery;
    in.costs = cfg.costs;
    return in;
}

ScenarioInputs load_inputs(const ScenarioConfig& cfg) {
    return load_inputs_from_dir(cfg, cfg.base_dir, cfg.settings.network_name);
}

namespace {

std::string fmt_kpi_row(const NetworkKpi& k) {
    auto n = [](double v, int d = 6) { return CsvWriter::num(v, d); };
    std::string row;
    for (const std::string& f :
         {k.network, k.tariff, n(k.pv_penetration_pct, 3), n(k.battery_kwh, 3), n(k.import_mwh, 6),
          n(k.export_mwh, 6), n(k.max_feedin_kw, 3), n(k.max_drawn_kw, 3), n(k.curtailed_pct, 4),
          n(k.lcoe, 6), n(k.irr_pct, 4), n(k.total_cost, 2), n(k.profit, 2), n(k.recovery, 2)})
        row += (row.empty() ? "" : ",") + f;
    return row;
}

const char* kKpiHeader =
    "network,tariff,pv_penetration_pct,battery_kwh,import_mwh,export_mwh,max_feedin_kw,"
    "max_drawn_kw,curtailed_pct,lcoe,irr_pct,total_cost,profit,recovery";

} // namespace

void write_outputs(const ScenarioOutcome& o, const NetworkModel& net, const std::string& out_dir) {
    fs::create_directories(out_dir);
    {
        CsvWriter w((fs::path(out_dir) / "kpi.csv").string());
        w.row(csv::split(kKpiHeader));
        w.row(csv::split(fmt_kpi_row(o.kpi)));
    }
    {
        CsvWriter w((fs::path(out_dir) / "building_kpi.csv").string());
        w.row({"id", "pv_kw", "battery_kwh", "pv_production_mwh", "load_mwh", "import_mwh",
               "export_mwh", "curtailed_mwh", "lcoe", "irr_pct", "total_cost", "profit"});
        for (const auto& k : o.building_kpis)
            w.row({k.id, CsvWriter::num(k.pv_kw, 3), CsvWriter::num(k.battery_kwh, 3),
                   CsvWriter::num(k.pv_production_mwh, 6), CsvWriter::num(k.load_mwh, 6),
                   CsvWriter::num(k.import_mwh, 6), CsvWriter::num(k.export_mwh, 6),
                   CsvWriter::num(k.curtailed_mwh, 6), CsvWriter::num(k.lcoe_chf_kwh, 6),
                   CsvWriter::num(k.irr_pct, 4), CsvWriter::num(k.total_cost_chf, 2),
                   CsvWriter::num(k.profit_chf, 2)});
    }
    {
        CsvWriter w((fs::path(out_dir) / "line_loading.csv").string());
        w.row({"line", "p95_loading", "max_loading", "overloaded_hours"});
        for (size_t li = 0; li < o.congestion.lines.size(); ++li) {
            const auto& l = net.lines[li];
            const auto& s = o.congestion.lines[li];
            w.row({net.buses[l.from].id + "-" + net.buses[l.to].id,
                   CsvWriter::num(s.p95_loading, 6), CsvWriter::num(s.max_loading, 6),
                   CsvWriter::num(s.overloaded_hours, 2)});
        }
    }
    {
        CsvWriter w((fs::path(out_dir) / "voltage.csv").string());
        w.row({"bus", "p95_high", "p95_low", "violations_high", "violations_low"});
        for (size_t b = 0; b < o.congestion.buses.size(); ++b) {
            const auto& s = o.congestion.buses[b];
            w.row({net.buses[b].id, CsvWriter::num(s.p95_v_high, 6), CsvWriter::num(s.p95_v_low, 6),
                   std::to_string(s.violations_high), std::to_string(s.violations_low)});
        }
    }
    {
        CsvWriter w((fs::path(out_dir) / "duration_curve.csv").string());
        w.row({"rank", "kw"});
        for (size_t r = 0; r < o.curve.sorted_abs_kw.size(); ++r)
            w.row({std::to_string(r + 1), CsvWriter::num(o.curve.sorted_abs_kw[r], 4)});
    }
    {
        CsvWriter w((fs::path(out_dir) / "bills.csv").string());
        w.row({"id", "import_vol_ct", "export_vol_ct", "import_cap_ct", "export_cap_ct",
               "total_chf"});
        for (size_t i = 0; i < o.bills.size(); ++i) {
            const Bill& b = o.bills[i];
            w.row({o.building_kpis[i].id, CsvWriter::num(b.import_vol_ct, 4),
                   CsvWriter::num(b.export_vol_ct, 4), CsvWriter::num(b.import_cap_ct, 4),
                   CsvWriter::num(b.export_cap_ct, 4), CsvWriter::num(b.total_chf(), 4)});
        }
    }
    if (o.calibrated) {
        CsvWriter w((fs::path(out_dir) / "calibration.csv").string());
        w.row({"tariff", "multiplier", "achieved_ratio"});
        w.row({o.kpi.tariff, CsvWriter::num(o.calibration_multiplier, 6),
               CsvWriter::num(o.calibration_ratio, 6)});
    }
}

ScenarioOutcome run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
    ScenarioInputs in = load_inputs(cfg);
    ScenarioOutcome out = run_pipeline(in, cfg.settings);
    write_outputs(out, in.net, out_dir);
    return out;
}

void run_sweep(const ScenarioConfig& cfg, const std::string& out_dir) {
    if (cfg.networks.empty())
        throw ConfigError("scenario-cli", "sweep needs a 'networks = name:dir;...' entry");
    fs::create_directories(out_dir);
    CsvWriter combined((fs::path(out_dir) / "kpi.csv").string());
    combined.row(csv::split(kKpiHeader));
    for (const auto& [name, rel_dir] : cfg.networks) {
        std::string dir = join_path(cfg.base_dir, rel_dir);
        ScenarioInputs in = load_inputs_from_dir(cfg, dir, name);
        for (const std::string& tariff : tariff_ids()) {
            ScenarioSettings st = cfg.settings;
            st.network_name = name;
            st.tariff_id = tariff;
            ScenarioOutcome out = run_pipeline(in, st);
            write_outputs(out, in.net, (fs::path(out_dir) / name / tariff).string());
            combined.row(csv::split(fmt_kpi_row(out.kpi)));
        }
    }
}

} // namespace lvgrid
