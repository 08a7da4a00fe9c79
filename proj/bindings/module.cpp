#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lvgrid/design.hpp"
#include "lvgrid/dispatch.hpp"
#include "lvgrid/kpi.hpp"
#include "lvgrid/powerflow.hpp"
#include "lvgrid/scenario.hpp"
#include "lvgrid/sharing.hpp"
#include "lvgrid/synthetic.hpp"

namespace py = pybind11;
using namespace lvgrid;

PYBIND11_MODULE(_core, m) {
    m.doc() = "LV-grid PV/tariff simulation core";

    py::register_exception<Error>(m, "LvGridError");

    py::class_<YearCalendar>(m, "YearCalendar")
        .def(py::init<int>())
        .def("steps", &YearCalendar::steps)
        .def("timestamp", &YearCalendar::timestamp)
        .def("month_of_step", &YearCalendar::month_of_step)
        .def("in_summer", &YearCalendar::in_summer);

    py::class_<NetworkModel>(m, "NetworkModel")
        .def_property_readonly("n_buses", [](const NetworkModel& n) { return n.buses.size(); })
        .def_property_readonly("n_lines", [](const NetworkModel& n) { return n.lines.size(); })
        .def_property_readonly("s_base_kva", [](const NetworkModel& n) { return n.s_base_kva; })
        .def("bus_ids", [](const NetworkModel& n) {
            std::vector<std::string> ids;
            for (const auto& b : n.buses) ids.push_back(b.id);
            return ids;
        });
    m.def("parse_network", &parse_network, py::arg("path"));

    m.def("estimate_annual", &estimate_annual);
    m.def("roof_capacity", &roof_capacity);
    m.def("generation_profile",
          [](const std::vector<double>& ghi, const std::vector<double>& temp,
             double temp_coeff, double noct) {
              WeatherSeries w;
              w.ghi_wm2 = ghi;
              w.temp_c = temp;
              return generation_profile(w, "flat", temp_coeff, noct);
          },
          py::arg("ghi_wm2"), py::arg("temp_c"), py::arg("temp_coeff_per_k") = -0.0035,
          py::arg("noct_c") = 45.0);

    py::class_<TariffPolicy>(m, "TariffPolicy")
        .def_readonly("id", &TariffPolicy::id)
        .def("price_at", &TariffPolicy::price_at, py::arg("step"), py::arg("exported_kw") = 0.0,
             py::arg("pv_cap_kw") = 0.0);
    m.def("tariff_ids", [] { return tariff_ids(); });
    m.def("make_tariff",
          [](const std::string& id, int year, const std::string& level,
             const std::vector<double>& monthly_irradiance) {
              YearCalendar cal(year);
              PriceLevel lv = level == "low" ? PriceLevel::low
                                             : (level == "high" ? PriceLevel::high : PriceLevel::mid);
              return make_tariff(id, cal, lv,
                                 monthly_irradiance.empty() ? nullptr : &monthly_irradiance);
          },
          py::arg("id"), py::arg("year") = 2025, py::arg("level") = "mid",
          py::arg("monthly_irradiance") = std::vector<double>{});

    py::class_<Bill>(m, "Bill")
        .def_readonly("import_vol_ct", &Bill::import_vol_ct)
        .def_readonly("export_vol_ct", &Bill::export_vol_ct)
        .def_readonly("import_cap_ct", &Bill::import_cap_ct)
        .def_readonly("export_cap_ct", &Bill::export_cap_ct)
        .def("vol_ct", &Bill::vol_ct)
        .def("cap_ct", &Bill::cap_ct)
        .def("total_chf", &Bill::total_chf);
    m.def("compute_bill", &compute_bill, py::arg("import_kw"), py::arg("export_kw"),
          py::arg("pv_cap_kw"), py::arg("tariff"));

    py::class_<DispatchSeries>(m, "DispatchSeries")
        .def_readonly("import_kw", &DispatchSeries::import_kw)
        .def_readonly("export_kw", &DispatchSeries::export_kw)
        .def_readonly("charge_kw", &DispatchSeries::charge_kw)
        .def_readonly("discharge_kw", &DispatchSeries::discharge_kw)
        .def_readonly("curtail_kw", &DispatchSeries::curtail_kw)
        .def_readonly("selfcons_kw", &DispatchSeries::selfcons_kw)
        .def_readonly("soc_kwh", &DispatchSeries::soc_kwh);

    py::class_<SystemDesign>(m, "SystemDesign")
        .def(py::init([](double pv, double batt) { return SystemDesign{pv, batt}; }),
             py::arg("pv_kw") = 0.0, py::arg("battery_kwh") = 0.0)
        .def_readwrite("pv_kw", &SystemDesign::pv_kw)
        .def_readwrite("battery_kwh", &SystemDesign::battery_kwh);

    py::class_<DispatchResult>(m, "DispatchResult")
        .def_readonly("series", &DispatchResult::series)
        .def_readonly("bill", &DispatchResult::bill)
        .def_readonly("opex_ct", &DispatchResult::opex_ct)
        .def_readonly("used_lp", &DispatchResult::used_lp);
    m.def("optimize_dispatch", &optimize_dispatch, py::arg("load_kw"), py::arg("pv_unit"),
          py::arg("design"), py::arg("tariff"), py::arg("battery") = BatteryParams{});

    py::class_<BatteryParams>(m, "BatteryParams")
        .def(py::init<>())
        .def_readwrite("eta_charge", &BatteryParams::eta_charge)
        .def_readwrite("eta_discharge", &BatteryParams::eta_discharge)
        .def_readwrite("c_rate", &BatteryParams::c_rate);

    py::class_<CostModel>(m, "CostModel")
        .def(py::init<>())
        .def_readwrite("pv_fixed_cost", &CostModel::pv_fixed_cost)
        .def_readwrite("pv_cost_per_kw", &CostModel::pv_cost_per_kw)
        .def_readwrite("battery_cost_per_kwh", &CostModel::battery_cost_per_kwh)
        .def("annual_capex", &CostModel::annual_capex);

    py::class_<DesignResult>(m, "DesignResult")
        .def_readonly("design", &DesignResult::design)
        .def_readonly("annual_cost_chf", &DesignResult::annual_cost_chf)
        .def_readonly("evaluations", &DesignResult::evaluations);
    m.def("optimize_design", &optimize_design, py::arg("load_kw"), py::arg("pv_unit"),
          py::arg("roof_bound_kw"), py::arg("tariff"), py::arg("costs") = CostModel{},
          py::arg("battery") = BatteryParams{}, py::arg("options") = DesignOptions{});
    py::class_<DesignOptions>(m, "DesignOptions").def(py::init<>());

    m.def("solve_snapshot",
          [](const NetworkModel& net, const std::vector<double>& injection_kw) {
              SnapshotResult r = solve_snapshot(net, injection_kw);
              std::vector<double> vmag;
              for (auto v : r.v_pu) vmag.push_back(std::abs(v));
              return py::make_tuple(vmag, r.iterations, r.slack_power_pu);
          },
          py::arg("network"), py::arg("injection_kw"));

    m.def("duration_curve", &duration_curve, py::arg("transformer_kw"), py::arg("rating_kva"));
    py::class_<DurationCurve>(m, "DurationCurve")
        .def_readonly("hours_above_rating", &DurationCurve::hours_above_rating)
        .def_readonly("reverse_hours_above_rating", &DurationCurve::reverse_hours_above_rating)
        .def_readonly("max_feedin_kw", &DurationCurve::max_feedin_kw)
        .def_readonly("max_drawn_kw", &DurationCurve::max_drawn_kw);

    m.def("pv_penetration", &pv_penetration);
    m.def("lcoe", &lcoe, py::arg("cost_per_year"), py::arg("energy_per_year"),
          py::arg("discount_rate"));
    m.def("irr", [](const std::vector<double>& cf) {
        IrrResult r = irr(cf);
        return py::make_tuple(r.found, r.rate);
    });
    m.def("npv", &npv);

    m.def("make_fixture_files",
          [](const std::string& dir, int n_buildings, unsigned seed, bool clear_sky) {
              FixtureOptions fo;
              fo.n_buildings = n_buildings;
              fo.seed = seed;
              fo.clear_sky = clear_sky;
              write_fixture(make_fixture(fo), dir);
          },
          py::arg("dir"), py::arg("n_buildings") = 4, py::arg("seed") = 1,
          py::arg("clear_sky") = true);

    m.def("run_scenario_files",
          [](const std::string& config_path, const std::string& out_dir) {
              ScenarioConfig cfg = ScenarioConfig::parse(config_path);
              ScenarioOutcome out = run_scenario(cfg, out_dir);
              py::dict d;
              d["network"] = out.kpi.network;
              d["tariff"] = out.kpi.tariff;
              d["pv_penetration_pct"] = out.kpi.pv_penetration_pct;
              d["battery_kwh"] = out.kpi.battery_kwh;
              d["import_mwh"] = out.kpi.import_mwh;
              d["export_mwh"] = out.kpi.export_mwh;
              d["max_feedin_kw"] = out.kpi.max_feedin_kw;
              d["curtailed_pct"] = out.kpi.curtailed_pct;
              d["recovery"] = out.kpi.recovery;
              return d;
          },
          py::arg("config_path"), py::arg("out_dir"));
}
