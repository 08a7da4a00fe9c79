#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lvgrid/scenario.hpp"

using namespace lvgrid;
namespace fs = std::filesystem;

namespace {

ScenarioInputs fixture_inputs(int n_buildings = 3) {
    FixtureOptions fo;
    fo.n_buildings = n_buildings;
    Fixture fx = make_fixture(fo);
    ScenarioInputs in;
    in.cal = fx.cal;
    in.net = fx.net;
    in.buildings = fx.buildings;
    in.weather = fx.weather;
    in.transformer_kw = fx.transformer_kw;
    in.intensities = fx.intensities;
    return in;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("pipeline smoke: full output set from the synthetic fixture") {
    ScenarioInputs in = fixture_inputs(3);
    ScenarioSettings st;
    st.pv_mode = "max_roof";  // battery-only optimization keeps this test fast
    st.tariff_id = "curtailment_50";
    ScenarioOutcome out = run_pipeline(in, st);

    CHECK(out.building_kpis.size() == 3);
    CHECK(out.kpi.pv_penetration_pct > 0.0);
    CHECK(out.flow.n_steps == in.cal.steps());
    CHECK(out.flow.failures == 0);
    CHECK(out.kpi.curtailed_pct >= 0.0);
    CHECK(out.bills.size() == 3);
    // pipeline conservation: kpi energies equal the dispatch aggregates
    double imp = 0, exp = 0;
    for (const auto& e : out.entities) {
        imp += e.dispatch.series.import_energy_kwh();
        exp += e.dispatch.series.export_energy_kwh();
    }
    CHECK(out.kpi.import_mwh == doctest::Approx(imp / 1000.0).epsilon(1e-9));
    CHECK(out.kpi.export_mwh == doctest::Approx(exp / 1000.0).epsilon(1e-9));
    // and the transformer-side integral agrees within losses (small network)
    double trafo_net_kwh = 0;
    for (double p : out.flow.transformer_kw) trafo_net_kwh += p * kStepHours;
    double building_net_kwh = imp - exp;
    CHECK(std::abs(trafo_net_kwh - building_net_kwh) <= (0.02 * std::abs(building_net_kwh) + 50.0));
}

TEST_CASE("max-roof with curtailment 50: feed-in cap respected at the transformer") {
    ScenarioInputs in = fixture_inputs(3);
    ScenarioSettings st;
    st.pv_mode = "max_roof";
    st.tariff_id = "curtailment_50";
    ScenarioOutcome out = run_pipeline(in, st);
    double cap_sum = 0;
    for (const auto& b : in.buildings) {
        PvModelParams params;
        cap_sum += roof_capacity(b.roof, params.module_area_m2, params.module_power_kw,
                                 params.usable_roof_fraction);
    }
    CHECK(out.kpi.curtailed_pct > 0.0);
    CHECK(out.kpi.max_feedin_kw <= 0.5 * cap_sum * 1.01);
}

TEST_CASE("scenario config parsing and file-based run are deterministic") {
    fs::path dir = fs::temp_directory_path() / "lvgrid_scn_test";
    fs::remove_all(dir);
    FixtureOptions fo;
    fo.n_buildings = 2;
    Fixture fx = make_fixture(fo);
    write_fixture(fx, dir.string());

    // switch the generated config to the fast batteryph-only mode
    {
        std::ofstream cfg(dir / "scenario.cfg", std::ios::app);
        cfg << "pv_mode = max_roof\ntariff = curtailment_30\nthreads = 2\n";
    }
    ScenarioConfig cfg = ScenarioConfig::parse((dir / "scenario.cfg").string());
    CHECK(cfg.settings.pv_mode == "max_roof");
    CHECK(cfg.settings.tariff_id == "curtailment_30");

    ScenarioOutcome a = run_scenario(cfg, (dir / "out1").string());
    ScenarioOutcome b = run_scenario(cfg, (dir / "out2").string());
    for (const char* f : {"kpi.csv", "building_kpi.csv", "line_loading.csv", "voltage.csv",
                          "duration_curve.csv", "bills.csv"}) {
        CHECK(read_file(dir / "out1" / f) == read_file(dir / "out2" / f));
        CHECK(read_file(dir / "out1" / f).size() > 0);
    }
    CHECK(a.kpi.battery_kwh == b.kpi.battery_kwh);
    fs::remove_all(dir);
}

TEST_CASE("validate-style loading catches broken inputs") {
    fs::path dir = fs::temp_directory_path() / "lvgrid_scn_bad";
    fs::remove_all(dir);
    FixtureOptions fo;
    fo.n_buildings = 2;
    write_fixture(make_fixture(fo), dir.string());
    {
        std::ofstream bad(dir / "buildings.csv");
        bad << "id,bus,category,floor_area_m2\nh1,nonexistent_bus,house,100\n";
    }
    ScenarioConfig cfg = ScenarioConfig::parse((dir / "scenario.cfg").string());
    ScenarioInputs in = load_inputs(cfg);
    ScenarioSettings st;
    st.pv_mode = "max_roof";
    CHECK_THROWS_AS(run_pipeline(in, st), ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("unknown tariff id fails with a structured error") {
    ScenarioInputs in = fixture_inputs(2);
    ScenarioSettings st;
    st.tariff_id = "imaginary";
    CHECK_THROWS_AS(run_pipeline(in, st), ConfigError);
}
