#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "lvgrid/scenario.hpp"
#include "lvgrid/synthetic.hpp"

using namespace lvgrid;

namespace {

void apply_overrides(ScenarioConfig& cfg, const std::string& level, int threads,
                     const std::string& tariff) {
    if (level == "low") cfg.settings.level = PriceLevel::low;
    else if (level == "mid") cfg.settings.level = PriceLevel::mid;
    else if (level == "high") cfg.settings.level = PriceLevel::high;
    if (threads > 0) cfg.settings.threads = threads;
    if (!tariff.empty()) cfg.settings.tariff_id = tariff;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LV-grid PV/tariff scenario simulator"};
    app.require_subcommand(1);

    std::string scenario_file, out_dir = "out", level, tariff;
    int threads = 0;

    auto add_common = [&](CLI::App* cmd, bool needs_out) {
        cmd->add_option("--scenario", scenario_file, "scenario config file")->required();
        if (needs_out) cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--level", level, "capacity price level")
            ->check(CLI::IsMember({"low", "mid", "high"}));
        cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
        cmd->add_option("--tariff", tariff, "override the configured tariff id");
    };

    CLI::App* run = app.add_subcommand("run", "run one scenario and write reports");
    add_common(run, true);
    CLI::App* sweep = app.add_subcommand("sweep", "run every tariff on every configured network");
    add_common(sweep, true);
    CLI::App* validate = app.add_subcommand("validate", "parse and validate all scenario inputs");
    add_common(validate, false);

    CLI::App* fixture = app.add_subcommand("make-fixture", "generate a synthetic scenario");
    std::string fixture_dir = "fixture";
    int n_buildings = 4;
    unsigned seed = 1;
    std::string sun = "clear";
    fixture->add_option("--out", fixture_dir, "target directory");
    fixture->add_option("--buildings", n_buildings, "number of buildings")->check(CLI::Range(1, 200));
    fixture->add_option("--seed", seed, "random seed");
    fixture->add_option("--sun", sun, "weather style")->check(CLI::IsMember({"clear", "mixed"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (fixture->parsed()) {
            FixtureOptions fo;
            fo.n_buildings = n_buildings;
            fo.seed = seed;
            fo.clear_sky = sun == "clear";
            Fixture fx = make_fixture(fo);
            write_fixture(fx, fixture_dir);
            std::printf("fixture with %d buildings written to %s\n", n_buildings,
                        fixture_dir.c_str());
            return 0;
        }
        ScenarioConfig cfg = ScenarioConfig::parse(scenario_file);
        apply_overrides(cfg, level, threads, tariff);
        if (run->parsed()) {
            ScenarioOutcome out = run_scenario(cfg, out_dir);
            std::printf("%s/%s: pv %.1f%%, battery %.1f kWh, import %.2f MWh, export %.2f MWh\n",
                        out.kpi.network.c_str(), out.kpi.tariff.c_str(), out.kpi.pv_penetration_pct,
                        out.kpi.battery_kwh, out.kpi.import_mwh, out.kpi.export_mwh);
            std::printf("reports written to %s\n", out_dir.c_str());
        } else if (sweep->parsed()) {
            run_sweep(cfg, out_dir);
            std::printf("sweep written to %s\n", out_dir.c_str());
        } else if (validate->parsed()) {
            ScenarioInputs in = load_inputs(cfg);
            std::printf("ok: %zu buses, %zu lines, %zu buildings, weather %zu steps\n",
                        in.net.buses.size(), in.net.lines.size(), in.buildings.size(),
                        in.weather.ghi_wm2.size());
        }
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
