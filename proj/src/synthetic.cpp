#include "lvgrid/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "lvgrid/common.hpp"
#include "lvgrid/csv.hpp"
#include "lvgrid/pv.hpp"

namespace lvgrid {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Daily irradiance arc with a seasonal daylength/peak swing; roughly Swiss
/// plateau numbers.
double clear_sky_ghi(int day, double hour) {
    double season = std::sin(2.0 * kPi * (day - 80) / 365.0);  // peaks ~June 21
    double daylen = 12.2 + 4.1 * season;
    double sunrise = 12.0 - daylen / 2.0;
    double x = (hour - sunrise) / daylen;
    if (x <= 0 || x >= 1) return 0;
    double peak = 600.0 + 390.0 * season;
    return peak * std::pow(std::sin(kPi * x), 1.2);
}

double air_temp(int day, double hour) {
    double season = std::sin(2.0 * kPi * (day - 110) / 365.0);
    return 9.0 + 10.5 * season + 4.5 * std::sin(2.0 * kPi * (hour - 9.0) / 24.0);
}

std::vector<double> category_shape(const std::string& cat, const YearCalendar& cal,
                                   std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int n = cal.steps();
    std::vector<double> p(n);
    for (int t = 0; t < n; ++t) {
        int d = cal.day_of_step(t);
        double h = cal.minute_of_day(t) / 60.0;
        bool weekday = cal.is_weekday_step(t);
        double season = 1.0 + 0.18 * std::cos(2.0 * kPi * (d - 10) / 365.0);  // winter-heavy
        double v;
        if (cat == "non-residential") {
            v = 0.6 + (weekday && h >= 7.5 && h < 18.0 ? 3.2 : 0.0);
            v *= 1.0 + 0.05 * std::cos(2.0 * kPi * (d - 10) / 365.0);
        } else {
            double base = cat == "apartment" ? 0.22 : 0.28;
            double morning = std::exp(-0.5 * std::pow((h - 7.5) / 1.2, 2)) * 0.9;
            double evening = std::exp(-0.5 * std::pow((h - 19.0) / 1.8, 2)) * 1.6;
            double midday = !weekday ? std::exp(-0.5 * std::pow((h - 13.0) / 2.0, 2)) * 0.5 : 0.0;
            v = (base + morning + evening + midday) * season;
        }
        v *= 0.85 + 0.3 * u(rng);
        p[t] = v;
    }
    return p;
}

} // namespace

Fixture make_fixture(const FixtureOptions& opts) {
    Fixture fx;
    fx.cal = YearCalendar(opts.year);
    const int n = fx.cal.steps();
    std::mt19937 rng(opts.seed);

    // --- weather -----------------------------------------------------------
    fx.weather.ghi_wm2.resize(n);
    fx.weather.temp_c.resize(n);
    std::vector<double> day_factor(fx.cal.days(), 1.0);
    if (!opts.clear_sky) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int d = 0; d < fx.cal.days(); ++d) {
            double c = u(rng);
            day_factor[d] = 0.3 + 0.7 * c * c;  // skewed toward overcast
        }
    }
    for (int t = 0; t < n; ++t) {
        int d = fx.cal.day_of_step(t);
        double h = fx.cal.minute_of_day(t) / 60.0 + 0.125;  // bin center
        fx.weather.ghi_wm2[t] = clear_sky_ghi(d, h) * day_factor[d];
        fx.weather.temp_c[t] = air_temp(d, h);
    }

    // --- network: slack + one feeder bus per building -----------------------
    std::ostringstream net_text;
    net_text << "[buses]\n";
    net_text << "tr,slack,\n";
    for (int i = 1; i <= opts.n_buildings; ++i) net_text << "b" << i << ",load,h" << i << "\n";
    net_text << "[lines]\n";
    for (int i = 1; i <= opts.n_buildings; ++i) {
        std::string from = i == 1 ? "tr" : "b" + std::to_string(i - 1);
        net_text << from << ",b" << i << "," << opts.line_km << "," << opts.line_r_ohm_km << ","
                 << opts.line_x_ohm_km << "," << opts.line_ampacity_a << "\n";
    }
    net_text << "[transformer]\n" << opts.transformer_kva << ",400\n";
    std::istringstream in(net_text.str());
    fx.net = parse_network_stream(in, "synthetic");

    fx.intensities = {{"apartment", 28.0}, {"house", 28.0}, {"non-residential", 40.0}};

    // --- buildings: houses with generous roofs, one large-consumer block ----
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 1; i <= opts.n_buildings; ++i) {
        BuildingRecord b;
        b.id = "h" + std::to_string(i);
        b.bus_id = "b" + std::to_string(i);
        if (i == 2) {
            // largest consumer: apartment block with a token roof
            b.category = "apartment";
            b.floor_area_m2 = 700 + 40.0 * (i % 3);
            b.roof = {{14.0, 25.0, 200.0}};
        } else if (i % 4 == 0) {
            b.category = "non-residential";
            b.floor_area_m2 = 300 + 25.0 * (i % 5);
            b.roof = {{90.0 + 6 * (i % 4), 12.0, 180.0}};
        } else {
            b.category = "house";
            b.floor_area_m2 = 140 + 18.0 * (i % 5);
            double az = i % 2 ? 150.0 : 215.0;  // SE / SW mix
            b.roof = {{40.0 + 5.0 * (i % 6), 28.0, az}, {22.0, 28.0, az < 180 ? az + 180 : az - 180}};
        }
        b.annual_kwh = estimate_annual(b.category, b.floor_area_m2, fx.intensities);
        fx.buildings.push_back(b);
    }

    // --- reference profiles and load allocation -----------------------------
    fx.reference_profiles["house"] = {category_shape("house", fx.cal, rng),
                                      category_shape("house", fx.cal, rng)};
    fx.reference_profiles["apartment"] = {category_shape("apartment", fx.cal, rng)};
    fx.reference_profiles["non-residential"] = {category_shape("non-residential", fx.cal, rng)};
    build_profiles(fx.buildings, fx.reference_profiles, fx.cal);

    PvModelParams pv_params;
    for (auto& b : fx.buildings)
        b.pv_cap_bound_kw = roof_capacity(b.roof, pv_params.module_area_m2, pv_params.module_power_kw,
                                          pv_params.usable_roof_fraction);

    fx.transformer_kw.assign(n, 0.0);
    for (const auto& b : fx.buildings)
        for (int t = 0; t < n; ++t) fx.transformer_kw[t] += b.load_kw[t];
    return fx;
}

void write_fixture(const Fixture& fx, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "profiles");

    {
        std::ofstream out(fs::path(dir) / "network.csv");
        out << "# synthetic radial feeder\n[buses]\n";
        for (const auto& bus : fx.net.buses) {
            out << bus.id << "," << (bus.is_slack ? "slack" : "load") << ",";
            for (size_t k = 0; k < bus.building_ids.size(); ++k)
                out << (k ? ";" : "") << bus.building_ids[k];
            out << "\n";
        }
        out << "[lines]\n";
        for (const auto& l : fx.net.lines)
            out << fx.net.buses[l.from].id << "," << fx.net.buses[l.to].id << "," << l.length_km
                << "," << l.r_ohm_per_km << "," << l.x_ohm_per_km << "," << l.ampacity_a << "\n";
        out << "[transformer]\n"
            << fx.net.transformer.rated_kva << "," << fx.net.transformer.lv_voltage_v << "\n";
    }
    {
        CsvWriter w((fs::path(dir) / "buildings.csv").string());
        w.row({"id", "bus", "category", "floor_area_m2", "annual_kwh"});
        for (const auto& b : fx.buildings)
            w.row({b.id, b.bus_id, b.category, CsvWriter::num(b.floor_area_m2, 1),
                   CsvWriter::num(b.annual_kwh, 1)});
    }
    {
        CsvWriter w((fs::path(dir) / "roofs.csv").string());
        w.row({"building_id", "area_m2", "tilt_deg", "azimuth_deg"});
        for (const auto& b : fx.buildings)
            for (const auto& seg : b.roof)
                w.row({b.id, CsvWriter::num(seg.area_m2, 1), CsvWriter::num(seg.tilt_deg, 1),
                       CsvWriter::num(seg.azimuth_deg, 1)});
    }
    for (const auto& [cat, profiles] : fx.reference_profiles) {
        for (size_t k = 0; k < profiles.size(); ++k) {
            CsvWriter w((fs::path(dir) / "profiles" / (cat + "_" + std::to_string(k + 1) + ".csv"))
                            .string());
            w.row({"timestamp", "kw"});
            for (int t = 0; t < fx.cal.steps(); ++t)
                w.row({fx.cal.timestamp(t), CsvWriter::num(profiles[k][t], 6)});
        }
    }
    {
        CsvWriter w((fs::path(dir) / "transformer.csv").string());
        w.row({"timestamp", "kw"});
        for (int t = 0; t < fx.cal.steps(); ++t)
            w.row({fx.cal.timestamp(t), CsvWriter::num(fx.transformer_kw[t], 6)});
    }
    {
        CsvWriter w((fs::path(dir) / "weather.csv").string());
        w.row({"timestamp", "ghi_wm2", "temp_c"});
        for (int t = 0; t < fx.cal.steps(); ++t)
            w.row({fx.cal.timestamp(t), CsvWriter::num(fx.weather.ghi_wm2[t], 2),
                   CsvWriter::num(fx.weather.temp_c[t], 2)});
    }
    {
        std::ofstream out(fs::path(dir) / "scenario.cfg");
        out << "# synthetic scenario\n";
        out << "network = network.csv\nbuildings = buildings.csv\nroofs = roofs.csv\n";
        out << "profiles_dir = profiles\ntransformer = transformer.csv\nweather = weather.csv\n";
        out << "year = " << fx.cal.year() << "\n";
        out << "tariff = dt_reference\nlevel = mid\npv_mode = optimized\nsharing = off\n";
        out << "calibration = off\n";
    }
    {
        std::ofstream out(fs::path(dir) / "sweep.cfg");
        out << "# sweep over all tariffs on this network\n";
        out << "networks = net:.\nweather = weather.csv\nyear = " << fx.cal.year() << "\n";
        out << "level = mid\npv_mode = optimized\nsharing = off\ncalibration = off\n";
    }
}

} // namespace lvgrid
