#include "lvgrid/pv.hpp"

#include <cmath>
#include <cstdio>

#include "lvgrid/common.hpp"
#include "lvgrid/csv.hpp"

namespace lvgrid {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

/// Sky-view factor plus a south-facing gain; 1.0 for a flat plate. Crude but
/// monotone and sufficient for synthetic runs; measured POA columns override it.
double transposition_factor(double tilt_deg, double azimuth_deg) {
    double t = tilt_deg * kDegToRad;
    double south = std::cos((azimuth_deg - 180.0) * kDegToRad);
    return (1.0 + std::cos(t)) / 2.0 + 0.3 * std::sin(t) * std::max(0.0, south);
}

/// Parses "t<tilt>az<azimuth>" class labels; returns false for "flat"/unknown.
bool parse_class(const std::string& cls, double& tilt, double& azimuth) {
    int t = 0, az = 0;
    if (std::sscanf(cls.c_str(), "t%daz%d", &t, &az) == 2) {
        tilt = t;
        azimuth = az;
        return true;
    }
    return false;
}

} // namespace

std::vector<double> WeatherSeries::irradiance_for(const std::string& cls) const {
    auto it = poa_wm2.find(cls);
    if (it != poa_wm2.end()) return it->second;
    if (ghi_wm2.empty())
        throw ConfigError("pv-gen", "weather input has neither a poa_" + cls +
                                        " column nor ghi to transpose from");
    double tilt = 0, azimuth = 0;
    double f = 1.0;
    if (cls != "flat") {
        if (!parse_class(cls, tilt, azimuth))
            throw ConfigError("pv-gen", "unknown orientation class '" + cls + "'");
        f = transposition_factor(tilt, azimuth);
    }
    std::vector<double> out(ghi_wm2.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = ghi_wm2[i] * f;
    return out;
}

std::vector<double> WeatherSeries::monthly_ghi(const YearCalendar& cal) const {
    std::vector<double> sums(12, 0.0);
    for (int t = 0; t < static_cast<int>(ghi_wm2.size()); ++t)
        sums[cal.month_of_step(t)] += ghi_wm2[t];
    return sums;
}

WeatherSeries read_weather_csv(const std::string& path, const YearCalendar& cal) {
    csv::Table t = csv::read(path);
    int ts_col = t.column("timestamp");
    int g_col = t.column("ghi_wm2");
    int temp_col = t.column("temp_c");
    if (ts_col < 0 || g_col < 0 || temp_col < 0)
        throw ParseError("pv-gen", path + ": expected columns timestamp,ghi_wm2,temp_c[,poa_*]");
    if (static_cast<int>(t.rows.size()) != cal.steps())
        throw ParseError("pv-gen", path + ": expected " + std::to_string(cal.steps()) + " rows");
    WeatherSeries w;
    w.ghi_wm2.resize(t.rows.size());
    w.temp_c.resize(t.rows.size());
    std::vector<std::pair<std::string, int>> poa_cols;
    for (size_t c = 0; c < t.header.size(); ++c) {
        const std::string& h = t.header[c];
        if (h.rfind("poa_", 0) == 0 && h.size() > 9 && h.substr(h.size() - 4) == "_wm2")
            poa_cols.push_back({h.substr(4, h.size() - 8), static_cast<int>(c)});
    }
    for (auto& [cls, c] : poa_cols) w.poa_wm2[cls].resize(t.rows.size());
    for (size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        std::string where = path + ":" + std::to_string(t.line_numbers[i]);
        int step = cal.step_of_timestamp(row.at(ts_col));
        if (step != static_cast<int>(i)) throw ParseError("pv-gen", where + ": timestamp off grid");
        w.ghi_wm2[i] = csv::to_double(row.at(g_col), where);
        if (w.ghi_wm2[i] < 0) throw ValidationError("pv-gen", where + ": negative irradiance");
        w.temp_c[i] = csv::to_double(row.at(temp_col), where);
        for (auto& [cls, c] : poa_cols) w.poa_wm2[cls][i] = csv::to_double(row.at(c), where);
    }
    return w;
}

double roof_capacity(const std::vector<RoofSegment>& roof, double module_area_m2,
                     double module_power_kw, double usable_fraction) {
    if (module_area_m2 <= 0 || module_power_kw <= 0)
        throw ValidationError("pv-gen", "module constants must be > 0");
    if (usable_fraction <= 0 || usable_fraction > 1)
        throw ValidationError("pv-gen", "usable_fraction must be in (0,1]");
    double cap = 0;
    for (const RoofSegment& seg : roof) {
        if (seg.area_m2 < 0) throw ValidationError("pv-gen", "negative roof area");
        // epsilon guard: decimal inputs that work out to a whole module count
        // must not lose a module to binary rounding
        double modules = std::floor(seg.area_m2 * usable_fraction / module_area_m2 + 1e-9);
        cap += modules * module_power_kw;
    }
    return cap;
}

std::string orientation_class(const RoofSegment& seg) {
    if (seg.tilt_deg < 10.0) return "flat";
    int tilt = static_cast<int>(std::lround(seg.tilt_deg / 5.0)) * 5;
    int az = static_cast<int>(std::lround(seg.azimuth_deg / 45.0)) * 45 % 360;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "t%daz%d", tilt, az);
    return buf;
}

std::vector<double> generation_profile(const WeatherSeries& weather, const std::string& cls,
                                       double temp_coeff_per_k, double noct_c) {
    if (temp_coeff_per_k > 0)
        throw ValidationError("pv-gen", "temperature coefficient must be <= 0");
    std::vector<double> g = weather.irradiance_for(cls);
    if (g.size() != weather.temp_c.size())
        throw ValidationError("pv-gen", "irradiance and temperature lengths differ");
    std::vector<double> p(g.size());
    for (size_t t = 0; t < g.size(); ++t) {
        double t_cell = weather.temp_c[t] + (noct_c - 20.0) / 800.0 * g[t];
        double derate = std::max(0.0, 1.0 + temp_coeff_per_k * (t_cell - 25.0));
        p[t] = std::min(g[t] / 1000.0 * derate, 1.25);
    }
    return p;
}

std::vector<double> building_unit_profile(const BuildingRecord& building,
                                          const WeatherSeries& weather,
                                          const PvModelParams& params) {
    // capacity per class, then capacity-weighted mean of class profiles
    std::map<std::string, double> class_cap;
    for (const RoofSegment& seg : building.roof) {
        double cap = roof_capacity({seg}, params.module_area_m2, params.module_power_kw,
                                   params.usable_roof_fraction);
        if (cap > 0) class_cap[orientation_class(seg)] += cap;
    }
    size_t n = weather.temp_c.size();
    std::vector<double> unit(n, 0.0);
    double total = 0;
    for (auto& [cls, cap] : class_cap) total += cap;
    if (total <= 0) return unit;
    for (auto& [cls, cap] : class_cap) {
        std::vector<double> p = generation_profile(weather, cls, params.temp_coeff_per_k, params.noct_c);
        double w = cap / total;
        for (size_t t = 0; t < n; ++t) unit[t] += w * p[t];
    }
    return unit;
}

} // namespace lvgrid
