#include "lvgrid/kpi.hpp"

#include <algorithm>
#include <cmath>

#include "lvgrid/common.hpp"

namespace lvgrid {

double pv_penetration(double p_pv_mwh, double p_load_mwh) {
    if (p_load_mwh <= 0) throw ValidationError("kpi", "pv penetration needs a positive load energy");
    return 100.0 * p_pv_mwh / p_load_mwh;
}

double lcoe(const std::vector<double>& cost_per_year, const std::vector<double>& energy_per_year,
            double discount_rate) {
    if (cost_per_year.size() != energy_per_year.size() || cost_per_year.empty())
        throw ValidationError("kpi", "lcoe needs matching nonempty cost/energy streams");
    double num = 0, den = 0;
    for (size_t t = 0; t < cost_per_year.size(); ++t) {
        double df = std::pow(1.0 + discount_rate, -static_cast<double>(t + 1));
        num += cost_per_year[t] * df;
        den += energy_per_year[t] * df;
    }
    if (den <= 0) throw ValidationError("kpi", "lcoe undefined: zero discounted energy");
    return num / den;
}

double npv(const std::vector<double>& cf, double rate) {
    double v = 0;
    for (size_t t = 0; t < cf.size(); ++t) v += cf[t] * std::pow(1.0 + rate, -static_cast<double>(t));
    return v;
}

IrrResult irr(const std::vector<double>& cf) {
    IrrResult out;
    int sign_changes = 0;
    double prev = 0;
    for (double v : cf) {
        if (v == 0) continue;
        if (prev != 0 && (v > 0) != (prev > 0)) ++sign_changes;
        prev = v;
    }
    if (sign_changes != 1) return out;  // no-solution per the single-root contract

    double lo = -0.99, hi = 10.0;
    double f_lo = npv(cf, lo), f_hi = npv(cf, hi);
    if ((f_lo > 0) == (f_hi > 0)) return out;
    double scale = std::abs(cf[0]) > 0 ? std::abs(cf[0]) : 1.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double f = npv(cf, mid);
        if (std::abs(f) < 1e-7 * scale) {
            out.found = true;
            out.rate = mid;
            return out;
        }
        if ((f > 0) == (f_lo > 0)) {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
        }
    }
    out.found = true;
    out.rate = 0.5 * (lo + hi);
    return out;
}

Totals totals(const Bill& bill, double annual_capex_chf, double baseline_annual_chf) {
    Totals t;
    t.c_power_chf = bill.cap_ct() / 100.0;
    t.c_energy_chf = bill.vol_ct() / 100.0;
    t.total_chf = t.c_power_chf + t.c_energy_chf;
    t.profit_chf = baseline_annual_chf - (t.total_chf + annual_capex_chf);
    return t;
}

NetworkKpi aggregate_report(const std::string& network, const std::string& tariff,
                            const std::vector<BuildingKpi>& kpis, const DurationCurve& curve,
                            double recovery_chf) {
    if (kpis.empty()) throw ValidationError("kpi", "no building KPIs to aggregate");
    const std::string& tag = kpis.front().scenario;
    for (const auto& k : kpis)
        if (k.scenario != tag)
            throw ValidationError("kpi", "mismatched scenario ids in aggregation: '" + tag +
                                             "' vs '" + k.scenario + "'");
    NetworkKpi out;
    out.network = network;
    out.tariff = tariff;
    double pv_mwh = 0, load_mwh = 0, curt_mwh = 0;
    double lcoe_sum = 0, irr_sum = 0, cost_sum = 0, profit_sum = 0;
    int lcoe_n = 0, irr_n = 0;
    for (const auto& k : kpis) {
        out.battery_kwh += k.battery_kwh;
        out.import_mwh += k.import_mwh;
        out.export_mwh += k.export_mwh;
        pv_mwh += k.pv_production_mwh;
        load_mwh += k.load_mwh;
        curt_mwh += k.curtailed_mwh;
        cost_sum += k.total_cost_chf;
        profit_sum += k.profit_chf;
        if (!std::isnan(k.lcoe_chf_kwh)) {
            lcoe_sum += k.lcoe_chf_kwh;
            lcoe_n++;
        }
        if (!std::isnan(k.irr_pct)) {
            irr_sum += k.irr_pct;
            irr_n++;
        }
    }
    out.pv_penetration_pct = load_mwh > 0 ? 100.0 * pv_mwh / load_mwh : 0.0;
    out.curtailed_pct = pv_mwh > 0 ? 100.0 * curt_mwh / pv_mwh : 0.0;
    out.max_feedin_kw = curve.max_feedin_kw;
    out.max_drawn_kw = curve.max_drawn_kw;
    out.lcoe = lcoe_n ? lcoe_sum / lcoe_n : std::nan("");
    out.irr_pct = irr_n ? irr_sum / irr_n : std::nan("");
    double nb = static_cast<double>(kpis.size());
    out.total_cost = cost_sum / nb;
    out.profit = profit_sum / nb;
    out.recovery = recovery_chf;
    return out;
}

} // namespace lvgrid
