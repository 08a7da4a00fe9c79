#include "lvgrid/design.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lvgrid/common.hpp"

namespace lvgrid {

double CostModel::crf(double rate, double years) {
    if (years <= 0) throw ValidationError("prosumer-opt", "annualization horizon must be > 0");
    if (rate == 0) return 1.0 / years;
    return rate / (1.0 - std::pow(1.0 + rate, -years));
}

double CostModel::annual_capex(double pv_kw, double battery_kwh) const {
    double a = crf(discount_rate, lifetime_yr) * pv_capex(pv_kw);
    a += pv_maintenance_frac * pv_capex(pv_kw);
    a += crf(discount_rate, battery_lifetime_yr) * battery_capex(battery_kwh);
    return a;
}

namespace {

struct Searcher {
    const std::vector<double>& load;
    const std::vector<double>& unit;
    const TariffPolicy& tariff;
    const CostModel& costs;
    const BatteryParams& batt;
    double res_p, res_e;
    std::map<std::pair<long long, long long>, double> cache;
    int evaluations = 0;

    std::pair<long long, long long> key(double p, double e) const {
        return {llround(p / res_p), llround(e / res_e)};
    }
    double snap_p(double p) const { return std::round(p / res_p) * res_p; }
    double snap_e(double e) const { return std::round(e / res_e) * res_e; }

    double eval(double pv, double kwh) {
        pv = std::max(0.0, snap_p(pv));
        kwh = std::max(0.0, snap_e(kwh));
        if (pv == 0.0) kwh = 0.0;  // battery without PV can never charge
        auto k = key(pv, kwh);
        auto it = cache.find(k);
        if (it != cache.end()) return it->second;
        SystemDesign d{pv, kwh};
        DispatchResult r = optimize_dispatch(load, unit, d, tariff, batt);
        double cost = costs.annual_capex(pv, kwh) + r.opex_ct / 100.0;
        cache[k] = cost;
        evaluations++;
        return cost;
    }
};

DesignResult finish(Searcher& s, double best_p, double best_e) {
    DesignResult out;
    out.design = {s.snap_p(best_p), best_p > 0 ? s.snap_e(best_e) : 0.0};
    out.dispatch = optimize_dispatch(s.load, s.unit, out.design, s.tariff, s.batt);
    out.annual_cost_chf =
        s.costs.annual_capex(out.design.pv_kw, out.design.battery_kwh) + out.dispatch.opex_ct / 100.0;
    out.evaluations = s.evaluations;
    return out;
}

double default_battery_max(const std::vector<double>& load_kw) {
    double annual = sum(load_kw) * kStepHours;
    return 3.0 * annual / 365.0;
}

/// Refine around the incumbent with a shrinking 3x3 stencil.
void refine_2d(Searcher& s, double& bp, double& be, double dp, double de, double p_max,
               double e_max) {
    double best = s.eval(bp, be);
    while (dp > s.res_p / 2 || de > s.res_e / 2) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (int ip = -1; ip <= 1; ++ip) {
                for (int ie = -1; ie <= 1; ++ie) {
                    if (ip == 0 && ie == 0) continue;
                    double p = std::clamp(bp + ip * dp, 0.0, p_max);
                    double e = std::clamp(be + ie * de, 0.0, e_max);
                    double c = s.eval(p, e);
                    if (c < best - 1e-9) {
                        best = c;
                        bp = p;
                        be = e;
                        improved = true;
                    }
                }
            }
        }
        dp = std::max(dp / 2, s.res_p / 2 * 0.99);
        de = std::max(de / 2, s.res_e / 2 * 0.99);
        if (dp <= s.res_p / 2 && de <= s.res_e / 2) break;
    }
}

} // namespace

DesignResult optimize_design(const std::vector<double>& load_kw, const std::vector<double>& pv_unit,
                             double roof_bound_kw, const TariffPolicy& tariff,
                             const CostModel& costs, const BatteryParams& batt,
                             const DesignOptions& opts) {
    if (roof_bound_kw < 0) throw ValidationError("prosumer-opt", "roof bound must be >= 0");
    Searcher s{load_kw, pv_unit, tariff, costs, batt, opts.pv_resolution_kw,
               opts.batt_resolution_kwh, {}, 0};
    double e_max = opts.battery_max_kwh > 0 ? opts.battery_max_kwh : default_battery_max(load_kw);
    e_max = std::max(e_max, opts.batt_resolution_kwh);

    double best_p = 0, best_e = 0;
    double best = s.eval(0, 0);  // explicit zero-PV candidate
    if (roof_bound_kw >= opts.pv_resolution_kw) {
        int np = std::max(2, opts.coarse_points);
        int ne = std::max(2, opts.coarse_points);
        for (int i = 1; i <= np; ++i) {      // pv > 0 branch of the cost jump
            for (int j = 0; j < ne; ++j) {
                double p = roof_bound_kw * i / np;
                double e = e_max * j / (ne - 1);
                double c = s.eval(p, e);
                if (c < best) {
                    best = c;
                    best_p = p;
                    best_e = e;
                }
            }
        }
        if (best_p > 0)
            refine_2d(s, best_p, best_e, roof_bound_kw / np, e_max / (ne - 1), roof_bound_kw, e_max);
    }
    return finish(s, best_p, best_e);
}

DesignResult optimize_battery_for_pv(const std::vector<double>& load_kw,
                                     const std::vector<double>& pv_unit, double pv_kw,
                                     const TariffPolicy& tariff, const CostModel& costs,
                                     const BatteryParams& batt, const DesignOptions& opts) {
    Searcher s{load_kw, pv_unit, tariff, costs, batt, opts.pv_resolution_kw,
               opts.batt_resolution_kwh, {}, 0};
    double e_max = opts.battery_max_kwh > 0 ? opts.battery_max_kwh : default_battery_max(load_kw);
    e_max = std::max(e_max, opts.batt_resolution_kwh);
    double pv = s.snap_p(pv_kw);
    if (pv <= 0) return finish(s, 0, 0);

    int ne = std::max(3, opts.coarse_points + 2);
    double best_e = 0, best = kInf;
    for (int j = 0; j < ne; ++j) {
        double e = e_max * j / (ne - 1);
        double c = s.eval(pv, e);
        if (c < best) {
            best = c;
            best_e = e;
        }
    }
    // 1-D refinement (cost is convex in the battery size for fixed PV)
    double de = e_max / (ne - 1);
    while (de > s.res_e / 2) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (int ie = -1; ie <= 1; ie += 2) {
                double e = std::clamp(best_e + ie * de, 0.0, e_max);
                double c = s.eval(pv, e);
                if (c < best - 1e-9) {
                    best = c;
                    best_e = e;
                    improved = true;
                }
            }
        }
        de /= 2;
    }
    return finish(s, pv, best_e);
}

} // namespace lvgrid
