#include "lvgrid/dispatch.hpp"

#include <algorithm>
#include <cmath>

#include "lvgrid/lp.hpp"

namespace lvgrid {

namespace {

constexpr double kCurtailEpsCt = 1e-6;  // tie-break: prefer exporting over curtailing

/// All dispatch outputs live on a dyadic power grid (2^-30 kW) so that
/// downstream sums and differences are exact in double arithmetic.
double quantize_kw(double v) { return std::ldexp(std::round(std::ldexp(v, 30)), -30); }

void quantize(DispatchSeries& s) {
    for (auto* v : {&s.import_kw, &s.export_kw, &s.charge_kw, &s.discharge_kw, &s.curtail_kw,
                    &s.selfcons_kw, &s.soc_kwh})
        for (double& x : *v) x = quantize_kw(x);
}

} // namespace

double DispatchSeries::import_energy_kwh() const { return sum(import_kw) * kStepHours; }
double DispatchSeries::export_energy_kwh() const { return sum(export_kw) * kStepHours; }
double DispatchSeries::curtailed_energy_kwh() const { return sum(curtail_kw) * kStepHours; }

double DispatchProblem::export_revenue_ct_h(int t, double kw) const {
    if (kw <= 0) return 0;
    if (block && block_active[t]) {
        double rev = 0, used = 0;
        for (int j = 0; j < 3; ++j) {
            double band = block_band_frac[j] * pv_cap_kw;
            double take = std::clamp(kw - used, 0.0, band);
            rev += take * block_price_ct[j];
            used += band;
        }
        return rev;
    }
    return kw * export_ct[t];
}

double DispatchProblem::cost_ct(const DispatchSeries& s) const {
    double c = 0;
    for (int t = 0; t < steps(); ++t) {
        c += s.import_kw[t] * import_ct[t] * step_hours;
        c -= export_revenue_ct_h(t, s.export_kw[t]) * step_hours;
    }
    if (import_cap_ct_kw > 0 && !import_period.empty()) {
        std::vector<double> peak(n_import_periods, 0.0);
        for (int t = 0; t < steps(); ++t)
            peak[import_period[t]] = std::max(peak[import_period[t]], s.import_kw[t]);
        for (double p : peak) c += p * import_cap_ct_kw;
    }
    if (export_cap_ct_kw > 0 && !export_period.empty()) {
        std::vector<double> peak(n_export_periods, 0.0);
        for (int t = 0; t < steps(); ++t)
            peak[export_period[t]] = std::max(peak[export_period[t]], s.export_kw[t]);
        for (double p : peak) c += p * export_cap_ct_kw;
    }
    return c;
}

namespace {

/// Highest marginal export price at step t; the greedy/netting logic relies on
/// it never exceeding the import price.
double top_export_ct(const DispatchProblem& p, int t) {
    if (p.block && p.block_active[t]) return p.block_price_ct[0];
    return p.export_ct[t];
}

/// Total feed-in limit at step t (curtailment cap and, on block steps, the
/// priced band total).
double export_limit(const DispatchProblem& p, int t) {
    double cap = p.export_cap_kw;
    if (p.block && p.block_active[t])
        cap = std::min(cap, (p.block_band_frac[0] + p.block_band_frac[1] + p.block_band_frac[2]) *
                                p.pv_cap_kw);
    return cap;
}

// ---------------------------------------------------------------------------
// No-battery dispatch: self-consumption first, then export up to the feed-in
// limit. With a daily/monthly export capacity charge the export cap of each
// period is chosen by scanning the concave piecewise-linear net revenue.
DispatchSolution solve_no_battery(const DispatchProblem& p) {
    int n = p.steps();
    DispatchSolution sol;
    DispatchSeries& s = sol.series;
    s.import_kw.assign(n, 0.0);
    s.export_kw.assign(n, 0.0);
    s.charge_kw.assign(n, 0.0);
    s.discharge_kw.assign(n, 0.0);
    s.curtail_kw.assign(n, 0.0);
    s.selfcons_kw.assign(n, 0.0);
    s.soc_kwh.assign(n + 1, p.soc0_kwh);

    std::vector<double> avail(n);  // exportable surplus after self-consumption
    for (int t = 0; t < n; ++t) {
        double sc = std::min(p.load_kw[t], p.pv_kw[t]);
        s.selfcons_kw[t] = sc;
        s.import_kw[t] = p.load_kw[t] - sc;
        avail[t] = std::min(p.pv_kw[t] - sc, export_limit(p, t));
    }

    bool charged_export = p.export_cap_ct_kw > 0 && !p.export_period.empty();
    if (!charged_export) {
        for (int t = 0; t < n; ++t) s.export_kw[t] = avail[t];
    } else {
        // per period: maximize sum_t rev(min(a_t, X)) - w*X over candidate caps
        std::vector<std::vector<int>> steps_of(p.n_export_periods);
        for (int t = 0; t < n; ++t) steps_of[p.export_period[t]].push_back(t);
        for (const auto& steps : steps_of) {
            std::vector<double> cands = {0.0};
            for (int t : steps)
                if (avail[t] > 0) cands.push_back(avail[t]);
            if (p.block && p.pv_cap_kw > 0) {
                cands.push_back(p.block_band_frac[0] * p.pv_cap_kw);
                cands.push_back((p.block_band_frac[0] + p.block_band_frac[1]) * p.pv_cap_kw);
            }
            std::sort(cands.begin(), cands.end());
            double best_x = 0, best_f = 0;
            for (double x : cands) {
                double f = -p.export_cap_ct_kw * x;
                for (int t : steps)
                    f += p.export_revenue_ct_h(t, std::min(avail[t], x)) * p.step_hours;
                if (f > best_f + 1e-12) {  // ties keep the smaller cap
                    best_f = f;
                    best_x = x;
                }
            }
            for (int t : steps) s.export_kw[t] = std::min(avail[t], best_x);
        }
    }
    for (int t = 0; t < n; ++t) {
        double sc = std::min(p.load_kw[t], p.pv_kw[t]);
        s.curtail_kw[t] = std::max(0.0, p.pv_kw[t] - sc - s.export_kw[t]);
    }
    quantize(s);
    sol.cost_ct = p.cost_ct(s);
    return sol;
}

// ---------------------------------------------------------------------------
// LP formulation, one variable group per timestep:
//   sc + eta_d*dis + imp = load         (imp is the slack)
//   sc + ch + sum(ex_j) + curt = pv     (curt is the slack)
//   imp - peak_imp(k) + slack = 0       (import capacity periods)
//   sum(ex_j) - peak_exp(k) + slack = 0 (export capacity periods)
//   soc' - soc - ts*(eta_c*ch - dis) = 0
// The KKT elimination order follows the time staircase so the factorization
// stays fill-free: per-step locals, then the step's rows, then the next SOC
// column; period peak variables right after their period's last step.

struct LpLayout {
    std::vector<int> sc, ch, dis, imp, curt;
    std::vector<std::array<int, 3>> ex;  // up to 3 tiers, -1 when absent
    std::vector<int> soc;                // soc[t] = end-of-step state, length T
    std::vector<int> pimp, pexp;
};

DispatchSolution solve_with_lp(const DispatchProblem& p) {
    const int n = p.steps();
    const double ts = p.step_hours;
    const double B = p.batt_power_kw, E = p.batt_kwh;
    const bool imp_cap = p.import_cap_ct_kw > 0 && !p.import_period.empty();
    const bool exp_cap = p.export_cap_ct_kw > 0 && !p.export_period.empty();

    LpProblem lp;
    LpLayout L;
    L.sc.resize(n);
    L.ch.resize(n);
    L.dis.resize(n);
    L.imp.resize(n);
    L.curt.resize(n);
    L.ex.resize(n);
    L.soc.resize(n);
    L.pimp.assign(p.n_import_periods, -1);
    L.pexp.assign(p.n_export_periods, -1);

    std::vector<int> imp_last(p.n_import_periods, -1), exp_last(p.n_export_periods, -1);
    if (imp_cap)
        for (int t = 0; t < n; ++t) imp_last[p.import_period[t]] = t;
    if (exp_cap)
        for (int t = 0; t < n; ++t) exp_last[p.export_period[t]] = t;
    if (imp_cap)
        for (int k = 0; k < p.n_import_periods; ++k)
            L.pimp[k] = lp.add_var(p.import_cap_ct_kw);
    if (exp_cap)
        for (int k = 0; k < p.n_export_periods; ++k)
            L.pexp[k] = lp.add_var(p.export_cap_ct_kw);

    std::vector<std::pair<bool, int>> order;  // (is_row, index)
    order.reserve(static_cast<size_t>(n) * 14);
    auto ov = [&](int var) { order.push_back({false, var}); };
    auto orow = [&](int row) { order.push_back({true, row}); };

    for (int t = 0; t < n; ++t) {
        L.sc[t] = lp.add_var(0.0);
        ov(L.sc[t]);
        if (E > 0) {
            L.ch[t] = lp.add_var(0.0, B);
            L.dis[t] = lp.add_var(0.0, B);
            ov(L.ch[t]);
            ov(L.dis[t]);
        } else {
            L.ch[t] = L.dis[t] = -1;
        }
        // export variables: tiered on active block steps, single otherwise
        L.ex[t] = {-1, -1, -1};
        double xlim = p.export_cap_kw;
        if (p.block && p.block_active[t]) {
            double used = 0;
            for (int j = 0; j < 3; ++j) {
                double band = p.block_band_frac[j] * p.pv_cap_kw;
                double cap = std::clamp(xlim - used, 0.0, band);
                if (cap > 0) {
                    L.ex[t][j] = lp.add_var(-p.block_price_ct[j] * ts, cap);
                    ov(L.ex[t][j]);
                }
                used += band;
            }
        } else {
            L.ex[t][0] = lp.add_var(-p.export_ct[t] * ts, xlim);
            ov(L.ex[t][0]);
        }
        L.imp[t] = lp.add_var(p.import_ct[t] * ts);
        L.curt[t] = lp.add_var(kCurtailEpsCt * ts);
        ov(L.imp[t]);
        ov(L.curt[t]);

        int r1 = lp.add_row(p.load_kw[t]);
        lp.coef(r1, L.sc[t], 1.0);
        if (E > 0) lp.coef(r1, L.dis[t], p.eta_discharge);
        lp.coef(r1, L.imp[t], 1.0);
        int r2 = lp.add_row(p.pv_kw[t]);
        lp.coef(r2, L.sc[t], 1.0);
        if (E > 0) lp.coef(r2, L.ch[t], 1.0);
        for (int j = 0; j < 3; ++j)
            if (L.ex[t][j] >= 0) lp.coef(r2, L.ex[t][j], 1.0);
        lp.coef(r2, L.curt[t], 1.0);
        orow(r1);
        orow(r2);
        if (imp_cap) {
            int slack = lp.add_var(0.0);
            int rp = lp.add_row(0.0);
            lp.coef(rp, L.imp[t], 1.0);
            lp.coef(rp, L.pimp[p.import_period[t]], -1.0);
            lp.coef(rp, slack, 1.0);
            ov(slack);
            orow(rp);
        }
        if (exp_cap) {
            int slack = lp.add_var(0.0);
            int rx = lp.add_row(0.0);
            for (int j = 0; j < 3; ++j)
                if (L.ex[t][j] >= 0) lp.coef(rx, L.ex[t][j], 1.0);
            lp.coef(rx, L.pexp[p.export_period[t]], -1.0);
            lp.coef(rx, slack, 1.0);
            ov(slack);
            orow(rx);
        }
        if (E > 0) {
            L.soc[t] = lp.add_var(0.0, E);
            int rs = lp.add_row(t == 0 ? p.soc0_kwh : 0.0);
            lp.coef(rs, L.soc[t], 1.0);
            if (t > 0) lp.coef(rs, L.soc[t - 1], -1.0);
            lp.coef(rs, L.ch[t], -p.eta_charge * ts);
            lp.coef(rs, L.dis[t], ts);
            orow(rs);
            ov(L.soc[t]);
        } else {
            L.soc[t] = -1;
        }
        if (imp_cap && imp_last[p.import_period[t]] == t) ov(L.pimp[p.import_period[t]]);
        if (exp_cap && exp_last[p.export_period[t]] == t) ov(L.pexp[p.export_period[t]]);
    }

    lp.kkt_order.reserve(order.size());
    for (auto [is_row, idx] : order) lp.kkt_order.push_back(is_row ? lp.n + idx : idx);

    IpmOptions opts;
    LpResult r = solve_lp(lp, opts);
    if (r.status != LpStatus::optimal) {
        IpmOptions retry = opts;
        retry.collect_log = true;
        retry.max_iterations = 300;
        r = solve_lp(lp, retry);
        if (r.status != LpStatus::optimal)
            throw SolverError("prosumer-opt", "dispatch LP did not converge (gap " +
                                                  std::to_string(r.rel_gap) + ")\n" + r.log);
    }

    DispatchSolution sol;
    sol.used_lp = true;
    sol.lp_iterations = r.iterations;
    DispatchSeries& s = sol.series;
    s.import_kw.assign(n, 0.0);
    s.export_kw.assign(n, 0.0);
    s.charge_kw.assign(n, 0.0);
    s.discharge_kw.assign(n, 0.0);
    s.curtail_kw.assign(n, 0.0);
    s.selfcons_kw.assign(n, 0.0);
    s.soc_kwh.assign(n + 1, p.soc0_kwh);

    double soc = p.soc0_kwh;
    for (int t = 0; t < n; ++t) {
        double load = p.load_kw[t], pv = p.pv_kw[t];
        double sc = std::clamp(r.x[L.sc[t]], 0.0, std::min(load, pv));
        double ch = E > 0 ? std::clamp(r.x[L.ch[t]], 0.0, B) : 0.0;
        double dis = E > 0 ? std::clamp(r.x[L.dis[t]], 0.0, B) : 0.0;
        double ex = 0;
        for (int j = 0; j < 3; ++j)
            if (L.ex[t][j] >= 0) ex += std::max(0.0, r.x[L.ex[t][j]]);
        ex = std::min(ex, export_limit(p, t));

        // merge simultaneous import/export into self-consumption where the
        // export price does not exceed the import price (all study tariffs)
        if (top_export_ct(p, t) <= p.import_ct[t] + 1e-12) {
            double imp_pre = std::max(0.0, load - sc - p.eta_discharge * dis);
            double shift = std::min(imp_pre, ex);
            if (shift > 0) {
                sc += shift;
                ex -= shift;
            }
        }
        // battery feasibility against the integrated state
        ch = std::min(ch, std::max(0.0, pv - sc));
        dis = std::min(dis, std::max(0.0, load - sc) / p.eta_discharge);
        if (E > 0) {
            double room = (E - soc) / (p.eta_charge * ts);
            ch = std::min(ch, std::max(0.0, room));
            double avail_dis = soc / ts + p.eta_charge * ch;
            dis = std::min(dis, std::max(0.0, avail_dis));
            soc = std::clamp(soc + (p.eta_charge * ch - dis) * ts, 0.0, E);
        }
        ex = std::min(ex, std::max(0.0, pv - sc - ch));
        s.import_kw[t] = std::max(0.0, load - sc - p.eta_discharge * dis);
        s.export_kw[t] = ex;
        s.charge_kw[t] = ch;
        s.discharge_kw[t] = dis;
        s.curtail_kw[t] = std::max(0.0, pv - sc - ch - ex);
        s.selfcons_kw[t] = sc;
        s.soc_kwh[t + 1] = soc;
    }
    quantize(s);
    sol.cost_ct = p.cost_ct(s);
    return sol;
}

} // namespace

DispatchSolution solve_dispatch(const DispatchProblem& p) {
    const int n = p.steps();
    if (n == 0) throw ValidationError("prosumer-opt", "empty dispatch instance");
    if (static_cast<int>(p.pv_kw.size()) != n || static_cast<int>(p.import_ct.size()) != n ||
        static_cast<int>(p.export_ct.size()) != n)
        throw ValidationError("prosumer-opt", "dispatch instance series lengths differ");
    if (p.block && static_cast<int>(p.block_active.size()) != n)
        throw ValidationError("prosumer-opt", "block_active mask length mismatch");
    for (int t = 0; t < n; ++t)
        if (p.load_kw[t] < 0 || p.pv_kw[t] < 0)
            throw ValidationError("prosumer-opt", "negative load or pv at step " + std::to_string(t));

    bool pv_present = false;
    for (double v : p.pv_kw)
        if (v > 0) pv_present = true;
    bool battery = p.batt_kwh > 0 && p.batt_power_kw > 0 && (pv_present || p.soc0_kwh > 0);
    bool inverted_prices = false;  // export paid above import: greedy logic no longer applies
    for (int t = 0; t < n && !inverted_prices; ++t)
        if (top_export_ct(p, t) > p.import_ct[t] + 1e-12) inverted_prices = true;
    if (!battery && !inverted_prices && !p.force_lp) return solve_no_battery(p);
    return solve_with_lp(p);
}

DispatchProblem make_dispatch_problem(const std::vector<double>& load_kw,
                                      const std::vector<double>& pv_unit,
                                      const SystemDesign& design, const TariffPolicy& tariff,
                                      const BatteryParams& batt) {
    int n = tariff.cal.steps();
    if (static_cast<int>(load_kw.size()) != n || static_cast<int>(pv_unit.size()) != n)
        throw ValidationError("prosumer-opt", "profiles must cover the tariff year at 15-min steps");
    if (design.pv_kw < 0 || design.battery_kwh < 0)
        throw ValidationError("prosumer-opt", "design sizes must be nonnegative");

    DispatchProblem p;
    p.load_kw = load_kw;
    p.pv_kw.resize(n);
    for (int t = 0; t < n; ++t) p.pv_kw[t] = pv_unit[t] * design.pv_kw;
    p.import_ct = tariff.import_ct;
    p.export_ct = tariff.export_ct;
    p.step_hours = kStepHours;
    p.block = tariff.block_rate;
    p.block_active = tariff.block_active;
    for (int j = 0; j < 3; ++j) {
        p.block_price_ct[j] = tariff.block_price_ct[j];
        p.block_band_frac[j] = tariff.block_band_frac[j];
    }
    p.pv_cap_kw = design.pv_kw;
    if (tariff.curtailment_fraction)
        p.export_cap_kw = *tariff.curtailment_fraction * design.pv_kw;
    p.batt_kwh = design.battery_kwh;
    p.batt_power_kw = batt.c_rate * design.battery_kwh;
    p.eta_charge = batt.eta_charge;
    p.eta_discharge = batt.eta_discharge;
    p.soc0_kwh = std::min(batt.soc0_kwh, design.battery_kwh);

    if (tariff.import_period != PeriodKind::none && tariff.effective_import_cap() > 0) {
        p.import_period.resize(n);
        for (int t = 0; t < n; ++t) p.import_period[t] = tariff.period_of_step(tariff.import_period, t);
        p.n_import_periods = tariff.periods(tariff.import_period);
        p.import_cap_ct_kw = tariff.effective_import_cap() * 100.0;
    }
    if (tariff.export_period != PeriodKind::none && tariff.effective_export_cap() > 0) {
        p.export_period.resize(n);
        for (int t = 0; t < n; ++t) p.export_period[t] = tariff.period_of_step(tariff.export_period, t);
        p.n_export_periods = tariff.periods(tariff.export_period);
        p.export_cap_ct_kw = tariff.effective_export_cap() * 100.0;
    }
    return p;
}

DispatchResult optimize_dispatch(const std::vector<double>& load_kw,
                                 const std::vector<double>& pv_unit, const SystemDesign& design,
                                 const TariffPolicy& tariff, const BatteryParams& batt) {
    DispatchProblem p = make_dispatch_problem(load_kw, pv_unit, design, tariff, batt);
    DispatchSolution sol = solve_dispatch(p);
    DispatchResult res;
    res.series = std::move(sol.series);
    res.lp_iterations = sol.lp_iterations;
    res.used_lp = sol.used_lp;
    res.bill = compute_bill(res.series.import_kw, res.series.export_kw, design.pv_kw, tariff);
    res.opex_ct = res.bill.vol_ct() + res.bill.cap_ct();
    return res;
}

} // namespace lvgrid
