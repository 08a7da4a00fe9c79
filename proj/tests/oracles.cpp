#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lvgrid/common.hpp"

namespace lvgrid::testing {

double dp_dispatch_cost(const DispatchProblem& p, int soc_levels) {
    if (p.import_cap_ct_kw > 0 || p.export_cap_ct_kw > 0)
        throw std::logic_error("dp oracle cannot price capacity charges");
    const int T = p.steps();
    const double ts = p.step_hours;
    const double E = p.batt_kwh;
    const int L = E > 0 ? soc_levels : 1;
    const double de = L > 1 ? E / (L - 1) : 0.0;

    auto step_cost = [&](int t, double ch, double dis) {
        // optimal self-consumption/export split for fixed battery flows
        double load = p.load_kw[t], pv = p.pv_kw[t];
        double sc = std::min(load - p.eta_discharge * dis, pv - ch);
        sc = std::max(sc, 0.0);
        double rem = pv - ch - sc;
        double cap = p.export_cap_kw;
        if (p.block && p.block_active[t])
            cap = std::min(cap, (p.block_band_frac[0] + p.block_band_frac[1] + p.block_band_frac[2]) *
                                    p.pv_cap_kw);
        double ex = std::clamp(rem, 0.0, cap);
        double imp = load - sc - p.eta_discharge * dis;
        return imp * p.import_ct[t] * ts - p.export_revenue_ct_h(t, ex) * ts;
    };

    // cost-to-go held at the grid nodes, linearly interpolated in between;
    // both the step cost and the value are convex in the target state, so a
    // ternary search per Bellman update is exact
    std::vector<double> v(L, 0.0), next(L);
    auto v_at = [&](double soc) {
        if (L == 1) return v[0];
        double idx = soc / de;
        int lo = std::clamp(static_cast<int>(idx), 0, L - 2);
        double f = std::clamp(idx - lo, 0.0, 1.0);
        return v[lo] * (1.0 - f) + v[lo + 1] * f;
    };
    for (int t = T - 1; t >= 0; --t) {
        for (int j = 0; j < L; ++j) {
            double soc = j * de;
            double max_ch = std::min(p.batt_power_kw, p.pv_kw[t]);
            max_ch = std::min(max_ch, (E - soc) / (p.eta_charge * ts));
            double max_dis = std::min(p.batt_power_kw, p.load_kw[t] / p.eta_discharge);
            max_dis = std::min(max_dis, soc / ts);
            double lo = soc - std::max(0.0, max_dis) * ts;
            double hi = soc + std::max(0.0, max_ch) * p.eta_charge * ts;
            auto total = [&](double soc2) {
                double delta = soc2 - soc;
                double ch = delta > 0 ? delta / (p.eta_charge * ts) : 0.0;
                double dis = delta < 0 ? -delta / ts : 0.0;
                return step_cost(t, ch, dis) + v_at(soc2);
            };
            double a = lo, b = hi;
            for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, E); ++it) {
                double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
                if (total(m1) <= total(m2))
                    b = m2;
                else
                    a = m1;
            }
            double best = std::min({total(a), total(0.5 * (a + b)), total(b), total(soc)});
            next[j] = best;
        }
        v.swap(next);
    }
    if (L == 1) return v[0];
    return v_at(std::clamp(p.soc0_kwh, 0.0, E));
}

std::complex<double> two_bus_voltage(std::complex<double> z, std::complex<double> s_load) {
    double r = z.real(), x = z.imag();
    double pl = s_load.real(), ql = s_load.imag();
    double b = r * ql - x * pl;
    double q = b * b + r * pl + x * ql;
    double disc = 1.0 - 4.0 * q;
    if (disc < 0) throw std::runtime_error("two-bus case has no high-voltage solution");
    double a = 0.5 * (1.0 + std::sqrt(disc));
    return {a, b};
}

} // namespace lvgrid::testing
