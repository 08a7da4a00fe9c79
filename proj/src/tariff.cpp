#include "lvgrid/tariff.hpp"

#include <algorithm>
#include <cmath>

#include "lvgrid/common.hpp"

namespace lvgrid {

namespace {

constexpr double kPeakImportCt = 21.95;   // Mon-Fri 06:00-22:00
constexpr double kOffpeakImportCt = 14.05;
constexpr double kFlatExportCt = 9.5;
constexpr double kSummerOffpeakExportCt = 5.0;  // 09:00-13:59, Apr-Aug
constexpr double kIrrMaxCt = 14.05;  // lowest-irradiance month
constexpr double kIrrMinCt = 3.6;    // highest-irradiance month

int level_index(PriceLevel l) { return l == PriceLevel::low ? 0 : (l == PriceLevel::mid ? 1 : 2); }

std::vector<double> reference_import(const YearCalendar& cal) {
    std::vector<double> p(cal.steps());
    for (int t = 0; t < cal.steps(); ++t) {
        int h = cal.hour_of_step(t);
        bool peak = cal.is_weekday_step(t) && h >= 6 && h < 22;
        p[t] = peak ? kPeakImportCt : kOffpeakImportCt;
    }
    return p;
}

} // namespace

const std::vector<std::string>& tariff_ids() {
    static const std::vector<std::string> ids = {
        "dt_reference", "dt_variable",  "irr_monthly",   "curtailment_30", "curtailment_50",
        "curtailment_70", "ct_export_daily", "ct_monthly_30", "ct_monthly_50", "ct_monthly_70",
        "ct_daily_30",  "ct_daily_50",  "ct_daily_70",   "block_rate"};
    return ids;
}

TariffPolicy make_tariff(const std::string& id, const YearCalendar& cal, PriceLevel level,
                         const std::vector<double>* monthly_irradiance) {
    static const double ct_export_daily_prices[3] = {0.8116, 1.0108, 1.2400};
    static const double ct_daily_prices[3] = {0.040, 0.070, 0.110};

    TariffPolicy t;
    t.id = id;
    t.cal = cal;
    t.import_ct = reference_import(cal);
    t.export_ct.assign(cal.steps(), kFlatExportCt);

    auto curtail_suffix = [&](const std::string& prefix) -> std::optional<double> {
        if (id == prefix + "30") return 0.30;
        if (id == prefix + "50") return 0.50;
        if (id == prefix + "70") return 0.70;
        return std::nullopt;
    };

    if (id == "dt_reference") {
        // defaults already set
    } else if (id == "dt_variable") {
        for (int s = 0; s < cal.steps(); ++s) {
            int h = cal.hour_of_step(s);
            if (cal.in_summer(s) && h >= 9 && h < 14) t.export_ct[s] = kSummerOffpeakExportCt;
        }
    } else if (id == "irr_monthly") {
        if (!monthly_irradiance || monthly_irradiance->size() != 12)
            throw ConfigError("tariff-engine", "irr_monthly requires 12 monthly irradiance sums");
        const auto& irr = *monthly_irradiance;
        double lo = *std::min_element(irr.begin(), irr.end());
        double hi = *std::max_element(irr.begin(), irr.end());
        if (hi <= lo) throw ConfigError("tariff-engine", "irr_monthly: degenerate irradiance index");
        std::vector<double> price(12);
        for (int m = 0; m < 12; ++m)
            price[m] = kIrrMaxCt + (kIrrMinCt - kIrrMaxCt) * (irr[m] - lo) / (hi - lo);
        for (int s = 0; s < cal.steps(); ++s) t.export_ct[s] = price[cal.month_of_step(s)];
    } else if (auto c = curtail_suffix("curtailment_")) {
        t.curtailment_fraction = c;
    } else if (id == "ct_export_daily") {
        t.export_period = PeriodKind::daily;
        t.export_cap_chf_kw = ct_export_daily_prices[level_index(level)];
    } else if (auto cm = curtail_suffix("ct_monthly_")) {
        t.curtailment_fraction = cm;
        t.import_period = PeriodKind::monthly;
        t.import_cap_chf_kw = 0.70;
    } else if (auto cd = curtail_suffix("ct_daily_")) {
        t.curtailment_fraction = cd;
        t.import_period = PeriodKind::daily;
        t.import_cap_chf_kw = ct_daily_prices[level_index(level)];
    } else if (id == "block_rate") {
        t.block_rate = true;
        t.block_active.assign(cal.steps(), 0);
        for (int s = 0; s < cal.steps(); ++s) t.block_active[s] = cal.in_summer(s) ? 1 : 0;
    } else {
        throw ConfigError("tariff-engine", "unknown tariff id '" + id + "'");
    }
    return t;
}

double TariffPolicy::export_revenue_ct_per_h(int step, double exported_kw, double pv_cap_kw) const {
    if (exported_kw <= 0) return 0;
    if (block_rate && block_active[step]) {
        if (pv_cap_kw <= 0)
            throw ConfigError("tariff-engine",
                              "block rate pricing needs the installed PV capacity in context");
        double rev = 0, used = 0;
        for (int j = 0; j < 3; ++j) {
            double band = block_band_frac[j] * pv_cap_kw;
            double take = std::clamp(exported_kw - used, 0.0, band);
            rev += take * block_price_ct[j];
            used += band;
        }
        return rev;  // power beyond 100% of capacity is unremunerated
    }
    return exported_kw * export_ct[step];
}

std::pair<double, double> TariffPolicy::price_at(int step, double exported_kw,
                                                 double pv_cap_kw) const {
    double imp = import_ct[step];
    double exp;
    if (block_rate && block_active[step]) {
        if (exported_kw > 0)
            exp = export_revenue_ct_per_h(step, exported_kw, pv_cap_kw) / exported_kw;
        else
            exp = block_price_ct[0];  // marginal price of the first block
    } else {
        exp = export_ct[step];
    }
    return {imp, exp};
}

int TariffPolicy::periods(PeriodKind kind) const {
    switch (kind) {
        case PeriodKind::daily: return cal.days();
        case PeriodKind::monthly: return 12;
        default: return 0;
    }
}

int TariffPolicy::period_of_step(PeriodKind kind, int step) const {
    return kind == PeriodKind::daily ? cal.day_of_step(step) : cal.month_of_step(step);
}

Bill compute_bill(const std::vector<double>& import_kw, const std::vector<double>& export_kw,
                  double pv_cap_kw, const TariffPolicy& tariff) {
    int n = tariff.cal.steps();
    if (static_cast<int>(import_kw.size()) != n || static_cast<int>(export_kw.size()) != n)
        throw ValidationError("tariff-engine", "dispatch must cover the full year at 15-min steps");
    if (tariff.import_period == PeriodKind::none && tariff.import_cap_chf_kw != 0)
        throw ConfigError("tariff-engine", "import capacity price set without a billing period");
    if (tariff.export_period == PeriodKind::none && tariff.export_cap_chf_kw != 0)
        throw ConfigError("tariff-engine", "export capacity price set without a billing period");

    Bill b;
    for (int t = 0; t < n; ++t) {
        b.import_vol_ct += import_kw[t] * tariff.import_ct[t] * kStepHours;
        b.export_vol_ct += tariff.export_revenue_ct_per_h(t, export_kw[t], pv_cap_kw) * kStepHours;
    }
    if (tariff.import_period != PeriodKind::none) {
        b.import_period_max_kw.assign(tariff.periods(tariff.import_period), 0.0);
        for (int t = 0; t < n; ++t) {
            int k = tariff.period_of_step(tariff.import_period, t);
            b.import_period_max_kw[k] = std::max(b.import_period_max_kw[k], import_kw[t]);
        }
        for (double mx : b.import_period_max_kw)
            b.import_cap_ct += mx * tariff.effective_import_cap() * 100.0;
    }
    if (tariff.export_period != PeriodKind::none) {
        b.export_period_max_kw.assign(tariff.periods(tariff.export_period), 0.0);
        for (int t = 0; t < n; ++t) {
            int k = tariff.period_of_step(tariff.export_period, t);
            b.export_period_max_kw[k] = std::max(b.export_period_max_kw[k], export_kw[t]);
        }
        for (double mx : b.export_period_max_kw)
            b.export_cap_ct += mx * tariff.effective_export_cap() * 100.0;
    }
    return b;
}

double grid_cost_recovery(const std::vector<Bill>& bills) {
    double ct = 0;
    for (const Bill& b : bills) ct += b.import_vol_ct + b.import_cap_ct + b.export_cap_ct;
    return ct / 100.0;
}

CalibrationResult calibrate(const TariffPolicy& base,
                            const std::function<double(const TariffPolicy&)>& recovery_of,
                            double reference_chf_yr, double tol) {
    if (reference_chf_yr <= 0)
        throw ConfigError("tariff-engine", "calibration reference recovery must be > 0");
    if (tol <= 0 || tol > 0.1)
        throw ConfigError("tariff-engine", "calibration tolerance must be in (0, 0.1]");

    const int kMaxEvals = 30;
    CalibrationResult res;
    res.policy = base;

    auto eval = [&](double m) {
        TariffPolicy p = base;
        p.capacity_multiplier = m;
        res.evaluations++;
        return recovery_of(p) / reference_chf_yr;
    };

    double m1 = 1.0, r1 = eval(m1);
    res.multiplier = m1;
    res.achieved_ratio = r1;
    if (base.import_cap_chf_kw == 0 && base.export_cap_chf_kw == 0) return res;  // nothing to scale
    if (std::abs(r1 - 1.0) <= tol) return res;

    double m2 = r1 > 1.0 ? 0.5 : 2.0;
    double r2 = eval(m2);
    double best_m = std::abs(r2 - 1.0) < std::abs(r1 - 1.0) ? m2 : m1;
    double best_r = std::abs(r2 - 1.0) < std::abs(r1 - 1.0) ? r2 : r1;
    // recovery must move the same way as the multiplier
    if ((m2 - m1) * (r2 - r1) < 0)
        throw CalibrationError("calibration failed: recovery not monotone in the capacity multiplier",
                               best_r);

    // maintain a bracket around ratio 1 once both sides are seen
    double lo_m = 0, lo_r = 0, hi_m = 0, hi_r = 0;
    bool have_lo = false, have_hi = false;
    auto note = [&](double m, double r) {
        if (r <= 1.0 && (!have_lo || m > lo_m)) { lo_m = m; lo_r = r; have_lo = true; }
        if (r >= 1.0 && (!have_hi || m < hi_m)) { hi_m = m; hi_r = r; have_hi = true; }
        if (std::abs(r - 1.0) < std::abs(best_r - 1.0)) { best_m = m; best_r = r; }
    };
    note(m1, r1);
    note(m2, r2);

    while (res.evaluations < kMaxEvals) {
        if (std::abs(r2 - 1.0) <= tol) {
            res.multiplier = m2;
            res.achieved_ratio = r2;
            res.policy.capacity_multiplier = m2;
            return res;
        }
        double m_next;
        if (std::abs(r2 - r1) > 1e-12) {
            m_next = m2 + (1.0 - r2) * (m2 - m1) / (r2 - r1);  // secant toward ratio 1
        } else {
            m_next = have_lo && have_hi ? 0.5 * (lo_m + hi_m) : m2 * (r2 < 1.0 ? 2.0 : 0.5);
        }
        if (have_lo && have_hi) {
            // keep the iterate inside the bracket; bisect if secant escapes
            if (m_next <= lo_m || m_next >= hi_m) m_next = 0.5 * (lo_m + hi_m);
        } else {
            m_next = std::clamp(m_next, m2 / 8.0, m2 * 8.0);
            if (m_next < 1e-4 || m_next > 1e4) break;  // saturated: target unreachable
        }
        double r_next = eval(m_next);
        if ((m_next - m2) * (r_next - r2) < -1e-12 * std::abs(r_next - r2))
            throw CalibrationError(
                "calibration failed: recovery not monotone in the capacity multiplier", best_r);
        m1 = m2; r1 = r2;
        m2 = m_next; r2 = r_next;
        note(m2, r2);
    }
    throw CalibrationError("calibration failed: no acceptable multiplier within " +
                               std::to_string(kMaxEvals) + " evaluations (best ratio " +
                               std::to_string(best_r) + ")",
                           best_r);
}

} // namespace lvgrid
