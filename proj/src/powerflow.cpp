#include "lvgrid/powerflow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "lvgrid/common.hpp"

namespace lvgrid {

namespace {

/// One backward/forward sweep state reused across snapshots (warm start).
struct SweepWork {
    std::vector<std::complex<double>> v, i_bus, i_line;
};

SnapshotResult sweep(const NetworkModel& net, const std::vector<double>& injection_kw,
                     const PowerFlowOptions& opts, SweepWork& work) {
    const int nb = static_cast<int>(net.buses.size());
    const int nl = static_cast<int>(net.lines.size());
    const double s_base_kw = net.s_base_kva;  // kVA, unity-pf kW equivalence
    const double pf = std::clamp(opts.power_factor, 0.1, 1.0);
    const double tan_phi = std::sqrt(1.0 - pf * pf) / pf;

    if (static_cast<int>(work.v.size()) != nb) {
        work.v.assign(nb, {1.0, 0.0});
        work.i_bus.resize(nb);
        work.i_line.resize(nl);
    }
    std::vector<std::complex<double>>& v = work.v;
    v[net.slack] = {1.0, 0.0};

    std::vector<std::complex<double>> s_pu(nb);
    for (int b = 0; b < nb; ++b) {
        double p = injection_kw[b] / s_base_kw;
        s_pu[b] = {p, p * tan_phi};  // reactive share follows the active sign
    }

    // Kirchhoff residual at every non-slack bus with the latest currents and
    // voltages; this is the real convergence gate, the voltage-update test is
    // just a cheap pre-filter.
    auto residual = [&]() {
        std::vector<std::complex<double>> balance(nb, {0, 0});
        for (size_t k = 1; k < net.order.size(); ++k) {
            int bus = net.order[k];
            int li = net.parent_line[bus];
            balance[bus] -= work.i_line[li];          // inflow parent -> child
            balance[net.parent[bus]] += work.i_line[li];
        }
        double max_resid = 0;
        for (int b = 0; b < nb; ++b) {
            if (b == net.slack) continue;
            std::complex<double> inj = std::conj(s_pu[b] / v[b]);
            max_resid = std::max(max_resid, std::abs(balance[b] + inj));
        }
        return max_resid;
    };

    SnapshotResult res;
    for (res.iterations = 1; res.iterations <= opts.max_iterations; ++res.iterations) {
        // backward: bus injection currents, accumulated toward the root
        for (int b = 0; b < nb; ++b)
            work.i_bus[b] = b == net.slack ? std::complex<double>{0, 0}
                                           : std::conj(s_pu[b] / v[b]);
        for (size_t k = net.order.size(); k-- > 1;) {
            int bus = net.order[k];
            int li = net.parent_line[bus];
            work.i_line[li] = work.i_bus[bus];
            work.i_bus[net.parent[bus]] += work.i_bus[bus];
        }
        // forward: voltage drops from the slack outward
        double max_dv = 0;
        for (size_t k = 1; k < net.order.size(); ++k) {
            int bus = net.order[k];
            int li = net.parent_line[bus];
            // current flows parent -> child = minus the accumulated injection current
            std::complex<double> vnew = v[net.parent[bus]] + net.lines[li].z_pu * work.i_line[li];
            max_dv = std::max(max_dv, std::abs(vnew - v[bus]));
            v[bus] = vnew;
        }
        if (max_dv < opts.tol_pu) {
            res.max_current_residual_pu = residual();
            if (res.max_current_residual_pu <= opts.kirchhoff_tol_pu) {
                res.converged = true;
                break;
            }
        }
    }
    res.v_pu = v;
    res.i_line_pu.assign(nl, {0, 0});
    for (size_t k = 1; k < net.order.size(); ++k) {
        int bus = net.order[k];
        // orient parent -> child: power flowing toward the child is -i_acc
        res.i_line_pu[net.parent_line[bus]] = -work.i_line[net.parent_line[bus]];
    }

    // slack power: sum of currents into the network times slack voltage
    std::complex<double> i_slack{0, 0};
    for (size_t k = 1; k < net.order.size(); ++k) {
        int bus = net.order[k];
        if (net.parent[bus] == net.slack) i_slack += -res.i_line_pu[net.parent_line[bus]];
    }
    res.slack_power_pu = (v[net.slack] * std::conj(-i_slack)).real();
    if (!res.converged) work.v.assign(nb, {1.0, 0.0});  // don't poison the next warm start
    return res;
}

} // namespace

SnapshotResult solve_snapshot(const NetworkModel& net, const std::vector<double>& injection_kw,
                              const PowerFlowOptions& opts) {
    if (injection_kw.size() != net.buses.size())
        throw ValidationError("power-flow", "injection vector size does not match bus count");
    SweepWork work;
    SnapshotResult res = sweep(net, injection_kw, opts, work);
    if (!res.converged)
        throw SolverError("power-flow", "no convergence after " +
                                            std::to_string(opts.max_iterations) +
                                            " sweeps (last residual " +
                                            std::to_string(res.max_current_residual_pu) + " p.u.)");
    return res;
}

PowerFlowResult run_timeseries(const NetworkModel& net,
                               const std::vector<std::vector<double>>& injections_kw,
                               const PowerFlowOptions& opts) {
    const int nb = static_cast<int>(net.buses.size());
    const int nl = static_cast<int>(net.lines.size());
    if (static_cast<int>(injections_kw.size()) != nb)
        throw ValidationError("power-flow", "need one injection series per bus");
    const int n = nb ? static_cast<int>(injections_kw[0].size()) : 0;
    for (const auto& s : injections_kw)
        if (static_cast<int>(s.size()) != n)
            throw ValidationError("power-flow", "injection series lengths differ");

    PowerFlowResult out;
    out.n_steps = n;
    out.transformer_kw.assign(n, 0.0);
    out.line_loading.assign(nl, std::vector<float>(n, 0.f));
    out.bus_voltage.assign(nb, std::vector<float>(n, 1.f));
    out.iterations.assign(n, 0);
    out.failed.assign(n, 0);

    const double i_base = net.i_base_a();
    int n_threads = opts.threads > 0 ? opts.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, 16));
    if (n < 256) n_threads = 1;

    auto worker = [&](int lo, int hi) {
        SweepWork work;
        std::vector<double> inj(nb);
        for (int t = lo; t < hi; ++t) {
            for (int b = 0; b < nb; ++b) inj[b] = injections_kw[b][t];
            SnapshotResult snap = sweep(net, inj, opts, work);
            out.iterations[t] = snap.iterations;
            if (!snap.converged) {
                out.failed[t] = 1;
                continue;
            }
            out.transformer_kw[t] = snap.slack_power_pu * net.s_base_kva;
            for (int li = 0; li < nl; ++li)
                out.line_loading[li][t] =
                    static_cast<float>(std::abs(snap.i_line_pu[li]) * i_base / net.lines[li].ampacity_a);
            for (int b = 0; b < nb; ++b)
                out.bus_voltage[b][t] = static_cast<float>(std::abs(snap.v_pu[b]));
        }
    };
    if (n_threads == 1) {
        worker(0, n);
    } else {
        std::vector<std::thread> pool;
        int chunk = (n + n_threads - 1) / n_threads;
        for (int k = 0; k < n_threads; ++k) {
            int lo = k * chunk, hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    for (uint8_t f : out.failed) out.failures += f;
    return out;
}

CongestionStats congestion_stats(const PowerFlowResult& result) {
    if (result.n_steps == 0) throw ValidationError("power-flow", "empty power-flow result");
    CongestionStats st;
    st.lines.resize(result.line_loading.size());
    for (size_t li = 0; li < result.line_loading.size(); ++li) {
        const auto& series = result.line_loading[li];
        std::vector<double> v(series.begin(), series.end());
        LineStats& ls = st.lines[li];
        ls.p95_loading = percentile(v, 95.0);
        ls.max_loading = *std::max_element(v.begin(), v.end());
        int over = 0;
        for (double x : v)
            if (x > 1.0) ++over;
        ls.overloaded_hours = over * kStepHours;
    }
    st.buses.resize(result.bus_voltage.size());
    for (size_t b = 0; b < result.bus_voltage.size(); ++b) {
        const auto& series = result.bus_voltage[b];
        std::vector<double> above, below;
        above.reserve(series.size());
        below.reserve(series.size());
        BusStats& bs = st.buses[b];
        for (float x : series) {
            above.push_back(std::max(0.0, static_cast<double>(x) - 1.0));
            below.push_back(std::max(0.0, 1.0 - static_cast<double>(x)));
            if (x > 1.1f) bs.violations_high++;
            if (x < 0.9f) bs.violations_low++;
        }
        bs.p95_v_high = 1.0 + percentile(above, 95.0);
        bs.p95_v_low = 1.0 - percentile(below, 95.0);
    }
    return st;
}

DurationCurve duration_curve(const std::vector<double>& transformer_kw, double rating_kva) {
    if (transformer_kw.empty()) throw ValidationError("power-flow", "empty transformer series");
    DurationCurve dc;
    dc.sorted_abs_kw.reserve(transformer_kw.size());
    for (double p : transformer_kw) {
        dc.sorted_abs_kw.push_back(std::abs(p));
        if (std::abs(p) > rating_kva) dc.hours_above_rating += kStepHours;
        if (p < -rating_kva) dc.reverse_hours_above_rating += kStepHours;
        dc.max_feedin_kw = std::max(dc.max_feedin_kw, -p);
        dc.max_drawn_kw = std::max(dc.max_drawn_kw, p);
    }
    std::sort(dc.sorted_abs_kw.rbegin(), dc.sorted_abs_kw.rend());
    dc.max_feedin_kw = std::max(0.0, dc.max_feedin_kw);
    dc.max_drawn_kw = std::max(0.0, dc.max_drawn_kw);
    return dc;
}

} // namespace lvgrid
