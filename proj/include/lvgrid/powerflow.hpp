#pragma once

#include <complex>
#include <vector>

#include "lvgrid/network.hpp"

namespace lvgrid {

struct PowerFlowOptions {
    double tol_pu = 1e-6;           // max voltage update between sweeps
    double kirchhoff_tol_pu = 1e-8; // current balance required at convergence
    int max_iterations = 100;
    double power_factor = 1.0;      // applied to all injections (lagging for loads)
    int threads = 0;                // 0 = hardware concurrency (time-series runs)
};

struct SnapshotResult {
    std::vector<std::complex<double>> v_pu;       // per bus
    std::vector<std::complex<double>> i_line_pu;  // per line, oriented parent->child
    int iterations = 0;
    bool converged = false;
    double max_current_residual_pu = 0;  // Kirchhoff balance check
    double slack_power_pu = 0;           // active power drawn from the MV side
};

/// Backward/forward sweep on the radial network. `injection_kw` per bus,
/// positive = generation fed into the grid (the slack entry is ignored).
SnapshotResult solve_snapshot(const NetworkModel& net, const std::vector<double>& injection_kw,
                              const PowerFlowOptions& opts = {});

struct PowerFlowResult {
    int n_steps = 0;
    std::vector<double> transformer_kw;          // signed; negative = reverse flow to MV
    std::vector<std::vector<float>> line_loading;  // [line][t], |I|/ampacity
    std::vector<std::vector<float>> bus_voltage;   // [bus][t], p.u.
    std::vector<int> iterations;                   // per step
    std::vector<uint8_t> failed;                   // per step, 1 = no convergence
    int failures = 0;
};

/// Snapshot solve per timestep; injections[bus][t] in kW. Failures are
/// recorded per step and the run continues.
PowerFlowResult run_timeseries(const NetworkModel& net,
                               const std::vector<std::vector<double>>& injections_kw,
                               const PowerFlowOptions& opts = {});

struct LineStats {
    double p95_loading = 0;
    double max_loading = 0;
    double overloaded_hours = 0;  // loading > 100%
};

struct BusStats {
    double p95_v_high = 1.0;  // 1 + 95th percentile of deviation above 1 p.u.
    double p95_v_low = 1.0;   // 1 - 95th percentile of deviation below 1 p.u.
    int violations_high = 0;  // steps above 1.1 p.u.
    int violations_low = 0;   // steps below 0.9 p.u.
};

struct CongestionStats {
    std::vector<LineStats> lines;
    std::vector<BusStats> buses;
};

CongestionStats congestion_stats(const PowerFlowResult& result);

struct DurationCurve {
    std::vector<double> sorted_abs_kw;  // |power| descending
    double hours_above_rating = 0;
    double reverse_hours_above_rating = 0;
    double max_feedin_kw = 0;
    double max_drawn_kw = 0;
};

DurationCurve duration_curve(const std::vector<double>& transformer_kw, double rating_kva);

} // namespace lvgrid
