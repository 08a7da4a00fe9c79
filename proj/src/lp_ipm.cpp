#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lvgrid/lp.hpp"

// Mehrotra predictor-corrector on the bounded-variable form
//   min c'x   s.t.  A x = b,  0 <= x,  x_i <= u_i for bounded i,
// with the Newton step from the regularized augmented system
//   [ -(Theta + rho I)  A' ] [dx]   [r1]
//   [  A                dI ] [dy] = [rp],   Theta = Z/X + W/S,  S = u - x.

namespace lvgrid {

namespace {

struct Work {
    int n, m;
    std::vector<uint8_t> bounded;
    std::vector<double> x, y, z, w;           // iterates
    std::vector<double> dx, dy, dz, dw;       // current direction
    std::vector<double> rd, rp, rxz, rsw, s;  // residuals and upper slacks
};

double inf_norm(const std::vector<double>& v) {
    double m = 0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
}

} // namespace

LpResult solve_lp(const LpProblem& lp, const IpmOptions& opts) {
    LpResult res;
    const int n = lp.n, m = lp.m;
    if (n == 0) {
        res.status = LpStatus::optimal;
        res.y.assign(m, 0.0);
        return res;
    }
    for (int i = 0; i < n; ++i)
        if (!(lp.upper[i] > 0))
            throw SolverError("lp", "variable upper bound must be positive (var " +
                                        std::to_string(i) + ")");

    // row-major copy of A for residual evaluation
    std::vector<int> row_start(m + 1, 0);
    for (const auto& e : lp.entries) row_start[e.row + 1]++;
    for (int r = 0; r < m; ++r) row_start[r + 1] += row_start[r];
    std::vector<int> a_col(lp.entries.size());
    std::vector<double> a_val(lp.entries.size());
    {
        std::vector<int> next = row_start;
        for (const auto& e : lp.entries) {
            int p = next[e.row]++;
            a_col[p] = e.col;
            a_val[p] = e.value;
        }
    }
    auto mult_a = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (int r = 0; r < m; ++r) {
            double acc = 0;
            for (int p = row_start[r]; p < row_start[r + 1]; ++p) acc += a_val[p] * v[a_col[p]];
            out[r] = acc;
        }
    };
    auto mult_at_into = [&](const std::vector<double>& v, std::vector<double>& out) {
        // out += A' v
        for (int r = 0; r < m; ++r) {
            double vr = v[r];
            if (vr == 0.0) continue;
            for (int p = row_start[r]; p < row_start[r + 1]; ++p) out[a_col[p]] += a_val[p] * vr;
        }
    };

    detail::QuasiDefiniteLdl kkt;
    {
        std::vector<std::pair<int, int>> pattern;
        pattern.reserve(lp.entries.size());
        for (const auto& e : lp.entries) pattern.push_back({e.col, n + e.row});
        kkt.analyze(n + m, pattern, lp.kkt_order);
    }
    std::vector<double> kkt_values(lp.entries.size());
    for (size_t k = 0; k < lp.entries.size(); ++k) kkt_values[k] = lp.entries[k].value;

    Work wk;
    wk.n = n;
    wk.m = m;
    wk.bounded.assign(n, 0);
    for (int i = 0; i < n; ++i) wk.bounded[i] = std::isfinite(lp.upper[i]) ? 1 : 0;
    int n_comp = n;
    for (int i = 0; i < n; ++i) n_comp += wk.bounded[i];

    wk.x.assign(n, 1.0);
    for (int i = 0; i < n; ++i)
        if (wk.bounded[i]) wk.x[i] = lp.upper[i] / 2.0;
    wk.y.assign(m, 0.0);
    wk.z.assign(n, 0.0);
    wk.w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        wk.z[i] = 1.0 + std::max(0.0, lp.c[i]);
        if (wk.bounded[i]) wk.w[i] = 1.0 + std::max(0.0, -lp.c[i]);
    }
    wk.s.assign(n, 0.0);
    wk.dx.assign(n, 0.0);
    wk.dz.assign(n, 0.0);
    wk.dw.assign(n, 0.0);
    wk.dy.assign(m, 0.0);
    wk.rd.assign(n, 0.0);
    wk.rp.assign(m, 0.0);
    wk.rxz.assign(n, 0.0);
    wk.rsw.assign(n, 0.0);

    const double b_scale = 1.0 + inf_norm(lp.b);
    const double c_scale = 1.0 + inf_norm(lp.c);
    double reg = 1e-8;

    std::vector<double> diag(n + m), rhs(n + m), sol(n + m), resid(n + m);
    std::vector<double> theta(n), ax(m), aty(n), scr_x(n), scr_y(m), r1(n);
    std::vector<double> best_x;
    double best_err = kInf;

    auto kkt_solve = [&](const std::vector<double>& rhs1, const std::vector<double>& rhs2,
                         std::vector<double>& out_dx, std::vector<double>& out_dy) {
        for (int i = 0; i < n; ++i) rhs[i] = rhs1[i];
        for (int r = 0; r < m; ++r) rhs[n + r] = rhs2[r];
        sol = rhs;
        kkt.solve(sol);
        // one round of refinement against the regularized system
        for (int i = 0; i < n; ++i) scr_x[i] = sol[i];
        for (int r = 0; r < m; ++r) scr_y[r] = sol[n + r];
        std::fill(aty.begin(), aty.end(), 0.0);
        mult_at_into(scr_y, aty);
        for (int i = 0; i < n; ++i) resid[i] = rhs[i] + (theta[i] + reg) * scr_x[i] - aty[i];
        mult_a(scr_x, ax);
        for (int r = 0; r < m; ++r) resid[n + r] = rhs[n + r] - ax[r] - reg * scr_y[r];
        kkt.solve(resid);
        for (int i = 0; i < n + m; ++i) sol[i] += resid[i];
        for (int i = 0; i < n; ++i) out_dx[i] = sol[i];
        for (int r = 0; r < m; ++r) out_dy[r] = sol[n + r];
    };

    char line[160];
    for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
        // residuals
        mult_a(wk.x, ax);
        for (int r = 0; r < m; ++r) wk.rp[r] = lp.b[r] - ax[r];
        std::fill(aty.begin(), aty.end(), 0.0);
        mult_at_into(wk.y, aty);
        for (int i = 0; i < n; ++i) wk.rd[i] = lp.c[i] - aty[i] - wk.z[i] + wk.w[i];
        for (int i = 0; i < n; ++i) wk.s[i] = wk.bounded[i] ? lp.upper[i] - wk.x[i] : 1.0;

        double mu = 0;
        for (int i = 0; i < n; ++i) {
            mu += wk.x[i] * wk.z[i];
            if (wk.bounded[i]) mu += wk.s[i] * wk.w[i];
        }
        mu /= n_comp;
        if (!std::isfinite(mu) || mu > 1e24 || inf_norm(wk.x) > 1e18) {
            res.status = LpStatus::numerical_failure;
            res.log += "diverged (unbounded or infeasible problem?)\n";
            break;
        }

        double pobj = dot(lp.c, wk.x);
        double dobj = dot(lp.b, wk.y);
        for (int i = 0; i < n; ++i)
            if (wk.bounded[i]) dobj -= lp.upper[i] * wk.w[i];
        double pinf = inf_norm(wk.rp) / b_scale;
        double dinf = inf_norm(wk.rd) / c_scale;
        double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
        res.primal_inf = pinf;
        res.dual_inf = dinf;
        res.rel_gap = relgap;

        if (opts.collect_log) {
            std::snprintf(line, sizeof(line), "it %3d  mu %9.2e  pinf %9.2e  dinf %9.2e  gap %9.2e\n",
                          res.iterations, mu, pinf, dinf, relgap);
            res.log += line;
        }
        double err = pinf + dinf + relgap;
        if (err < best_err) {
            best_err = err;
            best_x = wk.x;
        }
        if (pinf <= opts.tolerance && dinf <= opts.tolerance && relgap <= opts.tolerance) {
            res.status = LpStatus::optimal;
            break;
        }

        // KKT diagonal
        for (int i = 0; i < n; ++i) {
            theta[i] = wk.z[i] / wk.x[i];
            if (wk.bounded[i]) theta[i] += wk.w[i] / wk.s[i];
        }
        for (int i = 0; i < n; ++i) diag[i] = -(theta[i] + reg);
        for (int r = 0; r < m; ++r) diag[n + r] = reg;
        bool ok = kkt.factorize(kkt_values, diag);
        int bumps = 0;
        while (!ok && bumps < 4) {
            reg *= 100.0;
            for (int i = 0; i < n; ++i) diag[i] = -(theta[i] + reg);
            for (int r = 0; r < m; ++r) diag[n + r] = reg;
            ok = kkt.factorize(kkt_values, diag);
            ++bumps;
        }
        if (!ok) {
            res.status = LpStatus::numerical_failure;
            res.log += "factorization failed\n";
            break;
        }

        auto build_r1 = [&]() {
            for (int i = 0; i < n; ++i) {
                double v = wk.rd[i] - wk.rxz[i] / wk.x[i];
                if (wk.bounded[i]) v += wk.rsw[i] / wk.s[i];
                r1[i] = v;
            }
        };
        auto recover_dzw = [&]() {
            for (int i = 0; i < n; ++i) {
                wk.dz[i] = (wk.rxz[i] - wk.z[i] * wk.dx[i]) / wk.x[i];
                wk.dw[i] = wk.bounded[i] ? (wk.rsw[i] + wk.w[i] * wk.dx[i]) / wk.s[i] : 0.0;
            }
        };
        auto step_lengths = [&](double& ap, double& ad) {
            ap = 1.0;
            ad = 1.0;
            for (int i = 0; i < n; ++i) {
                if (wk.dx[i] < 0) ap = std::min(ap, -wk.x[i] / wk.dx[i]);
                if (wk.bounded[i] && wk.dx[i] > 0) ap = std::min(ap, wk.s[i] / wk.dx[i]);
                if (wk.dz[i] < 0) ad = std::min(ad, -wk.z[i] / wk.dz[i]);
                if (wk.bounded[i] && wk.dw[i] < 0) ad = std::min(ad, -wk.w[i] / wk.dw[i]);
            }
        };

        // predictor
        for (int i = 0; i < n; ++i) {
            wk.rxz[i] = -wk.x[i] * wk.z[i];
            wk.rsw[i] = wk.bounded[i] ? -wk.s[i] * wk.w[i] : 0.0;
        }
        build_r1();
        kkt_solve(r1, wk.rp, wk.dx, wk.dy);
        recover_dzw();
        double ap_aff, ad_aff;
        step_lengths(ap_aff, ad_aff);
        double mu_aff = 0;
        for (int i = 0; i < n; ++i) {
            mu_aff += (wk.x[i] + ap_aff * wk.dx[i]) * (wk.z[i] + ad_aff * wk.dz[i]);
            if (wk.bounded[i])
                mu_aff += (wk.s[i] - ap_aff * wk.dx[i]) * (wk.w[i] + ad_aff * wk.dw[i]);
        }
        mu_aff /= n_comp;
        double sigma = mu > 1e-300 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0) : 0.0;

        // corrector (reuses the factorization)
        for (int i = 0; i < n; ++i) {
            wk.rxz[i] = sigma * mu - wk.x[i] * wk.z[i] - wk.dx[i] * wk.dz[i];
            wk.rsw[i] = wk.bounded[i]
                            ? sigma * mu - wk.s[i] * wk.w[i] + wk.dx[i] * wk.dw[i]
                            : 0.0;
        }
        build_r1();
        kkt_solve(r1, wk.rp, wk.dx, wk.dy);
        recover_dzw();

        double ap, ad;
        step_lengths(ap, ad);
        double tau = 0.9995;
        ap = std::min(1.0, tau * ap);
        ad = std::min(1.0, tau * ad);
        for (int i = 0; i < n; ++i) {
            wk.x[i] += ap * wk.dx[i];
            wk.z[i] += ad * wk.dz[i];
            if (wk.bounded[i]) wk.w[i] += ad * wk.dw[i];
        }
        for (int r = 0; r < m; ++r) wk.y[r] += ad * wk.dy[r];
    }

    if (res.status != LpStatus::optimal) {
        if (best_err <= opts.accept_tolerance * 3) {
            res.status = LpStatus::optimal;
            wk.x = best_x;
        } else if (res.iterations >= opts.max_iterations) {
            res.status = LpStatus::iteration_limit;
        }
    }
    res.x = wk.x;
    res.y = wk.y;
    res.z = wk.z;
    res.w = wk.w;
    res.objective = dot(lp.c, res.x);
    return res;
}

} // namespace lvgrid
