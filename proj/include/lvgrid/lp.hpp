#pragma once

#include <string>
#include <vector>

#include "lvgrid/common.hpp"

namespace lvgrid {

/// Linear program   min c'x  s.t.  A x = b,  0 <= x <= upper  (upper may be +inf).
///
/// Built incrementally; `kkt_order` optionally provides an elimination order
/// over the n+m KKT indices (variables first, then rows) so structured
/// problems factorize without fill. Identity order when empty.
struct LpProblem {
    int n = 0;  // variables
    int m = 0;  // equality rows
    std::vector<double> c, upper, b;
    struct Entry { int row, col; double value; };
    std::vector<Entry> entries;
    std::vector<int> kkt_order;

    int add_var(double cost, double ub = kInf) {
        c.push_back(cost);
        upper.push_back(ub);
        return n++;
    }
    int add_row(double rhs) {
        b.push_back(rhs);
        return m++;
    }
    void coef(int row, int col, double value) {
        if (value != 0.0) entries.push_back({row, col, value});
    }
};

struct IpmOptions {
    double tolerance = 1e-9;        // relative feasibility / gap target
    double accept_tolerance = 1e-7; // still reported optimal if stalled here
    int max_iterations = 200;
    bool collect_log = false;
};

enum class LpStatus { optimal, iteration_limit, numerical_failure };

struct LpResult {
    LpStatus status = LpStatus::numerical_failure;
    std::vector<double> x;  // primal solution
    std::vector<double> y;  // row duals
    std::vector<double> z;  // lower-bound duals
    std::vector<double> w;  // upper-bound duals (0 where unbounded)
    double objective = 0;
    int iterations = 0;
    double rel_gap = 0, primal_inf = 0, dual_inf = 0;
    std::string log;
};

LpResult solve_lp(const LpProblem& lp, const IpmOptions& opts = {});

namespace detail {

/// LDL' factorization of a symmetric quasi-definite matrix with a fixed
/// elimination order (no pivoting). Pattern is analyzed once; values may be
/// refreshed per factorization.
class QuasiDefiniteLdl {
public:
    /// `entries`: unique off-diagonal pairs (i,j) plus optionally diagonals;
    /// a full diagonal is always allocated. `perm` maps elimination position
    /// -> matrix index (empty = identity).
    void analyze(int dim, const std::vector<std::pair<int, int>>& entries,
                 const std::vector<int>& perm);

    /// `entry_values` parallels the `entries` of analyze(); `diag` has one
    /// value per matrix index (added to any diagonal entries given).
    /// Returns false on a vanishing pivot.
    bool factorize(const std::vector<double>& entry_values, const std::vector<double>& diag);

    void solve(std::vector<double>& rhs) const;
    int dim() const { return n_; }

private:
    int n_ = 0;
    std::vector<int> perm_, iperm_;
    // assembled pattern, upper CSC in permuted space
    std::vector<int> ap_, ai_;
    std::vector<int> slot_of_entry_;  // entry k -> position in ax_
    std::vector<int> slot_of_diag_;   // matrix index -> position in ax_
    std::vector<double> ax_;
    // factor
    std::vector<int> parent_, lnz_, lp_, li_, flag_, pattern_, used_;
    std::vector<double> lx_, d_, y_;
};

} // namespace detail

} // namespace lvgrid
