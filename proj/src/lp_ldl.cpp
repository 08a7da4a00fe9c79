#include <algorithm>
#include <cmath>

#include "lvgrid/lp.hpp"

namespace lvgrid::detail {

void QuasiDefiniteLdl::analyze(int dim, const std::vector<std::pair<int, int>>& entries,
                               const std::vector<int>& perm) {
    n_ = dim;
    perm_ = perm;
    if (perm_.empty()) {
        perm_.resize(n_);
        for (int i = 0; i < n_; ++i) perm_[i] = i;
    }
    iperm_.assign(n_, -1);
    for (int k = 0; k < n_; ++k) {
        if (perm_[k] < 0 || perm_[k] >= n_ || iperm_[perm_[k]] != -1)
            throw SolverError("lp", "kkt order is not a permutation");
        iperm_[perm_[k]] = k;
    }

    // map to permuted upper triangle; merge duplicates; diagonal slots always exist
    struct Mapped { int row, col, entry; };
    std::vector<Mapped> offd;
    offd.reserve(entries.size());
    std::vector<std::pair<int, int>> diag_hits;  // (permuted index, entry)
    for (size_t k = 0; k < entries.size(); ++k) {
        int pi = iperm_[entries[k].first];
        int pj = iperm_[entries[k].second];
        if (pi == pj)
            diag_hits.push_back({pi, static_cast<int>(k)});
        else
            offd.push_back({std::min(pi, pj), std::max(pi, pj), static_cast<int>(k)});
    }
    std::sort(offd.begin(), offd.end(), [](const Mapped& a, const Mapped& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    });

    std::vector<int> count(n_, 1);  // diagonal slot per column
    int uniq = 0;
    for (size_t k = 0; k < offd.size(); ++k) {
        if (k == 0 || offd[k].col != offd[k - 1].col || offd[k].row != offd[k - 1].row) {
            count[offd[k].col]++;
            uniq++;
        }
    }
    ap_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) ap_[j + 1] = ap_[j] + count[j];
    ai_.assign(ap_[n_], -1);
    ax_.assign(ap_[n_], 0.0);
    slot_of_diag_.assign(n_, -1);
    slot_of_entry_.assign(entries.size(), -1);
    std::vector<int> next(n_);
    for (int j = 0; j < n_; ++j) {
        slot_of_diag_[j] = ap_[j];
        ai_[ap_[j]] = j;
        next[j] = ap_[j] + 1;
    }
    int last_slot = -1;
    for (size_t k = 0; k < offd.size(); ++k) {
        if (k == 0 || offd[k].col != offd[k - 1].col || offd[k].row != offd[k - 1].row) {
            last_slot = next[offd[k].col]++;
            ai_[last_slot] = offd[k].row;
        }
        slot_of_entry_[offd[k].entry] = last_slot;
    }
    for (auto [pj, e] : diag_hits) slot_of_entry_[e] = slot_of_diag_[pj];

    // symbolic: elimination tree and per-column factor counts (up-looking LDL)
    parent_.assign(n_, -1);
    lnz_.assign(n_, 0);
    flag_.assign(n_, -1);
    for (int k = 0; k < n_; ++k) {
        parent_[k] = -1;
        flag_[k] = k;
        for (int p = ap_[k]; p < ap_[k + 1]; ++p) {
            int i = ai_[p];
            for (; i != k && flag_[i] != k; i = parent_[i]) {
                if (parent_[i] == -1) parent_[i] = k;
                lnz_[i]++;
                flag_[i] = k;
            }
        }
    }
    lp_.assign(n_ + 1, 0);
    for (int k = 0; k < n_; ++k) lp_[k + 1] = lp_[k] + lnz_[k];
    li_.assign(lp_[n_], 0);
    lx_.assign(lp_[n_], 0.0);
    d_.assign(n_, 0.0);
    y_.assign(n_, 0.0);
    pattern_.assign(n_, 0);
    used_.assign(n_, 0);
}

bool QuasiDefiniteLdl::factorize(const std::vector<double>& entry_values,
                                 const std::vector<double>& diag) {
    std::fill(ax_.begin(), ax_.end(), 0.0);
    for (size_t k = 0; k < entry_values.size(); ++k) ax_[slot_of_entry_[k]] += entry_values[k];
    for (int i = 0; i < n_; ++i) ax_[slot_of_diag_[iperm_[i]]] += diag[i];

    std::fill(used_.begin(), used_.end(), 0);
    bool ok = true;
    for (int k = 0; k < n_; ++k) {
        int top = n_;
        flag_[k] = k;
        double dk = 0;
        for (int p = ap_[k]; p < ap_[k + 1]; ++p) {
            int i = ai_[p];
            if (i == k) {
                dk = ax_[p];
                continue;
            }
            y_[i] = ax_[p];
            int len = 0;
            for (; flag_[i] != k; i = parent_[i]) {
                pattern_[len++] = i;
                flag_[i] = k;
            }
            while (len > 0) pattern_[--top] = pattern_[--len];
        }
        for (int s = top; s < n_; ++s) {
            int i = pattern_[s];
            double yi = y_[i];
            y_[i] = 0.0;
            int p2 = lp_[i] + used_[i];
            for (int p = lp_[i]; p < p2; ++p) y_[li_[p]] -= lx_[p] * yi;
            double lki = yi / d_[i];
            dk -= lki * yi;
            li_[p2] = k;
            lx_[p2] = lki;
            used_[i]++;
        }
        d_[k] = dk;
        if (!(std::abs(dk) > 1e-300)) ok = false;
    }
    return ok;
}

void QuasiDefiniteLdl::solve(std::vector<double>& rhs) const {
    std::vector<double> x(n_);
    for (int k = 0; k < n_; ++k) x[k] = rhs[perm_[k]];
    for (int j = 0; j < n_; ++j) {
        double xj = x[j];
        if (xj != 0.0)
            for (int p = lp_[j]; p < lp_[j] + used_[j]; ++p) x[li_[p]] -= lx_[p] * xj;
    }
    for (int j = 0; j < n_; ++j) x[j] /= d_[j];
    for (int j = n_ - 1; j >= 0; --j) {
        double xj = x[j];
        for (int p = lp_[j]; p < lp_[j] + used_[j]; ++p) xj -= lx_[p] * x[li_[p]];
        x[j] = xj;
    }
    for (int k = 0; k < n_; ++k) rhs[perm_[k]] = x[k];
}

} // namespace lvgrid::detail
