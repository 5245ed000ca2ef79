#include "hfl/lp.hpp"

#include <cmath>

#include "hfl/common.hpp"
#include "hfl/kernels.hpp"

namespace hfl {

int LpModel::add_col(const std::string& name, double lo_, double hi_, double obj_) {
    require(!(lo_ != lo_) && !(hi_ != hi_) && lo_ <= hi_, "bad bounds on column " + name);
    col_name.push_back(name);
    lo.push_back(lo_);
    hi.push_back(hi_);
    obj.push_back(obj_);
    return num_cols() - 1;
}

int LpModel::add_row(const std::string& name, RowSense sense, double rhs) {
    require(std::isfinite(rhs), "non-finite rhs on row " + name);
    rows.push_back({name, sense, rhs, {}});
    return num_rows() - 1;
}

void LpModel::add_coef(int row, int col, double v) {
    require(row >= 0 && row < num_rows(), "row index out of range");
    require(col >= 0 && col < num_cols(), "column index out of range");
    require(std::isfinite(v), "non-finite coefficient");
    rows[row].coef.emplace_back(col, v);
}

namespace {

enum Where : signed char { kBasic = -1, kAtLo = 0, kAtHi = 1 };

struct Tableau {
    int m = 0;        // rows
    int total = 0;    // all columns: structural + slack + artificial
    std::vector<double> t;  // m x total, row-major (B^-1 A)
    double* row(int i) { return t.data() + static_cast<size_t>(i) * total; }
    double at(int i, int j) const { return t[static_cast<size_t>(i) * total + j]; }
};

struct Solver {
    const LpModel& model;
    const SimplexOptions& opt;
    int n = 0, m = 0, art_base = 0, total = 0;
    Tableau tab;
    std::vector<double> lo, hi, xval;
    std::vector<signed char> where;
    std::vector<int> basis;
    long long iters = 0;
    long long degen = 0;
    bool bland = false;

    explicit Solver(const LpModel& mod, const SimplexOptions& o) : model(mod), opt(o) {}

    void build();
    bool fixed(int j) const { return lo[j] >= hi[j]; }
    LpStatus optimize(const std::vector<double>& cost);
    bool drive_out_artificials();
};

void Solver::build() {
    n = model.num_cols();
    m = model.num_rows();
    lo = model.lo;
    hi = model.hi;
    lo.reserve(n + 2 * m);
    hi.reserve(n + 2 * m);
    // slack per row: le -> [0,inf), ge -> (-inf,0], eq -> [0,0]
    for (const auto& r : model.rows) {
        switch (r.sense) {
            case RowSense::le: lo.push_back(0.0); hi.push_back(kInf); break;
            case RowSense::ge: lo.push_back(-kInf); hi.push_back(0.0); break;
            case RowSense::eq: lo.push_back(0.0); hi.push_back(0.0); break;
        }
    }
    art_base = n + m;

    // nonbasic start values for structurals
    xval.assign(n + m, 0.0);
    where.assign(n + m, kAtLo);
    for (int j = 0; j < n; ++j) {
        require(std::isfinite(lo[j]) || std::isfinite(hi[j]),
                "free column unsupported: " + model.col_name[j]);
        if (std::isfinite(lo[j])) {
            xval[j] = lo[j];
            where[j] = kAtLo;
        } else {
            xval[j] = hi[j];
            where[j] = kAtHi;
        }
    }

    // residual slack values; decide which rows need an artificial
    std::vector<double> sraw(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double ax = 0.0;
        for (auto [j, v] : model.rows[i].coef) ax += v * xval[j];
        sraw[i] = model.rows[i].rhs - ax;
    }
    std::vector<int> art_rows;
    for (int i = 0; i < m; ++i) {
        const int sj = n + i;
        if (sraw[i] >= lo[sj] - opt.feas_tol && sraw[i] <= hi[sj] + opt.feas_tol) continue;
        art_rows.push_back(i);
    }
    total = art_base + static_cast<int>(art_rows.size());
    tab.m = m;
    tab.total = total;
    tab.t.assign(static_cast<size_t>(m) * total, 0.0);
    for (int i = 0; i < m; ++i) {
        double* tr = tab.row(i);
        for (auto [j, v] : model.rows[i].coef) tr[j] += v;
        tr[n + i] = 1.0;
    }

    basis.assign(m, -1);
    xval.resize(total, 0.0);
    where.resize(total, kAtLo);
    for (int i = 0; i < m; ++i) {
        const int sj = n + i;
        if (sraw[i] >= lo[sj] - opt.feas_tol && sraw[i] <= hi[sj] + opt.feas_tol) {
            basis[i] = sj;
            where[sj] = kBasic;
            xval[sj] = sraw[i];
        }
    }
    int k = art_base;
    for (int i : art_rows) {
        const int sj = n + i;
        // clamp slack to its nearest bound (always 0 for every sense)
        const double sv = std::isfinite(lo[sj]) && sraw[i] < lo[sj] ? lo[sj] : hi[sj];
        xval[sj] = sv;
        where[sj] = sv == lo[sj] ? kAtLo : kAtHi;
        const double resid = sraw[i] - sv;
        lo.push_back(0.0);
        hi.push_back(kInf);
        tab.row(i)[k] = 1.0;
        if (resid < 0.0) {
            // flip the whole row so the artificial enters the basis at +|resid|
            double* tr = tab.row(i);
            kernels::scal(-1.0, tr, total);
            tr[k] = 1.0;
        }
        basis[i] = k;
        where[k] = kBasic;
        xval[k] = std::fabs(resid);
        ++k;
    }
}

LpStatus Solver::optimize(const std::vector<double>& cost) {
    std::vector<double> y(total);  // c_B^T * T
    const long long bland_after = 3LL * (m + total);

    for (;; ++iters) {
        if (iters > opt.max_iters) return LpStatus::iteration_limit;

        y.assign(total, 0.0);
        for (int i = 0; i < m; ++i) {
            const double cb = cost[basis[i]];
            if (cb != 0.0) kernels::axpy(cb, tab.row(i), y.data(), total);
        }

        // entering column
        int q = -1;
        double best = opt.opt_tol;
        for (int j = 0; j < total; ++j) {
            if (where[j] == kBasic || fixed(j)) continue;
            const double d = cost[j] - y[j];
            double viol = 0.0;
            if (where[j] == kAtLo && d < 0.0) viol = -d;
            if (where[j] == kAtHi && d > 0.0) viol = d;
            if (viol > best) {
                best = viol;
                q = j;
                if (bland) break;  // lowest eligible index
            }
        }
        if (q < 0) return LpStatus::optimal;

        const int dir = where[q] == kAtLo ? 1 : -1;
        double t_best = std::isfinite(hi[q]) && std::isfinite(lo[q]) ? hi[q] - lo[q] : kInf;
        int r_block = -1;
        for (int i = 0; i < m; ++i) {
            const double delta = dir * tab.at(i, q);
            const int k = basis[i];
            double ti = kInf;
            if (delta > 1e-11) {
                if (std::isfinite(lo[k])) ti = (xval[k] - lo[k]) / delta;
            } else if (delta < -1e-11) {
                if (std::isfinite(hi[k])) ti = (hi[k] - xval[k]) / (-delta);
            } else {
                continue;
            }
            if (ti < 0.0) ti = 0.0;
            if (ti < t_best - 1e-12 ||
                (ti < t_best + 1e-12 && (r_block < 0 || basis[i] < basis[r_block]))) {
                t_best = ti;
                r_block = i;
            }
        }
        if (r_block < 0 && !std::isfinite(t_best)) return LpStatus::unbounded;

        if (t_best <= opt.feas_tol) {
            if (++degen > bland_after) bland = true;
        } else {
            degen = 0;
        }

        if (r_block < 0) {
            // bound flip
            for (int i = 0; i < m; ++i) xval[basis[i]] -= dir * t_best * tab.at(i, q);
            where[q] = where[q] == kAtLo ? kAtHi : kAtLo;
            xval[q] = where[q] == kAtLo ? lo[q] : hi[q];
            continue;
        }

        // step, then pivot q into row r_block
        for (int i = 0; i < m; ++i)
            if (i != r_block) xval[basis[i]] -= dir * t_best * tab.at(i, q);
        const int leave = basis[r_block];
        const double delta_r = dir * tab.at(r_block, q);
        xval[q] = (where[q] == kAtLo ? lo[q] : hi[q]) + dir * t_best;
        where[leave] = delta_r > 0.0 ? kAtLo : kAtHi;
        xval[leave] = where[leave] == kAtLo ? lo[leave] : hi[leave];
        basis[r_block] = q;
        where[q] = kBasic;

        double* pr = tab.row(r_block);
        kernels::scal(1.0 / pr[q], pr, total);
        pr[q] = 1.0;
        for (int i = 0; i < m; ++i) {
            if (i == r_block) continue;
            double* ri = tab.row(i);
            const double a = ri[q];
            if (a != 0.0) {
                kernels::axpy(-a, pr, ri, total);
                ri[q] = 0.0;
            }
        }
    }
}

bool Solver::drive_out_artificials() {
    for (int i = 0; i < m; ++i) {
        if (basis[i] < art_base) continue;
        double* tr = tab.row(i);
        int piv = -1;
        for (int j = 0; j < art_base; ++j) {
            if (where[j] == kBasic || fixed(j)) continue;
            if (std::fabs(tr[j]) > 1e-7) {
                piv = j;
                break;
            }
        }
        if (piv < 0) {
            // redundant row: pin the artificial at zero and leave it basic
            hi[basis[i]] = 0.0;
            continue;
        }
        const int art = basis[i];
        basis[i] = piv;
        where[art] = kAtLo;
        xval[art] = 0.0;
        where[piv] = kBasic;  // value unchanged (zero-length step)
        kernels::scal(1.0 / tr[piv], tr, total);
        tr[piv] = 1.0;
        for (int r = 0; r < m; ++r) {
            if (r == i) continue;
            double* rr = tab.row(r);
            const double a = rr[piv];
            if (a != 0.0) {
                kernels::axpy(-a, tr, rr, total);
                rr[piv] = 0.0;
            }
        }
    }
    return true;
}

}  // namespace

LpResult solve_lp(const LpModel& m, const SimplexOptions& opt) {
    LpResult res;
    Solver s(m, opt);
    s.build();

    if (s.total > s.art_base) {
        std::vector<double> c1(s.total, 0.0);
        for (int j = s.art_base; j < s.total; ++j) c1[j] = 1.0;
        const LpStatus st = s.optimize(c1);
        res.iterations = s.iters;
        if (st == LpStatus::iteration_limit) {
            res.status = st;
            return res;
        }
        double infeas = 0.0;
        for (int j = s.art_base; j < s.total; ++j) infeas += s.xval[j];
        if (infeas > opt.feas_tol * 10.0) {
            res.status = LpStatus::infeasible;
            return res;
        }
        s.drive_out_artificials();
        for (int j = s.art_base; j < s.total; ++j) {
            s.lo[j] = 0.0;
            s.hi[j] = 0.0;
        }
    }

    std::vector<double> c2(s.total, 0.0);
    for (int j = 0; j < s.n; ++j) c2[j] = m.obj[j];
    const LpStatus st = s.optimize(c2);
    res.iterations = s.iters;
    res.status = st;
    if (st != LpStatus::optimal) return res;
    res.x.assign(s.xval.begin(), s.xval.begin() + s.n);
    res.objective = 0.0;
    for (int j = 0; j < s.n; ++j) res.objective += m.obj[j] * res.x[j];
    return res;
}

}  // namespace hfl
