#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace hfl {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { le, ge, eq };

// Minimization LP over bounded variables. Rows are kept sparse.
struct LpModel {
    struct Row {
        std::string name;
        RowSense sense = RowSense::le;
        double rhs = 0.0;
        std::vector<std::pair<int, double>> coef;
    };

    std::vector<std::string> col_name;
    std::vector<double> obj, lo, hi;
    std::vector<Row> rows;

    int add_col(const std::string& name, double lo_, double hi_, double obj_ = 0.0);
    int add_row(const std::string& name, RowSense sense, double rhs);
    void add_coef(int row, int col, double v);

    int num_cols() const { return static_cast<int>(obj.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> x;
    long long iterations = 0;
};

struct SimplexOptions {
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    long long max_iters = 200000;
};

// Two-phase primal simplex on bounded variables. Entering variable by
// largest reduced-cost violation (ties: lowest column index); switches to
// Bland's rule for the rest of the solve once the degenerate-pivot count
// passes 3*(rows+cols). Deterministic throughout.
LpResult solve_lp(const LpModel& m, const SimplexOptions& opt = {});

}  // namespace hfl
