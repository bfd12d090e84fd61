#include "agc/lp.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace agc {

namespace {

std::atomic<std::uint64_t> g_solve_calls{0};

constexpr double kPivotTol = 1e-9;

void require_finite(const Matrix& m, const char* name) {
    if (!m.allFinite()) {
        throw DimensionError(std::string("LpProblem: non-finite entry in ") + name);
    }
}

// Dense simplex tableau over the standard-form variables
//   u = [x+ (n), x- (n), s (m), artificials (na)]  >= 0
// with row 0 holding reduced costs and the last column the rhs.
struct Tableau {
    Matrix t;                  // (m+1) x (ncols+1)
    std::vector<int> basis;    // size m, tableau row i+1 <-> column basis[i]
    int ncols = 0;
    int first_artificial = 0;  // columns >= this are phase-1 artificials

    double& rc(int j) { return t(0, j); }
    double rhs(int i) const { return t(i + 1, ncols); }

    void pivot(int row, int col) {
        t.row(row) /= t(row, col);
        for (int i = 0; i < t.rows(); ++i) {
            if (i == row) continue;
            double factor = t(i, col);
            if (factor != 0.0) t.row(i) -= factor * t.row(row);
        }
        basis[static_cast<size_t>(row) - 1] = col;
    }
};

enum class PhaseResult { Converged, Unbounded };

// Runs simplex iterations on the tableau until no improving column remains.
// `allow_artificials` controls whether artificial columns may enter.
PhaseResult run_simplex(Tableau& tab, int& pivots_used, const SolveOptions& opt,
                        double rc_tol, bool allow_artificials, int& unbounded_col) {
    const int m = static_cast<int>(tab.basis.size());
    const int limit = allow_artificials ? tab.ncols : tab.first_artificial;
    for (;;) {
        const bool bland = pivots_used >= opt.dantzig_pivot_budget;
        int col = -1;
        double best = rc_tol;
        for (int j = 0; j < limit; ++j) {
            double r = tab.t(0, j);
            if (r > best) {
                col = j;
                if (bland) break;  // smallest improving index
                best = r;
            }
        }
        if (col < 0) return PhaseResult::Converged;

        int row = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        double best_pivot = 0.0;
        for (int i = 1; i <= m; ++i) {
            double a = tab.t(i, col);
            if (a <= kPivotTol) continue;
            double num = tab.t(i, tab.ncols);
            if (num < 0.0) num = 0.0;  // numerical dust in a feasible tableau
            double ratio = num / a;
            bool take = false;
            if (ratio < best_ratio - 1e-12) {
                take = true;
            } else if (ratio <= best_ratio + 1e-12) {
                if (bland) {
                    take = row < 0 || tab.basis[i - 1] < tab.basis[row - 1];
                } else {
                    take = a > best_pivot;  // prefer large pivots on ties
                }
            }
            if (take) {
                row = i;
                best_ratio = std::min(best_ratio, ratio);
                best_pivot = a;
            }
        }
        if (row < 0) {
            unbounded_col = col;
            return PhaseResult::Unbounded;
        }
        tab.pivot(row, col);
        if (++pivots_used > opt.total_pivot_budget) {
            std::ostringstream msg;
            msg << "simplex pivot budget exceeded (" << opt.total_pivot_budget << " pivots)";
            throw SolverError(msg.str());
        }
    }
}

Vector standard_to_x(const Tableau& tab, int n) {
    Vector u = Vector::Zero(tab.ncols);
    for (size_t i = 0; i < tab.basis.size(); ++i) {
        u[tab.basis[i]] = tab.t(static_cast<int>(i) + 1, tab.ncols);
    }
    return u.head(n) - u.segment(n, n);
}

}  // namespace

LpProblem::LpProblem(Vector objective_, Matrix constraints_, Vector rhs_)
    : objective(std::move(objective_)),
      constraints(std::move(constraints_)),
      rhs(std::move(rhs_)) {
    if (objective.size() != constraints.cols()) {
        std::ostringstream msg;
        msg << "LpProblem: objective length " << objective.size()
            << " does not match constraint column count " << constraints.cols();
        throw DimensionError(msg.str());
    }
    if (rhs.size() != constraints.rows()) {
        std::ostringstream msg;
        msg << "LpProblem: rhs length " << rhs.size()
            << " does not match constraint row count " << constraints.rows();
        throw DimensionError(msg.str());
    }
    require_finite(objective, "objective");
    require_finite(constraints, "constraints");
    require_finite(rhs, "rhs");
}

double LpProblem::feasibility_tol() const {
    double bmax = rhs.size() > 0 ? rhs.cwiseAbs().maxCoeff() : 0.0;
    return 1e-9 * (1.0 + bmax);
}

LpOutcome solve(const LpProblem& p, const SolveOptions& opt) {
    g_solve_calls.fetch_add(1, std::memory_order_relaxed);

    const int n = p.num_vars();
    const int m = p.num_rows();
    const double feas_tol = p.feasibility_tol();

    // Unconstrained: optimal at the origin unless the objective is nonzero.
    if (m == 0) {
        LpOutcome out;
        if (p.objective.size() == 0 || p.objective.cwiseAbs().maxCoeff() == 0.0) {
            out.status = LpStatus::Optimal;
            out.value = 0.0;
            out.point = Vector::Zero(n);
        } else {
            out.status = LpStatus::Unbounded;
            out.ray = p.objective.normalized();
        }
        return out;
    }

    // Standard form: A x+ - A x- + S s = b with rows negated where b < 0,
    // artificials appended for the negated rows.
    std::vector<int> art_rows;
    for (int i = 0; i < m; ++i) {
        if (p.rhs[i] < 0.0) art_rows.push_back(i);
    }
    const int na = static_cast<int>(art_rows.size());
    const int ncols = 2 * n + m + na;

    Tableau tab;
    tab.ncols = ncols;
    tab.first_artificial = 2 * n + m;
    tab.t = Matrix::Zero(m + 1, ncols + 1);
    tab.basis.assign(m, -1);

    {
        int art = 0;
        for (int i = 0; i < m; ++i) {
            double sign = p.rhs[i] < 0.0 ? -1.0 : 1.0;
            tab.t.block(i + 1, 0, 1, n) = sign * p.constraints.row(i);
            tab.t.block(i + 1, n, 1, n) = -sign * p.constraints.row(i);
            tab.t(i + 1, 2 * n + i) = sign;
            tab.t(i + 1, ncols) = sign * p.rhs[i];
            if (sign < 0.0) {
                tab.t(i + 1, tab.first_artificial + art) = 1.0;
                tab.basis[i] = tab.first_artificial + art;
                ++art;
            } else {
                tab.basis[i] = 2 * n + i;
            }
        }
    }

    int pivots = 0;
    int unbounded_col = -1;

    // Phase 1: maximize -sum(artificials) until it reaches 0.
    if (na > 0) {
        for (int j = tab.first_artificial; j < ncols; ++j) tab.t(0, j) = -1.0;
        for (int i = 0; i < m; ++i) {
            if (tab.basis[i] >= tab.first_artificial) tab.t.row(0) += tab.t.row(i + 1);
        }
        double rc_tol = 1e-9;
        PhaseResult r = run_simplex(tab, pivots, opt, rc_tol, true, unbounded_col);
        if (r == PhaseResult::Unbounded) {
            throw SolverError("phase-1 objective reported unbounded; tableau is corrupt");
        }
        double infeas = 0.0;
        for (int i = 0; i < m; ++i) {
            if (tab.basis[i] >= tab.first_artificial) infeas += tab.rhs(i);
        }
        if (infeas > feas_tol) {
            LpOutcome out;
            out.status = LpStatus::Infeasible;
            return out;
        }
        // Drive residual artificials out of the basis where possible.
        for (int i = 0; i < m; ++i) {
            if (tab.basis[i] < tab.first_artificial) continue;
            for (int j = 0; j < tab.first_artificial; ++j) {
                if (std::abs(tab.t(i + 1, j)) > 1e-7) {
                    tab.pivot(i + 1, j);
                    break;
                }
            }
            if (tab.basis[i] >= tab.first_artificial) {
                // Redundant row (zero up to dust): blank it so later ratio
                // tests can never pick one of its dust entries as a pivot.
                tab.t.row(i + 1).setZero();
                tab.t(i + 1, tab.basis[i]) = 1.0;
            }
        }
    }

    // Phase 2: original objective, artificial columns barred.
    tab.t.row(0).setZero();
    tab.t.block(0, 0, 1, n) = p.objective.transpose();
    tab.t.block(0, n, 1, n) = -p.objective.transpose();
    for (int i = 0; i < m; ++i) {
        double c = tab.t(0, tab.basis[i]);
        if (c != 0.0) tab.t.row(0) -= c * tab.t.row(i + 1);
    }
    double cmax = p.objective.size() > 0 ? p.objective.cwiseAbs().maxCoeff() : 0.0;
    double rc_tol = 1e-9 * (1.0 + cmax);
    PhaseResult r = run_simplex(tab, pivots, opt, rc_tol, false, unbounded_col);

    if (r == PhaseResult::Unbounded) {
        Vector ray_u = Vector::Zero(ncols);
        ray_u[unbounded_col] = 1.0;
        for (int i = 0; i < m; ++i) ray_u[tab.basis[i]] = -tab.t(i + 1, unbounded_col);
        Vector ray = ray_u.head(n) - ray_u.segment(n, n);
        double norm = ray.cwiseAbs().maxCoeff();
        if (norm > 0.0) ray /= norm;
        double recession = (p.constraints * ray).maxCoeff();
        double gain = p.objective.dot(ray);
        if (recession > 1e-7 || gain <= 0.0) {
            throw SolverError("unbounded-ray certificate failed verification");
        }
        LpOutcome out;
        out.status = LpStatus::Unbounded;
        out.ray = std::move(ray);
        return out;
    }

    LpOutcome out;
    out.status = LpStatus::Optimal;
    out.point = standard_to_x(tab, n);
    out.value = p.objective.dot(out.point);
    double viol = (p.constraints * out.point - p.rhs).maxCoeff();
    if (viol > 10.0 * feas_tol) {
        throw SolverError("optimal-point certificate failed feasibility verification");
    }
    return out;
}

std::uint64_t solve_call_count() { return g_solve_calls.load(std::memory_order_relaxed); }

}  // namespace agc
