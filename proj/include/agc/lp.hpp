#pragma once

// Dense linear programming over free variables:
//
//     maximize  c.x   subject to  A x <= b,   x in R^n (no sign restriction).
//
// Solved with a two-phase primal simplex on the tableau form. Dantzig pricing
// runs first; after a pivot budget the solver falls back to Bland's rule,
// which cannot cycle. Exceeding the total budget is a hard SolverError.
//
// Every outcome carries a certificate: an optimal point, or an unbounded ray r
// with A r <= 0 and c.r > 0. Certificates are re-verified against the raw
// constraints before being returned.
//
// solve() is a pure function of its arguments (plus a relaxed atomic call
// counter); concurrent solves of distinct problems share no mutable state.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "agc/errors.hpp"

namespace agc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LpProblem {
    /// Objective coefficients (maximized), length = cols of constraints.
    Vector objective;
    /// Constraint matrix of A x <= rhs.
    Matrix constraints;
    Vector rhs;

    LpProblem() = default;
    LpProblem(Vector objective_, Matrix constraints_, Vector rhs_);

    int num_vars() const { return static_cast<int>(constraints.cols()); }
    int num_rows() const { return static_cast<int>(constraints.rows()); }

    /// Absolute feasibility tolerance scaled by the constraint right-hand side.
    double feasibility_tol() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpOutcome {
    LpStatus status = LpStatus::Infeasible;
    /// Optimal objective value (Optimal only).
    double value = 0.0;
    /// Optimal point (Optimal only).
    Vector point;
    /// Improving ray with A r <= 0, c.r > 0 (Unbounded only).
    Vector ray;

    bool optimal() const { return status == LpStatus::Optimal; }
    bool infeasible() const { return status == LpStatus::Infeasible; }
    bool unbounded() const { return status == LpStatus::Unbounded; }
};

struct SolveOptions {
    /// Pivots taken with Dantzig pricing before switching to Bland's rule.
    int dantzig_pivot_budget = 2000;
    /// Hard cap on total pivots per phase; exceeding it raises SolverError.
    int total_pivot_budget = 50000;
};

LpOutcome solve(const LpProblem& problem, const SolveOptions& options = {});

/// Total number of solve() calls in this process. Used by callers that assert
/// how many programs a procedure solves.
std::uint64_t solve_call_count();

}  // namespace agc
