#pragma once

// Verifies that a deterministic affine closed-loop system implements a linear
// contract by induction over guarantee rows.
//
// The system is y(k+1) = F y(k) + B z(k) + f with input z constrained by the
// contract assumptions and initial pair (z(0), y(0)) drawn from an explicit
// initial set. Let J(k) denote "the current-slice part of every guarantee row
// holds at slice k". Three LP families discharge the guarantees:
//
//   base      J(0) on the initial set, one LP per row with a nonzero
//             current-slice part (others are vacuous at the base),
//   step      J(k) + assumptions + dynamics  =>  J(k+1), per row,
//   coupling  for rows with a nonzero next-slice part: J(k) and J(k+1) +
//             assumptions + dynamics  =>  the full two-slice row constraint.
//
// Each LP maximizes the violation of its conclusion; satisfaction holds iff
// every optimum is non-positive. An infeasible premise is vacuous (-inf).

#include <optional>
#include <string>
#include <vector>

#include "agc/contract.hpp"
#include "agc/jsonio.hpp"
#include "agc/lp.hpp"
#include "agc/refinement.hpp"

namespace agc {

struct AffineSystem {
    int state_dim = 0;    // n_y
    int input_dim = 0;    // n_z
    Matrix state_matrix;  // F, n_y x n_y
    Matrix input_matrix;  // B, n_y x n_z
    Vector offset;        // f, length n_y
    std::string label;
};

void validate(const AffineSystem& sys);

/// Initial pairs {(z(0), y(0)) : P [z(0); y(0)] <= q}.
struct InitSet {
    Matrix constraints;  // columns n_z + n_y
    Vector rhs;
};

enum class ThetaKind { Base, Step, Coupling };

const char* theta_kind_name(ThetaKind k);  // "base", "step", "coupling"

struct ThetaLp {
    ThetaKind kind = ThetaKind::Base;
    int row = 0;
    LpProblem problem;
    double offset = 0.0;
    std::vector<SliceSpan> layout;
};

/// True iff the guarantee row has a nonzero current-slice part and therefore
/// participates in the base case and the step induction.
bool row_has_now_part(const LinearContract& c, int row);
/// True iff the guarantee row has a nonzero next-slice part and therefore
/// needs a coupling LP.
bool row_has_next_part(const LinearContract& c, int row);

ThetaLp build_theta_base(const AffineSystem& sys, const LinearContract& c, const InitSet& init,
                         int row);
ThetaLp build_theta_step(const AffineSystem& sys, const LinearContract& c, int row);
ThetaLp build_theta_coupling(const AffineSystem& sys, const LinearContract& c, int row);

struct SatRowResult {
    ThetaKind kind = ThetaKind::Base;
    int row = 0;
    bool vacuous = false;  // skipped without solving (no conclusion to check)
    LpStatus status = LpStatus::Optimal;
    double theta = 0.0;
    std::optional<Vector> witness;
    std::optional<Vector> ray;
};

struct SatisfactionVerdict {
    bool holds = false;
    std::vector<double> theta_base;
    std::vector<double> theta_step;
    std::vector<double> theta_coupling;
    std::vector<SatRowResult> rows;
    int lp_count = 0;
    double tolerance = 0.0;
};

SatisfactionVerdict check_satisfaction(const AffineSystem& sys, const LinearContract& c,
                                       const InitSet& init, double tol = 1e-7);

Json satisfaction_to_json(const SatisfactionVerdict& v);

AffineSystem system_from_json(const Json& j);
Json system_to_json(const AffineSystem& sys);
AffineSystem load_system(const std::string& path);
void save_system(const AffineSystem& sys, const std::string& path);

InitSet initset_from_json(const Json& j, int expected_cols = -1);
Json initset_to_json(const InitSet& init);
InitSet load_initset(const std::string& path, int expected_cols = -1);
void save_initset(const InitSet& init, const std::string& path);

}  // namespace agc
