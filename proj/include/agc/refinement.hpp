#pragma once

// Decides whether a cascade of two linear contracts refines a contract on the
// composite system. The decision reduces to one LP per conclusion row across
// three implication families:
//
//   D      target assumptions        =>  upstream assumptions
//   otimes target assumptions + upstream guarantees => downstream assumptions
//   Omega  all premises              =>  target guarantees
//
// Each LP maximizes the violation of one conclusion row over the premise
// polyhedron on a short signal window. Refinement holds iff every optimum is
// non-positive. An infeasible premise makes a row vacuously true (theta =
// -inf); an unbounded violation fails the row (theta = +inf, ray recorded).
//
// A "holds" verdict is unconditional. A "fails" verdict is additionally exact
// when the stacked premise triples are extendable (any window-feasible pair of
// samples can be continued one more step); check_extendability verifies that
// hypothesis for small dimensions.
//
// Window length: families ii/iii accept a horizon of 1 or 2 steps. Horizon 2
// covers delayed guarantees, where the upstream contract constrains its output
// only from the second sample onward.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "agc/contract.hpp"
#include "agc/jsonio.hpp"
#include "agc/lp.hpp"

namespace agc {

struct HorizonConfig {
    int horizon_ii = 1;
    int horizon_iii = 1;
};

/// Proposes horizon 2 for a family when the relevant guarantee matrices have a
/// zero now-output block (the delayed-guarantee trigger). A heuristic only;
/// explicit settings always win.
HorizonConfig propose_horizons(const CascadeTriple& t);

enum class Family { InputAssumptions, MidAssumptions, Guarantees };

const char* family_name(Family f);  // "D", "otimes", "Omega"

/// Span of one signal slice inside the stacked LP variable vector.
struct SliceSpan {
    std::string name;  // "d0", "d1", "z0", ...
    int offset = 0;
    int size = 0;
};

/// One violation-maximization LP: solve(problem).value + offset is the row's
/// violation theta.
struct ImplicationLp {
    Family family = Family::InputAssumptions;
    int row = 0;
    LpProblem problem;
    double offset = 0.0;  // conclusion rhs carried into the reported value
    std::vector<SliceSpan> layout;
};

/// All per-row LPs of one family at a fixed horizon.
struct ImplicationLpSet {
    Family family = Family::InputAssumptions;
    int horizon = 1;
    std::vector<ImplicationLp> problems;
    std::vector<SliceSpan> layout;
};

ImplicationLp build_implication_d(const CascadeTriple& t, int row);
ImplicationLp build_implication_otimes(const CascadeTriple& t, int row, const HorizonConfig& h);
ImplicationLp build_implication_omega(const CascadeTriple& t, int row, const HorizonConfig& h);

ImplicationLpSet build_family(const CascadeTriple& t, Family f, const HorizonConfig& h);

struct RowResult {
    Family family = Family::InputAssumptions;
    int row = 0;
    LpStatus status = LpStatus::Optimal;
    double theta = 0.0;               // -inf vacuous, +inf unbounded
    std::optional<Vector> witness;    // maximizer, stored when theta > 0
    std::optional<Vector> ray;        // unbounded certificate
};

struct RefinementVerdict {
    bool holds = false;
    std::vector<double> theta_d;
    std::vector<double> theta_otimes;
    std::vector<double> theta_omega;
    double rho_d = 0.0;
    double rho_otimes = 0.0;
    double rho_omega = 0.0;
    std::vector<RowResult> rows;
    int lp_count = 0;
    double tolerance = 0.0;
    HorizonConfig horizons;
};

RefinementVerdict check_refinement(const CascadeTriple& t, const HorizonConfig& h,
                                   double tol = 1e-7);

Json verdict_to_json(const RefinementVerdict& v);

// --- Extendability (window-extension hypothesis) -------------------------

enum class ExtendMethod { ExactVRep, UnsupportedDimension };

struct ExtendabilityVerdict {
    bool extendable = false;
    ExtendMethod method = ExtendMethod::ExactVRep;
    /// Window-feasible pair (u0, u1) whose extension LP is infeasible.
    std::optional<std::pair<Vector, Vector>> counterexample;
    int dimension = 0;  // dimension of the window polyhedron (2 * cols)
    std::string note;
};

/// Decides whether any (u0, u1) with V1 u1 + V0 u0 <= v0 admits some u2 with
/// V1 u2 + V0 u1 <= v0, by enumerating the window polyhedron and testing each
/// vertex (extension LP) and each ray (recession LP) of its u1-projection.
ExtendabilityVerdict check_extendability(const Matrix& v_next, const Matrix& v_now,
                                         const Vector& v_rhs);

struct StackedTriple {
    std::string name;
    Matrix v_next;
    Matrix v_now;
    Vector v_rhs;
};

/// The three stacked triples whose extendability underpins exactness of a
/// "fails" verdict: assumptions alone, assumptions + upstream guarantees, and
/// all three premise families.
std::vector<StackedTriple> hypothesis_triples(const CascadeTriple& t);

// --- Independent small-instance oracle ------------------------------------

/// True iff max of every conclusion row over {x : P x <= p} is <= its rhs,
/// decided by vertex/ray enumeration instead of LP. Premise must be within
/// enumeration limits.
bool oracle_check_implication(const Matrix& premise, const Vector& premise_rhs,
                              const Matrix& conclusion, const Vector& conclusion_rhs,
                              double tol = 1e-7);

}  // namespace agc
