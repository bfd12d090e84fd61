#pragma once

// Linear assume/guarantee contracts on sampled signals.
//
// A contract over an input signal d (dimension n_d) and output signal y
// (dimension n_y) consists of per-step linear inequalities
//
//   assumptions:  A1 d(k+1) + A0 d(k) <= a0            for all k
//   guarantees:   G1 [d(k+1); y(k+1)] + G0 [d(k); y(k)] <= g0   for all k
//
// Zero-row assumption or guarantee blocks are legal and mean "no constraint".

#include <string>

#include "agc/jsonio.hpp"
#include "agc/lp.hpp"

namespace agc {

struct LinearContract {
    int input_dim = 0;   // n_d
    int output_dim = 0;  // n_y
    Matrix assume_next;  // A1, s_A x n_d
    Matrix assume_now;   // A0, s_A x n_d
    Vector assume_rhs;   // a0, length s_A
    Matrix guar_next;    // G1, s_G x (n_d + n_y)
    Matrix guar_now;     // G0, s_G x (n_d + n_y)
    Vector guar_rhs;     // g0, length s_G
    std::string label;

    int assume_rows() const { return static_cast<int>(assume_next.rows()); }
    int guar_rows() const { return static_cast<int>(guar_next.rows()); }
};

/// Column split of the guarantee matrices at the input dimension:
/// G^i = [input block | output block].
struct GuaranteeBlocks {
    Matrix next_input;   // s_G x n_d
    Matrix next_output;  // s_G x n_y
    Matrix now_input;    // s_G x n_d
    Matrix now_output;   // s_G x n_y
};

/// Two contracts in cascade plus a target contract on the composition.
/// c1: d -> z, c2: z -> y, target: d -> y.
struct CascadeTriple {
    LinearContract c1;
    LinearContract c2;
    LinearContract target;

    int input_dim() const { return c1.input_dim; }
    int mid_dim() const { return c1.output_dim; }
    int output_dim() const { return c2.output_dim; }
};

/// Checks all dimensional invariants; throws DimensionError naming the first
/// violated one with its row/column counts.
void validate(const LinearContract& c);

/// Checks the wiring of a cascade (c1 output feeds c2 input, target spans
/// c1 input to c2 output) and validates all three contracts.
void validate(const CascadeTriple& t);

GuaranteeBlocks split_guarantees(const LinearContract& c);

/// True iff the output block of G0 is exactly zero, i.e. the guarantees do
/// not constrain the current output sample (delayed-guarantee shape).
bool output_now_is_zero(const LinearContract& c);

LinearContract contract_from_json(const Json& j);
Json contract_to_json(const LinearContract& c);

LinearContract load_contract(const std::string& path);
void save_contract(const LinearContract& c, const std::string& path);

}  // namespace agc
