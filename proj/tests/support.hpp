#pragma once

// Shared helpers for the test suites: seeded random generators for LPs and
// contract triples, plus brute-force re-verification utilities.

#include <random>
#include <vector>

#include "agc/contract.hpp"
#include "agc/lp.hpp"
#include "agc/polyhedron.hpp"

namespace testsupport {

using agc::Matrix;
using agc::Vector;

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Matrix random_matrix(Rng& rng, int rows, int cols, double scale = 2.0) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = uniform(rng, -scale, scale);
    }
    return m;
}

/// Bounded feasible LP: random rows through a strictly feasible point, plus a
/// box keeping every variable in [-box, box].
inline agc::LpProblem random_bounded_lp(Rng& rng, int max_vars = 6, int max_extra_rows = 10,
                                        double box = 5.0) {
    const int n = uniform_int(rng, 1, max_vars);
    const int extra = uniform_int(rng, 0, max_extra_rows);
    Matrix a(extra + 2 * n, n);
    Vector b(extra + 2 * n);
    Vector interior(n);
    for (int i = 0; i < n; ++i) interior[i] = uniform(rng, -1.0, 1.0);
    for (int i = 0; i < extra; ++i) {
        for (int j = 0; j < n; ++j) a(i, j) = uniform(rng, -2.0, 2.0);
        b[i] = a.row(i).dot(interior) + uniform(rng, 0.1, 2.0);
    }
    for (int i = 0; i < n; ++i) {
        a.row(extra + 2 * i).setZero();
        a(extra + 2 * i, i) = 1.0;
        b[extra + 2 * i] = box;
        a.row(extra + 2 * i + 1).setZero();
        a(extra + 2 * i + 1, i) = -1.0;
        b[extra + 2 * i + 1] = box;
    }
    Vector c(n);
    for (int i = 0; i < n; ++i) c[i] = uniform(rng, -2.0, 2.0);
    return agc::LpProblem(std::move(c), std::move(a), std::move(b));
}

/// Dual of max c.x s.t. A x <= b, expressed in the solver's own max form:
/// min b.y s.t. A^T y = c, y >= 0  ==  -max(-b.y) under stacked inequalities.
inline double dual_optimum(const agc::LpProblem& p) {
    const int n = p.num_vars();
    const int m = p.num_rows();
    Matrix a(2 * n + m, m);
    Vector b(2 * n + m);
    a.block(0, 0, n, m) = p.constraints.transpose();
    b.segment(0, n) = p.objective;
    a.block(n, 0, n, m) = -p.constraints.transpose();
    b.segment(n, n) = -p.objective;
    a.block(2 * n, 0, m, m) = -Matrix::Identity(m, m);
    b.segment(2 * n, m).setZero();
    agc::LpOutcome out = agc::solve(agc::LpProblem(-p.rhs, std::move(a), std::move(b)));
    if (!out.optimal()) throw std::runtime_error("dual LP expected to be optimal");
    return -out.value;
}

/// Random cascade whose premise polytopes are boxes (always bounded) with a
/// few extra random rows, and random conclusion rows. Dimensions are kept
/// small enough for the vertex-enumeration oracle at horizon 1.
inline agc::CascadeTriple random_boxed_triple(Rng& rng) {
    static const int dims[4][3] = {{1, 1, 1}, {2, 1, 1}, {1, 2, 1}, {1, 1, 2}};
    const int* d = dims[uniform_int(rng, 0, 3)];
    const int n_d = d[0], n_z = d[1], n_y = d[2];

    // Box rows over both window slices of a signal of dimension `dim`,
    // placed in (next | now) column blocks of the given widths.
    auto boxes = [&](int dim, int next_off, int now_off, int width, Matrix& next, Matrix& now,
                     Vector& rhs, int extra_rows) {
        const int rows = 4 * dim + extra_rows;
        next = Matrix::Zero(rows, width);
        now = Matrix::Zero(rows, width);
        rhs = Vector::Zero(rows);
        int at = 0;
        for (int i = 0; i < dim; ++i) {
            for (double sign : {1.0, -1.0}) {
                next(at, next_off + i) = sign;
                rhs[at] = uniform(rng, 0.5, 3.0);
                ++at;
                now(at, now_off + i) = sign;
                rhs[at] = uniform(rng, 0.5, 3.0);
                ++at;
            }
        }
        for (int e = 0; e < extra_rows; ++e) {
            next.row(at) = random_matrix(rng, 1, width, 1.0);
            now.row(at) = random_matrix(rng, 1, width, 1.0);
            rhs[at] = uniform(rng, 0.0, 3.0);  // keeps the origin feasible often
            ++at;
        }
    };

    agc::CascadeTriple t;
    t.c1.label = "random-c1";
    t.c1.input_dim = n_d;
    t.c1.output_dim = n_z;
    t.c2.label = "random-c2";
    t.c2.input_dim = n_z;
    t.c2.output_dim = n_y;
    t.target.label = "random-target";
    t.target.input_dim = n_d;
    t.target.output_dim = n_y;

    int extra = uniform_int(rng, 0, 2);
    boxes(n_d, 0, 0, n_d, t.target.assume_next, t.target.assume_now, t.target.assume_rhs, extra);
    extra = uniform_int(rng, 0, 2);
    boxes(n_z, n_d, n_d, n_d + n_z, t.c1.guar_next, t.c1.guar_now, t.c1.guar_rhs, extra);
    extra = uniform_int(rng, 0, 2);
    boxes(n_y, n_z, n_z, n_z + n_y, t.c2.guar_next, t.c2.guar_now, t.c2.guar_rhs, extra);

    const int s_a = uniform_int(rng, 1, 4);
    t.c1.assume_next = random_matrix(rng, s_a, n_d, 1.5);
    t.c1.assume_now = random_matrix(rng, s_a, n_d, 1.5);
    t.c1.assume_rhs = random_matrix(rng, s_a, 1, 1.5).col(0);
    t.c1.assume_rhs.array() += 0.5;

    const int s_b = uniform_int(rng, 1, 4);
    t.c2.assume_next = random_matrix(rng, s_b, n_z, 1.5);
    t.c2.assume_now = random_matrix(rng, s_b, n_z, 1.5);
    t.c2.assume_rhs = random_matrix(rng, s_b, 1, 1.5).col(0);
    t.c2.assume_rhs.array() += 0.5;

    const int s_j = uniform_int(rng, 1, 4);
    t.target.guar_next = random_matrix(rng, s_j, n_d + n_y, 1.5);
    t.target.guar_now = random_matrix(rng, s_j, n_d + n_y, 1.5);
    t.target.guar_rhs = random_matrix(rng, s_j, 1, 1.5).col(0);
    t.target.guar_rhs.array() += 0.5;

    agc::validate(t);
    return t;
}

}  // namespace testsupport
