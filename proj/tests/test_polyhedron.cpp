#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "agc/polyhedron.hpp"
#include "support.hpp"

using agc::Matrix;
using agc::Vector;
using agc::VRep;
using testsupport::Rng;

namespace {

bool contains_point(const std::vector<Vector>& pts, const Vector& p, double tol = 1e-7) {
    return std::any_of(pts.begin(), pts.end(),
                       [&](const Vector& v) { return (v - p).cwiseAbs().maxCoeff() < tol; });
}

}  // namespace

TEST_CASE("unit box has four vertices and no rays") {
    Matrix a{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    Vector b{{1, 0, 1, 0}};
    VRep rep = agc::enumerate_v_rep(a, b);
    REQUIRE(rep.vertices.size() == 4);
    CHECK(rep.rays.empty());
    for (double x : {0.0, 1.0}) {
        for (double y : {0.0, 1.0}) CHECK(contains_point(rep.vertices, Vector{{x, y}}));
    }
}

TEST_CASE("half-line x >= 0") {
    VRep rep = agc::enumerate_v_rep(Matrix{{-1.0}}, Vector{{0.0}});
    REQUIRE(rep.vertices.size() == 1);
    CHECK(rep.vertices[0][0] == doctest::Approx(0.0));
    REQUIRE(rep.rays.size() == 1);
    CHECK(rep.rays[0][0] == doctest::Approx(1.0));
}

TEST_CASE("infeasible system is empty") {
    VRep rep = agc::enumerate_v_rep(Matrix{{1.0}, {-1.0}}, Vector{{-1.0, 0.0}});
    CHECK(rep.empty());
}

TEST_CASE("single point") {
    VRep rep = agc::enumerate_v_rep(Matrix{{1.0}, {-1.0}}, Vector{{2.0, -2.0}});
    REQUIRE(rep.vertices.size() == 1);
    CHECK(rep.vertices[0][0] == doctest::Approx(2.0));
    CHECK(rep.rays.empty());
}

TEST_CASE("whole plane: lineality reported as opposite ray pairs") {
    VRep rep = agc::enumerate_v_rep(Matrix(0, 2), Vector(0));
    REQUIRE(rep.vertices.size() == 1);
    CHECK(rep.rays.size() == 4);
    for (const Vector& r : rep.rays) {
        CHECK(contains_point(rep.rays, Vector(-r)));
    }
}

TEST_CASE("half-plane in 2-D keeps its lineality direction") {
    // x <= y, i.e. x - y <= 0: lineality along (1,1), one extreme direction.
    VRep rep = agc::enumerate_v_rep(Matrix{{1.0, -1.0}}, Vector{{0.0}});
    REQUIRE_FALSE(rep.vertices.empty());
    REQUIRE_FALSE(rep.rays.empty());
    for (const Vector& v : rep.vertices) CHECK(v[0] - v[1] <= 1e-9);
    for (const Vector& r : rep.rays) CHECK(r[0] - r[1] <= 1e-9);
    // (1,1) and (-1,-1) must both be recession directions of the output.
    CHECK(contains_point(rep.rays, Vector{{1.0, 1.0}}, 1e-6));
    CHECK(contains_point(rep.rays, Vector{{-1.0, -1.0}}, 1e-6));
}

TEST_CASE("8-D unit cube hits the documented limits exactly") {
    const int n = 8;
    Matrix a(2 * n, n);
    Vector b(2 * n);
    a.setZero();
    for (int i = 0; i < n; ++i) {
        a(2 * i, i) = 1.0;
        b[2 * i] = 1.0;
        a(2 * i + 1, i) = -1.0;
        b[2 * i + 1] = 0.0;
    }
    VRep rep = agc::enumerate_v_rep(a, b);
    CHECK(rep.vertices.size() == 256);
    CHECK(rep.rays.empty());
}

TEST_CASE("zero-dimensional space") {
    VRep point = agc::enumerate_v_rep(Matrix(0, 0), Vector(0));
    REQUIRE(point.vertices.size() == 1);
    CHECK(point.vertices[0].size() == 0);
    CHECK(agc::vrep_max(point, Vector(0)).kind == agc::SupportKind::Finite);

    VRep empty = agc::enumerate_v_rep(Matrix::Zero(1, 0), Vector{{-1.0}});
    CHECK(empty.empty());
}

TEST_CASE("capability limits raise explicit errors") {
    CHECK_THROWS_AS(agc::enumerate_v_rep(Matrix::Zero(1, 9), Vector::Zero(1)),
                    agc::CapabilityError);
    CHECK_THROWS_AS(agc::enumerate_v_rep(Matrix::Zero(25, 2), Vector::Zero(25)),
                    agc::CapabilityError);
}

TEST_CASE("generators satisfy the source inequalities") {
    Rng rng(2024);
    for (int i = 0; i < 120; ++i) {
        const int n = testsupport::uniform_int(rng, 1, 4);
        const int m = testsupport::uniform_int(rng, 0, 8);
        Matrix a = testsupport::random_matrix(rng, m, n);
        Vector b = testsupport::random_matrix(rng, std::max(m, 1), 1, 2.0).col(0).head(m);
        VRep rep = agc::enumerate_v_rep(a, b);
        if (m == 0) {
            REQUIRE_FALSE(rep.empty());
            continue;
        }
        for (const Vector& v : rep.vertices) {
            CHECK((a * v - b).maxCoeff() <= 1e-7 * (1.0 + b.cwiseAbs().maxCoeff()));
        }
        for (const Vector& r : rep.rays) {
            CHECK((a * r).maxCoeff() <= 1e-7);
        }
    }
}

TEST_CASE("support function agrees with the LP solver") {
    Rng rng(77);
    int finite = 0, unbounded = 0, empty = 0;
    for (int i = 0; i < 150; ++i) {
        const int n = testsupport::uniform_int(rng, 1, 4);
        const int m = testsupport::uniform_int(rng, 1, 8);
        Matrix a = testsupport::random_matrix(rng, m, n);
        Vector b = testsupport::random_matrix(rng, m, 1, 2.0).col(0);
        Vector c = testsupport::random_matrix(rng, n, 1, 2.0).col(0);
        VRep rep = agc::enumerate_v_rep(a, b);
        agc::LpOutcome out = agc::solve(agc::LpProblem(c, a, b));
        if (rep.empty()) {
            ++empty;
            CHECK(out.status == agc::LpStatus::Infeasible);
            continue;
        }
        agc::SupportValue s = agc::vrep_max(rep, c);
        if (s.kind == agc::SupportKind::Unbounded) {
            ++unbounded;
            CHECK(out.status == agc::LpStatus::Unbounded);
        } else {
            ++finite;
            REQUIRE(out.status == agc::LpStatus::Optimal);
            CHECK(std::abs(out.value - s.value) <= 1e-7 * (1.0 + std::abs(s.value)));
        }
    }
    CHECK(finite > 5);
    CHECK(unbounded > 5);
    CHECK(empty > 5);
}
