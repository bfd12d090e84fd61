#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <map>

#include "agc/casestudy.hpp"
#include "agc/polyhedron.hpp"
#include "agc/satisfaction.hpp"
#include "support.hpp"

using agc::AffineSystem;
using agc::InitSet;
using agc::LinearContract;
using agc::Matrix;
using agc::SatisfactionVerdict;
using agc::Vector;
using testsupport::Rng;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CaseStudyInstance {
    AffineSystem sys;
    InitSet init;
    LinearContract contract;
};

CaseStudyInstance case_instance(const agc::CaseStudyParams& p) {
    auto [sys, init] = agc::build_follower_system(p);
    return {sys, init, agc::build_contract_c2(p)};
}

// Literal induction-step program with the control input as an explicit
// variable, over (p_m, v_m, p_m+, v_m+, p_f, v_f, p_f+, v_f+, a_f).
double literal_step_optimum(const agc::CaseStudyParams& p) {
    enum { PM, VM, PMn, VMn, PF, VF, PFn, VFn, AF, N };
    std::vector<std::map<int, double>> rows;
    std::vector<double> rhs;
    auto add = [&](std::map<int, double> coeffs, double bound) {
        rows.push_back(std::move(coeffs));
        rhs.push_back(bound);
    };
    auto equality = [&](std::map<int, double> coeffs, double bound) {
        add(coeffs, bound);
        for (auto& [k, v] : coeffs) v = -v;
        add(coeffs, -bound);
    };
    const double h = p.headway, dt = p.dt;
    add({{PM, -1}, {PF, 1}, {VF, h}}, -p.delta_p);  // induction hypothesis
    add({{PMn, 1}, {PM, -1}, {VM, -(dt + p.tau)}}, p.xi_up);
    add({{PMn, -1}, {PM, 1}, {VM, dt - p.tau}}, p.xi_down);
    add({{VMn, 1}, {VM, -1}}, p.eta_up);
    add({{VMn, -1}, {VM, 1}}, p.eta_down);
    equality({{PFn, 1}, {PF, -1}, {VF, -dt}}, 0.0);
    equality({{VFn, 1}, {VF, -1}, {AF, -dt}}, 0.0);
    equality({{AF, 1},
              {PM, -1.0 / (h * dt)},
              {PF, 1.0 / (h * dt)},
              {VF, 1.0 / dt + 1.0 / h},
              {VM, -(dt - p.tau) / (h * dt)}},
             -p.lambda / (h * dt));

    Matrix a = Matrix::Zero(static_cast<int>(rows.size()), N);
    Vector b(static_cast<int>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        for (auto [j, v] : rows[i]) a(static_cast<int>(i), j) = v;
        b[static_cast<int>(i)] = rhs[i];
    }
    Vector c = Vector::Zero(N);
    c[PMn] = -1;
    c[PFn] = 1;
    c[VFn] = h;
    agc::LpOutcome out = agc::solve(agc::LpProblem(c, a, b));
    REQUIRE(out.optimal());
    return out.value + p.delta_p;  // violation of p_m+ - p_f+ - h v_f+ >= delta_p
}

}  // namespace

TEST_CASE("case study: base and step maxima are exactly zero") {
    agc::CaseStudyParams p;
    CaseStudyInstance inst = case_instance(p);
    std::uint64_t before = agc::solve_call_count();
    SatisfactionVerdict v = agc::check_satisfaction(inst.sys, inst.contract, inst.init, 1e-7);
    CHECK(agc::solve_call_count() - before == 2);  // one base, one step LP
    CHECK(v.holds);
    REQUIRE(v.theta_base.size() == 1);
    REQUIRE(v.theta_step.size() == 1);
    CHECK(v.theta_coupling.empty());
    CHECK(std::abs(v.theta_base[0]) <= 1e-9);
    CHECK(std::abs(v.theta_step[0]) <= 1e-9);
}

TEST_CASE("folded step LP agrees with the explicit-control transcription") {
    for (double lambda_shift : {0.0, 0.1, -0.1, 0.35}) {
        agc::CaseStudyParams p;
        p.lambda += lambda_shift;
        CaseStudyInstance inst = case_instance(p);
        agc::ThetaLp step = agc::build_theta_step(inst.sys, inst.contract, 0);
        agc::LpOutcome out = agc::solve(step.problem);
        REQUIRE(out.optimal());
        double folded = out.value + step.offset;
        double literal = literal_step_optimum(p);
        CHECK(folded == doctest::Approx(literal).epsilon(1e-9));
        CHECK(folded == doctest::Approx(-lambda_shift).epsilon(1e-9));
    }
}

TEST_CASE("a more conservative controller gains slack, a looser one fails") {
    agc::CaseStudyParams p;
    p.lambda += 0.1;
    CaseStudyInstance conservative = case_instance(p);
    SatisfactionVerdict up =
        agc::check_satisfaction(conservative.sys, conservative.contract, conservative.init, 1e-7);
    CHECK(up.holds);
    CHECK(up.theta_step[0] == doctest::Approx(-0.1).epsilon(1e-9));

    agc::CaseStudyParams q;
    q.lambda -= 0.1;
    CHECK_FALSE(agc::check_params(q).empty());  // override warning
    CaseStudyInstance loose = case_instance(q);
    SatisfactionVerdict down =
        agc::check_satisfaction(loose.sys, loose.contract, loose.init, 1e-7);
    CHECK_FALSE(down.holds);
    CHECK(down.theta_step[0] == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("empty initial set makes the base case vacuous") {
    agc::CaseStudyParams p;
    CaseStudyInstance inst = case_instance(p);
    inst.init.constraints = Matrix::Zero(1, 4);
    inst.init.rhs = Vector{{-1.0}};
    SatisfactionVerdict v = agc::check_satisfaction(inst.sys, inst.contract, inst.init, 1e-7);
    CHECK(v.holds);
    CHECK(v.theta_base[0] == -kInf);
    CHECK(std::abs(v.theta_step[0]) <= 1e-9);
}

TEST_CASE("zero-guarantee contract holds with zero LPs") {
    agc::CaseStudyParams p;
    CaseStudyInstance inst = case_instance(p);
    inst.contract.guar_next = Matrix(0, 4);
    inst.contract.guar_now = Matrix(0, 4);
    inst.contract.guar_rhs = Vector(0);
    std::uint64_t before = agc::solve_call_count();
    SatisfactionVerdict v = agc::check_satisfaction(inst.sys, inst.contract, inst.init, 1e-7);
    CHECK(v.holds);
    CHECK(v.lp_count == 0);
    CHECK(agc::solve_call_count() == before);
}

TEST_CASE("an uncontrolled drifting follower fails with the predicted margin") {
    // B = 0, F = I, f = (0, eps): the follower ignores measurements and only
    // drifts in velocity. The step violation has the closed form
    //   (dt - tau) (xi_up + xi_down) / (2 tau) + xi_down + h*eps,
    // driven by the most adversarial admissible measured velocity.
    for (double eps : {0.0, 0.5}) {
        agc::CaseStudyParams p;
        CaseStudyInstance inst = case_instance(p);
        inst.sys.state_matrix = Matrix::Identity(2, 2);
        inst.sys.input_matrix = Matrix::Zero(2, 2);
        inst.sys.offset = Vector{{0.0, eps}};
        SatisfactionVerdict v = agc::check_satisfaction(inst.sys, inst.contract, inst.init, 1e-7);
        CHECK_FALSE(v.holds);
        double expected = (p.dt - p.tau) * (p.xi_up + p.xi_down) / (2.0 * p.tau) + p.xi_down +
                          p.headway * eps;
        CHECK(v.theta_step[0] == doctest::Approx(expected).epsilon(1e-9));

        // The failing step carries a witness that re-verifies against the
        // raw LP constraints and reproduces the reported violation.
        agc::ThetaLp lp = agc::build_theta_step(inst.sys, inst.contract, 0);
        bool witness_seen = false;
        for (const agc::SatRowResult& r : v.rows) {
            if (r.kind != agc::ThetaKind::Step || !r.witness) continue;
            witness_seen = true;
            const Vector& w = *r.witness;
            double tol = 1e-7 * (1.0 + lp.problem.rhs.cwiseAbs().maxCoeff());
            CHECK((lp.problem.constraints * w - lp.problem.rhs).maxCoeff() <= tol);
            CHECK(lp.problem.objective.dot(w) + lp.offset ==
                  doctest::Approx(r.theta).epsilon(1e-8));
        }
        CHECK(witness_seen);
    }
}

TEST_CASE("rows without a current-slice part are vacuous at the base") {
    agc::CaseStudyParams p;
    CaseStudyInstance inst = case_instance(p);
    // Add a pure next-slice row: v_f+ - v_m+ <= 100 (harmlessly loose).
    inst.contract.guar_next.conservativeResize(2, 4);
    inst.contract.guar_next.row(1) = Eigen::RowVector4d{0, -1, 0, 1};
    inst.contract.guar_now.conservativeResize(2, 4);
    inst.contract.guar_now.row(1).setZero();
    inst.contract.guar_rhs.conservativeResize(2);
    inst.contract.guar_rhs[1] = 100.0;
    CHECK_THROWS_AS(agc::build_theta_base(inst.sys, inst.contract, inst.init, 1),
                    agc::DimensionError);
    SatisfactionVerdict v = agc::check_satisfaction(inst.sys, inst.contract, inst.init, 1e-7);
    bool saw_vacuous_base = false;
    for (const agc::SatRowResult& r : v.rows) {
        if (r.kind == agc::ThetaKind::Base && r.row == 1) {
            saw_vacuous_base = r.vacuous;
        }
    }
    CHECK(saw_vacuous_base);
    // The next-slice row gets a coupling LP instead.
    CHECK(v.theta_coupling.size() == 1);
}

TEST_CASE("coupling LP discharges genuine cross-slice rows") {
    // Contracting scalar loop y+ = 0.5 y + z with |z| <= 1. The box |y| <= 5
    // is inductive, and the increment row y+ - y <= bound is a true
    // cross-slice guarantee. Its hypothesis -y <= bound joins the premises,
    // so the coupling maximum is 0.5 min(5, bound) + 1 - bound: -1 at
    // bound 4, +0.25 at bound 1.5 (where the step row fails equally).
    AffineSystem sys;
    sys.state_dim = 1;
    sys.input_dim = 1;
    sys.state_matrix = Matrix{{0.5}};
    sys.input_matrix = Matrix{{1.0}};
    sys.offset = Vector{{0.0}};
    LinearContract c;
    c.label = "cross-slice";
    c.input_dim = 1;
    c.output_dim = 1;
    c.assume_next = Matrix{{0.0}, {0.0}, {1.0}, {-1.0}};
    c.assume_now = Matrix{{1.0}, {-1.0}, {0.0}, {0.0}};
    c.assume_rhs = Vector{{1.0, 1.0, 1.0, 1.0}};
    c.guar_next = Matrix{{0.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}};
    c.guar_now = Matrix{{0.0, 1.0}, {0.0, -1.0}, {0.0, -1.0}};
    c.guar_rhs = Vector{{5.0, 5.0, 4.0}};
    InitSet init;
    init.constraints = Matrix{{0.0, 1.0}, {0.0, -1.0}};
    init.rhs = Vector{{0.5, 0.5}};

    SatisfactionVerdict ok = agc::check_satisfaction(sys, c, init, 1e-7);
    CHECK(ok.holds);
    REQUIRE(ok.theta_coupling.size() == 1);
    CHECK(ok.theta_coupling[0] == doctest::Approx(-1.0).epsilon(1e-8));

    c.guar_rhs[2] = 1.5;
    SatisfactionVerdict bad = agc::check_satisfaction(sys, c, init, 1e-7);
    CHECK_FALSE(bad.holds);
    CHECK(bad.theta_coupling[0] == doctest::Approx(0.25).epsilon(1e-8));
    CHECK(bad.theta_step[2] == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("dynamics equalities introduce no slack at the optimum") {
    agc::CaseStudyParams p;
    CaseStudyInstance inst = case_instance(p);
    agc::ThetaLp step = agc::build_theta_step(inst.sys, inst.contract, 0);
    agc::LpOutcome out = agc::solve(step.problem);
    REQUIRE(out.optimal());
    const int nz = inst.sys.input_dim, ny = inst.sys.state_dim;
    Vector z = out.point.segment(0, nz);
    Vector y = out.point.segment(2 * nz, ny);
    Vector y_next = out.point.segment(2 * nz + ny, ny);
    Vector residual =
        y_next - inst.sys.state_matrix * y - inst.sys.input_matrix * z - inst.sys.offset;
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("system and init set files round-trip") {
    agc::CaseStudyParams p;
    CaseStudyInstance inst = case_instance(p);
    const std::string sys_path = "/tmp/agc_system_roundtrip.json";
    const std::string init_path = "/tmp/agc_init_roundtrip.json";
    agc::save_system(inst.sys, sys_path);
    agc::save_initset(inst.init, init_path);
    AffineSystem sys = agc::load_system(sys_path);
    InitSet init = agc::load_initset(init_path, 4);
    CHECK(sys.state_matrix == inst.sys.state_matrix);
    CHECK(sys.input_matrix == inst.sys.input_matrix);
    CHECK(sys.offset == inst.sys.offset);
    CHECK(init.constraints == inst.init.constraints);
    CHECK(init.rhs == inst.init.rhs);
    std::remove(sys_path.c_str());
    std::remove(init_path.c_str());
}

TEST_CASE("mismatched system/contract dimensions are rejected") {
    agc::CaseStudyParams p;
    CaseStudyInstance inst = case_instance(p);
    inst.sys.input_dim = 1;
    inst.sys.input_matrix = Matrix::Zero(2, 1);
    CHECK_THROWS_AS(agc::check_satisfaction(inst.sys, inst.contract, inst.init, 1e-7),
                    agc::DimensionError);
}

TEST_CASE("inductive soundness: holding verdicts survive random admissible runs") {
    // Sample measured-signal trajectories directly from the assumption
    // polytope (next sample drawn from the conditional polytope's vertices)
    // and check that no guarantee row is ever violated.
    agc::CaseStudyParams p;
    CaseStudyInstance inst = case_instance(p);
    SatisfactionVerdict v = agc::check_satisfaction(inst.sys, inst.contract, inst.init, 1e-7);
    REQUIRE(v.holds);

    Rng rng(4242);
    Vector z{{0.0, 5.0}};
    // Start on the initial-set boundary plus a small margin.
    Vector y{{-(p.delta_p + 0.3), 0.0}};
    REQUIRE((inst.init.constraints * (Vector(4) << z, y).finished() - inst.init.rhs).maxCoeff() <=
            0.0);
    double min_margin = kInf;
    for (int k = 0; k < 1000; ++k) {
        // Conditional polytope of admissible next measurements.
        agc::VRep rep = agc::enumerate_v_rep(inst.contract.assume_next,
                                             inst.contract.assume_rhs -
                                                 inst.contract.assume_now * z);
        REQUIRE_FALSE(rep.empty());
        REQUIRE(rep.rays.empty());
        Vector z_next = Vector::Zero(2);
        double total = 0.0;
        for (const Vector& vert : rep.vertices) {
            double w = testsupport::uniform(rng, 0.0, 1.0);
            z_next += w * vert;
            total += w;
        }
        z_next /= total;
        // Keep the measured velocity physical; the admissible box always
        // contains this clamp since its upper edge stays non-negative.
        z_next[1] = std::max(0.0, z_next[1]);
        Vector y_next = inst.sys.state_matrix * y + inst.sys.input_matrix * z + inst.sys.offset;
        Vector zy(4), zy_next(4);
        zy << z, y;
        zy_next << z_next, y_next;
        Vector slack = inst.contract.guar_rhs - inst.contract.guar_next * zy_next -
                       inst.contract.guar_now * zy;
        min_margin = std::min(min_margin, slack.minCoeff());
        z = z_next;
        y = y_next;
    }
    CHECK(min_margin >= -1e-6);
}
