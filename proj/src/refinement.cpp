#include "agc/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "agc/polyhedron.hpp"

namespace agc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stacked LP variable window: slices d0..dh, then z0..zh, then y0..yh.
struct Window {
    int n_d = 0, n_z = 0, n_y = 0;
    int horizon = 1;
    bool with_z = false, with_y = false;

    int slices() const { return horizon + 1; }
    int total() const {
        return slices() * (n_d + (with_z ? n_z : 0) + (with_y ? n_y : 0));
    }
    int d_off(int k) const { return k * n_d; }
    int z_off(int k) const { return slices() * n_d + k * n_z; }
    int y_off(int k) const { return slices() * (n_d + n_z) + k * n_y; }

    std::vector<SliceSpan> layout() const {
        std::vector<SliceSpan> out;
        for (int k = 0; k <= horizon; ++k) out.push_back({"d" + std::to_string(k), d_off(k), n_d});
        if (with_z) {
            for (int k = 0; k <= horizon; ++k)
                out.push_back({"z" + std::to_string(k), z_off(k), n_z});
        }
        if (with_y) {
            for (int k = 0; k <= horizon; ++k)
                out.push_back({"y" + std::to_string(k), y_off(k), n_y});
        }
        return out;
    }
};

void check_horizon(int h, const char* which) {
    if (h != 1 && h != 2) {
        std::ostringstream msg;
        msg << "horizon for implication " << which << " must be 1 or 2, got " << h;
        throw DimensionError(msg.str());
    }
}

// Premise polyhedron of the window: assumption steps of the target contract,
// plus (with_z) upstream guarantee steps, plus (with_y) downstream guarantee
// steps, each instantiated at k = 0 .. horizon-1.
void build_premise(const CascadeTriple& t, const Window& w, Matrix& a, Vector& b) {
    const LinearContract& tc = t.target;
    const GuaranteeBlocks g1 = split_guarantees(t.c1);
    const GuaranteeBlocks g2 = split_guarantees(t.c2);
    const int s_c = tc.assume_rows();
    const int s_g = t.c1.guar_rows();
    const int s_h = t.c2.guar_rows();

    int per_step = s_c + (w.with_z ? s_g : 0) + (w.with_y ? s_h : 0);
    a = Matrix::Zero(w.horizon * per_step, w.total());
    b = Vector::Zero(w.horizon * per_step);

    int row = 0;
    for (int k = 0; k < w.horizon; ++k) {
        a.block(row, w.d_off(k + 1), s_c, w.n_d) = tc.assume_next;
        a.block(row, w.d_off(k), s_c, w.n_d) = tc.assume_now;
        b.segment(row, s_c) = tc.assume_rhs;
        row += s_c;
        if (w.with_z) {
            a.block(row, w.d_off(k + 1), s_g, w.n_d) = g1.next_input;
            a.block(row, w.z_off(k + 1), s_g, w.n_z) = g1.next_output;
            a.block(row, w.d_off(k), s_g, w.n_d) = g1.now_input;
            a.block(row, w.z_off(k), s_g, w.n_z) = g1.now_output;
            b.segment(row, s_g) = t.c1.guar_rhs;
            row += s_g;
        }
        if (w.with_y) {
            a.block(row, w.z_off(k + 1), s_h, w.n_z) = g2.next_input;
            a.block(row, w.y_off(k + 1), s_h, w.n_y) = g2.next_output;
            a.block(row, w.z_off(k), s_h, w.n_z) = g2.now_input;
            a.block(row, w.y_off(k), s_h, w.n_y) = g2.now_output;
            b.segment(row, s_h) = t.c2.guar_rhs;
            row += s_h;
        }
    }
}

void check_row(int row, int count, const char* family) {
    if (row < 0 || row >= count) {
        std::ostringstream msg;
        msg << "implication " << family << ": row " << row << " out of range [0, " << count << ")";
        throw DimensionError(msg.str());
    }
}

}  // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::InputAssumptions: return "D";
        case Family::MidAssumptions: return "otimes";
        case Family::Guarantees: return "Omega";
    }
    return "?";
}

HorizonConfig propose_horizons(const CascadeTriple& t) {
    HorizonConfig h;
    h.horizon_ii = output_now_is_zero(t.c1) ? 2 : 1;
    h.horizon_iii = (output_now_is_zero(t.c1) || output_now_is_zero(t.c2)) ? 2 : 1;
    return h;
}

ImplicationLp build_implication_d(const CascadeTriple& t, int row) {
    validate(t);
    check_row(row, t.c1.assume_rows(), "D");
    Window w;
    w.n_d = t.input_dim();
    w.horizon = 1;

    Matrix a;
    Vector b;
    build_premise(t, w, a, b);

    Vector obj = Vector::Zero(w.total());
    obj.segment(w.d_off(1), w.n_d) = t.c1.assume_next.row(row);
    obj.segment(w.d_off(0), w.n_d) = t.c1.assume_now.row(row);

    ImplicationLp lp;
    lp.family = Family::InputAssumptions;
    lp.row = row;
    lp.problem = LpProblem(std::move(obj), std::move(a), std::move(b));
    lp.offset = -t.c1.assume_rhs[row];
    lp.layout = w.layout();
    return lp;
}

ImplicationLp build_implication_otimes(const CascadeTriple& t, int row, const HorizonConfig& h) {
    validate(t);
    check_row(row, t.c2.assume_rows(), "otimes");
    check_horizon(h.horizon_ii, "otimes");
    Window w;
    w.n_d = t.input_dim();
    w.n_z = t.mid_dim();
    w.with_z = true;
    w.horizon = h.horizon_ii;

    Matrix a;
    Vector b;
    build_premise(t, w, a, b);

    Vector obj = Vector::Zero(w.total());
    obj.segment(w.z_off(w.horizon), w.n_z) = t.c2.assume_next.row(row);
    obj.segment(w.z_off(w.horizon - 1), w.n_z) = t.c2.assume_now.row(row);

    ImplicationLp lp;
    lp.family = Family::MidAssumptions;
    lp.row = row;
    lp.problem = LpProblem(std::move(obj), std::move(a), std::move(b));
    lp.offset = -t.c2.assume_rhs[row];
    lp.layout = w.layout();
    return lp;
}

ImplicationLp build_implication_omega(const CascadeTriple& t, int row, const HorizonConfig& h) {
    validate(t);
    check_row(row, t.target.guar_rows(), "Omega");
    check_horizon(h.horizon_iii, "Omega");
    Window w;
    w.n_d = t.input_dim();
    w.n_z = t.mid_dim();
    w.n_y = t.output_dim();
    w.with_z = true;
    w.with_y = true;
    w.horizon = h.horizon_iii;

    Matrix a;
    Vector b;
    build_premise(t, w, a, b);

    const GuaranteeBlocks jb = split_guarantees(t.target);
    Vector obj = Vector::Zero(w.total());
    obj.segment(w.d_off(w.horizon), w.n_d) = jb.next_input.row(row);
    obj.segment(w.y_off(w.horizon), w.n_y) = jb.next_output.row(row);
    obj.segment(w.d_off(w.horizon - 1), w.n_d) = jb.now_input.row(row);
    obj.segment(w.y_off(w.horizon - 1), w.n_y) = jb.now_output.row(row);

    ImplicationLp lp;
    lp.family = Family::Guarantees;
    lp.row = row;
    lp.problem = LpProblem(std::move(obj), std::move(a), std::move(b));
    lp.offset = -t.target.guar_rhs[row];
    lp.layout = w.layout();
    return lp;
}

ImplicationLpSet build_family(const CascadeTriple& t, Family f, const HorizonConfig& h) {
    ImplicationLpSet set;
    set.family = f;
    int rows = 0;
    switch (f) {
        case Family::InputAssumptions:
            rows = t.c1.assume_rows();
            set.horizon = 1;
            break;
        case Family::MidAssumptions:
            rows = t.c2.assume_rows();
            set.horizon = h.horizon_ii;
            break;
        case Family::Guarantees:
            rows = t.target.guar_rows();
            set.horizon = h.horizon_iii;
            break;
    }
    for (int r = 0; r < rows; ++r) {
        switch (f) {
            case Family::InputAssumptions: set.problems.push_back(build_implication_d(t, r)); break;
            case Family::MidAssumptions:
                set.problems.push_back(build_implication_otimes(t, r, h));
                break;
            case Family::Guarantees:
                set.problems.push_back(build_implication_omega(t, r, h));
                break;
        }
    }
    if (!set.problems.empty()) set.layout = set.problems.front().layout;
    return set;
}

RefinementVerdict check_refinement(const CascadeTriple& t, const HorizonConfig& h, double tol) {
    validate(t);
    check_horizon(h.horizon_ii, "otimes");
    check_horizon(h.horizon_iii, "Omega");

    RefinementVerdict verdict;
    verdict.tolerance = tol;
    verdict.horizons = h;
    verdict.holds = true;

    for (Family f : {Family::InputAssumptions, Family::MidAssumptions, Family::Guarantees}) {
        ImplicationLpSet set = build_family(t, f, h);
        std::vector<double>* thetas = nullptr;
        double* rho = nullptr;
        switch (f) {
            case Family::InputAssumptions:
                thetas = &verdict.theta_d;
                rho = &verdict.rho_d;
                break;
            case Family::MidAssumptions:
                thetas = &verdict.theta_otimes;
                rho = &verdict.rho_otimes;
                break;
            case Family::Guarantees:
                thetas = &verdict.theta_omega;
                rho = &verdict.rho_omega;
                break;
        }
        *rho = -kInf;
        for (const ImplicationLp& lp : set.problems) {
            LpOutcome out = solve(lp.problem);
            ++verdict.lp_count;
            RowResult rr;
            rr.family = f;
            rr.row = lp.row;
            rr.status = out.status;
            switch (out.status) {
                case LpStatus::Optimal:
                    rr.theta = out.value + lp.offset;
                    if (rr.theta > 0.0) rr.witness = out.point;
                    break;
                case LpStatus::Infeasible:
                    rr.theta = -kInf;  // empty premise: vacuously true
                    break;
                case LpStatus::Unbounded:
                    rr.theta = kInf;
                    rr.ray = out.ray;
                    break;
            }
            thetas->push_back(rr.theta);
            *rho = std::max(*rho, rr.theta);
            if (!(rr.theta <= tol)) verdict.holds = false;
            verdict.rows.push_back(std::move(rr));
        }
    }
    return verdict;
}

Json verdict_to_json(const RefinementVerdict& v) {
    Json rows = Json::array();
    for (const RowResult& r : v.rows) {
        Json row;
        row["family"] = family_name(r.family);
        row["row"] = r.row;
        switch (r.status) {
            case LpStatus::Optimal: row["status"] = "optimal"; break;
            case LpStatus::Infeasible: row["status"] = "infeasible"; break;
            case LpStatus::Unbounded: row["status"] = "unbounded"; break;
        }
        row["theta"] = extreal_to_json(r.theta);
        if (r.witness) row["witness"] = vector_to_json(*r.witness);
        if (r.ray) row["ray"] = vector_to_json(*r.ray);
        rows.push_back(std::move(row));
    }
    Json j;
    j["holds"] = v.holds;
    j["rho_D"] = extreal_to_json(v.rho_d);
    j["rho_otimes"] = extreal_to_json(v.rho_otimes);
    j["rho_Omega"] = extreal_to_json(v.rho_omega);
    j["lp_count"] = v.lp_count;
    j["tolerance"] = v.tolerance;
    j["horizon_ii"] = v.horizons.horizon_ii;
    j["horizon_iii"] = v.horizons.horizon_iii;
    j["rows"] = std::move(rows);
    return j;
}

ExtendabilityVerdict check_extendability(const Matrix& v_next, const Matrix& v_now,
                                         const Vector& v_rhs) {
    const int q = static_cast<int>(v_next.cols());
    const int m = static_cast<int>(v_next.rows());
    if (v_now.cols() != q || v_now.rows() != m || v_rhs.size() != m) {
        throw DimensionError("check_extendability: inconsistent triple dimensions");
    }

    ExtendabilityVerdict verdict;
    verdict.dimension = 2 * q;
    if (2 * q > kMaxEnumerationDim || m > kMaxEnumerationRows) {
        verdict.method = ExtendMethod::UnsupportedDimension;
        std::ostringstream msg;
        msg << "window polyhedron has dimension " << 2 * q << " and " << m
            << " rows; enumeration supports dimension <= " << kMaxEnumerationDim << " and rows <= "
            << kMaxEnumerationRows;
        verdict.note = msg.str();
        return verdict;
    }
    verdict.method = ExtendMethod::ExactVRep;

    Matrix window(m, 2 * q);
    window << v_now, v_next;
    VRep rep = enumerate_v_rep(window, v_rhs);
    if (rep.empty()) {
        verdict.extendable = true;
        verdict.note = "window polyhedron is empty; extendability holds vacuously";
        return verdict;
    }

    auto extension_feasible = [&](const Vector& u1) {
        LpProblem lp(Vector::Zero(q), v_next, v_rhs - v_now * u1);
        return solve(lp).status == LpStatus::Optimal;
    };

    for (const Vector& vert : rep.vertices) {
        Vector u1 = vert.tail(q);
        if (!extension_feasible(u1)) {
            verdict.extendable = false;
            verdict.counterexample = {Vector(vert.head(q)), u1};
            verdict.note = "window vertex admits no one-step extension";
            return verdict;
        }
    }
    for (const Vector& ray : rep.rays) {
        Vector r1 = ray.tail(q);
        LpProblem recession(Vector::Zero(q), v_next, -(v_now * r1));
        if (solve(recession).status == LpStatus::Optimal) continue;
        verdict.extendable = false;
        verdict.note = "window ray leaves the recession cone of the extendable set";
        // Walk out along the ray from a vertex to a concrete non-extendable pair.
        const Vector& base = rep.vertices.front();
        for (double step = 1.0; step < 1e15; step *= 2.0) {
            Vector point = base + step * ray;
            if (!extension_feasible(point.tail(q))) {
                verdict.counterexample = {Vector(point.head(q)), Vector(point.tail(q))};
                break;
            }
        }
        return verdict;
    }
    verdict.extendable = true;
    return verdict;
}

std::vector<StackedTriple> hypothesis_triples(const CascadeTriple& t) {
    validate(t);
    const LinearContract& tc = t.target;
    const GuaranteeBlocks g1 = split_guarantees(t.c1);
    const GuaranteeBlocks g2 = split_guarantees(t.c2);
    const int n_d = t.input_dim();
    const int n_z = t.mid_dim();
    const int n_y = t.output_dim();
    const int s_c = tc.assume_rows();
    const int s_g = t.c1.guar_rows();
    const int s_h = t.c2.guar_rows();

    std::vector<StackedTriple> out;

    out.push_back({"input-assumptions", tc.assume_next, tc.assume_now, tc.assume_rhs});

    StackedTriple two;
    two.name = "input-assumptions+mid-guarantees";
    two.v_next = Matrix::Zero(s_c + s_g, n_d + n_z);
    two.v_now = Matrix::Zero(s_c + s_g, n_d + n_z);
    two.v_rhs = Vector::Zero(s_c + s_g);
    two.v_next.block(0, 0, s_c, n_d) = tc.assume_next;
    two.v_next.block(s_c, 0, s_g, n_d) = g1.next_input;
    two.v_next.block(s_c, n_d, s_g, n_z) = g1.next_output;
    two.v_now.block(0, 0, s_c, n_d) = tc.assume_now;
    two.v_now.block(s_c, 0, s_g, n_d) = g1.now_input;
    two.v_now.block(s_c, n_d, s_g, n_z) = g1.now_output;
    two.v_rhs.segment(0, s_c) = tc.assume_rhs;
    two.v_rhs.segment(s_c, s_g) = t.c1.guar_rhs;
    out.push_back(std::move(two));

    StackedTriple three;
    three.name = "full-premise-stack";
    const int rows = s_c + s_g + s_h;
    three.v_next = Matrix::Zero(rows, n_d + n_z + n_y);
    three.v_now = Matrix::Zero(rows, n_d + n_z + n_y);
    three.v_rhs = Vector::Zero(rows);
    three.v_next.block(0, 0, s_c, n_d) = tc.assume_next;
    three.v_next.block(s_c, 0, s_g, n_d) = g1.next_input;
    three.v_next.block(s_c, n_d, s_g, n_z) = g1.next_output;
    three.v_next.block(s_c + s_g, n_d, s_h, n_z) = g2.next_input;
    three.v_next.block(s_c + s_g, n_d + n_z, s_h, n_y) = g2.next_output;
    three.v_now.block(0, 0, s_c, n_d) = tc.assume_now;
    three.v_now.block(s_c, 0, s_g, n_d) = g1.now_input;
    three.v_now.block(s_c, n_d, s_g, n_z) = g1.now_output;
    three.v_now.block(s_c + s_g, n_d, s_h, n_z) = g2.now_input;
    three.v_now.block(s_c + s_g, n_d + n_z, s_h, n_y) = g2.now_output;
    three.v_rhs.segment(0, s_c) = tc.assume_rhs;
    three.v_rhs.segment(s_c, s_g) = t.c1.guar_rhs;
    three.v_rhs.segment(s_c + s_g, s_h) = t.c2.guar_rhs;
    out.push_back(std::move(three));

    return out;
}

bool oracle_check_implication(const Matrix& premise, const Vector& premise_rhs,
                              const Matrix& conclusion, const Vector& conclusion_rhs,
                              double tol) {
    if (conclusion.rows() != conclusion_rhs.size() || conclusion.cols() != premise.cols()) {
        throw DimensionError("oracle_check_implication: inconsistent conclusion dimensions");
    }
    VRep rep = enumerate_v_rep(premise, premise_rhs);
    if (rep.empty()) return true;  // empty premise: implication is vacuous
    for (Eigen::Index i = 0; i < conclusion.rows(); ++i) {
        SupportValue s = vrep_max(rep, conclusion.row(i).transpose());
        if (s.kind == SupportKind::Unbounded) return false;
        if (s.value > conclusion_rhs[i] + tol * (1.0 + std::abs(conclusion_rhs[i]))) return false;
    }
    return true;
}

}  // namespace agc
