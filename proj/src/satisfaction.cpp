#include "agc/satisfaction.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace agc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pairing(const AffineSystem& sys, const LinearContract& c) {
    validate(sys);
    validate(c);
    if (c.input_dim != sys.input_dim || c.output_dim != sys.state_dim) {
        std::ostringstream msg;
        msg << "system (input " << sys.input_dim << ", state " << sys.state_dim
            << ") does not match contract signals (input " << c.input_dim << ", output "
            << c.output_dim << ")";
        throw DimensionError(msg.str());
    }
}

void check_guarantee_row(const LinearContract& c, int row) {
    if (row < 0 || row >= c.guar_rows()) {
        std::ostringstream msg;
        msg << "guarantee row " << row << " out of range [0, " << c.guar_rows() << ")";
        throw DimensionError(msg.str());
    }
}

// Step-window variables (z, z+, y, y+).
struct StepWindow {
    int n_z = 0, n_y = 0;
    int z_now() const { return 0; }
    int z_next() const { return n_z; }
    int y_now() const { return 2 * n_z; }
    int y_next() const { return 2 * n_z + n_y; }
    int total() const { return 2 * (n_z + n_y); }

    std::vector<SliceSpan> layout() const {
        return {{"z", z_now(), n_z},
                {"z+", z_next(), n_z},
                {"y", y_now(), n_y},
                {"y+", y_next(), n_y}};
    }
};

// Guarantee row's current-slice coefficients placed at the chosen slice of the
// step window.
Eigen::RowVectorXd now_part_row(const LinearContract& c, int row, const StepWindow& w,
                                bool next_slice) {
    const int nz = c.input_dim;
    const int ny = c.output_dim;
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(w.total());
    out.segment(next_slice ? w.z_next() : w.z_now(), nz) = c.guar_now.row(row).head(nz);
    out.segment(next_slice ? w.y_next() : w.y_now(), ny) = c.guar_now.row(row).tail(ny);
    return out;
}

// Shared step premises: induction hypothesis J on the current slice (plus the
// next slice when requested), assumption rows on (z, z+), and the dynamics
// equality as paired inequalities.
void build_step_premise(const AffineSystem& sys, const LinearContract& c, const StepWindow& w,
                        bool hypothesis_on_next, Matrix& a, Vector& b) {
    std::vector<int> now_rows;
    for (int r = 0; r < c.guar_rows(); ++r) {
        if (row_has_now_part(c, r)) now_rows.push_back(r);
    }
    const int s_hyp = static_cast<int>(now_rows.size()) * (hypothesis_on_next ? 2 : 1);
    const int s_a = c.assume_rows();
    const int n_y = sys.state_dim;
    const int rows = s_hyp + s_a + 2 * n_y;

    a = Matrix::Zero(rows, w.total());
    b = Vector::Zero(rows);
    int at = 0;
    for (int r : now_rows) {
        a.row(at) = now_part_row(c, r, w, false);
        b[at] = c.guar_rhs[r];
        ++at;
    }
    if (hypothesis_on_next) {
        for (int r : now_rows) {
            a.row(at) = now_part_row(c, r, w, true);
            b[at] = c.guar_rhs[r];
            ++at;
        }
    }
    if (s_a > 0) {
        a.block(at, w.z_next(), s_a, w.n_z) = c.assume_next;
        a.block(at, w.z_now(), s_a, w.n_z) = c.assume_now;
        b.segment(at, s_a) = c.assume_rhs;
        at += s_a;
    }
    // y+ - F y - B z = f, written as two opposing inequalities.
    a.block(at, w.y_next(), n_y, n_y) = Matrix::Identity(n_y, n_y);
    a.block(at, w.y_now(), n_y, n_y) = -sys.state_matrix;
    a.block(at, w.z_now(), n_y, w.n_z) = -sys.input_matrix;
    b.segment(at, n_y) = sys.offset;
    a.block(at + n_y, 0, n_y, w.total()) = -a.block(at, 0, n_y, w.total());
    b.segment(at + n_y, n_y) = -sys.offset;
}

}  // namespace

void validate(const AffineSystem& sys) {
    if (sys.state_dim < 0 || sys.input_dim < 0) {
        throw DimensionError("system '" + sys.label + "': negative dimension");
    }
    auto check = [&](const Matrix& m, int rows, int cols, const char* name) {
        if (m.rows() != rows || m.cols() != cols) {
            std::ostringstream msg;
            msg << "system '" << sys.label << "': " << name << " is " << m.rows() << "x"
                << m.cols() << ", expected " << rows << "x" << cols;
            throw DimensionError(msg.str());
        }
        if (!m.allFinite()) {
            throw DimensionError("system '" + sys.label + "': non-finite entry in " +
                                 std::string(name));
        }
    };
    check(sys.state_matrix, sys.state_dim, sys.state_dim, "F");
    check(sys.input_matrix, sys.state_dim, sys.input_dim, "B");
    check(sys.offset, sys.state_dim, 1, "f");
}

const char* theta_kind_name(ThetaKind k) {
    switch (k) {
        case ThetaKind::Base: return "base";
        case ThetaKind::Step: return "step";
        case ThetaKind::Coupling: return "coupling";
    }
    return "?";
}

bool row_has_now_part(const LinearContract& c, int row) {
    check_guarantee_row(c, row);
    return c.guar_now.cols() > 0 && c.guar_now.row(row).cwiseAbs().maxCoeff() > 0.0;
}

bool row_has_next_part(const LinearContract& c, int row) {
    check_guarantee_row(c, row);
    return c.guar_next.cols() > 0 && c.guar_next.row(row).cwiseAbs().maxCoeff() > 0.0;
}

ThetaLp build_theta_base(const AffineSystem& sys, const LinearContract& c, const InitSet& init,
                         int row) {
    check_pairing(sys, c);
    check_guarantee_row(c, row);
    if (!row_has_now_part(c, row)) {
        std::ostringstream msg;
        msg << "guarantee row " << row << " has no current-slice part; vacuous at the base case";
        throw DimensionError(msg.str());
    }
    const int width = sys.input_dim + sys.state_dim;
    if (init.constraints.cols() != width || init.constraints.rows() != init.rhs.size()) {
        throw DimensionError("initial set dimensions do not match (z(0), y(0))");
    }
    ThetaLp lp;
    lp.kind = ThetaKind::Base;
    lp.row = row;
    lp.problem = LpProblem(c.guar_now.row(row).transpose(), init.constraints, init.rhs);
    lp.offset = -c.guar_rhs[row];
    lp.layout = {{"z0", 0, sys.input_dim}, {"y0", sys.input_dim, sys.state_dim}};
    return lp;
}

ThetaLp build_theta_step(const AffineSystem& sys, const LinearContract& c, int row) {
    check_pairing(sys, c);
    check_guarantee_row(c, row);
    if (!row_has_now_part(c, row)) {
        std::ostringstream msg;
        msg << "guarantee row " << row << " has no current-slice part; nothing to propagate";
        throw DimensionError(msg.str());
    }
    StepWindow w{sys.input_dim, sys.state_dim};
    Matrix a;
    Vector b;
    build_step_premise(sys, c, w, false, a, b);

    Vector obj = now_part_row(c, row, w, true).transpose();

    ThetaLp lp;
    lp.kind = ThetaKind::Step;
    lp.row = row;
    lp.problem = LpProblem(std::move(obj), std::move(a), std::move(b));
    lp.offset = -c.guar_rhs[row];
    lp.layout = w.layout();
    return lp;
}

ThetaLp build_theta_coupling(const AffineSystem& sys, const LinearContract& c, int row) {
    check_pairing(sys, c);
    check_guarantee_row(c, row);
    StepWindow w{sys.input_dim, sys.state_dim};
    Matrix a;
    Vector b;
    build_step_premise(sys, c, w, true, a, b);

    const int nz = c.input_dim;
    const int ny = c.output_dim;
    Vector obj = now_part_row(c, row, w, false).transpose();
    obj.segment(w.z_next(), nz) += c.guar_next.row(row).head(nz);
    obj.segment(w.y_next(), ny) += c.guar_next.row(row).tail(ny);

    ThetaLp lp;
    lp.kind = ThetaKind::Coupling;
    lp.row = row;
    lp.problem = LpProblem(std::move(obj), std::move(a), std::move(b));
    lp.offset = -c.guar_rhs[row];
    lp.layout = w.layout();
    return lp;
}

SatisfactionVerdict check_satisfaction(const AffineSystem& sys, const LinearContract& c,
                                       const InitSet& init, double tol) {
    check_pairing(sys, c);
    SatisfactionVerdict verdict;
    verdict.tolerance = tol;
    verdict.holds = true;

    auto run = [&](ThetaLp lp, std::vector<double>& thetas) {
        LpOutcome out = solve(lp.problem);
        ++verdict.lp_count;
        SatRowResult rr;
        rr.kind = lp.kind;
        rr.row = lp.row;
        rr.status = out.status;
        switch (out.status) {
            case LpStatus::Optimal:
                rr.theta = out.value + lp.offset;
                if (rr.theta > 0.0) rr.witness = out.point;
                break;
            case LpStatus::Infeasible:
                rr.theta = -kInf;
                break;
            case LpStatus::Unbounded:
                rr.theta = kInf;
                rr.ray = out.ray;
                break;
        }
        thetas.push_back(rr.theta);
        if (!(rr.theta <= tol)) verdict.holds = false;
        verdict.rows.push_back(std::move(rr));
    };

    for (int r = 0; r < c.guar_rows(); ++r) {
        if (row_has_now_part(c, r)) {
            run(build_theta_base(sys, c, init, r), verdict.theta_base);
        } else {
            SatRowResult rr;
            rr.kind = ThetaKind::Base;
            rr.row = r;
            rr.vacuous = true;
            rr.theta = -kInf;
            verdict.rows.push_back(rr);
        }
    }
    for (int r = 0; r < c.guar_rows(); ++r) {
        if (row_has_now_part(c, r)) run(build_theta_step(sys, c, r), verdict.theta_step);
    }
    for (int r = 0; r < c.guar_rows(); ++r) {
        if (row_has_next_part(c, r)) run(build_theta_coupling(sys, c, r), verdict.theta_coupling);
    }
    return verdict;
}

Json satisfaction_to_json(const SatisfactionVerdict& v) {
    Json rows = Json::array();
    for (const SatRowResult& r : v.rows) {
        Json row;
        row["family"] = theta_kind_name(r.kind);
        row["row"] = r.row;
        if (r.vacuous) {
            row["status"] = "vacuous";
        } else {
            switch (r.status) {
                case LpStatus::Optimal: row["status"] = "optimal"; break;
                case LpStatus::Infeasible: row["status"] = "infeasible"; break;
                case LpStatus::Unbounded: row["status"] = "unbounded"; break;
            }
        }
        row["theta"] = extreal_to_json(r.theta);
        if (r.witness) row["witness"] = vector_to_json(*r.witness);
        if (r.ray) row["ray"] = vector_to_json(*r.ray);
        rows.push_back(std::move(row));
    }
    Json j;
    j["holds"] = v.holds;
    j["lp_count"] = v.lp_count;
    j["tolerance"] = v.tolerance;
    j["rows"] = std::move(rows);
    return j;
}

AffineSystem system_from_json(const Json& j) {
    const Json& version = require_field(j, "schema_version", "system");
    if (!version.is_string() || version.get<std::string>() != "1") {
        throw FormatError("system: unsupported schema_version (expected \"1\")");
    }
    AffineSystem sys;
    sys.label = j.value("label", "");
    sys.state_dim = require_field(j, "state_dim", "system").get<int>();
    sys.input_dim = require_field(j, "input_dim", "system").get<int>();
    sys.state_matrix = matrix_from_json(require_field(j, "F", "system"), sys.state_dim, "F");
    sys.input_matrix = matrix_from_json(require_field(j, "B", "system"), sys.input_dim, "B");
    sys.offset = vector_from_json(require_field(j, "f", "system"), "f");
    validate(sys);
    return sys;
}

Json system_to_json(const AffineSystem& sys) {
    validate(sys);
    Json j;
    j["schema_version"] = "1";
    j["label"] = sys.label;
    j["state_dim"] = sys.state_dim;
    j["input_dim"] = sys.input_dim;
    j["F"] = matrix_to_json(sys.state_matrix);
    j["B"] = matrix_to_json(sys.input_matrix);
    j["f"] = vector_to_json(sys.offset);
    return j;
}

AffineSystem load_system(const std::string& path) { return system_from_json(load_json_file(path)); }

void save_system(const AffineSystem& sys, const std::string& path) {
    save_json_file(path, system_to_json(sys));
}

InitSet initset_from_json(const Json& j, int expected_cols) {
    const Json& version = require_field(j, "schema_version", "init");
    if (!version.is_string() || version.get<std::string>() != "1") {
        throw FormatError("init: unsupported schema_version (expected \"1\")");
    }
    const Json& p = require_field(j, "P", "init");
    int cols = expected_cols;
    if (cols < 0) {
        // Infer the width from the first row when the caller does not pin it.
        if (!p.is_array() || p.empty() || !p[0].is_array()) {
            throw FormatError("init: field 'P' must be a non-empty array of rows");
        }
        cols = static_cast<int>(p[0].size());
    }
    InitSet init;
    init.constraints = matrix_from_json(p, cols, "P");
    init.rhs = vector_from_json(require_field(j, "q", "init"), "q");
    if (init.rhs.size() != init.constraints.rows()) {
        throw FormatError("init: 'q' length does not match 'P' row count");
    }
    return init;
}

Json initset_to_json(const InitSet& init) {
    Json j;
    j["schema_version"] = "1";
    j["P"] = matrix_to_json(init.constraints);
    j["q"] = vector_to_json(init.rhs);
    return j;
}

InitSet load_initset(const std::string& path, int expected_cols) {
    return initset_from_json(load_json_file(path), expected_cols);
}

void save_initset(const InitSet& init, const std::string& path) {
    save_json_file(path, initset_to_json(init));
}

}  // namespace agc
