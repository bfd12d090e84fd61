#include "agc/contract.hpp"

#include <sstream>

namespace agc {

namespace {

void check_dims(const Matrix& m, int rows, int cols, const char* name,
                const std::string& label) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream msg;
        msg << "contract '" << label << "': " << name << " is " << m.rows() << "x" << m.cols()
            << ", expected " << rows << "x" << cols;
        throw DimensionError(msg.str());
    }
    if (!m.allFinite()) {
        std::ostringstream msg;
        msg << "contract '" << label << "': " << name << " has a non-finite entry";
        throw DimensionError(msg.str());
    }
}

}  // namespace

void validate(const LinearContract& c) {
    if (c.input_dim < 0 || c.output_dim < 0) {
        throw DimensionError("contract '" + c.label + "': negative signal dimension");
    }
    const int s_a = static_cast<int>(c.assume_next.rows());
    const int s_g = static_cast<int>(c.guar_next.rows());
    check_dims(c.assume_next, s_a, c.input_dim, "assume_next (A1)", c.label);
    check_dims(c.assume_now, s_a, c.input_dim, "assume_now (A0)", c.label);
    if (c.assume_rhs.size() != s_a) {
        std::ostringstream msg;
        msg << "contract '" << c.label << "': assume_rhs (a0) has length " << c.assume_rhs.size()
            << ", expected " << s_a;
        throw DimensionError(msg.str());
    }
    if (!c.assume_rhs.allFinite()) {
        throw DimensionError("contract '" + c.label + "': assume_rhs (a0) has a non-finite entry");
    }
    const int width = c.input_dim + c.output_dim;
    check_dims(c.guar_next, s_g, width, "guar_next (G1)", c.label);
    check_dims(c.guar_now, s_g, width, "guar_now (G0)", c.label);
    if (c.guar_rhs.size() != s_g) {
        std::ostringstream msg;
        msg << "contract '" << c.label << "': guar_rhs (g0) has length " << c.guar_rhs.size()
            << ", expected " << s_g;
        throw DimensionError(msg.str());
    }
    if (!c.guar_rhs.allFinite()) {
        throw DimensionError("contract '" + c.label + "': guar_rhs (g0) has a non-finite entry");
    }
}

void validate(const CascadeTriple& t) {
    validate(t.c1);
    validate(t.c2);
    validate(t.target);
    if (t.c1.output_dim != t.c2.input_dim) {
        std::ostringstream msg;
        msg << "cascade: c1 output dimension " << t.c1.output_dim
            << " does not match c2 input dimension " << t.c2.input_dim;
        throw DimensionError(msg.str());
    }
    if (t.c1.input_dim != t.target.input_dim) {
        std::ostringstream msg;
        msg << "cascade: c1 input dimension " << t.c1.input_dim
            << " does not match target input dimension " << t.target.input_dim;
        throw DimensionError(msg.str());
    }
    if (t.c2.output_dim != t.target.output_dim) {
        std::ostringstream msg;
        msg << "cascade: c2 output dimension " << t.c2.output_dim
            << " does not match target output dimension " << t.target.output_dim;
        throw DimensionError(msg.str());
    }
}

GuaranteeBlocks split_guarantees(const LinearContract& c) {
    validate(c);
    GuaranteeBlocks b;
    const int s = c.guar_rows();
    b.next_input = c.guar_next.block(0, 0, s, c.input_dim);
    b.next_output = c.guar_next.block(0, c.input_dim, s, c.output_dim);
    b.now_input = c.guar_now.block(0, 0, s, c.input_dim);
    b.now_output = c.guar_now.block(0, c.input_dim, s, c.output_dim);
    return b;
}

bool output_now_is_zero(const LinearContract& c) {
    GuaranteeBlocks b = split_guarantees(c);
    return b.now_output.size() == 0 || (b.now_output.array() == 0.0).all();
}

LinearContract contract_from_json(const Json& j) {
    const std::string ctx = "contract";
    const Json& version = require_field(j, "schema_version", ctx);
    if (!version.is_string() || version.get<std::string>() != "1") {
        throw FormatError("contract: unsupported schema_version (expected \"1\")");
    }
    LinearContract c;
    c.label = j.value("label", "");
    c.input_dim = require_field(j, "n_d", ctx).get<int>();
    c.output_dim = require_field(j, "n_y", ctx).get<int>();
    const Json& assume = require_field(j, "assume", ctx);
    c.assume_next = matrix_from_json(require_field(assume, "A1", "assume"), c.input_dim, "assume.A1");
    c.assume_now = matrix_from_json(require_field(assume, "A0", "assume"), c.input_dim, "assume.A0");
    c.assume_rhs = vector_from_json(require_field(assume, "a0", "assume"), "assume.a0");
    const Json& guar = require_field(j, "guarantee", ctx);
    const int width = c.input_dim + c.output_dim;
    c.guar_next = matrix_from_json(require_field(guar, "G1", "guarantee"), width, "guarantee.G1");
    c.guar_now = matrix_from_json(require_field(guar, "G0", "guarantee"), width, "guarantee.G0");
    c.guar_rhs = vector_from_json(require_field(guar, "g0", "guarantee"), "guarantee.g0");
    validate(c);
    return c;
}

Json contract_to_json(const LinearContract& c) {
    validate(c);
    Json j;
    j["schema_version"] = "1";
    j["label"] = c.label;
    j["n_d"] = c.input_dim;
    j["n_y"] = c.output_dim;
    j["assume"] = {{"A1", matrix_to_json(c.assume_next)},
                   {"A0", matrix_to_json(c.assume_now)},
                   {"a0", vector_to_json(c.assume_rhs)}};
    j["guarantee"] = {{"G1", matrix_to_json(c.guar_next)},
                      {"G0", matrix_to_json(c.guar_now)},
                      {"g0", vector_to_json(c.guar_rhs)}};
    return j;
}

LinearContract load_contract(const std::string& path) {
    return contract_from_json(load_json_file(path));
}

void save_contract(const LinearContract& c, const std::string& path) {
    save_json_file(path, contract_to_json(c));
}

}  // namespace agc
