#include "agc/jsonio.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace agc {

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Matrix matrix_from_json(const Json& j, int cols, const std::string& field) {
    if (!j.is_array()) throw FormatError("field '" + field + "' must be an array of rows");
    const int rows = static_cast<int>(j.size());
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const Json& row = j[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols) {
            std::ostringstream msg;
            msg << "field '" << field << "' row " << i << " must be an array of length " << cols;
            throw FormatError(msg.str());
        }
        for (int c = 0; c < cols; ++c) {
            if (!row[c].is_number()) {
                std::ostringstream msg;
                msg << "field '" << field << "' entry (" << i << "," << c << ") is not a number";
                throw FormatError(msg.str());
            }
            m(i, c) = row[c].get<double>();
        }
    }
    return m;
}

Vector vector_from_json(const Json& j, const std::string& field) {
    if (!j.is_array()) throw FormatError("field '" + field + "' must be an array");
    Vector v(static_cast<int>(j.size()));
    for (int i = 0; i < static_cast<int>(j.size()); ++i) {
        if (!j[i].is_number()) {
            std::ostringstream msg;
            msg << "field '" << field << "' entry " << i << " is not a number";
            throw FormatError(msg.str());
        }
        v[i] = j[i].get<double>();
    }
    return v;
}

Json extreal_to_json(double v) {
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    return v;
}

double extreal_from_json(const Json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "+inf" || s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw FormatError("field '" + field + "' is not a number or \"+inf\"/\"-inf\"");
}

const Json& require_field(const Json& j, const std::string& field, const std::string& context) {
    auto it = j.find(field);
    if (it == j.end()) {
        throw FormatError(context + ": missing field '" + field + "'");
    }
    return *it;
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

void save_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace agc
