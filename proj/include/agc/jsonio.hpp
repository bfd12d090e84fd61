#pragma once

// Shared JSON helpers: matrix/vector (de)serialization with field-aware error
// messages, extended reals encoded as "+inf"/"-inf" strings, and file I/O.

#include <string>

#include "agc/lp.hpp"

// vendored single-header nlohmann/json
#include "json.hpp"

namespace agc {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);
Json vector_to_json(const Vector& v);

/// Parses a row-major array-of-arrays. `cols` governs the column count when
/// the array is empty (zero-row matrices are serialized as []).
Matrix matrix_from_json(const Json& j, int cols, const std::string& field);
Vector vector_from_json(const Json& j, const std::string& field);

/// Extended reals: finite values as numbers, infinities as "+inf"/"-inf".
Json extreal_to_json(double v);
double extreal_from_json(const Json& j, const std::string& field);

const Json& require_field(const Json& j, const std::string& field, const std::string& context);

Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& j);

}  // namespace agc
