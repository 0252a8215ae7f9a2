#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

#include "pcstage/data.hpp"

namespace pcstage {

// Row-major {"rows", "cols", "data"} encoding; doubles round-trip exactly.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

/// Throws Schema unless j["format"] == format and j["version"] == version.
void check_format(const nlohmann::json& j, std::string_view format, int version);

} // namespace pcstage
