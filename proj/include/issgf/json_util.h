#pragma once

/// @file
/// JSON encodings shared by the exporters. Matrices are objects
/// {"rows": r, "cols": c, "data": [row-major entries]}; nested row arrays are
/// also accepted on input.

#include <string>
#include <vector>

#include <json.hpp>

#include "issgf/tensor_core.h"

namespace issgf {

using Json = nlohmann::json;

Json MatrixToJson(const Matrix& m);
/// Throws InvalidArgument naming `field` on malformed input.
Matrix MatrixFromJson(const Json& j, const std::string& field = "matrix");

Json VectorToJson(const std::vector<double>& v);
std::vector<double> VectorFromJson(const Json& j, const std::string& field);

/// Writes `j` with two-space indentation and a trailing newline.
std::string DumpJson(const Json& j);

/// Formats a double with 17 significant digits.
std::string FormatDouble(double x);

}  // namespace issgf
