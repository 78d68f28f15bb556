#pragma once

#include <string>

#include <json.hpp>

namespace unlinking {

/// Deterministic JSON text: object keys in insertion order, floating-point
/// numbers with 17 significant digits ("%.17g"), non-finite floats as null.
std::string dump_report(const nlohmann::ordered_json& j, int indent = 2);

}  // namespace unlinking
