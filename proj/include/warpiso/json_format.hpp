#pragma once

#include <string>

#include <json.hpp>

namespace warpiso {

/// Serialize with floating-point numbers rendered at 17 significant digits
/// (%.17g), so re-parsing reproduces every double bit for bit.
std::string dump_json(const nlohmann::json& j, int indent = 2);

}  // namespace warpiso
