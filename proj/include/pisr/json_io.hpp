#pragma once

#include <string>

#include <json.hpp>

namespace pisr {

// Serializes with floating-point numbers at 17 significant digits so reports
// round-trip bitwise. NaN/inf serialize as null. indent < 0 means compact.
std::string dump_json(const nlohmann::json& j, int indent = 2);

nlohmann::json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace pisr
