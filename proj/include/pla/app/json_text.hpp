#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace pla::app {

/// 17 significant digits; "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double x);

/// Pretty JSON (2-space indent, keys in insertion order). Floats use
/// format_double; non-finite floats become null.
std::string to_text(const nlohmann::ordered_json& j);

/// One CSV line from already formatted cells.
std::string csv_line(const std::vector<std::string>& cells);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace pla::app
