// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <string_view>

namespace nleq::toml {

// Minimal TOML reader covering the configuration surface of this project:
// comments, [tables], [[arrays of tables]], bare/quoted keys, strings,
// numbers, booleans and (possibly multi-line) arrays. Returns the document
// as JSON. Unsupported TOML constructs fail with a line-numbered error.
nlohmann::json parse(std::string_view text, const std::string& origin = "<string>");
nlohmann::json parse_file(const std::filesystem::path& path);

}  // namespace nleq::toml
