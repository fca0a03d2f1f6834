#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace mimic {

using Json = nlohmann::json;

Json load_json(const std::filesystem::path& path);

/// Atomic write: temp file in the same directory, then rename.
void save_json(const std::filesystem::path& path, const Json& j);
void save_text(const std::filesystem::path& path, const std::string& text);

/// Stable hash of a canonically serialized config object.
std::string config_hash(const Json& j);

}  // namespace mimic
