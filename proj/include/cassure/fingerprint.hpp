#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace cassure {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// First 16 hex digits of the SHA-256; the content hash used throughout trace links.
std::string fingerprint(std::string_view data);

/// Fingerprint of a file's bytes. Throws std::runtime_error if unreadable.
std::string file_fingerprint(const std::filesystem::path& path);

/// Hash of model text, constant overrides and canonical property text.
std::string model_fingerprint(std::string_view model_text, const std::map<std::string, double>& constants,
                              std::string_view property_text);

}  // namespace cassure
