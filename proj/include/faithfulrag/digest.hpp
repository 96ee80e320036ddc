#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace faithfulrag::digest {

/// SHA-256 of `data`, lowercase hex.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's contents, lowercase hex.
std::string sha256_file(const std::filesystem::path& path);

} // namespace faithfulrag::digest
