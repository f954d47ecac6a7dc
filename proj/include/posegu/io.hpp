#pragma once

#include <string>
#include <string_view>

namespace posegu {

// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

// Whole file contents; DataError if it cannot be opened.
std::string read_file(const std::string& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace posegu
