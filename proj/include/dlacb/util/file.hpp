#pragma once

#include <filesystem>
#include <string>

#include "dlacb/util/bytes.hpp"

namespace dlacb {

// Throw FormatError when the file cannot be opened.
Bytes read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary and rename; creates parent directories.
void write_file(const std::filesystem::path& path, ByteView data);

}  // namespace dlacb
