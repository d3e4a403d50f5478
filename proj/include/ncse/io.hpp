#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ncse {

// Reads a whole file; throws IoFailure.
std::string read_file(const std::filesystem::path& path);

// Writes via a sibling temp file plus rename, so a crash or error never
// leaves a partial file at `path`. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Round-trip exact decimal formatting for CSV output.
std::string fmt_double(double value);

}  // namespace ncse
