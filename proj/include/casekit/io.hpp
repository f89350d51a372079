#pragma once

#include <filesystem>
#include <string>

namespace casekit {

std::string read_file(const std::filesystem::path& path);

// Write via temp file + rename so readers never see partial artifacts.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace casekit
