#ifndef GKB_HARNESS_IO_HPP
#define GKB_HARNESS_IO_HPP

#include <filesystem>
#include <string>

namespace gkb::harness {

/// Writes to a temporary sibling and renames it over `path`; creates parent directories.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal form ('.' separator, locale independent).
std::string format_number(double value);

std::string read_file(const std::filesystem::path& path);

} // namespace gkb::harness

#endif
