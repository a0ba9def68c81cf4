#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lidarfuse/core.hpp"

namespace lidarfuse {

/// PCD v0.7 with fields x y z as float32, binary encoding. The file is
/// written to a sibling temporary and renamed into place. Throws IoError on
/// failure and for non-finite coordinates.
void write_pcd(const PointCloud& cloud, const std::filesystem::path& path);
std::string encode_pcd(const PointCloud& cloud);

/// Reads ascii or binary PCD. x, y and z must be float fields (4 or 8 bytes);
/// any other fields are skipped. Throws ParseError on malformed input.
PointCloud read_pcd(const std::filesystem::path& path);
PointCloud parse_pcd(std::string_view bytes);

namespace io {

std::string read_file(const std::filesystem::path& path);
/// Writes `bytes` to a temporary next to `path`, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace io
}  // namespace lidarfuse
