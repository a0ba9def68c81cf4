#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "lidarfuse/assembly.hpp"

namespace lidarfuse {

/// Compact scene record, little-endian throughout (see docs/scene_record_format.md).
///
///   offset  size        field
///   0       4           magic "P2PS"
///   4       1           version (1)
///   5       3           reserved, zero
///   8       8           u64 seed
///   16      24          f32 × 6 detection region (x_min x_max y_min y_max z_min z_max)
///   40      4           u32 background point count
///   44      4           u32 object point count (N)
///   48      4           u32 dropped index count (D)
///   52      4           u32 box count (K)
///   56      2           u16 background id length
///   58      2           u16 sensor preset length
///   60      4           u32 provenance length
///   64      …           background id, sensor preset (UTF-8)
///           12·N        object points, f32 x y z
///           4·D         dropped background indices, u32, strictly ascending
///           28·K        boxes, f32 center xyz, extent xyz, yaw
///           …           provenance, UTF-8 JSON
namespace record {

inline constexpr char kMagic[4] = {'P', '2', 'P', 'S'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 64;
inline constexpr std::size_t kBoxSize = 28;

/// Encoded size of a record with the given block sizes.
std::size_t encoded_size(std::size_t object_points, std::size_t dropped, std::size_t boxes,
                         std::size_t string_bytes);

}  // namespace record

/// Serializes a scene. Coordinates are stored as float32; scenes produced by
/// the composer are already float32-exact, so decode(encode(s)) == s.
std::string encode_scene(const ComposedScene& scene);
/// Throws FormatError for a bad magic, version, block length, or invariant.
ComposedScene decode_scene(std::string_view bytes);

void write_scene(const ComposedScene& scene, const std::filesystem::path& path);
ComposedScene read_scene(const std::filesystem::path& path);

}  // namespace lidarfuse
