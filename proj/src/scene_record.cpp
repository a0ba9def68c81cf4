#include "lidarfuse/scene_record.hpp"

#include <bit>
#include <cstring>

#include <json.hpp>

#include "lidarfuse/errors.hpp"
#include "lidarfuse/pcd.hpp"

namespace lidarfuse {
namespace {

class Writer {
 public:
  explicit Writer(std::size_t reserve) { buf_.reserve(reserve); }

  template <class T>
  void uint(T v) {
    for (std::size_t k = 0; k < sizeof(T); ++k) buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xFFu));
  }
  void f32(double v) { uint(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void bytes(std::string_view s) { buf_.append(s); }

  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <class T>
  T uint() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t k = 0; k < sizeof(T); ++k)
      v |= static_cast<T>(static_cast<unsigned char>(data_[pos_ + k])) << (8 * k);
    pos_ += sizeof(T);
    return v;
  }
  double f32() { return static_cast<double>(std::bit_cast<float>(uint<std::uint32_t>())); }
  std::string_view bytes(std::size_t n) {
    need(n);
    const auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw FormatError("record truncated at byte " + std::to_string(pos_));
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string provenance_json(const ComposedScene& scene) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : scene.objects)
    objects.push_back({{"id", o.object_id}, {"target", {o.target.x(), o.target.y()}}});
  return nlohmann::json{{"objects", objects}}.dump();
}

}  // namespace

namespace record {

std::size_t encoded_size(std::size_t object_points, std::size_t dropped, std::size_t boxes,
                         std::size_t string_bytes) {
  return kHeaderSize + 12 * object_points + 4 * dropped + kBoxSize * boxes + string_bytes;
}

}  // namespace record

std::string encode_scene(const ComposedScene& scene) {
  scene.validate();
  const std::string provenance = provenance_json(scene);
  if (scene.background_id.size() > 0xFFFF || scene.sensor_preset.size() > 0xFFFF)
    throw FormatError("identifier too long for record header");

  Writer w(record::encoded_size(scene.object_points.size(), scene.background_dropped.size(), scene.boxes.size(),
                                scene.background_id.size() + scene.sensor_preset.size() + provenance.size()));
  w.bytes(std::string_view(record::kMagic, 4));
  w.uint<std::uint8_t>(record::kVersion);
  w.uint<std::uint8_t>(0);
  w.uint<std::uint16_t>(0);
  w.uint<std::uint64_t>(scene.seed);
  const DetectionRegion& r = scene.region;
  for (double v : {r.x_min, r.x_max, r.y_min, r.y_max, r.z_min, r.z_max}) w.f32(v);
  w.uint<std::uint32_t>(scene.background_point_count);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(scene.object_points.size()));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(scene.background_dropped.size()));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(scene.boxes.size()));
  w.uint<std::uint16_t>(static_cast<std::uint16_t>(scene.background_id.size()));
  w.uint<std::uint16_t>(static_cast<std::uint16_t>(scene.sensor_preset.size()));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(provenance.size()));
  w.bytes(scene.background_id);
  w.bytes(scene.sensor_preset);
  for (const auto& p : scene.object_points) {
    w.f32(p.x());
    w.f32(p.y());
    w.f32(p.z());
  }
  for (Index i : scene.background_dropped) w.uint<std::uint32_t>(i);
  for (const auto& b : scene.boxes) {
    for (int a = 0; a < 3; ++a) w.f32(b.center[a]);
    for (int a = 0; a < 3; ++a) w.f32(b.extent[a]);
    w.f32(b.yaw());
  }
  w.bytes(provenance);
  return w.take();
}

ComposedScene decode_scene(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(4) != std::string_view(record::kMagic, 4)) throw FormatError("bad magic, not a scene record");
  const auto version = r.uint<std::uint8_t>();
  if (version != record::kVersion) throw FormatError("unsupported record version " + std::to_string(version));
  r.uint<std::uint8_t>();
  r.uint<std::uint16_t>();

  ComposedScene s;
  s.seed = r.uint<std::uint64_t>();
  s.region.x_min = r.f32();
  s.region.x_max = r.f32();
  s.region.y_min = r.f32();
  s.region.y_max = r.f32();
  s.region.z_min = r.f32();
  s.region.z_max = r.f32();
  s.background_point_count = r.uint<std::uint32_t>();
  const auto n_points = r.uint<std::uint32_t>();
  const auto n_dropped = r.uint<std::uint32_t>();
  const auto n_boxes = r.uint<std::uint32_t>();
  const auto id_len = r.uint<std::uint16_t>();
  const auto preset_len = r.uint<std::uint16_t>();
  const auto prov_len = r.uint<std::uint32_t>();

  const std::size_t expected =
      record::encoded_size(n_points, n_dropped, n_boxes, std::size_t{id_len} + preset_len + prov_len);
  if (bytes.size() != expected)
    throw FormatError("record is " + std::to_string(bytes.size()) + " bytes, header declares " +
                      std::to_string(expected));

  s.background_id = std::string(r.bytes(id_len));
  s.sensor_preset = std::string(r.bytes(preset_len));
  s.object_points.reserve(n_points);
  for (std::uint32_t i = 0; i < n_points; ++i) {
    const double x = r.f32();
    const double y = r.f32();
    const double z = r.f32();
    s.object_points.push_back(Point3(x, y, z));
  }
  s.background_dropped.reserve(n_dropped);
  for (std::uint32_t i = 0; i < n_dropped; ++i) s.background_dropped.push_back(r.uint<std::uint32_t>());
  for (std::uint32_t i = 0; i < n_boxes; ++i) {
    Point3 c, e;
    for (int a = 0; a < 3; ++a) c[a] = r.f32();
    for (int a = 0; a < 3; ++a) e[a] = r.f32();
    const auto yaw = static_cast<float>(r.f32());
    s.boxes.push_back(BoundingBox::from_yaw(c, e, yaw));
  }

  try {
    const auto prov = nlohmann::json::parse(r.bytes(prov_len));
    for (const auto& o : prov.at("objects")) {
      const auto& t = o.at("target");
      s.objects.push_back(ObjectProvenance{o.at("id").get<std::string>(),
                                           PlacementTarget(t.at(0).get<double>(), t.at(1).get<double>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad provenance block: ") + e.what());
  } catch (const GeometryError& e) {
    throw FormatError(std::string("bad provenance target: ") + e.what());
  }

  s.validate();
  return s;
}

void write_scene(const ComposedScene& scene, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_scene(scene));
}

ComposedScene read_scene(const std::filesystem::path& path) { return decode_scene(io::read_file(path)); }

}  // namespace lidarfuse
