#include "lidarfuse/store.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lidarfuse/errors.hpp"
#include "lidarfuse/pcd.hpp"

namespace lidarfuse {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

template <class Fn>
void for_each_line(const std::filesystem::path& manifest, Fn&& fn) {
  std::istringstream in(io::read_file(manifest));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    fn(split_tabs(line), lineno);
  }
}

double to_double(const std::string& s, const std::filesystem::path& manifest, std::size_t lineno) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(manifest.string() + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
  return v;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string relative_to(const std::filesystem::path& target, const std::filesystem::path& manifest) {
  return std::filesystem::proximate(target, manifest.parent_path().empty() ? "." : manifest.parent_path())
      .generic_string();
}

}  // namespace

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest) {
  std::vector<ManifestEntry> out;
  const auto dir = manifest.parent_path();
  for_each_line(manifest, [&](const std::vector<std::string>& cols, std::size_t lineno) {
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty())
      throw Error(manifest.string() + ":" + std::to_string(lineno) + ": expected id<TAB>path");
    out.push_back(ManifestEntry{cols[0], dir / cols[1]});
  });
  return out;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& manifest) {
  std::string text;
  for (const auto& e : entries) text += e.id + "\t" + relative_to(e.path, manifest) + "\n";
  io::write_file_atomic(manifest, text);
}

std::vector<ObjectEntry> read_object_manifest(const std::filesystem::path& manifest) {
  std::vector<ObjectEntry> out;
  const auto dir = manifest.parent_path();
  for_each_line(manifest, [&](const std::vector<std::string>& cols, std::size_t lineno) {
    if (cols.size() != 9)
      throw Error(manifest.string() + ":" + std::to_string(lineno) + ": expected 9 tab-separated columns");
    double v[7];
    for (int k = 0; k < 7; ++k) v[k] = to_double(cols[static_cast<std::size_t>(k) + 2], manifest, lineno);
    BoundingBox box = BoundingBox::from_yaw(Point3(v[0], v[1], v[2]), Point3(v[3], v[4], v[5]), v[6]);
    try {
      box.validate();
    } catch (const GeometryError& e) {
      throw Error(manifest.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(ObjectEntry{cols[0], dir / cols[1], box});
  });
  return out;
}

void write_object_manifest(const std::vector<ObjectEntry>& entries, const std::filesystem::path& manifest) {
  std::string text;
  for (const auto& e : entries) {
    text += e.id + "\t" + relative_to(e.path, manifest);
    for (int a = 0; a < 3; ++a) text += "\t" + format_double(e.box.center[a]);
    for (int a = 0; a < 3; ++a) text += "\t" + format_double(e.box.extent[a]);
    text += "\t" + format_double(e.box.yaw()) + "\n";
  }
  io::write_file_atomic(manifest, text);
}

BackgroundStore::BackgroundStore(std::vector<ManifestEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_)
    if (!paths_.emplace(e.id, e.path).second) throw Error("duplicate background id '" + e.id + "'");
}

BackgroundStore BackgroundStore::from_manifest(const std::filesystem::path& manifest) {
  return BackgroundStore(read_manifest(manifest));
}

bool BackgroundStore::contains(const std::string& id) const {
  std::string_view base = id;
  if (base.ends_with(kMirrorSuffix)) base.remove_suffix(kMirrorSuffix.size());
  return paths_.contains(std::string(base));
}

std::shared_ptr<const PointCloud> BackgroundStore::get(const std::string& id) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(id); it != cache_.end()) return it->second;
  }
  std::shared_ptr<const PointCloud> cloud;
  if (id.ends_with(kMirrorSuffix)) {
    cloud = std::make_shared<const PointCloud>(mirror_x(*get(id.substr(0, id.size() - kMirrorSuffix.size()))));
  } else {
    const auto it = paths_.find(id);
    if (it == paths_.end()) throw Error("unknown background id '" + id + "'");
    cloud = std::make_shared<const PointCloud>(read_pcd(it->second));
  }
  std::lock_guard lock(mutex_);
  return cache_.emplace(id, std::move(cloud)).first->second;
}

std::pair<PointCloud, CenterGrid> reconstruct(const ComposedScene& scene, const BackgroundStore& store,
                                              std::uint32_t rows, std::uint32_t cols) {
  scene.validate();
  const auto background = store.get(scene.background_id);
  return {expand(scene, *background), rasterize_centers(scene.boxes, scene.region, rows, cols)};
}

}  // namespace lidarfuse
