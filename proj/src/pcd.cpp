#include "lidarfuse/pcd.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

#include "lidarfuse/errors.hpp"

namespace lidarfuse {
namespace io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  static std::atomic<std::uint64_t> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "." +
         std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

}  // namespace io

namespace {

void put_f32(std::string& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xFFu));
}

float get_f32(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  return std::bit_cast<float>(bits);
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  return std::bit_cast<double>(bits);
}

struct Field {
  std::string name;
  int size = 4;
  char type = 'F';
  int count = 1;
  std::size_t offset = 0;  // byte offset within a binary record
  std::size_t column = 0;  // first token within an ascii line
};

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t j = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > j) out.emplace_back(line.substr(j, i - j));
  }
  return out;
}

long long parse_int(const std::string& s, std::uint64_t offset) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("expected integer, got '" + s + "'", offset);
  return v;
}

double parse_double(const std::string& s, std::uint64_t offset) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ParseError("expected number, got '" + s + "'", offset);
  return v;
}

}  // namespace

std::string encode_pcd(const PointCloud& cloud) {
  if (!all_finite(cloud)) throw IoError("refusing to write non-finite coordinates to PCD");
  std::string out =
      "# .PCD v0.7 - Point Cloud Data file format\n"
      "VERSION 0.7\n"
      "FIELDS x y z\n"
      "SIZE 4 4 4\n"
      "TYPE F F F\n"
      "COUNT 1 1 1\n";
  out += "WIDTH " + std::to_string(cloud.size()) + "\n";
  out += "HEIGHT 1\n";
  out += "VIEWPOINT 0 0 0 1 0 0 0\n";
  out += "POINTS " + std::to_string(cloud.size()) + "\n";
  out += "DATA binary\n";
  out.reserve(out.size() + 12 * cloud.size());
  for (const auto& p : cloud) {
    put_f32(out, static_cast<float>(p.x()));
    put_f32(out, static_cast<float>(p.y()));
    put_f32(out, static_cast<float>(p.z()));
  }
  return out;
}

void write_pcd(const PointCloud& cloud, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_pcd(cloud));
}

PointCloud parse_pcd(std::string_view bytes) {
  std::vector<Field> fields;
  std::vector<int> sizes;
  std::vector<char> types;
  std::vector<int> counts;
  long long width = -1, height = 1, points = -1;
  std::string data_kind;

  std::size_t pos = 0;
  while (data_kind.empty()) {
    if (pos >= bytes.size()) throw ParseError("header ended before DATA line", pos);
    const std::size_t line_start = pos;
    std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) eol = bytes.size();
    const std::string_view line = bytes.substr(pos, eol - pos);
    pos = eol + 1;
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    const std::string& key = tok[0];
    if (key == "VERSION" || key == "VIEWPOINT") continue;
    if (key == "FIELDS") {
      for (std::size_t i = 1; i < tok.size(); ++i) fields.push_back(Field{tok[i]});
    } else if (key == "SIZE") {
      for (std::size_t i = 1; i < tok.size(); ++i) sizes.push_back(static_cast<int>(parse_int(tok[i], line_start)));
    } else if (key == "TYPE") {
      for (std::size_t i = 1; i < tok.size(); ++i) {
        if (tok[i].size() != 1) throw ParseError("bad TYPE entry '" + tok[i] + "'", line_start);
        types.push_back(tok[i][0]);
      }
    } else if (key == "COUNT") {
      for (std::size_t i = 1; i < tok.size(); ++i) counts.push_back(static_cast<int>(parse_int(tok[i], line_start)));
    } else if (key == "WIDTH" && tok.size() == 2) {
      width = parse_int(tok[1], line_start);
    } else if (key == "HEIGHT" && tok.size() == 2) {
      height = parse_int(tok[1], line_start);
    } else if (key == "POINTS" && tok.size() == 2) {
      points = parse_int(tok[1], line_start);
    } else if (key == "DATA" && tok.size() == 2) {
      data_kind = tok[1];
      if (data_kind != "ascii" && data_kind != "binary")
        throw ParseError("unsupported DATA encoding '" + data_kind + "'", line_start);
    } else {
      throw ParseError("malformed header line '" + std::string(line) + "'", line_start);
    }
  }

  if (fields.empty()) throw ParseError("missing FIELDS", pos);
  if (sizes.size() != fields.size() || types.size() != fields.size())
    throw ParseError("SIZE/TYPE do not match FIELDS", pos);
  if (counts.empty()) counts.assign(fields.size(), 1);
  if (counts.size() != fields.size()) throw ParseError("COUNT does not match FIELDS", pos);
  if (points < 0) {
    if (width < 0) throw ParseError("missing POINTS", pos);
    points = width * height;
  }
  if (width >= 0 && width * height != points) throw ParseError("WIDTH*HEIGHT does not match POINTS", pos);

  std::size_t offset = 0, column = 0;
  int xyz[3] = {-1, -1, -1};
  for (std::size_t i = 0; i < fields.size(); ++i) {
    Field& f = fields[i];
    f.size = sizes[i];
    f.type = types[i];
    f.count = counts[i];
    f.offset = offset;
    f.column = column;
    if (f.size <= 0 || f.count <= 0) throw ParseError("non-positive SIZE or COUNT for field " + f.name, pos);
    offset += static_cast<std::size_t>(f.size) * static_cast<std::size_t>(f.count);
    column += static_cast<std::size_t>(f.count);
    const int axis = f.name == "x" ? 0 : f.name == "y" ? 1 : f.name == "z" ? 2 : -1;
    if (axis >= 0) {
      if (f.type != 'F' || (f.size != 4 && f.size != 8) || f.count != 1)
        throw ParseError("unsupported layout for field " + f.name, pos);
      xyz[axis] = static_cast<int>(i);
    }
  }
  for (int a = 0; a < 3; ++a)
    if (xyz[a] < 0) throw ParseError(std::string("missing field ") + "xyz"[a], pos);

  const auto n = static_cast<std::size_t>(points);
  std::vector<Point3> out;
  out.reserve(n);
  if (data_kind == "binary") {
    const std::size_t stride = offset;
    const auto* base = reinterpret_cast<const unsigned char*>(bytes.data());
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t rec = pos + k * stride;
      if (rec + stride > bytes.size()) throw ParseError("truncated body at point " + std::to_string(k), rec);
      Point3 p;
      for (int a = 0; a < 3; ++a) {
        const Field& f = fields[static_cast<std::size_t>(xyz[a])];
        p[a] = f.size == 4 ? static_cast<double>(get_f32(base + rec + f.offset)) : get_f64(base + rec + f.offset);
      }
      if (!p.allFinite()) throw ParseError("non-finite coordinate at point " + std::to_string(k), rec);
      out.push_back(p);
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<std::string> tok;
      std::size_t line_start = pos;
      while (tok.empty()) {
        if (pos >= bytes.size()) throw ParseError("truncated body at point " + std::to_string(k), pos);
        line_start = pos;
        std::size_t eol = bytes.find('\n', pos);
        if (eol == std::string_view::npos) eol = bytes.size();
        tok = split_ws(bytes.substr(pos, eol - pos));
        pos = eol + 1;
      }
      if (tok.size() != column)
        throw ParseError("point " + std::to_string(k) + " has " + std::to_string(tok.size()) + " values, expected " +
                             std::to_string(column),
                         line_start);
      Point3 p;
      for (int a = 0; a < 3; ++a) {
        const Field& f = fields[static_cast<std::size_t>(xyz[a])];
        const double v = parse_double(tok[f.column], line_start);
        p[a] = f.size == 4 ? static_cast<double>(static_cast<float>(v)) : v;
      }
      if (!p.allFinite()) throw ParseError("non-finite coordinate at point " + std::to_string(k), line_start);
      out.push_back(p);
    }
  }
  return PointCloud(std::move(out));
}

PointCloud read_pcd(const std::filesystem::path& path) { return parse_pcd(io::read_file(path)); }

}  // namespace lidarfuse
