// Copyright 2026 The texmap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Colored point export/import: binary little-endian PLY (float x y z, uchar
// red green blue) and a plain "x y z r g b" text format. Coordinates are
// stored as float32 in both, and the text writer prints enough digits for an
// exact float32 round trip.

#include "texmap/geometry.hpp"
#include "texmap/texture_map.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace texmap
{

enum class CloudFormat
{
  Ply,
  XyzRgb
};

inline CloudFormat format_from_path(const std::filesystem::path &path)
{
  const auto ext = path.extension().string();
  if (ext == ".ply" || ext == ".PLY") return CloudFormat::Ply;
  if (ext == ".xyzrgb" || ext == ".txt" || ext == ".xyz") return CloudFormat::XyzRgb;
  throw std::invalid_argument("cannot infer point format from '" + path.string() + "' (use .ply or .xyzrgb)");
}

namespace detail
{

inline void require_colored(const PointCloud &cloud, const std::filesystem::path &path)
{
  if (cloud.empty()) throw std::invalid_argument("export " + path.string() + ": empty cloud");
  if (!cloud.has_color()) throw std::invalid_argument("export " + path.string() + ": cloud has no colors");
}

template <typename T>
void put_le(std::string &buf, T v)
{
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

struct PlyProperty
{
  std::string name;
  std::string type;
  std::size_t size;
};

inline std::size_t ply_type_size(const std::string &t, const std::string &where)
{
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  throw std::runtime_error(where + ": unsupported PLY property type '" + t + "'");
}

inline double ply_read_binary(const char *p, const std::string &t)
{
  const auto get = [p]<typename T>(T) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return double(v);
  };
  if (t == "char" || t == "int8") return get(std::int8_t{});
  if (t == "uchar" || t == "uint8") return get(std::uint8_t{});
  if (t == "short" || t == "int16") return get(std::int16_t{});
  if (t == "ushort" || t == "uint16") return get(std::uint16_t{});
  if (t == "int" || t == "int32") return get(std::int32_t{});
  if (t == "uint" || t == "uint32") return get(std::uint32_t{});
  if (t == "float" || t == "float32") return get(float{});
  return get(double{});
}

inline std::uint8_t to_channel(double v, const std::string &where)
{
  if (!(v >= 0.0 && v <= 255.0)) throw std::runtime_error(where + ": color channel out of range");
  return std::uint8_t(v);
}

}  // namespace detail

inline void write_ply(const std::filesystem::path &path, const PointCloud &cloud)
{
  detail::require_colored(cloud, path);
  std::string buf = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty float x\nproperty float y\nproperty float z\n"
                    "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  buf.reserve(buf.size() + cloud.size() * 15);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3 &p = cloud.point(i);
    detail::put_le(buf, float(p.x()));
    detail::put_le(buf, float(p.y()));
    detail::put_le(buf, float(p.z()));
    detail::put_le(buf, cloud.color(i).r);
    detail::put_le(buf, cloud.color(i).g);
    detail::put_le(buf, cloud.color(i).b);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(buf.data(), std::streamsize(buf.size()))) {
    throw std::runtime_error("write_ply: cannot write " + path.string());
  }
}

inline void write_xyzrgb(const std::filesystem::path &path, const PointCloud &cloud)
{
  detail::require_colored(cloud, path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_xyzrgb: cannot write " + path.string());
  out.precision(std::numeric_limits<float>::max_digits10);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3 &p = cloud.point(i);
    out << float(p.x()) << ' ' << float(p.y()) << ' ' << float(p.z()) << ' ' << int(cloud.color(i).r) << ' '
        << int(cloud.color(i).g) << ' ' << int(cloud.color(i).b) << '\n';
  }
  if (!out) throw std::runtime_error("write_xyzrgb: write failed for " + path.string());
}

/// Reads the vertex element of an ASCII or binary little-endian PLY. Needs
/// x, y, z; colors default to black when red/green/blue are absent.
inline PointCloud read_ply(const std::filesystem::path &path, Frame frame = Frame::Local)
{
  const std::string where = "read_ply: " + path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(where + ": cannot open");

  std::string line, format;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw std::runtime_error(where + ": missing 'ply' magic");
  std::size_t vertices = 0;
  bool in_vertex = false, seen_vertex = false;
  std::vector<detail::PlyProperty> props;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      ls >> format;
    } else if (word == "element") {
      std::string name;
      std::size_t n = 0;
      ls >> name >> n;
      if (seen_vertex && name != "vertex") in_vertex = false;
      if (name == "vertex") {
        if (seen_vertex) throw std::runtime_error(where + ": duplicate vertex element");
        if (!props.empty()) throw std::runtime_error(where + ": vertex must be the first element");
        vertices = n;
        in_vertex = seen_vertex = true;
      } else if (!seen_vertex) {
        throw std::runtime_error(where + ": vertex must be the first element");
      }
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      ls >> type;
      if (type == "list") throw std::runtime_error(where + ": list properties on vertices are not supported");
      ls >> name;
      props.push_back({name, type, detail::ply_type_size(type, where)});
    } else if (word == "end_header") {
      break;
    }
  }
  if (!seen_vertex) throw std::runtime_error(where + ": no vertex element");
  if (format != "ascii" && format != "binary_little_endian") {
    throw std::runtime_error(where + ": unsupported format '" + format + "'");
  }
  int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
  for (int k = 0; k < int(props.size()); ++k) {
    const auto &n = props[std::size_t(k)].name;
    if (n == "x") ix = k;
    if (n == "y") iy = k;
    if (n == "z") iz = k;
    if (n == "red" || n == "r") ir = k;
    if (n == "green" || n == "g") ig = k;
    if (n == "blue" || n == "b") ib = k;
  }
  if (ix < 0 || iy < 0 || iz < 0) throw std::runtime_error(where + ": vertex lacks x/y/z");
  const bool colored = ir >= 0 && ig >= 0 && ib >= 0;

  PointCloud cloud(frame, false, true);
  cloud.reserve(vertices);
  std::vector<double> v(props.size());
  std::size_t stride = 0;
  for (const auto &p : props) stride += p.size;
  std::vector<char> rec(stride);
  for (std::size_t i = 0; i < vertices; ++i) {
    if (format == "ascii") {
      for (auto &x : v) {
        if (!(in >> x)) throw std::runtime_error(where + ": truncated at vertex " + std::to_string(i));
      }
    } else {
      if (!in.read(rec.data(), std::streamsize(stride))) {
        throw std::runtime_error(where + ": truncated at vertex " + std::to_string(i));
      }
      std::size_t off = 0;
      for (std::size_t k = 0; k < props.size(); ++k) {
        v[k] = detail::ply_read_binary(rec.data() + off, props[k].type);
        off += props[k].size;
      }
    }
    const ColorRGB c = colored ? ColorRGB{detail::to_channel(v[std::size_t(ir)], where),
                                          detail::to_channel(v[std::size_t(ig)], where),
                                          detail::to_channel(v[std::size_t(ib)], where)}
                               : ColorRGB{};
    cloud.push_back(Point3(v[std::size_t(ix)], v[std::size_t(iy)], v[std::size_t(iz)]), 0.0f, c);
  }
  return cloud;
}

inline PointCloud read_xyzrgb(const std::filesystem::path &path, Frame frame = Frame::Local)
{
  const std::string where = "read_xyzrgb: " + path.string();
  std::ifstream in(path);
  if (!in) throw std::runtime_error(where + ": cannot open");
  PointCloud cloud(frame, false, true);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    float x, y, z;
    int r, g, b;
    if (!(ls >> x >> y >> z >> r >> g >> b) || r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255) {
      throw std::runtime_error(where + ": malformed line " + std::to_string(lineno));
    }
    cloud.push_back(Point3(x, y, z), 0.0f, {std::uint8_t(r), std::uint8_t(g), std::uint8_t(b)});
  }
  return cloud;
}

inline void write_cloud(const std::filesystem::path &path, const PointCloud &cloud, CloudFormat format)
{
  format == CloudFormat::Ply ? write_ply(path, cloud) : write_xyzrgb(path, cloud);
}

inline PointCloud read_cloud(const std::filesystem::path &path, CloudFormat format, Frame frame = Frame::Local)
{
  return format == CloudFormat::Ply ? read_ply(path, frame) : read_xyzrgb(path, frame);
}

inline void export_map(const TexturedMap &map, const std::filesystem::path &path, CloudFormat format)
{
  if (map.empty()) throw std::invalid_argument("export_map: empty map");
  write_cloud(path, map.cloud(), format);
}

}  // namespace texmap
