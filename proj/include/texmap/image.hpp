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

#include "texmap/geometry.hpp"

#include <png.h>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace texmap
{

/// Interleaved 8-bit RGB raster, row-major.
class RgbImage
{
public:
  RgbImage() = default;
  RgbImage(int width, int height, ColorRGB fill = {})
  : width_(width), height_(height)
  {
    if (width < 0 || height < 0) throw std::invalid_argument("RgbImage: negative dimensions");
    data_.resize(std::size_t(width) * std::size_t(height) * 3);
    for (std::size_t i = 0; i < data_.size(); i += 3) {
      data_[i] = fill.r;
      data_[i + 1] = fill.g;
      data_[i + 2] = fill.b;
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  const std::vector<std::uint8_t> &data() const { return data_; }
  std::vector<std::uint8_t> &data() { return data_; }

  ColorRGB at(int u, int v) const
  {
    const std::size_t o = offset(u, v);
    return {data_[o], data_[o + 1], data_[o + 2]};
  }
  ColorRGB at(const Pixel &p) const { return at(p.u, p.v); }

  void set(int u, int v, ColorRGB c)
  {
    const std::size_t o = offset(u, v);
    data_[o] = c.r;
    data_[o + 1] = c.g;
    data_[o + 2] = c.b;
  }

  friend bool operator==(const RgbImage &a, const RgbImage &b)
  {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

private:
  std::size_t offset(int u, int v) const
  {
    if (u < 0 || u >= width_ || v < 0 || v >= height_) {
      throw std::out_of_range("RgbImage: pixel (" + std::to_string(u) + ", " + std::to_string(v) +
                              ") outside " + std::to_string(width_) + "x" + std::to_string(height_));
    }
    return (std::size_t(v) * std::size_t(width_) + std::size_t(u)) * 3;
  }

  int width_{0};
  int height_{0};
  std::vector<std::uint8_t> data_;
};

/// Decodes any PNG libpng understands into 8-bit RGB (alpha dropped, gray expanded).
inline RgbImage read_png(const std::filesystem::path &path)
{
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    throw std::runtime_error("read_png: " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  RgbImage out(int(img.width), int(img.height));
  if (!png_image_finish_read(&img, nullptr, out.data().data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw std::runtime_error("read_png: " + path.string() + ": " + msg);
  }
  return out;
}

inline void write_png(const std::filesystem::path &path, const RgbImage &image)
{
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = png_uint_32(image.width());
  img.height = png_uint_32(image.height());
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, image.data().data(), 0, nullptr)) {
    throw std::runtime_error("write_png: " + path.string() + ": " + img.message);
  }
}

}  // namespace texmap
