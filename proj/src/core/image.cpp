// Copyright 2026 The depthvis Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "depthvis/core/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include "depthvis/core/error.hpp"

namespace depthvis::core {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors through longjmp; convert that into our exception type at
// the call boundary.
void write_png(const std::filesystem::path& path, int width, int height, int bit_depth,
               int color_type, const std::vector<png_bytep>& rows) {
  auto tmp = path;
  tmp += ".tmp";
  {
    FilePtr fp(std::fopen(tmp.c_str(), "wb"));
    if (!fp) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
      png_destroy_write_struct(&png, &info);
      throw Error(ErrorKind::kIo, "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw Error(ErrorKind::kIo, "png encode failed for " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }
  std::filesystem::rename(tmp, path);
}

struct PngRead {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bytes;  // rows packed back to back
};

PngRead read_png(const std::filesystem::path& path, int want_bit_depth, int want_color_type) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error(ErrorKind::kMissingFrame, "cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::kIo, "libpng init failed");
  }
  PngRead out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::kIo, "png decode failed for " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth != want_bit_depth || color_type != want_color_type) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorKind::kIo, "unexpected png format in " + path.string());
  }
  if (bit_depth == 16) png_set_swap(png);
  png_read_update_info(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out.bytes.resize(rowbytes * out.height);
  std::vector<png_bytep> rows(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace

void write_png_rgb(const std::filesystem::path& path, const RgbImage& image) {
  std::vector<uint8_t> interleaved(static_cast<std::size_t>(3) * image.height * image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        interleaved[(static_cast<std::size_t>(y) * image.width + x) * 3 + c] = image.at(c, y, x);
      }
    }
  }
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) {
    rows[y] = interleaved.data() + static_cast<std::size_t>(y) * image.width * 3;
  }
  write_png(path, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  PngRead raw = read_png(path, 8, PNG_COLOR_TYPE_RGB);
  RgbImage image(raw.height, raw.width);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        image.at(c, y, x) = raw.bytes[(static_cast<std::size_t>(y) * raw.width + x) * 3 + c];
      }
    }
  }
  return image;
}

void write_png_gray16(const std::filesystem::path& path, const Gray16Image& image) {
  std::vector<uint16_t> copy = image.data;
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(copy.data() + static_cast<std::size_t>(y) * image.width);
  }
  write_png(path, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

Gray16Image read_png_gray16(const std::filesystem::path& path) {
  PngRead raw = read_png(path, 16, PNG_COLOR_TYPE_GRAY);
  Gray16Image image{raw.height, raw.width, {}};
  image.data.resize(static_cast<std::size_t>(raw.height) * raw.width);
  std::memcpy(image.data.data(), raw.bytes.data(), image.data.size() * sizeof(uint16_t));
  return image;
}

}  // namespace depthvis::core
