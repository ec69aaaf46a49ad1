/*
 * Copyright 2026 The tinv Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tinv/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace tinv {

namespace {

std::string lower_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

FeatureMap from_interleaved(const std::vector<unsigned char>& buf, Index h, Index w) {
  FeatureMap out({1, 3, h, w});
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      for (Index c = 0; c < 3; ++c) {
        out(0, c, y, x) = buf[static_cast<std::size_t>((y * w + x) * 3 + c)] / 255.0;
      }
    }
  }
  return out;
}

std::vector<unsigned char> to_interleaved(const FeatureMap& x) {
  if (x.n() != 1 || x.channels() != 3) {
    throw StructuralError("save_image expects a single 3-channel image, got " +
                          to_string(x.shape()));
  }
  std::vector<unsigned char> buf(static_cast<std::size_t>(x.size()));
  for (Index y = 0; y < x.height(); ++y) {
    for (Index xx = 0; xx < x.width(); ++xx) {
      for (Index c = 0; c < 3; ++c) {
        const double v = std::clamp(x(0, c, y, xx), 0.0, 1.0);
        buf[static_cast<std::size_t>((y * x.width() + xx) * 3 + c)] =
            static_cast<unsigned char>(std::lround(v * 255.0));
      }
    }
  }
  return buf;
}

FeatureMap load_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("PNG " + path.string() + ": " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw IoError("PNG " + path.string() + ": 16-bit images are not supported (need 8-bit)");
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    throw IoError("PNG " + path.string() + ": " + image.message);
  }
  return from_interleaved(buf, image.height, image.width);
}

void save_png(const FeatureMap& x, const std::filesystem::path& path) {
  const auto buf = to_interleaved(x);
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(x.width());
  image.height = static_cast<png_uint_32>(x.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw IoError("PNG " + path.string() + ": " + image.message);
  }
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(std::istream& is) {
  std::string tok;
  for (int ch = is.get(); ch != EOF; ch = is.get()) {
    if (ch == '#') {
      if (!tok.empty()) break;
      while (ch != EOF && ch != '\n') ch = is.get();
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

FeatureMap load_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  if (ppm_token(is) != "P6") {
    throw IoError("PPM " + path.string() + ": only binary P6 is supported");
  }
  Index w = 0, h = 0;
  int maxval = 0;
  try {
    w = std::stol(ppm_token(is));
    h = std::stol(ppm_token(is));
    maxval = std::stoi(ppm_token(is));
  } catch (const std::exception&) {
    throw IoError("PPM " + path.string() + ": malformed header");
  }
  if (maxval != 255) {
    throw IoError("PPM " + path.string() + ": maxval " + std::to_string(maxval) +
                  " is not supported (need 255)");
  }
  if (w <= 0 || h <= 0) throw IoError("PPM " + path.string() + ": bad dimensions");
  std::vector<unsigned char> buf(static_cast<std::size_t>(w * h * 3));
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!is) throw IoError("PPM " + path.string() + ": truncated pixel data");
  return from_interleaved(buf, h, w);
}

void save_ppm(const FeatureMap& x, const std::filesystem::path& path) {
  const auto buf = to_interleaved(x);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "P6\n" << x.width() << ' ' << x.height() << "\n255\n";
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace

FeatureMap load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".ppm") return load_ppm(path);
  throw IoError("unsupported image format '" + ext + "' (use .png or .ppm)");
}

void save_image(const FeatureMap& x, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return save_png(x, path);
  if (ext == ".ppm") return save_ppm(x, path);
  throw IoError("unsupported image format '" + ext + "' (use .png or .ppm)");
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string ext = lower_extension(entry.path());
    if (entry.is_regular_file() && (ext == ".png" || ext == ".ppm")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace tinv
