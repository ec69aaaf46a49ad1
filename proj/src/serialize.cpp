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

#include "tinv/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace tinv {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("parameter container: truncated header");
  return v;
}

}  // namespace

void write_container(std::ostream& os, const Container& c) {
  nlohmann::json manifest;
  manifest["arrays"] = nlohmann::json::array();
  for (const NamedArray& a : c.arrays) {
    const Shape& s = a.value.shape();
    manifest["arrays"].push_back({{"name", a.name}, {"shape", {s.n, s.c, s.h, s.w}}});
  }
  manifest["meta"] = c.meta;
  const std::string text = manifest.dump();

  os.write(kContainerMagic, sizeof(kContainerMagic));
  put<std::uint32_t>(os, kContainerVersion);
  put<std::uint64_t>(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const NamedArray& a : c.arrays) {
    os.write(reinterpret_cast<const char*>(a.value.data()),
             static_cast<std::streamsize>(a.value.size() * sizeof(double)));
  }
  if (!os) throw IoError("parameter container: write failed");
}

Container read_container(std::istream& is) {
  char magic[sizeof(kContainerMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kContainerMagic, sizeof(magic)) != 0) {
    throw IoError("parameter container: bad magic");
  }
  const auto version = get<std::uint32_t>(is);
  if (version != kContainerVersion) {
    throw IoError("parameter container: unsupported version " +
                  std::to_string(version));
  }
  const auto length = get<std::uint64_t>(is);
  std::string text(length, '\0');
  is.read(text.data(), static_cast<std::streamsize>(length));
  if (!is) throw IoError("parameter container: truncated manifest");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("parameter container: bad manifest: ") + e.what());
  }

  Container c;
  c.meta = manifest.value("meta", nlohmann::json::object());
  for (const auto& entry : manifest.at("arrays")) {
    const auto dims = entry.at("shape").get<std::vector<Index>>();
    if (dims.size() != 4) throw IoError("parameter container: shape must be 4-D");
    FeatureMap value(Shape{dims[0], dims[1], dims[2], dims[3]});
    is.read(reinterpret_cast<char*>(value.data()),
            static_cast<std::streamsize>(value.size() * sizeof(double)));
    if (!is) throw IoError("parameter container: truncated payload");
    c.arrays.push_back({entry.at("name").get<std::string>(), std::move(value)});
  }
  return c;
}

void save_container(const std::filesystem::path& path, const Container& c) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_container(os, c);
}

Container load_container(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_container(is);
}

Container make_container(std::span<const Parameter* const> params,
                         nlohmann::json meta) {
  Container c;
  c.meta = std::move(meta);
  c.arrays.reserve(params.size());
  for (const Parameter* p : params) c.arrays.push_back({p->name, p->value});
  return c;
}

void assign_parameters(const Container& c, std::span<Parameter* const> params) {
  std::unordered_map<std::string, const NamedArray*> by_name;
  for (const NamedArray& a : c.arrays) {
    if (!by_name.emplace(a.name, &a).second) {
      throw StructuralError("parameter container: duplicate array " + a.name);
    }
  }
  if (by_name.size() != params.size()) {
    throw StructuralError("parameter container holds " +
                          std::to_string(by_name.size()) +
                          " arrays but the model has " +
                          std::to_string(params.size()) + " parameters");
  }
  for (Parameter* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) {
      throw StructuralError("parameter container: missing " + p->name);
    }
    if (it->second->value.shape() != p->value.shape()) {
      throw StructuralError("parameter container: " + p->name + " has shape " +
                            to_string(it->second->value.shape()) +
                            ", model expects " + to_string(p->value.shape()));
    }
    p->value = it->second->value;
    p->zero_grad();
  }
}

}  // namespace tinv
