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

#pragma once

// Parameter container: a versioned binary file holding named f64 arrays.
//
//   bytes 0..7    magic "TINVPARM"
//   bytes 8..11   format version (u32, little endian)
//   bytes 12..19  manifest length L (u64, little endian)
//   next L bytes  UTF-8 JSON manifest:
//                   {"arrays": [{"name": str, "shape": [n, c, h, w]}, ...],
//                    "meta": {...}}
//   remainder     raw little-endian f64 payloads in manifest order
//
// Round trips are bit-exact.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tinv/tape.hpp"

namespace tinv {

inline constexpr char kContainerMagic[8] = {'T', 'I', 'N', 'V',
                                            'P', 'A', 'R', 'M'};
inline constexpr std::uint32_t kContainerVersion = 1;

struct NamedArray {
  std::string name;
  FeatureMap value;
};

struct Container {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedArray> arrays;
};

void write_container(std::ostream& os, const Container& c);
Container read_container(std::istream& is);

void save_container(const std::filesystem::path& path, const Container& c);
Container load_container(const std::filesystem::path& path);

Container make_container(std::span<const Parameter* const> params,
                         nlohmann::json meta = nlohmann::json::object());

/// Copies arrays into parameters by name. Every parameter must be present
/// with a matching shape; unknown arrays are an error too.
void assign_parameters(const Container& c, std::span<Parameter* const> params);

}  // namespace tinv
