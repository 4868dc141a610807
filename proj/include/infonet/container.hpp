// Copyright 2026 The infonet Authors
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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace infonet {

// On-disk layout shared by datasets, weights and coefficient files:
//
//   bytes 0..7    magic "INFONET1"
//   bytes 8..15   manifest length L, little-endian uint64
//   next L bytes  JSON manifest (UTF-8); manifest["blobs"] lists each blob's
//                 name, shape, element offset and count
//   remainder     blobs as contiguous little-endian float32, manifest order
//
// The manifest must carry "format" and "version" keys.

struct BlobView {
  std::string name;
  std::vector<std::size_t> shape;
  std::span<const float> data;
};

struct Blob {
  std::vector<std::size_t> shape;
  std::vector<float> data;
};

struct Container {
  nlohmann::json manifest;
  std::vector<std::pair<std::string, Blob>> blobs;

  const Blob& blob(std::string_view name) const;
  bool has_blob(std::string_view name) const;
};

// Manifest is written with sorted keys, so equal inputs give equal bytes.
void write_container(const std::filesystem::path& path, nlohmann::json manifest,
                     std::span<const BlobView> blobs);

// Throws Error(io) if unreadable, Error(format) on bad magic, wrong format
// name, version mismatch, or blob sizes that disagree with the manifest.
Container read_container(const std::filesystem::path& path, std::string_view format,
                         int version);

// The manifest's "format" value, without reading the blobs.
std::string container_format(const std::filesystem::path& path);

}  // namespace infonet
