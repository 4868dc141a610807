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

#include "infonet/container.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "infonet/error.hpp"

namespace infonet {

namespace {

constexpr std::array<char, 8> kMagic{'I', 'N', 'F', 'O', 'N', 'E', 'T', '1'};

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t p = 1;
  for (auto d : shape) p *= d;
  return p;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

std::uint64_t get_u64(const unsigned char* b) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_floats(std::ostream& out, std::span<const float> data) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size_bytes()));
  } else {
    for (float f : data) {
      auto u = std::bit_cast<std::uint32_t>(f);
      std::array<char, 4> b{};
      for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
      out.write(b.data(), 4);
    }
  }
}

void read_floats(const unsigned char* src, std::span<float> out) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), src, out.size_bytes());
  } else {
    for (std::size_t k = 0; k < out.size(); ++k) {
      std::uint32_t u = 0;
      for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(src[4 * k + i]) << (8 * i);
      out[k] = std::bit_cast<float>(u);
    }
  }
}

}  // namespace

const Blob& Container::blob(std::string_view name) const {
  for (const auto& [n, b] : blobs) {
    if (n == name) return b;
  }
  fail(ErrorCode::format, "container: missing blob '" + std::string(name) + "'");
}

bool Container::has_blob(std::string_view name) const {
  return std::any_of(blobs.begin(), blobs.end(), [&](const auto& p) { return p.first == name; });
}

void write_container(const std::filesystem::path& path, nlohmann::json manifest,
                     std::span<const BlobView> blobs) {
  auto entries = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto& b : blobs) {
    require(product(b.shape) == b.data.size(),
            "container: blob '" + b.name + "' size disagrees with its shape");
    entries.push_back({{"name", b.name}, {"shape", b.shape}, {"offset", offset},
                       {"count", b.data.size()}});
    offset += b.data.size();
  }
  manifest["blobs"] = std::move(entries);
  const std::string text = manifest.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& b : blobs) write_floats(out, b.data);
  out.flush();
  if (!out) fail(ErrorCode::io, "write to '" + path.string() + "' failed");
}

std::string container_format(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::array<unsigned char, 16> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  if (!in || !std::equal(kMagic.begin(), kMagic.end(), head.begin(),
                         [](char a, unsigned char b) { return a == char(b); })) {
    fail(ErrorCode::format, "'" + path.string() + "': not an infonet container");
  }
  const std::uint64_t len = get_u64(head.data() + 8);
  if (len > std::filesystem::file_size(path) - head.size()) {
    fail(ErrorCode::format, "'" + path.string() + "': truncated manifest");
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(text.size()));
  if (!in) fail(ErrorCode::format, "'" + path.string() + "': truncated manifest");
  try {
    return nlohmann::json::parse(text).value("format", std::string{});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, "'" + path.string() + "': bad manifest: " + e.what());
  }
}

Container read_container(const std::filesystem::path& path, std::string_view format,
                         int version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = "'" + path.string() + "': ";
  if (bytes.size() < 16 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin(),
                                       [](char a, unsigned char b) { return a == char(b); })) {
    fail(ErrorCode::format, where + "not an infonet container");
  }
  const std::uint64_t len = get_u64(bytes.data() + 8);
  if (len > bytes.size() - 16) fail(ErrorCode::format, where + "truncated manifest");

  Container c;
  try {
    c.manifest = nlohmann::json::parse(bytes.begin() + 16,
                                       bytes.begin() + 16 + static_cast<std::ptrdiff_t>(len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, where + "bad manifest: " + e.what());
  }
  if (c.manifest.value("format", std::string{}) != format) {
    fail(ErrorCode::format, where + "expected format '" + std::string(format) + "', found '" +
                                c.manifest.value("format", std::string{"?"}) + "'");
  }
  const int found = c.manifest.value("version", -1);
  if (found != version) {
    fail(ErrorCode::format, where + "unsupported " + std::string(format) + " version " +
                                std::to_string(found) + " (this build reads version " +
                                std::to_string(version) + ")");
  }

  const std::size_t data_start = 16 + len;
  const std::size_t available = (bytes.size() - data_start) / sizeof(float);
  if ((bytes.size() - data_start) % sizeof(float) != 0) {
    fail(ErrorCode::format, where + "blob section is not a whole number of floats");
  }
  std::size_t expected_end = 0;
  try {
    for (const auto& e : c.manifest.at("blobs")) {
      Blob b;
      b.shape = e.at("shape").get<std::vector<std::size_t>>();
      const auto offset = e.at("offset").get<std::size_t>();
      const auto count = e.at("count").get<std::size_t>();
      if (count != product(b.shape)) {
        fail(ErrorCode::format, where + "blob count disagrees with its shape");
      }
      if (offset + count > available) {
        fail(ErrorCode::format, where + "truncated blob '" + e.at("name").get<std::string>() + "'");
      }
      b.data.resize(count);
      read_floats(bytes.data() + data_start + offset * sizeof(float), b.data);
      expected_end = std::max(expected_end, offset + count);
      c.blobs.emplace_back(e.at("name").get<std::string>(), std::move(b));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, where + "bad blob table: " + e.what());
  }
  if (expected_end != available) {
    fail(ErrorCode::format, where + "trailing bytes after the last blob");
  }
  return c;
}

}  // namespace infonet
