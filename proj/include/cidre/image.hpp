// Copyright 2026 The cidre Authors. All rights reserved.
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

/*!
  \file image.hpp
  \brief Program image container and loaders for ELF64, flat and listing inputs.

  The ELF reader is deliberately minimal: little-endian ELF64, machine type
  243 (RISC-V), executable PT_LOAD segments only.  Relocations, dynamic
  linking and section-level metadata are out of scope.
*/

#pragma once

#include "cidre/instruction.hpp"
#include "cidre/support.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cidre {

enum class ImageFormat { elf64, flat, listing };

inline const char* format_name(ImageFormat f) {
  switch (f) {
    case ImageFormat::elf64: return "elf64";
    case ImageFormat::flat: return "flat";
    case ImageFormat::listing: return "listing";
  }
  return "?";
}

struct ProgramImage {
  uint64_t base_address = 0;
  std::vector<uint8_t> bytes;
  uint64_t entry = 0;
  ImageFormat format = ImageFormat::flat;

  uint64_t end_address() const { return base_address + bytes.size(); }

  uint32_t word_at(uint64_t address) const {
    uint64_t off = address - base_address;
    return static_cast<uint32_t>(bytes[off]) | (static_cast<uint32_t>(bytes[off + 1]) << 8) |
           (static_cast<uint32_t>(bytes[off + 2]) << 16) |
           (static_cast<uint32_t>(bytes[off + 3]) << 24);
  }

  /*! \brief Decode every word of the image in address order. */
  std::vector<DecodedInstruction> decode_all() const {
    if (bytes.size() % 4 != 0)
      throw Error(Stage::decode, "image size is not a multiple of 4 bytes");
    std::vector<DecodedInstruction> out;
    out.reserve(bytes.size() / 4);
    for (uint64_t a = base_address; a < end_address(); a += 4) out.push_back(decode(word_at(a), a));
    return out;
  }
};

namespace detail {

inline std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Stage::config, "cannot open input file: " + path);
  std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
  return data;
}

template <typename T>
T read_le(const std::vector<uint8_t>& data, size_t off) {
  if (off + sizeof(T) > data.size()) throw Error(Stage::decode, "truncated ELF header");
  T v{};
  std::memcpy(&v, data.data() + off, sizeof(T));
  return v;
}

inline ProgramImage load_elf64(const std::vector<uint8_t>& data) {
  if (data.size() < 64 || data[0] != 0x7f || data[1] != 'E' || data[2] != 'L' || data[3] != 'F')
    throw Error(Stage::decode, "malformed ELF header");
  if (data[4] != 2) throw Error(Stage::decode, "not a 64-bit ELF");
  if (data[5] != 1) throw Error(Stage::decode, "not a little-endian ELF");
  const uint16_t machine = read_le<uint16_t>(data, 18);
  if (machine != 243) throw Error(Stage::decode, "not a RISC-V ELF (machine type " +
                                                     std::to_string(machine) + ")");
  const uint64_t entry = read_le<uint64_t>(data, 24);
  const uint64_t phoff = read_le<uint64_t>(data, 32);
  const uint16_t phentsize = read_le<uint16_t>(data, 54);
  const uint16_t phnum = read_le<uint16_t>(data, 56);

  struct Segment {
    uint64_t vaddr, filesz, memsz, offset;
  };
  std::vector<Segment> segs;
  for (uint16_t i = 0; i < phnum; ++i) {
    const size_t p = phoff + static_cast<size_t>(i) * phentsize;
    const uint32_t type = read_le<uint32_t>(data, p);
    const uint32_t flags = read_le<uint32_t>(data, p + 4);
    if (type != 1 /*PT_LOAD*/ || !(flags & 0x1 /*PF_X*/)) continue;
    segs.push_back({read_le<uint64_t>(data, p + 16), read_le<uint64_t>(data, p + 32),
                    read_le<uint64_t>(data, p + 40), read_le<uint64_t>(data, p + 8)});
  }
  if (segs.empty()) throw Error(Stage::decode, "no executable PT_LOAD segment");

  uint64_t lo = UINT64_MAX, hi = 0;
  for (const auto& s : segs) {
    lo = std::min(lo, s.vaddr);
    hi = std::max(hi, s.vaddr + s.memsz);
  }
  ProgramImage img;
  img.format = ImageFormat::elf64;
  img.base_address = lo;
  img.entry = entry;
  img.bytes.assign(hi - lo, 0);
  for (const auto& s : segs) {
    if (s.offset + s.filesz > data.size()) throw Error(Stage::decode, "segment exceeds file size");
    std::memcpy(img.bytes.data() + (s.vaddr - lo), data.data() + s.offset, s.filesz);
  }
  if (img.bytes.size() % 4 != 0) img.bytes.resize((img.bytes.size() + 3) & ~3ull, 0);
  if (entry < img.base_address || entry >= img.end_address())
    throw Error(Stage::decode, "ELF entry point outside executable segments");
  return img;
}

inline ProgramImage parse_listing(const std::string& text) {
  ProgramImage img;
  img.format = ImageFormat::listing;
  std::vector<std::pair<uint64_t, uint32_t>> words;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    size_t i = 0;
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == line.size()) continue;
    uint64_t addr = 0;
    uint32_t word = 0;
    char colon = 0;
    std::istringstream ls(line);
    if (!(ls >> std::hex >> addr >> colon >> std::hex >> word) || colon != ':')
      throw Error(Stage::decode, "listing syntax error on line " + std::to_string(lineno));
    if (addr % 4 != 0)
      throw Error(Stage::decode, "unaligned listing address on line " + std::to_string(lineno));
    words.emplace_back(addr, word);
  }
  if (words.empty()) throw Error(Stage::decode, "empty listing");
  uint64_t lo = UINT64_MAX, hi = 0;
  for (const auto& [a, w] : words) {
    lo = std::min(lo, a);
    hi = std::max(hi, a + 4);
  }
  img.base_address = lo;
  img.entry = lo;
  img.bytes.assign(hi - lo, 0);
  std::vector<bool> seen(img.bytes.size() / 4, false);
  for (const auto& [a, w] : words) {
    const size_t idx = (a - lo) / 4;
    if (seen[idx]) throw Error(Stage::decode, "duplicate listing address " + to_hex(a));
    seen[idx] = true;
    img.bytes[a - lo] = static_cast<uint8_t>(w);
    img.bytes[a - lo + 1] = static_cast<uint8_t>(w >> 8);
    img.bytes[a - lo + 2] = static_cast<uint8_t>(w >> 16);
    img.bytes[a - lo + 3] = static_cast<uint8_t>(w >> 24);
  }
  for (size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw Error(Stage::decode, "gap in listing at " + to_hex(lo + i * 4));
  return img;
}

inline bool has_suffix(const std::string& s, const std::string& suf) {
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

}  // namespace detail

/*! \brief Load a program image.

  When \p format is unset, ELF is recognized by magic and `.lst`/`.txt` files
  are treated as listings; anything else loads as a flat binary at
  \p flat_base.
*/
inline ProgramImage load_image(const std::string& path,
                               std::optional<ImageFormat> format = std::nullopt,
                               uint64_t flat_base = 0x80000000,
                               std::optional<uint64_t> entry = std::nullopt) {
  std::vector<uint8_t> data = detail::read_file(path);
  ImageFormat fmt;
  if (format) {
    fmt = *format;
  } else if (data.size() >= 4 && data[0] == 0x7f && data[1] == 'E' && data[2] == 'L' &&
             data[3] == 'F') {
    fmt = ImageFormat::elf64;
  } else if (detail::has_suffix(path, ".lst") || detail::has_suffix(path, ".txt")) {
    fmt = ImageFormat::listing;
  } else {
    fmt = ImageFormat::flat;
  }

  ProgramImage img;
  switch (fmt) {
    case ImageFormat::elf64:
      img = detail::load_elf64(data);
      break;
    case ImageFormat::listing:
      img = detail::parse_listing(std::string(data.begin(), data.end()));
      break;
    case ImageFormat::flat: {
      if (data.size() % 4 != 0)
        throw Error(Stage::decode, "flat image size is not a multiple of 4");
      img.format = ImageFormat::flat;
      img.base_address = flat_base;
      img.bytes = std::move(data);
      img.entry = flat_base;
      break;
    }
  }
  if (entry) img.entry = *entry;
  if (!img.bytes.empty() && (img.entry < img.base_address || img.entry >= img.end_address()))
    throw Error(Stage::decode, "entry point outside image");
  return img;
}

/*! \brief Render the image as listing text (`HEXADDR: HEXWORD8` per line). */
inline std::string to_listing(const ProgramImage& img) {
  std::string out;
  for (uint64_t a = img.base_address; a < img.end_address(); a += 4) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%llx: %08x\n", static_cast<unsigned long long>(a),
                  img.word_at(a));
    out += buf;
  }
  return out;
}

}  // namespace cidre
