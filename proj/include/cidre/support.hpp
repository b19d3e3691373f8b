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
  \file support.hpp
  \brief Shared error type, vertex-set alias and small helpers.
*/

#pragma once

#include <boost/dynamic_bitset.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cidre {

/*! \brief Pipeline stage an error originated from.

  The numeric values double as process exit codes of the CLI driver.
*/
enum class Stage : int {
  config = 2,
  decode = 3,
  profile = 4,
  enumeration = 5,
  oracle = 6,
  encoding = 7,
};

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::config: return "config";
    case Stage::decode: return "decode";
    case Stage::profile: return "profile";
    case Stage::enumeration: return "enumeration";
    case Stage::oracle: return "oracle";
    case Stage::encoding: return "encoding";
  }
  return "unknown";
}

/*! \brief Error carrying the pipeline stage it belongs to. */
class Error : public std::runtime_error {
public:
  Error(Stage stage, const std::string& what)
      : std::runtime_error(std::string(stage_name(stage)) + ": " + what), stage_(stage) {}

  Stage stage() const { return stage_; }
  int exit_code() const { return static_cast<int>(stage_); }

private:
  Stage stage_;
};

/*! \brief Set of internal DFG vertices, indexed by vertex id. */
using VertexSet = boost::dynamic_bitset<>;

inline std::string to_hex(uint64_t value) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%llx", static_cast<unsigned long long>(value));
  return buf;
}

inline std::string to_hex_word(uint32_t value) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", value);
  return buf;
}

/*! \brief Minimal number of bits needed to hold \p value in two's complement. */
inline unsigned signed_bit_width(int64_t value) {
  if (value >= 0) {
    unsigned w = 1;
    while (value >> (w - 1) != 0) ++w;
    return w;
  }
  unsigned w = 1;
  while (value >> (w - 1) != -1) ++w;
  return w;
}

/*! \brief True when \p value is representable as a \p bits-wide two's-complement field. */
inline bool fits_signed(int64_t value, unsigned bits) {
  return bits >= 64 || signed_bit_width(value) <= bits;
}

}  // namespace cidre
