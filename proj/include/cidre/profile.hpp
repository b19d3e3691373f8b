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
  \file profile.hpp
  \brief Per-basic-block execution counts and the profile file format.

  Profile files are UTF-8 lines `HEXADDR COUNT` sorted by address, with `#`
  comments.  Counts refer to block leaders of the current control-flow graph.
*/

#pragma once

#include "cidre/cfg.hpp"
#include "cidre/support.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace cidre {

struct Profile {
  std::map<uint64_t, uint64_t> counts;  // block leader -> f_BB
  uint64_t f_total = 0;                 // dynamic instruction count at CPI 1

  uint64_t count_of(uint64_t leader) const {
    auto it = counts.find(leader);
    return it == counts.end() ? 0 : it->second;
  }
};

/*! \brief Recompute f_total = sum over blocks of f_BB * |instructions|. */
inline void recompute_f_total(Profile& profile, const Cfg& cfg) {
  profile.f_total = 0;
  for (const auto& bb : cfg.blocks)
    profile.f_total += profile.count_of(bb.start_address) * bb.instructions.size();
}

/*! \brief Assign every block an execution count of 1 (profile-less runs). */
inline Profile uniform_profile(const Cfg& cfg) {
  Profile p;
  for (const auto& bb : cfg.blocks) p.counts[bb.start_address] = 1;
  recompute_f_total(p, cfg);
  return p;
}

inline Profile parse_profile(const std::string& text, const Cfg& cfg) {
  Profile p;
  auto leaders = cfg.leaders();
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string addr_text, count_text, rest;
    if (!(ls >> addr_text)) continue;
    if (!(ls >> count_text) || (ls >> rest))
      throw Error(Stage::profile, "profile syntax error on line " + std::to_string(lineno));
    uint64_t addr = 0;
    try {
      size_t pos = 0;
      addr = std::stoull(addr_text, &pos, 16);
      if (pos != addr_text.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw Error(Stage::profile, "bad address on line " + std::to_string(lineno));
    }
    uint64_t count = 0;
    try {
      size_t pos = 0;
      count = std::stoull(count_text, &pos, 10);
      if (pos != count_text.size() || count_text[0] == '-') throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw Error(Stage::profile,
                  "count out of range or malformed on line " + std::to_string(lineno));
    }
    if (!leaders.count(addr))
      throw Error(Stage::profile, "address " + to_hex(addr) + " is not a block leader (line " +
                                      std::to_string(lineno) + ")");
    if (p.counts.count(addr))
      throw Error(Stage::profile, "duplicate leader " + to_hex(addr) + " on line " +
                                      std::to_string(lineno));
    p.counts[addr] = count;
  }
  recompute_f_total(p, cfg);
  return p;
}

inline Profile load_profile(const std::string& path, const Cfg& cfg) {
  std::ifstream in(path);
  if (!in) throw Error(Stage::profile, "cannot open profile file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_profile(ss.str(), cfg);
}

inline std::string to_profile_text(const Profile& profile) {
  std::string out;
  for (const auto& [addr, count] : profile.counts) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%llx %llu\n", static_cast<unsigned long long>(addr),
                  static_cast<unsigned long long>(count));
    out += buf;
  }
  return out;
}

}  // namespace cidre
