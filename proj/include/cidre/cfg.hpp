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
  \file cfg.hpp
  \brief Basic-block recovery over a decoded instruction stream.
*/

#pragma once

#include "cidre/instruction.hpp"
#include "cidre/support.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace cidre {

enum class Terminator { branch, jump, fallthrough, end };

struct BasicBlock {
  uint32_t id = 0;
  uint64_t start_address = 0;
  std::vector<DecodedInstruction> instructions;
  Terminator terminator = Terminator::end;

  uint64_t end_address() const { return start_address + 4 * instructions.size(); }
};

struct Cfg {
  std::vector<BasicBlock> blocks;
  std::vector<std::string> warnings;  // unresolved indirect jumps etc.

  const BasicBlock* block_at(uint64_t leader) const {
    for (const auto& bb : blocks)
      if (bb.start_address == leader) return &bb;
    return nullptr;
  }

  std::set<uint64_t> leaders() const {
    std::set<uint64_t> out;
    for (const auto& bb : blocks) out.insert(bb.start_address);
    return out;
  }
};

namespace detail {

inline bool is_terminator(const DecodedInstruction& ins) {
  // ecall/ebreak may leave the program, so blocks end there as well; this
  // keeps per-block retirement counts exact for partially executed exits.
  return ins.is_branch() || ins.is_jump() || ins.op == OpId::Ecall || ins.op == OpId::Ebreak;
}

inline std::optional<uint64_t> direct_target(const DecodedInstruction& ins) {
  if (ins.is_branch() || ins.op == OpId::Jal)
    return static_cast<uint64_t>(ins.address + *ins.imm);
  return std::nullopt;  // jalr targets are unresolved
}

}  // namespace detail

/*! \brief Partition a decoded stream into basic blocks.

  Leaders are the stream entry, direct branch/jump targets that fall inside
  the stream, and the fall-through successors of every terminator.  Indirect
  jump targets are not resolved; a warning is recorded for each.
*/
inline Cfg build_cfg(const std::vector<DecodedInstruction>& stream, uint64_t entry) {
  Cfg cfg;
  if (stream.empty()) return cfg;

  const uint64_t lo = stream.front().address;
  const uint64_t hi = stream.back().address + 4;
  auto in_stream = [&](uint64_t a) { return a >= lo && a < hi && (a - lo) % 4 == 0; };

  std::set<uint64_t> leaders;
  leaders.insert(lo);
  if (in_stream(entry)) leaders.insert(entry);
  for (const auto& ins : stream) {
    if (!detail::is_terminator(ins)) continue;
    if (auto target = detail::direct_target(ins)) {
      if (in_stream(*target)) leaders.insert(*target);
    } else if (ins.op == OpId::Jalr) {
      cfg.warnings.push_back("unresolved indirect jump at " + to_hex(ins.address));
    }
    if (in_stream(ins.address + 4)) leaders.insert(ins.address + 4);
  }

  BasicBlock current;
  auto flush = [&](Terminator t) {
    if (current.instructions.empty()) return;
    current.terminator = t;
    current.id = static_cast<uint32_t>(cfg.blocks.size());
    cfg.blocks.push_back(std::move(current));
    current = BasicBlock{};
  };

  for (const auto& ins : stream) {
    if (!current.instructions.empty() && leaders.count(ins.address))
      flush(Terminator::fallthrough);
    if (current.instructions.empty()) current.start_address = ins.address;
    current.instructions.push_back(ins);
    if (detail::is_terminator(ins)) {
      Terminator t = ins.is_branch() ? Terminator::branch
                     : ins.is_jump() ? Terminator::jump
                                     : Terminator::fallthrough;
      flush(t);
    }
  }
  flush(Terminator::end);
  return cfg;
}

}  // namespace cidre
