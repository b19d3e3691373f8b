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
  \file interp.hpp
  \brief Instruction-accurate RV64IM interpreter for profiling and replay.

  Bare-metal conventions: `ecall` with a7=93 terminates with the exit code in
  a0, a7=64 writes a1[0..a2) to the captured standard output, and `ebreak`
  terminates.  Memory is one flat zero-initialized little-endian region.
  Loads and stores must be naturally aligned.
*/

#pragma once

#include "cidre/cfg.hpp"
#include "cidre/image.hpp"
#include "cidre/profile.hpp"
#include "cidre/support.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace cidre {

/*! \brief Evaluate one computational RV64IM operation.

  \p b is the second register operand or the immediate, depending on the
  operation's format.  Control-flow, memory and system operations are not
  evaluatable here.
*/
inline uint64_t alu_eval(OpId op, uint64_t a, uint64_t b) {
  auto sext32 = [](uint64_t v) { return static_cast<uint64_t>(static_cast<int64_t>(static_cast<int32_t>(v))); };
  const int64_t sa = static_cast<int64_t>(a);
  const int64_t sb = static_cast<int64_t>(b);
  switch (op) {
    case OpId::Lui: return b;
    case OpId::Addi: case OpId::Add: return a + b;
    case OpId::Sub: return a - b;
    case OpId::Slti: case OpId::Slt: return sa < sb ? 1 : 0;
    case OpId::Sltiu: case OpId::Sltu: return a < b ? 1 : 0;
    case OpId::Xori: case OpId::Xor: return a ^ b;
    case OpId::Ori: case OpId::Or: return a | b;
    case OpId::Andi: case OpId::And: return a & b;
    case OpId::Slli: case OpId::Sll: return a << (b & 63);
    case OpId::Srli: case OpId::Srl: return a >> (b & 63);
    case OpId::Srai: case OpId::Sra: return static_cast<uint64_t>(sa >> (b & 63));
    case OpId::Addiw: case OpId::Addw: return sext32(a + b);
    case OpId::Subw: return sext32(a - b);
    case OpId::Slliw: case OpId::Sllw: return sext32(a << (b & 31));
    case OpId::Srliw: case OpId::Srlw: return sext32(static_cast<uint32_t>(a) >> (b & 31));
    case OpId::Sraiw: case OpId::Sraw:
      return sext32(static_cast<uint64_t>(static_cast<int32_t>(a) >> (b & 31)));
    case OpId::Mul: return a * b;
    case OpId::Mulh:
      return static_cast<uint64_t>((static_cast<__int128>(sa) * static_cast<__int128>(sb)) >> 64);
    case OpId::Mulhsu:
      return static_cast<uint64_t>(
          (static_cast<__int128>(sa) * static_cast<__int128>(static_cast<unsigned __int128>(b))) >>
          64);
    case OpId::Mulhu:
      return static_cast<uint64_t>(
          (static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b)) >> 64);
    case OpId::Div:
      if (b == 0) return ~0ull;
      if (sa == INT64_MIN && sb == -1) return a;
      return static_cast<uint64_t>(sa / sb);
    case OpId::Divu: return b == 0 ? ~0ull : a / b;
    case OpId::Rem:
      if (b == 0) return a;
      if (sa == INT64_MIN && sb == -1) return 0;
      return static_cast<uint64_t>(sa % sb);
    case OpId::Remu: return b == 0 ? a : a % b;
    case OpId::Mulw: return sext32(static_cast<uint32_t>(a) * static_cast<uint32_t>(b));
    case OpId::Divw: {
      const int32_t x = static_cast<int32_t>(a), y = static_cast<int32_t>(b);
      if (y == 0) return ~0ull;
      if (x == INT32_MIN && y == -1) return sext32(static_cast<uint64_t>(static_cast<uint32_t>(x)));
      return sext32(static_cast<uint64_t>(static_cast<uint32_t>(x / y)));
    }
    case OpId::Divuw: {
      const uint32_t x = static_cast<uint32_t>(a), y = static_cast<uint32_t>(b);
      return y == 0 ? ~0ull : sext32(x / y);
    }
    case OpId::Remw: {
      const int32_t x = static_cast<int32_t>(a), y = static_cast<int32_t>(b);
      if (y == 0) return sext32(static_cast<uint64_t>(static_cast<uint32_t>(x)));
      if (x == INT32_MIN && y == -1) return 0;
      return sext32(static_cast<uint64_t>(static_cast<uint32_t>(x % y)));
    }
    case OpId::Remuw: {
      const uint32_t x = static_cast<uint32_t>(a), y = static_cast<uint32_t>(b);
      return y == 0 ? sext32(x) : sext32(x % y);
    }
    default:
      throw Error(Stage::profile, std::string("operation has no ALU semantics: ") +
                                      std::string(mnemonic(op)));
  }
}

struct InterpLimits {
  uint64_t max_steps = 10'000'000;
  uint64_t mem_size = 16ull << 20;
};

struct ExecResult {
  Profile profile;
  int exit_code = 0;
  std::string stdout_text;
  uint64_t retired = 0;
  uint64_t fused_cycles = 0;
};

/*! \brief One occurrence of a selected pattern, as instruction addresses. */
struct FusedOccurrence {
  uint64_t bb_start = 0;
  std::vector<uint64_t> addresses;  // member instruction addresses, ascending
};

namespace detail {

class Machine {
public:
  Machine(const ProgramImage& image, const Cfg& cfg, const InterpLimits& limits)
      : image_(image), limits_(limits), leaders_(cfg.leaders()) {
    stream_ = image.decode_all();
    mem_base_ = image.base_address;
    memory_.assign(limits.mem_size, 0);
    if (image.bytes.size() > memory_.size())
      throw Error(Stage::profile, "image larger than simulated memory");
    std::copy(image.bytes.begin(), image.bytes.end(), memory_.begin());
    regs_.fill(0);
    regs_[2] = mem_base_ + limits.mem_size - 64;  // sp, by convention
  }

  /*! \p cycle_charge maps instruction addresses to their fused cycle cost;
      unmapped addresses cost one cycle. */
  ExecResult run(const std::map<uint64_t, uint64_t>* cycle_charge = nullptr) {
    ExecResult result;
    uint64_t pc = image_.entry;
    bool halted = false;
    while (!halted) {
      if (result.retired >= limits_.max_steps)
        throw Error(Stage::profile,
                    "step limit exceeded (" + std::to_string(limits_.max_steps) + ")");
      if (leaders_.count(pc)) ++result.profile.counts[pc];
      const DecodedInstruction& ins = fetch(pc);
      uint64_t next = pc + 4;

      switch (ins.op) {
        case OpId::Ecall:
          if (reg(17) == 93) {
            result.exit_code = static_cast<int>(reg(10));
            halted = true;
          } else if (reg(17) == 64) {
            append_output(result.stdout_text, reg(11), reg(12));
            set_reg(10, reg(12));
          } else {
            throw Error(Stage::profile, "unsupported ecall a7=" + std::to_string(reg(17)) +
                                            " at " + to_hex(pc));
          }
          break;
        case OpId::Ebreak:
          result.exit_code = 0;
          halted = true;
          break;
        case OpId::Fence:
          break;
        case OpId::Jal:
          if (ins.rd) set_reg(*ins.rd, pc + 4);
          next = pc + static_cast<uint64_t>(*ins.imm);
          break;
        case OpId::Jalr: {
          const uint64_t target = (reg(*ins.rs1) + static_cast<uint64_t>(*ins.imm)) & ~1ull;
          if (ins.rd) set_reg(*ins.rd, pc + 4);
          next = target;
          break;
        }
        case OpId::Beq: case OpId::Bne: case OpId::Blt: case OpId::Bge:
        case OpId::Bltu: case OpId::Bgeu:
          if (branch_taken(ins)) next = pc + static_cast<uint64_t>(*ins.imm);
          break;
        case OpId::Lb: set_reg(*ins.rd, load<int8_t>(ins)); break;
        case OpId::Lh: set_reg(*ins.rd, load<int16_t>(ins)); break;
        case OpId::Lw: set_reg(*ins.rd, load<int32_t>(ins)); break;
        case OpId::Ld: set_reg(*ins.rd, load<int64_t>(ins)); break;
        case OpId::Lbu: set_reg(*ins.rd, load<uint8_t>(ins)); break;
        case OpId::Lhu: set_reg(*ins.rd, load<uint16_t>(ins)); break;
        case OpId::Lwu: set_reg(*ins.rd, load<uint32_t>(ins)); break;
        case OpId::Sb: store<uint8_t>(ins); break;
        case OpId::Sh: store<uint16_t>(ins); break;
        case OpId::Sw: store<uint32_t>(ins); break;
        case OpId::Sd: store<uint64_t>(ins); break;
        case OpId::Auipc:
          set_reg(*ins.rd, pc + static_cast<uint64_t>(*ins.imm));
          break;
        default: {
          const uint64_t a = ins.rs1 ? reg(*ins.rs1) : 0;
          const uint64_t b = ins.rs2 ? reg(*ins.rs2) : static_cast<uint64_t>(*ins.imm);
          set_reg(*ins.rd, alu_eval(ins.op, a, b));
          break;
        }
      }

      ++result.retired;
      if (cycle_charge) {
        auto it = cycle_charge->find(pc);
        result.fused_cycles += it == cycle_charge->end() ? 1 : it->second;
      }
      if (!halted && next != pc + 4 && !leaders_.count(next) && in_image(next))
        throw Error(Stage::profile, "jump into block interior at " + to_hex(next) +
                                        " (indirect target is not a block leader)");
      pc = next;
    }
    result.profile.f_total = result.retired;
    return result;
  }

  uint64_t reg(unsigned i) const { return regs_[i]; }
  void set_reg(unsigned i, uint64_t v) {
    if (i != 0) regs_[i] = v;
  }

private:
  const DecodedInstruction& fetch(uint64_t pc) {
    if (!in_image(pc) || (pc - image_.base_address) % 4 != 0)
      throw Error(Stage::profile, "instruction fetch outside image at " + to_hex(pc));
    return stream_[(pc - image_.base_address) / 4];
  }

  bool in_image(uint64_t a) const { return a >= image_.base_address && a < image_.end_address(); }

  bool branch_taken(const DecodedInstruction& ins) const {
    const uint64_t a = reg(*ins.rs1), b = reg(*ins.rs2);
    const int64_t sa = static_cast<int64_t>(a), sb = static_cast<int64_t>(b);
    switch (ins.op) {
      case OpId::Beq: return a == b;
      case OpId::Bne: return a != b;
      case OpId::Blt: return sa < sb;
      case OpId::Bge: return sa >= sb;
      case OpId::Bltu: return a < b;
      case OpId::Bgeu: return a >= b;
      default: return false;
    }
  }

  uint8_t* mem_at(uint64_t addr, size_t len, uint64_t pc_for_error) {
    if (addr < mem_base_ || addr + len > mem_base_ + memory_.size())
      throw Error(Stage::profile, "memory access out of range at " + to_hex(pc_for_error) +
                                      " (address " + to_hex(addr) + ")");
    if (addr % len != 0)
      throw Error(Stage::profile, "misaligned access at " + to_hex(pc_for_error) + " (address " +
                                      to_hex(addr) + ")");
    return memory_.data() + (addr - mem_base_);
  }

  template <typename T>
  uint64_t load(const DecodedInstruction& ins) {
    const uint64_t addr = reg(*ins.rs1) + static_cast<uint64_t>(*ins.imm);
    T v{};
    std::memcpy(&v, mem_at(addr, sizeof(T), ins.address), sizeof(T));
    return static_cast<uint64_t>(static_cast<int64_t>(v));
  }

  template <typename T>
  void store(const DecodedInstruction& ins) {
    const uint64_t addr = reg(*ins.rs1) + static_cast<uint64_t>(*ins.imm);
    const T v = static_cast<T>(reg(*ins.rs2));
    std::memcpy(mem_at(addr, sizeof(T), ins.address), &v, sizeof(T));
  }

  void append_output(std::string& out, uint64_t addr, uint64_t len) {
    for (uint64_t i = 0; i < len; ++i)
      out.push_back(static_cast<char>(*mem_at(addr + i, 1, addr)));
  }

  const ProgramImage& image_;
  InterpLimits limits_;
  std::set<uint64_t> leaders_;
  std::vector<DecodedInstruction> stream_;
  std::array<uint64_t, 32> regs_{};
  std::vector<uint8_t> memory_;
  uint64_t mem_base_ = 0;
};

}  // namespace detail

/*! \brief Run the program and collect per-block execution counts. */
inline ExecResult run_and_profile(const ProgramImage& image, const Cfg& cfg,
                                  const InterpLimits& limits = {}) {
  detail::Machine machine(image, cfg, limits);
  ExecResult result = machine.run();
  recompute_f_total(result.profile, cfg);
  if (result.profile.f_total != result.retired)
    throw Error(Stage::profile, "block accounting mismatch: f_total " +
                                    std::to_string(result.profile.f_total) + " vs retired " +
                                    std::to_string(result.retired));
  return result;
}

inline ExecResult run_and_profile(const ProgramImage& image, const InterpLimits& limits = {}) {
  const Cfg cfg = build_cfg(image.decode_all(), image.entry);
  return run_and_profile(image, cfg, limits);
}

/*! \brief Replay with selected occurrences fused to one cycle each.

  Returns the dynamic cycle count where every member instruction of an
  occurrence retires for free except the first, which carries the single
  cycle of the fused instruction.  Occurrences must be non-overlapping.
*/
inline uint64_t replay_fused(const ProgramImage& image, const Cfg& cfg,
                             const std::vector<FusedOccurrence>& occurrences,
                             const InterpLimits& limits = {}) {
  std::map<uint64_t, uint64_t> charge;
  for (const auto& occ : occurrences) {
    if (occ.addresses.empty()) continue;
    const uint64_t first = *std::min_element(occ.addresses.begin(), occ.addresses.end());
    for (uint64_t addr : occ.addresses) {
      if (!charge.emplace(addr, addr == first ? 1 : 0).second)
        throw Error(Stage::profile, "overlapping fused occurrences at " + to_hex(addr));
    }
  }
  detail::Machine machine(image, cfg, limits);
  return machine.run(&charge).fused_cycles;
}

}  // namespace cidre
