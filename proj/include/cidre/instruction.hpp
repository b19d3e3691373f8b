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
  \file instruction.hpp
  \brief RV64IM 32-bit instruction decoder and encoder.

  Exactly the RV64IM base encodings are accepted.  Compressed (16-bit)
  encodings, the floating-point extensions and CSR instructions are rejected
  with a decode error instead of being skipped, so that control-flow recovery
  never operates on a partially decoded stream.
*/

#pragma once

#include "cidre/op.hpp"
#include "cidre/support.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace cidre {

struct DecodedInstruction {
  uint64_t address = 0;
  OpId op = OpId::Addi;
  std::optional<uint8_t> rd;
  std::optional<uint8_t> rs1;
  std::optional<uint8_t> rs2;
  std::optional<uint8_t> rs3;  // unused by RV64IM; reserved for R4 forms
  std::optional<int64_t> imm;
  uint8_t imm_width = 0;  // declared two's-complement width of imm
  uint32_t raw = 0;

  bool is_branch() const { return op_info(op).is_branch; }
  bool is_jump() const { return op_info(op).is_jump; }
  bool is_load() const { return op_info(op).is_load; }
  bool is_store() const { return op_info(op).is_store; }
  bool is_system() const { return op_info(op).is_system; }

  bool operator==(const DecodedInstruction& other) const {
    return op == other.op && rd == other.rd && rs1 == other.rs1 && rs2 == other.rs2 &&
           rs3 == other.rs3 && imm == other.imm;
  }
};

namespace detail {

inline uint32_t bits(uint32_t w, unsigned hi, unsigned lo) {
  return (w >> lo) & ((1u << (hi - lo + 1)) - 1);
}

inline int64_t sext(uint64_t v, unsigned width) {
  uint64_t m = 1ull << (width - 1);
  return static_cast<int64_t>((v ^ m) - m);
}

[[noreturn]] inline void decode_fail(uint32_t word, uint64_t addr, const std::string& why) {
  throw Error(Stage::decode,
              "cannot decode word 0x" + to_hex_word(word) + " at " + to_hex(addr) + ": " + why);
}

}  // namespace detail

/*! \brief Decode one 32-bit RV64IM machine word.

  Throws a decode-stage Error for reserved or non-RV64IM encodings; 16-bit
  compressed encodings are reported as unsupported rather than unknown.
*/
inline DecodedInstruction decode(uint32_t word, uint64_t address) {
  using detail::bits;
  using detail::decode_fail;
  using detail::sext;

  if ((word & 0x3) != 0x3) decode_fail(word, address, "compressed encoding unsupported");
  if (bits(word, 4, 2) == 0x7) decode_fail(word, address, "encoding wider than 32 bits");

  DecodedInstruction ins;
  ins.address = address;
  ins.raw = word;

  const uint32_t opcode = bits(word, 6, 0);
  const uint8_t rd = static_cast<uint8_t>(bits(word, 11, 7));
  const uint8_t funct3 = static_cast<uint8_t>(bits(word, 14, 12));
  const uint8_t rs1 = static_cast<uint8_t>(bits(word, 19, 15));
  const uint8_t rs2 = static_cast<uint8_t>(bits(word, 24, 20));
  const uint8_t funct7 = static_cast<uint8_t>(bits(word, 31, 25));

  auto i_type = [&](OpId op) {
    ins.op = op;
    ins.rd = rd;
    ins.rs1 = rs1;
    ins.imm = sext(bits(word, 31, 20), 12);
    ins.imm_width = 12;
  };
  auto shift64 = [&](OpId op) {
    ins.op = op;
    ins.rd = rd;
    ins.rs1 = rs1;
    ins.imm = static_cast<int64_t>(bits(word, 25, 20));
    ins.imm_width = 7;  // shamt 0..63, kept non-negative
  };
  auto shift32 = [&](OpId op) {
    if (bits(word, 25, 25) != 0) decode_fail(word, address, "W-shift shamt exceeds 31");
    ins.op = op;
    ins.rd = rd;
    ins.rs1 = rs1;
    ins.imm = static_cast<int64_t>(bits(word, 24, 20));
    ins.imm_width = 6;
  };
  auto r_type = [&](OpId op) {
    ins.op = op;
    ins.rd = rd;
    ins.rs1 = rs1;
    ins.rs2 = rs2;
  };

  switch (opcode) {
    case 0x37:  // lui
      ins.op = OpId::Lui;
      ins.rd = rd;
      ins.imm = sext(bits(word, 31, 12), 20) << 12;
      ins.imm_width = 32;
      break;
    case 0x17:  // auipc
      ins.op = OpId::Auipc;
      ins.rd = rd;
      ins.imm = sext(bits(word, 31, 12), 20) << 12;
      ins.imm_width = 32;
      break;
    case 0x6f: {  // jal
      ins.op = OpId::Jal;
      ins.rd = rd;
      uint64_t imm = (bits(word, 31, 31) << 20) | (bits(word, 19, 12) << 12) |
                     (bits(word, 20, 20) << 11) | (bits(word, 30, 21) << 1);
      ins.imm = sext(imm, 21);
      ins.imm_width = 21;
      break;
    }
    case 0x67:
      if (funct3 != 0) decode_fail(word, address, "bad jalr funct3");
      i_type(OpId::Jalr);
      break;
    case 0x63: {  // branches
      static constexpr OpId table[8] = {OpId::Beq, OpId::Bne, OpId::Beq,  OpId::Beq,
                                        OpId::Blt, OpId::Bge, OpId::Bltu, OpId::Bgeu};
      if (funct3 == 2 || funct3 == 3) decode_fail(word, address, "bad branch funct3");
      ins.op = table[funct3];
      ins.rs1 = rs1;
      ins.rs2 = rs2;
      uint64_t imm = (bits(word, 31, 31) << 12) | (bits(word, 7, 7) << 11) |
                     (bits(word, 30, 25) << 5) | (bits(word, 11, 8) << 1);
      ins.imm = sext(imm, 13);
      ins.imm_width = 13;
      break;
    }
    case 0x03: {  // loads
      static constexpr OpId table[8] = {OpId::Lb,  OpId::Lh,  OpId::Lw,  OpId::Ld,
                                        OpId::Lbu, OpId::Lhu, OpId::Lwu, OpId::Lb};
      if (funct3 == 7) decode_fail(word, address, "bad load funct3");
      i_type(table[funct3]);
      break;
    }
    case 0x23: {  // stores
      static constexpr OpId table[4] = {OpId::Sb, OpId::Sh, OpId::Sw, OpId::Sd};
      if (funct3 > 3) decode_fail(word, address, "bad store funct3");
      ins.op = table[funct3];
      ins.rs1 = rs1;
      ins.rs2 = rs2;
      ins.imm = sext((bits(word, 31, 25) << 5) | bits(word, 11, 7), 12);
      ins.imm_width = 12;
      break;
    }
    case 0x13:  // op-imm
      switch (funct3) {
        case 0: i_type(OpId::Addi); break;
        case 1:
          if (bits(word, 31, 26) != 0x00) decode_fail(word, address, "bad slli funct6");
          shift64(OpId::Slli);
          break;
        case 2: i_type(OpId::Slti); break;
        case 3: i_type(OpId::Sltiu); break;
        case 4: i_type(OpId::Xori); break;
        case 5:
          if (bits(word, 31, 26) == 0x00) shift64(OpId::Srli);
          else if (bits(word, 31, 26) == 0x10) shift64(OpId::Srai);
          else decode_fail(word, address, "bad shift funct6");
          break;
        case 6: i_type(OpId::Ori); break;
        case 7: i_type(OpId::Andi); break;
      }
      break;
    case 0x1b:  // op-imm-32
      switch (funct3) {
        case 0: i_type(OpId::Addiw); break;
        case 1:
          if (funct7 != 0x00) decode_fail(word, address, "bad slliw funct7");
          shift32(OpId::Slliw);
          break;
        case 5:
          if (funct7 == 0x00) shift32(OpId::Srliw);
          else if (funct7 == 0x20) shift32(OpId::Sraiw);
          else decode_fail(word, address, "bad W-shift funct7");
          break;
        default: decode_fail(word, address, "bad op-imm-32 funct3");
      }
      break;
    case 0x33:  // op
      if (funct7 == 0x00) {
        static constexpr OpId table[8] = {OpId::Add, OpId::Sll, OpId::Slt, OpId::Sltu,
                                          OpId::Xor, OpId::Srl, OpId::Or,  OpId::And};
        r_type(table[funct3]);
      } else if (funct7 == 0x20) {
        if (funct3 == 0) r_type(OpId::Sub);
        else if (funct3 == 5) r_type(OpId::Sra);
        else decode_fail(word, address, "bad op funct3 under funct7=0x20");
      } else if (funct7 == 0x01) {
        static constexpr OpId table[8] = {OpId::Mul, OpId::Mulh, OpId::Mulhsu, OpId::Mulhu,
                                          OpId::Div, OpId::Divu, OpId::Rem,    OpId::Remu};
        r_type(table[funct3]);
      } else {
        decode_fail(word, address, "bad op funct7");
      }
      break;
    case 0x3b:  // op-32
      if (funct7 == 0x00) {
        if (funct3 == 0) r_type(OpId::Addw);
        else if (funct3 == 1) r_type(OpId::Sllw);
        else if (funct3 == 5) r_type(OpId::Srlw);
        else decode_fail(word, address, "bad op-32 funct3");
      } else if (funct7 == 0x20) {
        if (funct3 == 0) r_type(OpId::Subw);
        else if (funct3 == 5) r_type(OpId::Sraw);
        else decode_fail(word, address, "bad op-32 funct3 under funct7=0x20");
      } else if (funct7 == 0x01) {
        static constexpr OpId table[8] = {OpId::Mulw, OpId::Mulw, OpId::Mulw, OpId::Mulw,
                                          OpId::Divw, OpId::Divuw, OpId::Remw, OpId::Remuw};
        if (funct3 != 0 && funct3 < 4) decode_fail(word, address, "bad op-32 M funct3");
        r_type(table[funct3]);
      } else {
        decode_fail(word, address, "bad op-32 funct7");
      }
      break;
    case 0x0f:  // fence; fence.i (Zifencei) is not part of RV64IM
      if (funct3 != 0) decode_fail(word, address, "unsupported fence variant");
      ins.op = OpId::Fence;
      ins.rd = rd;
      ins.rs1 = rs1;
      ins.imm = static_cast<int64_t>(bits(word, 31, 20));
      ins.imm_width = 13;  // fm/pred/succ bits, kept non-negative
      break;
    case 0x73:  // system
      if (word == 0x00000073) ins.op = OpId::Ecall;
      else if (word == 0x00100073) ins.op = OpId::Ebreak;
      else decode_fail(word, address, "CSR/system encodings unsupported");
      break;
    default:
      decode_fail(word, address, "reserved opcode");
  }
  return ins;
}

namespace detail {

[[noreturn]] inline void encode_fail(const DecodedInstruction& ins, const std::string& why) {
  throw Error(Stage::decode, std::string("cannot encode ") + std::string(mnemonic(ins.op)) +
                                 ": " + why);
}

inline uint32_t reg_field(const DecodedInstruction& ins, const std::optional<uint8_t>& r,
                          const char* name) {
  if (!r) encode_fail(ins, std::string("missing ") + name);
  if (*r > 31) encode_fail(ins, std::string(name) + " out of range");
  return *r;
}

inline int64_t imm_value(const DecodedInstruction& ins) {
  if (!ins.imm) encode_fail(ins, "missing imm");
  return *ins.imm;
}

}  // namespace detail

/*! \brief Encode a decoded instruction back into its 32-bit machine word.

  Inverse of decode(); operand values outside their field ranges raise an
  error naming the offending field.
*/
inline uint32_t encode(const DecodedInstruction& ins) {
  using detail::encode_fail;
  using detail::imm_value;
  using detail::reg_field;

  const Operation& info = op_info(ins.op);
  auto rd = [&] { return reg_field(ins, ins.rd, "rd"); };
  auto rs1 = [&] { return reg_field(ins, ins.rs1, "rs1"); };
  auto rs2 = [&] { return reg_field(ins, ins.rs2, "rs2"); };

  auto funct3_of = [&]() -> uint32_t {
    switch (ins.op) {
      case OpId::Jalr: case OpId::Beq: case OpId::Lb: case OpId::Sb:
      case OpId::Addi: case OpId::Addiw: case OpId::Add: case OpId::Sub:
      case OpId::Addw: case OpId::Subw: case OpId::Mul: case OpId::Mulw:
      case OpId::Fence:
        return 0;
      case OpId::Bne: case OpId::Lh: case OpId::Sh: case OpId::Slli:
      case OpId::Slliw: case OpId::Sll: case OpId::Sllw: case OpId::Mulh:
        return 1;
      case OpId::Lw: case OpId::Sw: case OpId::Slti: case OpId::Slt: case OpId::Mulhsu:
        return 2;
      case OpId::Ld: case OpId::Sd: case OpId::Sltiu: case OpId::Sltu: case OpId::Mulhu:
        return 3;
      case OpId::Blt: case OpId::Lbu: case OpId::Xori: case OpId::Xor: case OpId::Div:
      case OpId::Divw:
        return 4;
      case OpId::Bge: case OpId::Lhu: case OpId::Srli: case OpId::Srai: case OpId::Srliw:
      case OpId::Sraiw: case OpId::Srl: case OpId::Sra: case OpId::Srlw: case OpId::Sraw:
      case OpId::Divu: case OpId::Divuw:
        return 5;
      case OpId::Bltu: case OpId::Lwu: case OpId::Ori: case OpId::Or: case OpId::Rem:
      case OpId::Remw:
        return 6;
      case OpId::Bgeu: case OpId::Andi: case OpId::And: case OpId::Remu: case OpId::Remuw:
        return 7;
      default:
        return 0;
    }
  };

  auto check_simm = [&](int64_t v, unsigned bits, const char* what) {
    if (!fits_signed(v, bits)) encode_fail(ins, std::string(what) + " exceeds field width");
  };

  auto opcode_i = [&](uint32_t opcode) {
    int64_t imm = imm_value(ins);
    check_simm(imm, 12, "imm");
    return (static_cast<uint32_t>(imm & 0xfff) << 20) | (rs1() << 15) | (funct3_of() << 12) |
           (rd() << 7) | opcode;
  };

  switch (info.format) {
    case Format::R: {
      uint32_t funct7 = 0x00;
      switch (ins.op) {
        case OpId::Sub: case OpId::Sra: case OpId::Subw: case OpId::Sraw: funct7 = 0x20; break;
        case OpId::Mul: case OpId::Mulh: case OpId::Mulhsu: case OpId::Mulhu:
        case OpId::Div: case OpId::Divu: case OpId::Rem: case OpId::Remu:
        case OpId::Mulw: case OpId::Divw: case OpId::Divuw: case OpId::Remw: case OpId::Remuw:
          funct7 = 0x01;
          break;
        default: break;
      }
      uint32_t opcode = 0x33;
      switch (ins.op) {
        case OpId::Addw: case OpId::Subw: case OpId::Sllw: case OpId::Srlw: case OpId::Sraw:
        case OpId::Mulw: case OpId::Divw: case OpId::Divuw: case OpId::Remw: case OpId::Remuw:
          opcode = 0x3b;
          break;
        default: break;
      }
      return (funct7 << 25) | (rs2() << 20) | (rs1() << 15) | (funct3_of() << 12) | (rd() << 7) |
             opcode;
    }
    case Format::I: {
      uint32_t opcode = 0x13;
      if (info.is_load) opcode = 0x03;
      else if (ins.op == OpId::Jalr) opcode = 0x67;
      else if (ins.op == OpId::Addiw) opcode = 0x1b;
      else if (ins.op == OpId::Fence) opcode = 0x0f;
      if (ins.op == OpId::Fence) {
        int64_t imm = imm_value(ins);
        if (imm < 0 || imm > 0xfff) encode_fail(ins, "fence bits out of range");
        return (static_cast<uint32_t>(imm) << 20) | (rs1() << 15) | (rd() << 7) | opcode;
      }
      return opcode_i(opcode);
    }
    case Format::IShift: {
      int64_t sh = imm_value(ins);
      if (sh < 0 || sh > 63) encode_fail(ins, "shamt out of range");
      uint32_t funct6 = ins.op == OpId::Srai ? 0x10 : 0x00;
      return (funct6 << 26) | (static_cast<uint32_t>(sh) << 20) | (rs1() << 15) |
             (funct3_of() << 12) | (rd() << 7) | 0x13;
    }
    case Format::IShiftW: {
      int64_t sh = imm_value(ins);
      if (sh < 0 || sh > 31) encode_fail(ins, "shamt out of range");
      uint32_t funct7 = ins.op == OpId::Sraiw ? 0x20 : 0x00;
      return (funct7 << 25) | (static_cast<uint32_t>(sh) << 20) | (rs1() << 15) |
             (funct3_of() << 12) | (rd() << 7) | 0x1b;
    }
    case Format::S: {
      int64_t imm = imm_value(ins);
      check_simm(imm, 12, "imm");
      uint32_t u = static_cast<uint32_t>(imm & 0xfff);
      return ((u >> 5) << 25) | (rs2() << 20) | (rs1() << 15) | (funct3_of() << 12) |
             ((u & 0x1f) << 7) | 0x23;
    }
    case Format::B: {
      int64_t imm = imm_value(ins);
      check_simm(imm, 13, "offset");
      if (imm & 1) encode_fail(ins, "offset must be even");
      uint32_t u = static_cast<uint32_t>(imm & 0x1fff);
      return (((u >> 12) & 1) << 31) | (((u >> 5) & 0x3f) << 25) | (rs2() << 20) | (rs1() << 15) |
             (funct3_of() << 12) | (((u >> 1) & 0xf) << 8) | (((u >> 11) & 1) << 7) | 0x63;
    }
    case Format::U: {
      int64_t imm = imm_value(ins);
      if (imm & 0xfff) encode_fail(ins, "low 12 bits must be zero");
      check_simm(imm, 32, "imm");
      uint32_t u = static_cast<uint32_t>((imm >> 12) & 0xfffff);
      return (u << 12) | (rd() << 7) | (ins.op == OpId::Lui ? 0x37u : 0x17u);
    }
    case Format::J: {
      int64_t imm = imm_value(ins);
      check_simm(imm, 21, "offset");
      if (imm & 1) encode_fail(ins, "offset must be even");
      uint32_t u = static_cast<uint32_t>(imm & 0x1fffff);
      return (((u >> 20) & 1) << 31) | (((u >> 1) & 0x3ff) << 21) | (((u >> 11) & 1) << 20) |
             (((u >> 12) & 0xff) << 12) | (rd() << 7) | 0x6f;
    }
    case Format::Sys:
      return ins.op == OpId::Ecall ? 0x00000073u : 0x00100073u;
  }
  encode_fail(ins, "unreachable format");
}

/*! \brief Render as `mnemonic rd, rs1, rs2`-style assembly text with x-names. */
inline std::string to_string(const DecodedInstruction& ins) {
  std::string out{mnemonic(ins.op)};
  auto reg = [](uint8_t r) { return "x" + std::to_string(r); };
  bool first = true;
  auto sep = [&]() -> std::string {
    if (first) {
      first = false;
      return " ";
    }
    return ", ";
  };
  const Operation& info = op_info(ins.op);
  if (ins.rd && info.format != Format::S && info.format != Format::B) out += sep() + reg(*ins.rd);
  if (info.is_load) {
    out += sep() + std::to_string(*ins.imm) + "(" + reg(*ins.rs1) + ")";
    return out;
  }
  if (info.is_store) {
    out += sep() + reg(*ins.rs2) + ", " + std::to_string(*ins.imm) + "(" + reg(*ins.rs1) + ")";
    return out;
  }
  if (ins.rs1) out += sep() + reg(*ins.rs1);
  if (ins.rs2) out += sep() + reg(*ins.rs2);
  if (ins.imm && ins.op != OpId::Fence) out += sep() + std::to_string(*ins.imm);
  return out;
}

}  // namespace cidre
