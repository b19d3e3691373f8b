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
  \file op.hpp
  \brief RV64IM operation catalog.

  One entry per architectural operation: mnemonic, format class, structural
  flags, and the normalized hardware delay/area placeholders consumed by the
  analytic cost model.  Delay and area values are non-physical defaults and
  are meant to be overridden with technology-calibrated tables.
*/

#pragma once

#include "cidre/support.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace cidre {

enum class OpId : uint8_t {
  Lui, Auipc, Jal, Jalr,
  Beq, Bne, Blt, Bge, Bltu, Bgeu,
  Lb, Lh, Lw, Lbu, Lhu, Lwu, Ld,
  Sb, Sh, Sw, Sd,
  Addi, Slti, Sltiu, Xori, Ori, Andi,
  Slli, Srli, Srai,
  Addiw, Slliw, Srliw, Sraiw,
  Add, Sub, Sll, Slt, Sltu, Xor, Srl, Sra, Or, And,
  Addw, Subw, Sllw, Srlw, Sraw,
  Mul, Mulh, Mulhsu, Mulhu, Div, Divu, Rem, Remu,
  Mulw, Divw, Divuw, Remw, Remuw,
  Fence, Ecall, Ebreak,
};

inline constexpr size_t kNumOps = static_cast<size_t>(OpId::Ebreak) + 1;

/*! \brief Instruction format class; governs operand presence and encoding. */
enum class Format : uint8_t {
  R,       //!< rd, rs1, rs2
  I,       //!< rd, rs1, imm12
  IShift,  //!< rd, rs1, shamt6
  IShiftW, //!< rd, rs1, shamt5
  S,       //!< rs1, rs2, imm12
  B,       //!< rs1, rs2, imm13 (branch offset)
  U,       //!< rd, imm32 (value = imm20 << 12)
  J,       //!< rd, imm21 (jump offset)
  Sys,     //!< no register operands
};

struct Operation {
  OpId id;
  std::string_view mnemonic;
  Format format;
  bool commutative = false;
  bool is_branch = false;
  bool is_jump = false;
  bool is_load = false;
  bool is_store = false;
  bool is_system = false;
  bool default_forbidden = false;
  int sw_cycles = 1;          //!< software latency s(v), CPI 1
  double hw_delay_units = 1.0; //!< normalized combinational delay
  double area_units = 1.0;    //!< normalized area
};

namespace detail {

constexpr Operation alu(OpId id, std::string_view m, Format f, bool comm, double d, double a) {
  Operation op{};
  op.id = id; op.mnemonic = m; op.format = f; op.commutative = comm;
  op.hw_delay_units = d; op.area_units = a;
  return op;
}

constexpr Operation ld(OpId id, std::string_view m) {
  Operation op{};
  op.id = id; op.mnemonic = m; op.format = Format::I;
  op.is_load = true; op.default_forbidden = true;
  return op;
}

constexpr Operation st(OpId id, std::string_view m) {
  Operation op{};
  op.id = id; op.mnemonic = m; op.format = Format::S;
  op.is_store = true; op.default_forbidden = true;
  return op;
}

constexpr Operation br(OpId id, std::string_view m) {
  Operation op{};
  op.id = id; op.mnemonic = m; op.format = Format::B;
  op.is_branch = true; op.default_forbidden = true;
  return op;
}

constexpr Operation sys(OpId id, std::string_view m, Format f) {
  Operation op{};
  op.id = id; op.mnemonic = m; op.format = f;
  op.is_system = true; op.default_forbidden = true;
  return op;
}

// Placeholder normalized delays: integer add = 1.0 reference.
constexpr double kAddDelay = 1.0, kLogicDelay = 0.35, kShiftDelay = 0.9;
constexpr double kCmpDelay = 1.1, kMulDelay = 3.5, kDivDelay = 12.0;
constexpr double kAddArea = 1.0, kLogicArea = 0.5, kShiftArea = 1.2;
constexpr double kCmpArea = 1.1, kMulArea = 8.0, kDivArea = 20.0;

constexpr std::array<Operation, kNumOps> make_catalog() {
  std::array<Operation, kNumOps> ops{};
  auto set = [&](Operation op) { ops[static_cast<size_t>(op.id)] = op; };

  // lui is a plain constant producer; auipc additionally reads the pc, which
  // no custom functional unit can see, so it stays forbidden.
  set(alu(OpId::Lui, "lui", Format::U, false, 0.1, 0.1));
  {
    Operation op = alu(OpId::Auipc, "auipc", Format::U, false, kAddDelay, kAddArea);
    op.default_forbidden = true;
    set(op);
  }
  {
    Operation op{};
    op.id = OpId::Jal; op.mnemonic = "jal"; op.format = Format::J;
    op.is_jump = true; op.default_forbidden = true;
    set(op);
    op.id = OpId::Jalr; op.mnemonic = "jalr"; op.format = Format::I;
    set(op);
  }

  set(br(OpId::Beq, "beq"));
  set(br(OpId::Bne, "bne"));
  set(br(OpId::Blt, "blt"));
  set(br(OpId::Bge, "bge"));
  set(br(OpId::Bltu, "bltu"));
  set(br(OpId::Bgeu, "bgeu"));

  set(ld(OpId::Lb, "lb"));
  set(ld(OpId::Lh, "lh"));
  set(ld(OpId::Lw, "lw"));
  set(ld(OpId::Lbu, "lbu"));
  set(ld(OpId::Lhu, "lhu"));
  set(ld(OpId::Lwu, "lwu"));
  set(ld(OpId::Ld, "ld"));

  set(st(OpId::Sb, "sb"));
  set(st(OpId::Sh, "sh"));
  set(st(OpId::Sw, "sw"));
  set(st(OpId::Sd, "sd"));

  set(alu(OpId::Addi, "addi", Format::I, false, kAddDelay, kAddArea));
  set(alu(OpId::Slti, "slti", Format::I, false, kCmpDelay, kCmpArea));
  set(alu(OpId::Sltiu, "sltiu", Format::I, false, kCmpDelay, kCmpArea));
  set(alu(OpId::Xori, "xori", Format::I, false, kLogicDelay, kLogicArea));
  set(alu(OpId::Ori, "ori", Format::I, false, kLogicDelay, kLogicArea));
  set(alu(OpId::Andi, "andi", Format::I, false, kLogicDelay, kLogicArea));
  set(alu(OpId::Slli, "slli", Format::IShift, false, kShiftDelay, kShiftArea));
  set(alu(OpId::Srli, "srli", Format::IShift, false, kShiftDelay, kShiftArea));
  set(alu(OpId::Srai, "srai", Format::IShift, false, kShiftDelay, kShiftArea));
  set(alu(OpId::Addiw, "addiw", Format::I, false, kAddDelay, kAddArea));
  set(alu(OpId::Slliw, "slliw", Format::IShiftW, false, kShiftDelay, kShiftArea));
  set(alu(OpId::Srliw, "srliw", Format::IShiftW, false, kShiftDelay, kShiftArea));
  set(alu(OpId::Sraiw, "sraiw", Format::IShiftW, false, kShiftDelay, kShiftArea));

  set(alu(OpId::Add, "add", Format::R, true, kAddDelay, kAddArea));
  set(alu(OpId::Sub, "sub", Format::R, false, kAddDelay, kAddArea));
  set(alu(OpId::Sll, "sll", Format::R, false, kShiftDelay, kShiftArea));
  set(alu(OpId::Slt, "slt", Format::R, false, kCmpDelay, kCmpArea));
  set(alu(OpId::Sltu, "sltu", Format::R, false, kCmpDelay, kCmpArea));
  set(alu(OpId::Xor, "xor", Format::R, true, kLogicDelay, kLogicArea));
  set(alu(OpId::Srl, "srl", Format::R, false, kShiftDelay, kShiftArea));
  set(alu(OpId::Sra, "sra", Format::R, false, kShiftDelay, kShiftArea));
  set(alu(OpId::Or, "or", Format::R, true, kLogicDelay, kLogicArea));
  set(alu(OpId::And, "and", Format::R, true, kLogicDelay, kLogicArea));
  set(alu(OpId::Addw, "addw", Format::R, true, kAddDelay, kAddArea));
  set(alu(OpId::Subw, "subw", Format::R, false, kAddDelay, kAddArea));
  set(alu(OpId::Sllw, "sllw", Format::R, false, kShiftDelay, kShiftArea));
  set(alu(OpId::Srlw, "srlw", Format::R, false, kShiftDelay, kShiftArea));
  set(alu(OpId::Sraw, "sraw", Format::R, false, kShiftDelay, kShiftArea));

  set(alu(OpId::Mul, "mul", Format::R, true, kMulDelay, kMulArea));
  set(alu(OpId::Mulh, "mulh", Format::R, true, kMulDelay, kMulArea));
  set(alu(OpId::Mulhsu, "mulhsu", Format::R, false, kMulDelay, kMulArea));
  set(alu(OpId::Mulhu, "mulhu", Format::R, true, kMulDelay, kMulArea));
  set(alu(OpId::Div, "div", Format::R, false, kDivDelay, kDivArea));
  set(alu(OpId::Divu, "divu", Format::R, false, kDivDelay, kDivArea));
  set(alu(OpId::Rem, "rem", Format::R, false, kDivDelay, kDivArea));
  set(alu(OpId::Remu, "remu", Format::R, false, kDivDelay, kDivArea));
  set(alu(OpId::Mulw, "mulw", Format::R, true, kMulDelay, kMulArea));
  set(alu(OpId::Divw, "divw", Format::R, false, kDivDelay, kDivArea));
  set(alu(OpId::Divuw, "divuw", Format::R, false, kDivDelay, kDivArea));
  set(alu(OpId::Remw, "remw", Format::R, false, kDivDelay, kDivArea));
  set(alu(OpId::Remuw, "remuw", Format::R, false, kDivDelay, kDivArea));

  set(sys(OpId::Fence, "fence", Format::I));
  set(sys(OpId::Ecall, "ecall", Format::Sys));
  set(sys(OpId::Ebreak, "ebreak", Format::Sys));

  return ops;
}

inline constexpr std::array<Operation, kNumOps> kCatalog = make_catalog();

}  // namespace detail

inline const Operation& op_info(OpId id) { return detail::kCatalog[static_cast<size_t>(id)]; }

inline std::string_view mnemonic(OpId id) { return op_info(id).mnemonic; }

inline std::optional<OpId> op_from_mnemonic(std::string_view name) {
  for (const auto& op : detail::kCatalog)
    if (op.mnemonic == name) return op.id;
  return std::nullopt;
}

/*! \brief True when the operation's immediate is a data operand of the
    computation (as opposed to a control-flow offset). */
inline bool has_imm_data_operand(OpId id) {
  switch (op_info(id).format) {
    case Format::I:
    case Format::IShift:
    case Format::IShiftW:
    case Format::S:
    case Format::U:
      return true;
    default:
      return false;
  }
}

inline bool writes_rd(OpId id) {
  if (id == OpId::Fence) return false;  // rd/rs1 are hint fields only
  switch (op_info(id).format) {
    case Format::R:
    case Format::I:
    case Format::IShift:
    case Format::IShiftW:
    case Format::U:
    case Format::J:
      return true;
    default:
      return false;
  }
}

}  // namespace cidre
