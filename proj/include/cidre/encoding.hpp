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
  \file encoding.hpp
  \brief Custom-instruction encoding templates.

  Five templates cover the supported I/O shapes.  rs/rd fields are 5 bits,
  immediate fields 6 or 12 bits, and a 3-bit funct3 distinguishes up to
  eight instructions per template.  The (3,2) shape needs 25 register bits,
  which leaves no room for a contiguous funct3 field next to the 7-bit
  opcode; since the baseline processor has no floating-point support, that
  template's funct3 selects one of eight opcodes from the unused FP opcode
  space instead (nominal opcode 1010011).  See docs/formats.md.
*/

#pragma once

#include "cidre/canonical.hpp"
#include "cidre/enumerate.hpp"
#include "cidre/support.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cidre {

enum class TemplateId : uint8_t { R2_1_REG, R2_1_IMM12, R3_1_REG, R3_1_IMM6, R3_2_REG };

struct FieldSpec {
  std::string_view name;
  uint8_t lo = 0;
  uint8_t hi = 0;
  std::optional<uint32_t> fixed;  // constant bits (opcode, pads)

  unsigned width() const { return hi - lo + 1; }
};

struct EncodingTemplate {
  TemplateId id;
  std::string_view name;
  unsigned reg_inputs;
  unsigned imm_inputs;
  unsigned imm_width;
  unsigned outputs;
  uint32_t opcode;  // nominal 7-bit opcode value
  bool funct3_in_opcode_space;
  std::vector<FieldSpec> fields;
};

// Custom opcode assignments: CUSTOM-0, CUSTOM-1, CUSTOM-3; the (3,2)
// template nominally claims the FP opcode 1010011.
inline constexpr uint32_t kOpcodeCustom0 = 0b0001011;
inline constexpr uint32_t kOpcodeCustom1 = 0b0101011;
inline constexpr uint32_t kOpcodeCustom3 = 0b1111011;
inline constexpr uint32_t kOpcodeFpSpace = 0b1010011;

/*! \brief The funct3 value of an R3_2_REG instruction selects an opcode from
    the unused floating-point encoding space. */
inline constexpr std::array<uint32_t, 8> kFpSpaceOpcodes = {
    0b1010011, 0b1000011, 0b1000111, 0b1001011, 0b1001111, 0b0000111, 0b0100111, 0b1010111};

inline const std::vector<EncodingTemplate>& all_templates() {
  static const std::vector<EncodingTemplate> templates = {
      {TemplateId::R2_1_REG, "R2_1_REG", 2, 0, 0, 1, kOpcodeCustom0, false,
       {{"opcode", 0, 6, kOpcodeCustom0},
        {"rd", 7, 11, std::nullopt},
        {"funct3", 12, 14, std::nullopt},
        {"rs1", 15, 19, std::nullopt},
        {"rs2", 20, 24, std::nullopt},
        {"funct7", 25, 31, 0}}},
      {TemplateId::R2_1_IMM12, "R2_1_IMM12", 1, 1, 12, 1, kOpcodeCustom1, false,
       {{"opcode", 0, 6, kOpcodeCustom1},
        {"rd", 7, 11, std::nullopt},
        {"funct3", 12, 14, std::nullopt},
        {"rs1", 15, 19, std::nullopt},
        {"imm12", 20, 31, std::nullopt}}},
      {TemplateId::R3_1_REG, "R3_1_REG", 3, 0, 0, 1, kOpcodeCustom0, false,
       {{"opcode", 0, 6, kOpcodeCustom0},
        {"rd", 7, 11, std::nullopt},
        {"funct3", 12, 14, std::nullopt},
        {"rs1", 15, 19, std::nullopt},
        {"rs2", 20, 24, std::nullopt},
        {"funct2", 25, 26, 1},  // distinguishes the R4 form from R2_1_REG
        {"rs3", 27, 31, std::nullopt}}},
      {TemplateId::R3_1_IMM6, "R3_1_IMM6", 2, 1, 6, 1, kOpcodeCustom3, false,
       {{"opcode", 0, 6, kOpcodeCustom3},
        {"rd", 7, 11, std::nullopt},
        {"funct3", 12, 14, std::nullopt},
        {"rs1", 15, 19, std::nullopt},
        {"rs2", 20, 24, std::nullopt},
        {"imm6", 25, 30, std::nullopt},
        {"pad", 31, 31, 0}}},
      {TemplateId::R3_2_REG, "R3_2_REG", 3, 0, 0, 2, kOpcodeFpSpace, true,
       {{"opcode", 0, 6, std::nullopt},  // kFpSpaceOpcodes[funct3]
        {"rd1", 7, 11, std::nullopt},
        {"rd2", 12, 16, std::nullopt},
        {"rs1", 17, 21, std::nullopt},
        {"rs2", 22, 26, std::nullopt},
        {"rs3", 27, 31, std::nullopt}}},
  };
  return templates;
}

inline const EncodingTemplate& template_info(TemplateId id) {
  return all_templates()[static_cast<size_t>(id)];
}

/*! \brief Templates available for a run's I/O shape, narrowest first. */
inline std::vector<TemplateId> templates_for_shape(unsigned in_max, unsigned out_max) {
  std::vector<TemplateId> out = {TemplateId::R2_1_REG, TemplateId::R2_1_IMM12};
  if (in_max >= 3) {
    out.push_back(TemplateId::R3_1_REG);
    out.push_back(TemplateId::R3_1_IMM6);
  }
  if (out_max >= 2) out.push_back(TemplateId::R3_2_REG);
  return out;
}

/*! \brief Whether a class shape is encodable under a template. */
inline bool template_fits(const EncodingTemplate& t, const CanonGraph& g,
                          unsigned run_imm_width) {
  if (g.register_inputs() > t.reg_inputs) return false;
  if (g.immediate_inputs() > t.imm_inputs) return false;
  if (g.immediate_inputs() > 0 && run_imm_width > t.imm_width) return false;
  return g.out_count <= t.outputs;
}

}  // namespace cidre
