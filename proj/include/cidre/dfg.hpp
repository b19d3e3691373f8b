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
  \file dfg.hpp
  \brief Per-basic-block data-flow graph with operand-slot-labeled edges.

  Internal vertices are the block's instructions.  External vertices model
  registers that are live on entry and immediate constants; immediate
  externals are shared by value within a block, and x0 reads become the
  immediate constant 0.  Memory operations are additionally chained by
  serialization edges so that no pattern can straddle a memory dependence
  it does not contain.

  Escape flags overapproximate block live-out: a vertex escapes when it is
  the last writer of its destination register in the block, or when its
  result has no in-block consumer.  The overapproximation may overcount
  OUT(S) but never undercounts it.
*/

#pragma once

#include "cidre/cfg.hpp"
#include "cidre/instruction.hpp"
#include "cidre/support.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace cidre {

/*! \brief Operand slot an edge feeds.  Mem edges only serialize memory ops. */
enum class Slot : uint8_t { rs1 = 1, rs2 = 2, rs3 = 3, imm = 4, mem = 5 };

inline const char* slot_name(Slot s) {
  switch (s) {
    case Slot::rs1: return "RS1";
    case Slot::rs2: return "RS2";
    case Slot::rs3: return "RS3";
    case Slot::imm: return "IMM";
    case Slot::mem: return "mem";
  }
  return "?";
}

enum class ExternalKind : uint8_t { reg = 0, imm = 1 };

struct ExternalVertex {
  ExternalKind kind = ExternalKind::reg;
  uint8_t reg = 0;        // register number for kind == reg
  int64_t value = 0;      // constant value for kind == imm
  uint8_t imm_width = 0;  // declared width of the widest use
};

/*! \brief Producer of an operand: either an internal vertex or an external. */
struct Producer {
  bool external = false;
  uint32_t index = 0;

  bool operator==(const Producer&) const = default;
};

struct DfgEdge {
  Producer from;
  uint32_t to = 0;  // internal vertex index
  Slot slot = Slot::rs1;
  bool commutative = false;  // slot belongs to a commutative operation
};

struct DfgVertex {
  OpId op = OpId::Addi;
  uint64_t address = 0;
  bool escapes = false;
  bool forbidden = false;  // catalog default_forbidden
};

struct DataFlowGraph {
  uint32_t bb_id = 0;
  uint64_t bb_start = 0;
  std::vector<DfgVertex> vertices;
  std::vector<ExternalVertex> externals;
  std::vector<DfgEdge> edges;  // operand edges (internal and external producers)
  std::vector<std::pair<uint32_t, uint32_t>> mem_edges;  // memory serialization

  size_t size() const { return vertices.size(); }

  /*! \brief Operand edges into \p v, in slot order. */
  std::vector<const DfgEdge*> in_edges(uint32_t v) const {
    std::vector<const DfgEdge*> out;
    for (const auto& e : edges)
      if (e.to == v) out.push_back(&e);
    return out;
  }

  /*! \brief Per-vertex descendant sets over operand + memory edges
      (reflexive: v is a descendant of itself). */
  std::vector<VertexSet> descendants() const {
    const size_t n = vertices.size();
    std::vector<VertexSet> desc(n, VertexSet(n));
    // Vertices are created in address order, so every edge points forward.
    for (size_t v = n; v-- > 0;) {
      desc[v].set(v);
      for (const auto& e : edges)
        if (!e.from.external && e.from.index == v) desc[v] |= desc[e.to];
      for (const auto& [from, to] : mem_edges)
        if (from == v) desc[v] |= desc[to];
    }
    return desc;
  }
};

/*! \brief Build the data-flow graph of one basic block.

  Def-use chaining binds each register read to the last in-block writer;
  reads without one become external register vertices, x0 reads become the
  immediate 0, and immediate operands become immediate externals shared by
  value.
*/
inline DataFlowGraph build_dfg(const BasicBlock& bb) {
  DataFlowGraph dfg;
  dfg.bb_id = bb.id;
  dfg.bb_start = bb.start_address;

  std::map<uint8_t, uint32_t> last_writer;          // reg -> vertex
  std::map<uint8_t, uint32_t> reg_external;         // reg -> external index
  std::map<int64_t, uint32_t> imm_external;         // value -> external index
  std::vector<bool> has_consumer;
  std::optional<uint32_t> last_mem_op;

  auto imm_ext = [&](int64_t value, uint8_t width) -> Producer {
    auto it = imm_external.find(value);
    uint32_t idx;
    if (it != imm_external.end()) {
      idx = it->second;
      dfg.externals[idx].imm_width = std::max(dfg.externals[idx].imm_width, width);
    } else {
      idx = static_cast<uint32_t>(dfg.externals.size());
      dfg.externals.push_back({ExternalKind::imm, 0, value, width});
      imm_external.emplace(value, idx);
    }
    return Producer{true, idx};
  };

  auto reg_source = [&](uint8_t reg) -> Producer {
    if (reg == 0) return imm_ext(0, 1);
    if (auto it = last_writer.find(reg); it != last_writer.end()) {
      has_consumer[it->second] = true;
      return Producer{false, it->second};
    }
    auto it = reg_external.find(reg);
    uint32_t idx;
    if (it != reg_external.end()) {
      idx = it->second;
    } else {
      idx = static_cast<uint32_t>(dfg.externals.size());
      dfg.externals.push_back({ExternalKind::reg, reg, 0, 0});
      reg_external.emplace(reg, idx);
    }
    return Producer{true, idx};
  };

  for (const auto& ins : bb.instructions) {
    const uint32_t v = static_cast<uint32_t>(dfg.vertices.size());
    const Operation& info = op_info(ins.op);
    dfg.vertices.push_back({ins.op, ins.address, false, info.default_forbidden});
    has_consumer.push_back(false);

    const bool comm = info.commutative;
    if (ins.rs1) dfg.edges.push_back({reg_source(*ins.rs1), v, Slot::rs1, comm});
    if (ins.rs2) dfg.edges.push_back({reg_source(*ins.rs2), v, Slot::rs2, comm});
    if (ins.rs3) dfg.edges.push_back({reg_source(*ins.rs3), v, Slot::rs3, false});
    if (ins.imm && has_imm_data_operand(ins.op))
      dfg.edges.push_back({imm_ext(*ins.imm, ins.imm_width), v, Slot::imm, false});

    if (info.is_load || info.is_store) {
      if (last_mem_op) dfg.mem_edges.emplace_back(*last_mem_op, v);
      last_mem_op = v;
    }
    if (writes_rd(ins.op) && ins.rd && *ins.rd != 0) last_writer[*ins.rd] = v;
  }

  // Escape flags: last writer of its register, or result never consumed.
  std::map<uint8_t, uint32_t> final_writer = last_writer;
  for (uint32_t v = 0; v < dfg.vertices.size(); ++v) {
    const auto& ins = bb.instructions[v];
    if (!writes_rd(ins.op) || !ins.rd || *ins.rd == 0) continue;
    const bool is_final = final_writer.at(*ins.rd) == v;
    dfg.vertices[v].escapes = is_final || !has_consumer[v];
  }
  return dfg;
}

}  // namespace cidre
