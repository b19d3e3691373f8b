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
  \file emit.hpp
  \brief Model, DOT and report emission.

  The model format is a plain-text stand-in for vendor processor-description
  languages: one record per instruction with its encoding template, field
  layout and a straight-line semantic body derived from the canonical graph.
  See docs/formats.md for the grammar.  All emission is deterministic:
  identical inputs produce byte-identical files.
*/

#pragma once

#include "cidre/canonical.hpp"
#include "cidre/encoding.hpp"
#include "cidre/select.hpp"
#include "cidre/support.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace cidre {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string binary_bits(uint32_t value, unsigned width) {
  std::string out(width, '0');
  for (unsigned i = 0; i < width; ++i)
    if (value & (1u << (width - 1 - i))) out[i] = '1';
  return out;
}

/*! \brief Operand names for a canonical graph under its template:
    register inputs become rs1..rs3 in input order, an immediate input
    becomes `imm`, outputs become rd (or rd1/rd2). */
struct OperandNames {
  std::map<size_t, std::string> input_name;  // input index -> name
  std::map<size_t, std::string> output_name; // vertex index -> name
  std::vector<std::string> inputs;           // in declaration order
  std::vector<std::string> outputs;
};

inline OperandNames operand_names(const CanonGraph& g) {
  OperandNames names;
  unsigned next_reg = 1;
  for (size_t i = 0; i < g.inputs.size(); ++i) {
    std::string name = g.inputs[i].kind == ExternalKind::reg
                           ? "rs" + std::to_string(next_reg++)
                           : "imm";
    names.input_name[i] = name;
    names.inputs.push_back(std::move(name));
  }
  std::vector<size_t> outs;
  for (size_t v = 0; v < g.vertices.size(); ++v)
    if (g.vertices[v].is_output) outs.push_back(v);
  for (size_t k = 0; k < outs.size(); ++k) {
    std::string name = outs.size() == 1 ? "rd" : "rd" + std::to_string(k + 1);
    names.output_name[outs[k]] = name;
    names.outputs.push_back(std::move(name));
  }
  return names;
}

inline std::string literal_text(int64_t value) {
  if (value < 0) return "-0x" + to_hex(static_cast<uint64_t>(-value)).substr(2);
  return to_hex(static_cast<uint64_t>(value));
}

/*! \brief Straight-line body in canonical topological order. */
inline std::vector<std::string> semantic_body(const CanonGraph& g, const OperandNames& names) {
  const size_t n = g.vertices.size();
  // Kahn order, lowest canonical index first.
  std::vector<unsigned> indeg(n, 0);
  for (const auto& [src, dst, slot] : g.edges) ++indeg[dst];
  std::vector<size_t> order;
  std::vector<bool> emitted(n, false);
  while (order.size() < n) {
    for (size_t v = 0; v < n; ++v) {
      if (emitted[v] || indeg[v] != 0) continue;
      emitted[v] = true;
      order.push_back(v);
      for (const auto& [src, dst, slot] : g.edges)
        if (src == v) --indeg[dst];
      break;
    }
  }

  std::vector<std::string> lines;
  for (size_t v : order) {
    // Gather operands with a deterministic rank per source kind.
    struct Arg {
      uint8_t slot;
      int rank;
      std::string text;
    };
    std::vector<Arg> args;
    for (const auto& [src, dst, slot] : g.edges)
      if (dst == v) args.push_back({slot, static_cast<int>(src), "t" + std::to_string(src)});
    for (size_t i = 0; i < g.inputs.size(); ++i)
      for (const auto& [dst, slot] : g.inputs[i].feeds)
        if (dst == v) args.push_back({slot, 100 + static_cast<int>(i), names.input_name.at(i)});
    for (const auto& [slot, value] : g.vertices[v].hardcoded)
      args.push_back({slot, 200, literal_text(value)});
    std::sort(args.begin(), args.end(), [](const Arg& a, const Arg& b) {
      if (a.slot != b.slot) return a.slot < b.slot;
      if (a.rank != b.rank) return a.rank < b.rank;
      return a.text < b.text;
    });
    std::string line = "t" + std::to_string(v) + " = " +
                       std::string(mnemonic(g.vertices[v].op)) + "(";
    for (size_t i = 0; i < args.size(); ++i) {
      if (i) line += ", ";
      line += args[i].text;
    }
    line += ")";
    lines.push_back(std::move(line));
  }
  for (size_t v = 0; v < n; ++v) {
    auto it = names.output_name.find(v);
    if (it != names.output_name.end()) lines.push_back(it->second + " = t" + std::to_string(v));
  }
  return lines;
}

inline std::string field_layout_text(const SelectedClass& sel) {
  const EncodingTemplate& t = template_info(sel.template_id);
  std::string out;
  for (const auto& f : t.fields) {
    if (!out.empty()) out += " ";
    out += std::string(f.name) + "[" + std::to_string(f.hi) + ":" + std::to_string(f.lo) + "]";
    if (f.name == "opcode") {
      const uint32_t opcode =
          t.funct3_in_opcode_space ? kFpSpaceOpcodes[sel.funct3] : *f.fixed;
      out += "=" + binary_bits(opcode, f.width());
    } else if (f.name == "funct3") {
      out += "=" + binary_bits(sel.funct3, 3);
    } else if (f.fixed) {
      out += "=" + binary_bits(*f.fixed, f.width());
    }
  }
  return out;
}

}  // namespace detail

/*! \brief Render one instruction record (the `cid_<n>.insn` payload). */
inline std::string render_instruction(const SelectedClass& sel, unsigned index) {
  const EncodingTemplate& t = template_info(sel.template_id);
  const detail::OperandNames names = detail::operand_names(sel.cls.graph);
  std::string out;
  out += "instruction cid_" + std::to_string(index) + "\n";
  out += "template " + std::string(t.name) + "\n";
  const uint32_t opcode = t.funct3_in_opcode_space ? kFpSpaceOpcodes[sel.funct3] : t.opcode;
  out += "opcode " + detail::binary_bits(opcode, 7) + "\n";
  out += "funct3 " + detail::binary_bits(sel.funct3, 3) +
         (t.funct3_in_opcode_space ? " (selects opcode)" : "") + "\n";
  out += "inputs";
  for (const auto& name : names.inputs) out += " " + name;
  out += "\noutputs";
  for (const auto& name : names.outputs) out += " " + name;
  out += "\nfields " + detail::field_layout_text(sel) + "\n";
  out += "body\n";
  for (const auto& line : detail::semantic_body(sel.cls.graph, names)) out += "  " + line + "\n";
  out += "end\n";
  return out;
}

/*! \brief Write the model directory: `index` plus one `cid_<n>.insn` each. */
inline void emit_model(const std::vector<const SelectedClass*>& selection,
                       const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::string index;
  for (size_t i = 0; i < selection.size(); ++i) {
    const SelectedClass& sel = *selection[i];
    const EncodingTemplate& t = template_info(sel.template_id);
    index += "cid_" + std::to_string(i) + " " + std::string(t.name) + " funct3=" +
             std::to_string(sel.funct3) + " size=" + std::to_string(sel.cls.size) +
             " merit=" + std::to_string(sel.merit) + " cf=" + sel.cls.cf.hex() + "\n";
    std::ofstream rec(out_dir + "/cid_" + std::to_string(i) + ".insn");
    rec << render_instruction(sel, static_cast<unsigned>(i));
  }
  std::ofstream out(out_dir + "/index");
  out << "instructions " << selection.size() << "\n" << index;
}

inline void emit_model(const SelectionResult& result, const std::string& out_dir) {
  std::vector<const SelectedClass*> ptrs;
  for (const auto& sel : result.selected) ptrs.push_back(&sel);
  emit_model(ptrs, out_dir);
}

// ---------------------------------------------------------------------------
// DOT rendering.
// ---------------------------------------------------------------------------

/*! \brief DOT text for one block; optional shaded vertex groups.

  Internal vertices are boxes labeled with mnemonics, externals ellipses;
  edges carry RS1/RS2/RS3/IMM labels with `*` on commutative slots; memory
  serialization edges are dashed.
*/
inline std::string emit_dot(const DataFlowGraph& dfg,
                            const std::vector<const VertexSet*>& shaded = {}) {
  static constexpr const char* kFills[] = {"lightblue", "lightsalmon", "palegreen",
                                           "lightgoldenrod", "plum", "lightcyan"};
  std::string out = "digraph \"bb_" + to_hex(dfg.bb_start) + "\" {\n";
  out += "  rankdir=TB;\n";
  for (size_t v = 0; v < dfg.vertices.size(); ++v) {
    std::string attrs = "shape=box,label=\"" + std::string(mnemonic(dfg.vertices[v].op)) + "\"";
    for (size_t g = 0; g < shaded.size(); ++g) {
      if (shaded[g]->test(v)) {
        attrs += ",style=filled,fillcolor=" + std::string(kFills[g % 6]);
        break;
      }
    }
    if (dfg.vertices[v].escapes) attrs += ",peripheries=2";
    out += "  v" + std::to_string(v) + " [" + attrs + "];\n";
  }
  for (size_t x = 0; x < dfg.externals.size(); ++x) {
    const ExternalVertex& ext = dfg.externals[x];
    const std::string label = ext.kind == ExternalKind::reg ? "x" + std::to_string(ext.reg)
                                                            : detail::literal_text(ext.value);
    out += "  e" + std::to_string(x) + " [shape=ellipse,label=\"" + label + "\"];\n";
  }
  for (const auto& e : dfg.edges) {
    const std::string src = e.from.external ? "e" + std::to_string(e.from.index)
                                            : "v" + std::to_string(e.from.index);
    std::string label = slot_name(e.slot);
    if (e.commutative) label += "*";
    out += "  " + src + " -> v" + std::to_string(e.to) + " [label=\"" + label + "\"];\n";
  }
  for (const auto& [u, v] : dfg.mem_edges)
    out += "  v" + std::to_string(u) + " -> v" + std::to_string(v) +
           " [style=dashed,label=\"mem\"];\n";
  out += "}\n";
  return out;
}

inline std::string emit_dot(const DataFlowGraph& dfg, const SubgraphPattern& pattern) {
  return emit_dot(dfg, {&pattern.vertices});
}

/*! \brief Render every block touched by a class, occurrences shaded. */
inline std::string emit_dot(const IsoClass& cls, const std::vector<DataFlowGraph>& dfgs) {
  std::map<uint32_t, std::vector<const VertexSet*>> by_block;
  for (const auto& occ : cls.occurrences) by_block[occ.bb_id].push_back(&occ.pattern.vertices);
  std::string out;
  for (const auto& dfg : dfgs) {
    auto it = by_block.find(dfg.bb_id);
    if (it == by_block.end()) continue;
    out += emit_dot(dfg, it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run report.
// ---------------------------------------------------------------------------

struct BlockSummary {
  uint64_t start = 0;
  size_t n_instructions = 0;
  uint64_t f_bb = 0;
  size_t n_patterns = 0;
};

struct ReportInputs {
  Json config;  // effective configuration echo, defaults included
  std::vector<BlockSummary> blocks;
  size_t total_patterns = 0;
  size_t total_classes = 0;
  const SelectionResult* selection = nullptr;
  std::vector<std::string> warnings;
};

/*! \brief Documented modeling choices echoed into every report. */
inline std::vector<std::string> report_decisions() {
  return {
      "memory operations are ordered by serialize-memory pseudo-dependency edges",
      "immediates are kept as operands widest-first while encoding slots and the IN "
      "budget allow; excess immediates are hardcoded into the pattern",
      "an input constant feeding several vertices counts as one external producer",
      "inner-loop discards remove a candidate for the current outer iteration only; "
      "each outer iteration compares against the committed configuration's execution time",
  };
}

inline Json build_report(const ReportInputs& in) {
  const SelectionResult& sel = *in.selection;
  Json report;
  report["config"] = in.config;
  Json blocks = Json::array();
  for (const auto& b : in.blocks) {
    Json jb;
    jb["start"] = to_hex(b.start);
    jb["instructions"] = b.n_instructions;
    jb["f_bb"] = b.f_bb;
    jb["patterns"] = b.n_patterns;
    blocks.push_back(std::move(jb));
  }
  report["blocks"] = std::move(blocks);
  report["totals"] = Json{{"patterns", in.total_patterns},
                          {"classes", in.total_classes},
                          {"f_total", sel.f_total}};
  Json selected = Json::array();
  for (size_t i = 0; i < sel.selected.size(); ++i) {
    const SelectedClass& cls = sel.selected[i];
    Json jc;
    jc["cid"] = "cid_" + std::to_string(i);
    jc["cf"] = cls.cls.cf.hex();
    jc["size"] = cls.cls.size;
    jc["template"] = std::string(template_info(cls.template_id).name);
    jc["funct3"] = cls.funct3;
    jc["merit"] = cls.merit;
    Json occurrences = Json::array();
    for (const auto& occ : cls.cover) {
      Json jo;
      jo["bb"] = to_hex(occ.bb_start);
      Json addrs = Json::array();
      for (uint64_t a : occ.addresses) addrs.push_back(to_hex(a));
      jo["addresses"] = std::move(addrs);
      jo["weight"] = occ.weight;
      occurrences.push_back(std::move(jo));
    }
    jc["occurrences"] = std::move(occurrences);
    selected.push_back(std::move(jc));
  }
  report["selection"] = std::move(selected);
  report["timing"] = Json{{"t_clk_base_ns", sel.t_clk_base_ns},
                          {"t_clk_custom_ns", sel.t_clk_custom_ns},
                          {"t_ex_base_ns", sel.t_ex_base_ns},
                          {"t_ex_custom_ns", sel.t_ex_custom_ns}};
  report["speedup"] = Json{{"total_merit", sel.total_merit},
                           {"f_custom", sel.f_custom()},
                           {"cycle", sel.cycle_speedup()},
                           {"execution_time", sel.execution_speedup()},
                           {"area_overhead_pct", sel.area_overhead_pct()}};
  report["decisions"] = report_decisions();
  report["warnings"] = in.warnings;
  return report;
}

inline void emit_report(const ReportInputs& in, const std::string& path) {
  std::ofstream out(path);
  out << build_report(in).dump(2) << "\n";
}

}  // namespace cidre
