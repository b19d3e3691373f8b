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
  \file enumerate.hpp
  \brief Exhaustive enumeration of valid candidate subgraphs.

  Candidates are induced subgraphs that are convex, free of forbidden
  operations and within the I/O constraints.  The search grows patterns one
  vertex at a time in reverse topological order, so that a new vertex is
  always upstream of every member.  In that order two prunes are exact:

   - convexity: a violation always runs through an already-decided vertex,
     so it can be detected on insertion and never repaired later;
   - outputs: all consumers of a new vertex are decided, so |OUT| only grows.

  Inputs are pruned with a lower bound (register externals plus decided-out
  internal producers can never be internalized).  Both connected and
  disconnected patterns are produced, capped at a configurable component
  count.
*/

#pragma once

#include "cidre/dfg.hpp"
#include "cidre/support.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace cidre {

struct ConstraintConfig {
  unsigned in_max = 3;
  unsigned out_max = 1;
  unsigned u_max = 8;
  std::set<OpId> forbidden_extra;  // on top of the catalog defaults
  unsigned min_pattern_size = 2;
  unsigned max_components = 2;
  uint64_t candidate_cap = 10'000'000;  // explored subsets per block

  bool is_forbidden(OpId op) const {
    return op_info(op).default_forbidden || forbidden_extra.count(op) != 0;
  }

  /*! \brief Immediate operand slots of the run's encoding templates. */
  unsigned imm_slot_count() const { return out_max == 2 ? 0u : 1u; }
  unsigned imm_slot_width() const {
    if (out_max == 2) return 0;
    return in_max == 2 ? 12u : 6u;
  }

  void validate() const {
    const bool shape_ok = (in_max == 2 && out_max == 1) || (in_max == 3 && out_max == 1) ||
                          (in_max == 3 && out_max == 2);
    if (!shape_ok)
      throw Error(Stage::config, "unsupported I/O shape (" + std::to_string(in_max) + "," +
                                     std::to_string(out_max) + "); supported: 2,1 3,1 3,2");
    // Eight funct3 slots per encoding template; see encoding.hpp for the
    // per-shape template lists (2 / 4 / 5 templates).
    const unsigned templates = in_max == 2 ? 2u : (out_max == 1 ? 4u : 5u);
    if (u_max < 1 || u_max > 8 * templates)
      throw Error(Stage::config, "u_max must be in [1, " + std::to_string(8 * templates) +
                                     "] for this I/O shape");
    if (min_pattern_size < 1) throw Error(Stage::config, "min_pattern_size must be >= 1");
    if (max_components < 1) throw Error(Stage::config, "max_components must be >= 1");
  }
};

struct HardcodedImm {
  uint32_t vertex = 0;  // consumer vertex
  Slot slot = Slot::imm;
  int64_t value = 0;

  auto operator<=>(const HardcodedImm&) const = default;
};

struct SubgraphPattern {
  uint32_t bb_id = 0;
  VertexSet vertices;
  unsigned in_count = 0;
  unsigned out_count = 0;
  std::vector<HardcodedImm> hardcoded_imms;
  std::vector<uint32_t> kept_imm_externals;  // external indices kept as operands
  unsigned size = 0;
  bool connected = true;
};

struct IoCounts {
  unsigned in_count = 0;
  unsigned out_count = 0;
  std::vector<HardcodedImm> hardcoded;
  std::vector<uint32_t> kept_imm_externals;
};

/*! \brief Convexity test: no path between two members passes outside S. */
inline bool is_convex(const DataFlowGraph& dfg, const VertexSet& members) {
  const auto desc = dfg.descendants();
  const size_t n = dfg.size();
  VertexSet downstream(n);  // vertices reachable from S, S excluded
  for (size_t u = members.find_first(); u != VertexSet::npos; u = members.find_next(u))
    downstream |= desc[u];
  downstream -= members;
  for (size_t w = downstream.find_first(); w != VertexSet::npos; w = downstream.find_next(w)) {
    VertexSet back = desc[w];
    back &= members;
    if (back.any()) return false;
  }
  return true;
}

/*! \brief Count I/O of a candidate and split immediates into kept/hardcoded.

  Inputs are the distinct producers outside S (register externals and
  internal vertices alike) plus the immediates kept as operands.  Immediates
  are kept widest-first while they fit the run's immediate slot and the
  remaining IN budget; all others are hardcoded into the pattern.
*/
inline IoCounts io_counts(const DataFlowGraph& dfg, const VertexSet& members,
                          const ConstraintConfig& cfg) {
  IoCounts io;
  std::set<uint32_t> ext_regs, internal_producers, imm_exts;
  std::map<uint32_t, uint64_t> imm_first_use;  // external -> lowest consumer address

  for (const auto& e : dfg.edges) {
    if (!members.test(e.to)) continue;
    if (e.from.external) {
      const ExternalVertex& ext = dfg.externals[e.from.index];
      if (ext.kind == ExternalKind::reg) {
        ext_regs.insert(e.from.index);
      } else {
        imm_exts.insert(e.from.index);
        auto [it, fresh] = imm_first_use.emplace(e.from.index, dfg.vertices[e.to].address);
        if (!fresh) it->second = std::min(it->second, dfg.vertices[e.to].address);
      }
    } else if (!members.test(e.from.index)) {
      internal_producers.insert(e.from.index);
    }
  }

  const unsigned reg_inputs = static_cast<unsigned>(ext_regs.size() + internal_producers.size());

  // Keep order: widest first, then lowest first-use address.
  std::vector<uint32_t> fitting;
  for (uint32_t idx : imm_exts)
    if (fits_signed(dfg.externals[idx].value, cfg.imm_slot_width())) fitting.push_back(idx);
  std::sort(fitting.begin(), fitting.end(), [&](uint32_t a, uint32_t b) {
    const unsigned wa = signed_bit_width(dfg.externals[a].value);
    const unsigned wb = signed_bit_width(dfg.externals[b].value);
    if (wa != wb) return wa > wb;
    return imm_first_use.at(a) < imm_first_use.at(b);
  });
  const unsigned budget =
      std::min(cfg.imm_slot_count(), reg_inputs >= cfg.in_max ? 0u : cfg.in_max - reg_inputs);
  const size_t kept = std::min<size_t>(budget, fitting.size());
  io.kept_imm_externals.assign(fitting.begin(), fitting.begin() + kept);

  std::set<uint32_t> kept_set(io.kept_imm_externals.begin(), io.kept_imm_externals.end());
  for (const auto& e : dfg.edges) {
    if (!members.test(e.to) || !e.from.external) continue;
    const ExternalVertex& ext = dfg.externals[e.from.index];
    if (ext.kind != ExternalKind::imm || kept_set.count(e.from.index)) continue;
    io.hardcoded.push_back({e.to, e.slot, ext.value});
  }
  std::sort(io.hardcoded.begin(), io.hardcoded.end());

  io.in_count = reg_inputs + static_cast<unsigned>(kept);

  for (size_t v = members.find_first(); v != VertexSet::npos; v = members.find_next(v)) {
    bool out = dfg.vertices[v].escapes;
    for (const auto& e : dfg.edges)
      if (!out && !e.from.external && e.from.index == v && !members.test(e.to)) out = true;
    if (out) ++io.out_count;
  }
  return io;
}

namespace detail {

/*! \brief Per-DFG immutable tables shared by the enumeration recursion. */
struct EnumTables {
  size_t n = 0;
  std::vector<VertexSet> desc;            // reflexive descendant sets
  std::vector<VertexSet> consumers;       // operand-edge consumers per vertex
  std::vector<VertexSet> int_producers;   // internal operand producers per vertex
  std::vector<std::vector<uint32_t>> ext_reg_producers;  // external reg inputs per vertex
  std::vector<bool> escapes;
  std::vector<bool> forbidden;

  EnumTables(const DataFlowGraph& dfg, const ConstraintConfig& cfg) : n(dfg.size()) {
    desc = dfg.descendants();
    consumers.assign(n, VertexSet(n));
    int_producers.assign(n, VertexSet(n));
    ext_reg_producers.assign(n, {});
    escapes.resize(n);
    forbidden.resize(n);
    for (size_t v = 0; v < n; ++v) {
      escapes[v] = dfg.vertices[v].escapes;
      forbidden[v] = cfg.is_forbidden(dfg.vertices[v].op);
    }
    for (const auto& e : dfg.edges) {
      if (e.from.external) {
        if (dfg.externals[e.from.index].kind == ExternalKind::reg)
          ext_reg_producers[e.to].push_back(e.from.index);
      } else {
        consumers[e.from.index].set(e.to);
        int_producers[e.to].set(e.from.index);
      }
    }
  }
};

struct EnumState {
  VertexSet members;
  VertexSet poisoned;       // decided-out vertices that reach a member
  VertexSet internal_in;    // internal producers outside members
  std::set<uint32_t> ext_reg_in;
  unsigned out_count = 0;
};

class Enumerator {
public:
  Enumerator(const DataFlowGraph& dfg, const ConstraintConfig& cfg)
      : dfg_(dfg), cfg_(cfg), tables_(dfg, cfg) {}

  std::vector<SubgraphPattern> run() {
    const size_t n = tables_.n;
    EnumState root{VertexSet(n), VertexSet(n), VertexSet(n), {}, 0};
    visit(root, static_cast<int>(n) - 1);
    return std::move(result_);
  }

private:
  void visit(const EnumState& state, int frontier) {
    VertexSet poisoned = state.poisoned;
    for (int j = frontier; j >= 0; --j) {
      const auto ju = static_cast<size_t>(j);
      if (!tables_.forbidden[ju] && !tables_.desc[ju].intersects(poisoned)) {
        EnumState child = extend(state, ju, poisoned);
        if (child.out_count <= cfg_.out_max && permanent_inputs(child, j) <= cfg_.in_max) {
          if (++explored_ > cfg_.candidate_cap)
            throw Error(Stage::enumeration,
                        "candidate cap exceeded in block " + to_hex(dfg_.bb_start));
          maybe_emit(child);
          visit(child, j - 1);
        }
      }
      // j is decided-out for every later sibling; poison it when it can
      // reach a member.
      VertexSet reach = tables_.desc[ju];
      reach &= state.members;
      if (reach.any()) poisoned.set(ju);
    }
  }

  EnumState extend(const EnumState& state, size_t v, const VertexSet& poisoned) const {
    EnumState child = state;
    child.poisoned = poisoned;
    child.members.set(v);
    child.internal_in |= tables_.int_producers[v];
    child.internal_in -= child.members;
    for (uint32_t ext : tables_.ext_reg_producers[v]) child.ext_reg_in.insert(ext);
    bool out = tables_.escapes[v];
    if (!out) {
      VertexSet outside = tables_.consumers[v];
      outside -= child.members;
      out = outside.any();
    }
    if (out) ++child.out_count;
    return child;
  }

  unsigned permanent_inputs(const EnumState& state, int added) const {
    // Internal producers with an index above the newly added vertex are
    // decided; they can never join the pattern anymore.
    VertexSet decided = state.internal_in;
    decided >>= static_cast<size_t>(added);
    return static_cast<unsigned>(state.ext_reg_in.size() + decided.count());
  }

  void maybe_emit(const EnumState& state) {
    const unsigned size = static_cast<unsigned>(state.members.count());
    if (size < cfg_.min_pattern_size) return;
    const unsigned full_inputs =
        static_cast<unsigned>(state.ext_reg_in.size() + state.internal_in.count());
    if (full_inputs > cfg_.in_max) return;
    const unsigned components = component_count(state.members);
    if (components > cfg_.max_components) return;

    IoCounts io = io_counts(dfg_, state.members, cfg_);
    SubgraphPattern p;
    p.bb_id = dfg_.bb_id;
    p.vertices = state.members;
    p.in_count = io.in_count;
    p.out_count = io.out_count;
    p.hardcoded_imms = std::move(io.hardcoded);
    p.kept_imm_externals = std::move(io.kept_imm_externals);
    p.size = size;
    p.connected = components == 1;
    result_.push_back(std::move(p));
  }

  unsigned component_count(const VertexSet& members) const {
    VertexSet remaining = members;
    unsigned components = 0;
    while (remaining.any()) {
      ++components;
      VertexSet frontier(tables_.n);
      frontier.set(remaining.find_first());
      remaining -= frontier;
      while (frontier.any()) {
        VertexSet next(tables_.n);
        for (size_t v = frontier.find_first(); v != VertexSet::npos;
             v = frontier.find_next(v)) {
          next |= tables_.consumers[v];
          next |= tables_.int_producers[v];
        }
        next &= remaining;
        remaining -= next;
        frontier = std::move(next);
      }
    }
    return components;
  }

  const DataFlowGraph& dfg_;
  const ConstraintConfig& cfg_;
  EnumTables tables_;
  uint64_t explored_ = 0;
  std::vector<SubgraphPattern> result_;
};

}  // namespace detail

/*! \brief Enumerate every valid candidate subgraph of one DFG.

  Returns exactly the subsets that are convex, forbidden-free, within the
  I/O constraints, of at least the minimum size, and within the component
  cap -- connected and disconnected alike, without duplicates.
*/
inline std::vector<SubgraphPattern> enumerate_patterns(const DataFlowGraph& dfg,
                                                       const ConstraintConfig& cfg) {
  cfg.validate();
  if (dfg.size() == 0) return {};
  return detail::Enumerator(dfg, cfg).run();
}

}  // namespace cidre
