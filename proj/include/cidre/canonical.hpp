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
  \file canonical.hpp
  \brief Canonical forms for candidate subgraphs and isomorphism grouping.

  Two patterns receive the same canonical form exactly when they are
  isomorphic under an operation-preserving, operand-slot-preserving bijection
  that may swap the operands of commutative vertices.  Register identities
  are anonymized; what is kept is the sharing structure of the inputs, the
  distinction between register and immediate operands, hardcoded immediate
  values (part of the vertex label) and the per-vertex output flags.

  The byte encoding is minimized by a branch-and-bound search over vertex
  orderings, seeded by an invariant pre-sort (mnemonic, out-degree,
  in-degree).  Input groups have a derived sorted order, so only internal
  vertices are searched.

  Byte layout: header (in, out, #vertices, #inputs), then per placed vertex
  its label (op, output flag, hardcoded slot/value list) followed by a
  counted batch of the internal edges whose later endpoint was just placed,
  then the sorted input-group records.
*/

#pragma once

#include "cidre/dfg.hpp"
#include "cidre/enumerate.hpp"
#include "cidre/support.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace cidre {

struct CanonicalForm {
  std::vector<uint8_t> bytes;

  bool operator==(const CanonicalForm&) const = default;
  bool operator<(const CanonicalForm& other) const { return bytes < other.bytes; }

  unsigned in_count() const { return bytes[0]; }
  unsigned out_count() const { return bytes[1]; }

  std::string hex() const {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
      out.push_back(digits[b >> 4]);
      out.push_back(digits[b & 0xf]);
    }
    return out;
  }
};

struct CanonicalFormHash {
  size_t operator()(const CanonicalForm& cf) const {
    size_t h = 1469598103934665603ull;
    for (uint8_t b : cf.bytes) h = (h ^ b) * 1099511628211ull;
    return h;
  }
};

// Slot codes inside canonical bytes; commutative register slots collapse to
// kSlotComm so that operand swaps do not affect the encoding.
inline constexpr uint8_t kSlotComm = 5;

inline uint8_t canon_slot(const DfgEdge& e) {
  return e.commutative ? kSlotComm : static_cast<uint8_t>(e.slot);
}

/*! \brief Canonical graph decoded from a canonical form; drives emission and
    critical-path estimation. */
struct CanonGraph {
  struct Vertex {
    OpId op = OpId::Addi;
    bool is_output = false;
    std::vector<std::pair<uint8_t, int64_t>> hardcoded;  // (slot code, value)
  };
  struct Input {
    ExternalKind kind = ExternalKind::reg;
    std::vector<std::pair<uint8_t, uint8_t>> feeds;  // (vertex, slot code)
  };
  unsigned in_count = 0;
  unsigned out_count = 0;
  std::vector<Vertex> vertices;
  std::vector<std::tuple<uint8_t, uint8_t, uint8_t>> edges;  // (src, dst, slot code)
  std::vector<Input> inputs;

  unsigned register_inputs() const {
    unsigned n = 0;
    for (const auto& in : inputs) n += in.kind == ExternalKind::reg ? 1 : 0;
    return n;
  }
  unsigned immediate_inputs() const {
    return static_cast<unsigned>(inputs.size()) - register_inputs();
  }
};

namespace detail {

/*! \brief Pattern lifted out of its DFG: local ids, labels, edges, inputs. */
struct PatternGraph {
  struct Vertex {
    OpId op;
    bool is_output = false;
    std::vector<std::pair<uint8_t, int64_t>> hardcoded;  // sorted (slot, value)
  };
  struct Input {
    ExternalKind kind;                               // reg covers outside producers too
    std::vector<std::pair<uint8_t, uint8_t>> feeds;  // (local vertex, slot code)
  };
  std::vector<Vertex> vertices;
  std::vector<std::tuple<uint8_t, uint8_t, uint8_t>> edges;  // (src, dst, slot)
  std::vector<Input> inputs;
  unsigned in_count = 0;
  unsigned out_count = 0;
};

inline PatternGraph lift_pattern(const DataFlowGraph& dfg, const SubgraphPattern& pattern) {
  PatternGraph g;
  g.in_count = pattern.in_count;
  g.out_count = pattern.out_count;

  std::map<uint32_t, uint8_t> local;  // dfg vertex -> local id
  for (size_t v = pattern.vertices.find_first(); v != VertexSet::npos;
       v = pattern.vertices.find_next(v)) {
    if (local.size() >= 255) throw Error(Stage::enumeration, "pattern too large to canonize");
    local.emplace(static_cast<uint32_t>(v), static_cast<uint8_t>(local.size()));
  }

  g.vertices.resize(local.size());
  for (const auto& [v, id] : local) {
    auto& lv = g.vertices[id];
    lv.op = dfg.vertices[v].op;
    bool out = dfg.vertices[v].escapes;
    for (const auto& e : dfg.edges)
      if (!out && !e.from.external && e.from.index == v && !pattern.vertices.test(e.to))
        out = true;
    lv.is_output = out;
  }

  const std::set<uint32_t> kept(pattern.kept_imm_externals.begin(),
                                pattern.kept_imm_externals.end());

  // Outside producers keyed for sharing; outside instruction results arrive
  // through registers and therefore count as register-kind inputs.
  std::map<std::pair<bool, uint32_t>, size_t> producer_group;
  auto group_of = [&](bool external, uint32_t index, ExternalKind kind) -> size_t {
    auto key = std::make_pair(external, index);
    auto it = producer_group.find(key);
    if (it != producer_group.end()) return it->second;
    const size_t id = g.inputs.size();
    g.inputs.push_back({kind, {}});
    producer_group.emplace(key, id);
    return id;
  };

  for (const auto& e : dfg.edges) {
    if (!pattern.vertices.test(e.to)) continue;
    const uint8_t dst = local.at(e.to);
    const uint8_t slot = canon_slot(e);
    if (!e.from.external) {
      if (pattern.vertices.test(e.from.index)) {
        g.edges.emplace_back(local.at(e.from.index), dst, slot);
      } else {
        g.inputs[group_of(false, e.from.index, ExternalKind::reg)].feeds.emplace_back(dst, slot);
      }
      continue;
    }
    const ExternalVertex& ext = dfg.externals[e.from.index];
    if (ext.kind == ExternalKind::reg) {
      g.inputs[group_of(true, e.from.index, ExternalKind::reg)].feeds.emplace_back(dst, slot);
    } else if (kept.count(e.from.index)) {
      g.inputs[group_of(true, e.from.index, ExternalKind::imm)].feeds.emplace_back(dst, slot);
    } else {
      g.vertices[dst].hardcoded.emplace_back(slot, ext.value);
    }
  }
  for (auto& v : g.vertices) std::sort(v.hardcoded.begin(), v.hardcoded.end());
  return g;
}

inline void append_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void append_vertex_label(std::vector<uint8_t>& out, const PatternGraph::Vertex& v) {
  out.push_back(static_cast<uint8_t>(v.op));
  out.push_back(v.is_output ? 1 : 0);
  out.push_back(static_cast<uint8_t>(v.hardcoded.size()));
  for (const auto& [slot, value] : v.hardcoded) {
    out.push_back(slot);
    append_u64(out, static_cast<uint64_t>(value));
  }
}

/*! \brief Branch-and-bound search for the lexicographically minimal encoding. */
class CanonicalMinimizer {
public:
  explicit CanonicalMinimizer(const PatternGraph& g) : g_(g), n_(g.vertices.size()) {}

  std::vector<uint8_t> run() {
    std::vector<unsigned> out_deg(n_, 0), in_deg(n_, 0);
    for (const auto& [src, dst, slot] : g_.edges) {
      ++out_deg[src];
      ++in_deg[dst];
    }
    order_.resize(n_);
    for (size_t i = 0; i < n_; ++i) order_[i] = i;
    std::sort(order_.begin(), order_.end(), [&](size_t a, size_t b) {
      const auto ka = std::make_tuple(mnemonic(g_.vertices[a].op), out_deg[a], in_deg[a], a);
      const auto kb = std::make_tuple(mnemonic(g_.vertices[b].op), out_deg[b], in_deg[b], b);
      return ka < kb;
    });

    position_.assign(n_, kUnassigned);
    std::vector<uint8_t> prefix;
    search(prefix);
    return best_;
  }

private:
  static constexpr uint8_t kUnassigned = 0xff;

  void search(std::vector<uint8_t>& prefix) {
    if (assigned_.size() == n_) {
      std::vector<uint8_t> full = prefix;
      append_inputs(full);
      if (best_.empty() || full < best_) best_ = std::move(full);
      return;
    }
    for (size_t cand : order_) {
      if (position_[cand] != kUnassigned) continue;
      const size_t mark = prefix.size();
      place(prefix, cand);
      if (!worse_than_best(prefix)) search(prefix);
      prefix.resize(mark);
      position_[cand] = kUnassigned;
      assigned_.pop_back();
    }
  }

  void place(std::vector<uint8_t>& prefix, size_t cand) {
    const uint8_t pos = static_cast<uint8_t>(assigned_.size());
    position_[cand] = pos;
    assigned_.push_back(cand);
    append_vertex_label(prefix, g_.vertices[cand]);
    std::vector<std::tuple<uint8_t, uint8_t, uint8_t>> batch;
    for (const auto& [src, dst, slot] : g_.edges) {
      if (src != cand && dst != cand) continue;
      if (position_[src] == kUnassigned || position_[dst] == kUnassigned) continue;
      batch.emplace_back(position_[src], position_[dst], slot);
    }
    std::sort(batch.begin(), batch.end());
    prefix.push_back(static_cast<uint8_t>(batch.size()));
    for (const auto& [s, d, slot] : batch) {
      prefix.push_back(s);
      prefix.push_back(d);
      prefix.push_back(slot);
    }
  }

  bool worse_than_best(const std::vector<uint8_t>& prefix) const {
    if (best_.empty()) return false;
    const size_t len = std::min(prefix.size(), best_.size());
    for (size_t i = 0; i < len; ++i) {
      if (prefix[i] < best_[i]) return false;
      if (prefix[i] > best_[i]) return true;
    }
    return false;  // equal so far: keep searching
  }

  void append_inputs(std::vector<uint8_t>& out) const {
    std::vector<std::vector<uint8_t>> groups;
    for (const auto& input : g_.inputs) {
      std::vector<std::pair<uint8_t, uint8_t>> feeds;
      feeds.reserve(input.feeds.size());
      for (const auto& [v, slot] : input.feeds) feeds.emplace_back(position_[v], slot);
      std::sort(feeds.begin(), feeds.end());
      std::vector<uint8_t> rec;
      rec.push_back(static_cast<uint8_t>(input.kind));
      rec.push_back(static_cast<uint8_t>(feeds.size()));
      for (const auto& [v, slot] : feeds) {
        rec.push_back(v);
        rec.push_back(slot);
      }
      groups.push_back(std::move(rec));
    }
    std::sort(groups.begin(), groups.end());
    for (const auto& rec : groups) out.insert(out.end(), rec.begin(), rec.end());
  }

  const PatternGraph& g_;
  size_t n_;
  std::vector<size_t> order_;
  std::vector<uint8_t> position_;
  std::vector<size_t> assigned_;
  std::vector<uint8_t> best_;
};

}  // namespace detail

/*! \brief Compute the canonical form of a valid pattern.

  Deterministic, invariant under vertex relabeling and under operand swaps
  of commutative vertices; sensitive to operations, non-commutative slots,
  hardcoded immediate values, output flags and input sharing structure.
*/
inline CanonicalForm canonical_form(const DataFlowGraph& dfg, const SubgraphPattern& pattern) {
  const detail::PatternGraph g = detail::lift_pattern(dfg, pattern);

  CanonicalForm cf;
  cf.bytes.push_back(static_cast<uint8_t>(g.in_count));
  cf.bytes.push_back(static_cast<uint8_t>(g.out_count));
  cf.bytes.push_back(static_cast<uint8_t>(g.vertices.size()));
  cf.bytes.push_back(static_cast<uint8_t>(g.inputs.size()));
  detail::CanonicalMinimizer minimizer(g);
  const std::vector<uint8_t> body = minimizer.run();
  cf.bytes.insert(cf.bytes.end(), body.begin(), body.end());
  return cf;
}

/*! \brief Decode a canonical form back into its graph. */
inline CanonGraph decode_canonical(const CanonicalForm& cf) {
  CanonGraph g;
  size_t i = 0;
  auto u8 = [&]() { return cf.bytes.at(i++); };
  auto u64 = [&]() {
    uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v = (v << 8) | cf.bytes.at(i++);
    return v;
  };
  g.in_count = u8();
  g.out_count = u8();
  const size_t n_vertices = u8();
  const size_t n_inputs = u8();
  for (size_t k = 0; k < n_vertices; ++k) {
    CanonGraph::Vertex v;
    v.op = static_cast<OpId>(u8());
    v.is_output = u8() != 0;
    const size_t nhard = u8();
    for (size_t h = 0; h < nhard; ++h) {
      const uint8_t slot = u8();
      v.hardcoded.emplace_back(slot, static_cast<int64_t>(u64()));
    }
    g.vertices.push_back(std::move(v));
    const size_t nedges = u8();
    for (size_t e = 0; e < nedges; ++e) {
      const uint8_t src = u8();
      const uint8_t dst = u8();
      const uint8_t slot = u8();
      g.edges.emplace_back(src, dst, slot);
    }
  }
  for (size_t k = 0; k < n_inputs; ++k) {
    CanonGraph::Input input;
    input.kind = static_cast<ExternalKind>(u8());
    const size_t nfeeds = u8();
    for (size_t f = 0; f < nfeeds; ++f) {
      const uint8_t v = u8();
      const uint8_t slot = u8();
      input.feeds.emplace_back(v, slot);
    }
    g.inputs.push_back(std::move(input));
  }
  if (i != cf.bytes.size()) throw Error(Stage::enumeration, "trailing bytes in canonical form");
  return g;
}

/*! \brief Normalized critical path of the canonical graph, in delay units. */
inline double critical_path_units(const CanonGraph& g) {
  std::vector<double> depth(g.vertices.size(), 0.0);
  // Canonical edge batches guarantee src < placement of later vertices is
  // not implied, so relax iteratively (graphs are tiny DAGs).
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t v = 0; v < g.vertices.size(); ++v) {
      double d = op_info(g.vertices[v].op).hw_delay_units;
      for (const auto& [src, dst, slot] : g.edges)
        if (dst == v) d = std::max(d, depth[src] + op_info(g.vertices[v].op).hw_delay_units);
      if (d > depth[v] + 1e-12) {
        depth[v] = d;
        changed = true;
      }
    }
  }
  double best = 0.0;
  for (double d : depth) best = std::max(best, d);
  return best;
}

// ---------------------------------------------------------------------------
// Independent pairwise isomorphism oracle.
// ---------------------------------------------------------------------------

namespace detail {

/*! \brief Explicit matcher graph: members plus anonymous input nodes. */
struct MatchGraph {
  struct Node {
    bool is_input = false;
    ExternalKind kind = ExternalKind::reg;  // inputs only
    OpId op = OpId::Addi;                   // members only
    bool is_output = false;
    std::vector<std::pair<uint8_t, int64_t>> hardcoded;
  };
  std::vector<Node> nodes;
  std::vector<std::tuple<size_t, size_t, uint8_t>> edges;  // (src, dst, slot)
};

inline MatchGraph match_graph(const DataFlowGraph& dfg, const SubgraphPattern& pattern) {
  const PatternGraph g = lift_pattern(dfg, pattern);
  MatchGraph m;
  for (const auto& v : g.vertices) {
    MatchGraph::Node node;
    node.is_input = false;
    node.op = v.op;
    node.is_output = v.is_output;
    node.hardcoded = v.hardcoded;
    m.nodes.push_back(std::move(node));
  }
  for (const auto& [src, dst, slot] : g.edges) m.edges.emplace_back(src, dst, slot);
  for (const auto& input : g.inputs) {
    MatchGraph::Node node;
    node.is_input = true;
    node.kind = input.kind;
    const size_t id = m.nodes.size();
    m.nodes.push_back(std::move(node));
    for (const auto& [v, slot] : input.feeds) m.edges.emplace_back(id, v, slot);
  }
  return m;
}

inline bool nodes_compatible(const MatchGraph::Node& a, const MatchGraph::Node& b) {
  if (a.is_input != b.is_input) return false;
  if (a.is_input) return a.kind == b.kind;
  return a.op == b.op && a.is_output == b.is_output && a.hardcoded == b.hardcoded;
}

class IsoMatcher {
public:
  IsoMatcher(const MatchGraph& a, const MatchGraph& b) : a_(a), b_(b) {}

  bool run() {
    if (a_.nodes.size() != b_.nodes.size() || a_.edges.size() != b_.edges.size()) return false;
    map_.assign(a_.nodes.size(), kNone);
    used_.assign(b_.nodes.size(), false);
    return extend(0);
  }

private:
  static constexpr size_t kNone = SIZE_MAX;

  bool extend(size_t i) {
    if (i == a_.nodes.size()) return true;
    for (size_t j = 0; j < b_.nodes.size(); ++j) {
      if (used_[j] || !nodes_compatible(a_.nodes[i], b_.nodes[j])) continue;
      map_[i] = j;
      used_[j] = true;
      if (consistent(i) && extend(i + 1)) return true;
      map_[i] = kNone;
      used_[j] = false;
    }
    return false;
  }

  // Check all edges whose endpoints are both mapped and touch node i.
  bool consistent(size_t i) const {
    auto slots_between = [](const MatchGraph& g, size_t s, size_t d) {
      std::vector<uint8_t> out;
      for (const auto& [src, dst, slot] : g.edges)
        if (src == s && dst == d) out.push_back(slot);
      std::sort(out.begin(), out.end());
      return out;
    };
    for (size_t k = 0; k <= i; ++k) {
      if (map_[k] == kNone) continue;
      if (slots_between(a_, i, k) != slots_between(b_, map_[i], map_[k])) return false;
      if (slots_between(a_, k, i) != slots_between(b_, map_[k], map_[i])) return false;
    }
    return true;
  }

  const MatchGraph& a_;
  const MatchGraph& b_;
  std::vector<size_t> map_;
  std::vector<bool> used_;
};

}  // namespace detail

/*! \brief Independent pairwise isomorphism test (backtracking search).

  Shares no logic with canonical_form; used as its oracle in tests.
*/
inline bool iso_check(const DataFlowGraph& dfg1, const SubgraphPattern& s1,
                      const DataFlowGraph& dfg2, const SubgraphPattern& s2) {
  if (s1.size != s2.size || s1.in_count != s2.in_count || s1.out_count != s2.out_count)
    return false;
  const detail::MatchGraph a = detail::match_graph(dfg1, s1);
  const detail::MatchGraph b = detail::match_graph(dfg2, s2);
  return detail::IsoMatcher(a, b).run();
}

// ---------------------------------------------------------------------------
// Grouping.
// ---------------------------------------------------------------------------

struct Occurrence {
  uint32_t bb_id = 0;
  uint64_t bb_start = 0;
  SubgraphPattern pattern;
};

struct IsoClass {
  CanonicalForm cf;
  unsigned size = 0;  // |S|, uniform across occurrences
  std::vector<Occurrence> occurrences;
  CanonGraph graph;  // decoded representative for emission and cost
};

/*! \brief Group patterns of all blocks into isomorphism classes by CF.

  CF computation is pure and may be parallelized by the caller via
  precomputed forms; grouping itself is a single sequential aggregation.
  Classes come out sorted by canonical form for deterministic downstream
  order.
*/
inline std::vector<IsoClass> group_patterns(
    const std::vector<DataFlowGraph>& dfgs,
    const std::vector<std::vector<SubgraphPattern>>& patterns,
    const std::vector<std::vector<CanonicalForm>>* precomputed = nullptr) {
  std::unordered_map<CanonicalForm, size_t, CanonicalFormHash> index;
  std::vector<IsoClass> classes;
  for (size_t d = 0; d < dfgs.size(); ++d) {
    for (size_t p = 0; p < patterns[d].size(); ++p) {
      const SubgraphPattern& pattern = patterns[d][p];
      CanonicalForm cf = precomputed ? (*precomputed)[d][p] : canonical_form(dfgs[d], pattern);
      auto [it, fresh] = index.emplace(cf, classes.size());
      if (fresh) {
        IsoClass cls;
        cls.cf = cf;
        cls.size = pattern.size;
        cls.graph = decode_canonical(cf);
        classes.push_back(std::move(cls));
      }
      classes[it->second].occurrences.push_back(
          {dfgs[d].bb_id, dfgs[d].bb_start, pattern});
    }
  }
  std::sort(classes.begin(), classes.end(),
            [](const IsoClass& a, const IsoClass& b) { return a.cf < b.cf; });
  return classes;
}

}  // namespace cidre
