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
  \file select.hpp
  \brief Instruction selection: greedy loop with synthesis in the loop.

  Chooses up to u_max isomorphism classes maximizing estimated speedup.  The
  outer loop commits one class at a time; the inner loop walks candidates in
  merit order, discarding any whose estimated execution time does not improve
  on the committed configuration, and stops early when a candidate meets the
  baseline clock or stops improving.  Candidate choice is either plain greedy
  or two-optimal: all unordered candidate pairs are scored by their joint
  feasible-cover merit and the better element of the best pair is returned.

  Covers obey the non-overlapping constraint and keep every block acyclic
  after contracting each chosen occurrence to a supernode.

  Merit baseline note: each outer iteration compares candidates against the
  execution time of the configuration committed so far (for the first
  iteration this is exactly the baseline processor).  Comparing forever
  against the original baseline would let zero-gain classes through once any
  class has been committed.
*/

#pragma once

#include "cidre/canonical.hpp"
#include "cidre/cost.hpp"
#include "cidre/encoding.hpp"
#include "cidre/enumerate.hpp"
#include "cidre/interp.hpp"
#include "cidre/profile.hpp"
#include "cidre/support.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cidre {

enum class SelectionPolicy { greedy, two_optimal };

struct ChosenOccurrence {
  uint32_t bb_id = 0;
  uint64_t bb_start = 0;
  VertexSet vertices;
  std::vector<uint64_t> addresses;
  uint64_t weight = 0;  // (|S|-1) * f_BB
};

struct SelectedClass {
  IsoClass cls;
  uint64_t merit = 0;
  TemplateId template_id = TemplateId::R2_1_REG;
  uint8_t funct3 = 0;
  std::vector<ChosenOccurrence> cover;
};

struct SelectionResult {
  std::vector<SelectedClass> selected;
  uint64_t f_total = 0;
  uint64_t total_merit = 0;
  double t_clk_base_ns = 0.0;
  double t_clk_custom_ns = 0.0;
  double t_ex_base_ns = 0.0;
  double t_ex_custom_ns = 0.0;
  double baseline_area = 0.0;
  double custom_area = 0.0;

  uint64_t f_custom() const { return f_total - total_merit; }
  double cycle_speedup() const {
    return f_custom() == 0 ? 1.0 : static_cast<double>(f_total) / static_cast<double>(f_custom());
  }
  double execution_speedup() const {
    return t_ex_custom_ns == 0.0 ? 1.0 : t_ex_base_ns / t_ex_custom_ns;
  }
  double area_overhead_pct() const {
    return baseline_area == 0.0 ? 0.0 : (custom_area - baseline_area) / baseline_area * 100.0;
  }
};

/*! \brief Execution-time speedup from cycle speedup and clock-period increase
    (T_ex = f * T_clk on both sides). */
inline double execution_speedup_from(double cycle_speedup, double clk_increase_fraction) {
  return cycle_speedup / (1.0 + clk_increase_fraction);
}

/*! \brief True when contracting each group to one node keeps the block a DAG. */
inline bool contraction_acyclic(const DataFlowGraph& dfg,
                                const std::vector<const VertexSet*>& groups) {
  const size_t n = dfg.size();
  std::vector<int> node(n);
  for (size_t v = 0; v < n; ++v) node[v] = static_cast<int>(v);
  int next_group = static_cast<int>(n);
  for (const VertexSet* g : groups) {
    for (size_t v = g->find_first(); v != VertexSet::npos; v = g->find_next(v))
      node[v] = next_group;
    ++next_group;
  }

  std::map<int, std::set<int>> succ;
  std::map<int, int> indeg;
  auto add_edge = [&](uint32_t u, uint32_t v) {
    const int a = node[u], b = node[v];
    if (a == b) return;
    if (succ[a].insert(b).second) ++indeg[b];
  };
  for (const auto& e : dfg.edges)
    if (!e.from.external) add_edge(e.from.index, e.to);
  for (const auto& [u, v] : dfg.mem_edges) add_edge(u, v);

  std::set<int> nodes;
  for (size_t v = 0; v < n; ++v) nodes.insert(node[v]);
  std::vector<int> ready;
  for (int x : nodes)
    if (indeg.find(x) == indeg.end()) ready.push_back(x);
  size_t seen = 0;
  while (!ready.empty()) {
    const int x = ready.back();
    ready.pop_back();
    ++seen;
    for (int y : succ[x])
      if (--indeg[y] == 0) ready.push_back(y);
  }
  return seen == nodes.size();
}

struct CoverCandidate {
  size_t class_slot = 0;  // position within the queried class tuple
  const Occurrence* occ = nullptr;
  uint64_t weight = 0;
};

struct Cover {
  uint64_t merit = 0;
  std::vector<std::pair<size_t, const Occurrence*>> chosen;  // (class_slot, occurrence)
};

/*! \brief Shared read-only context plus per-block committed occupancy. */
class SelectorContext {
public:
  SelectorContext(const std::vector<DataFlowGraph>& dfgs, const Profile& profile)
      : dfgs_(dfgs), profile_(profile) {
    for (size_t i = 0; i < dfgs.size(); ++i) dfg_index_[dfgs[i].bb_id] = i;
    committed_.resize(dfgs.size());
  }

  const DataFlowGraph& dfg_of(uint32_t bb_id) const { return dfgs_[dfg_index_.at(bb_id)]; }

  void commit(const std::vector<ChosenOccurrence>& cover) {
    for (const auto& occ : cover) committed_[dfg_index_.at(occ.bb_id)].push_back(occ.vertices);
  }

  /*! \brief Maximum-weight feasible cover for occurrences of 1..k classes.

    Exact when a block holds at most \p exact_limit candidates, greedy by
    weight otherwise.  Feasible: vertex-disjoint with the committed
    occupancy and each other, and contraction-acyclic per block.
  */
  Cover feasible_cover(const std::vector<std::vector<const Occurrence*>>& class_occs,
                       size_t exact_limit = 20) const {
    // Bucket candidates per block.
    std::map<uint32_t, std::vector<CoverCandidate>> per_block;
    for (size_t slot = 0; slot < class_occs.size(); ++slot) {
      for (const Occurrence* occ : class_occs[slot]) {
        const uint64_t f = profile_.count_of(occ->bb_start);
        const uint64_t weight = static_cast<uint64_t>(occ->pattern.size - 1) * f;
        if (weight == 0) continue;
        per_block[occ->bb_id].push_back({slot, occ, weight});
      }
    }
    Cover total;
    for (auto& [bb_id, candidates] : per_block) {
      std::sort(candidates.begin(), candidates.end(),
                [](const CoverCandidate& a, const CoverCandidate& b) {
                  if (a.weight != b.weight) return a.weight > b.weight;
                  const auto fa = a.occ->pattern.vertices.find_first();
                  const auto fb = b.occ->pattern.vertices.find_first();
                  if (fa != fb) return fa < fb;
                  return a.class_slot < b.class_slot;
                });
      const Cover block_cover = candidates.size() <= exact_limit
                                    ? exact_block_cover(bb_id, candidates)
                                    : greedy_block_cover(bb_id, candidates);
      total.merit += block_cover.merit;
      total.chosen.insert(total.chosen.end(), block_cover.chosen.begin(),
                          block_cover.chosen.end());
    }
    return total;
  }

private:
  bool feasible_with(uint32_t bb_id, const std::vector<const CoverCandidate*>& chosen,
                     const CoverCandidate& next) const {
    const size_t d = dfg_index_.at(bb_id);
    VertexSet used(dfgs_[d].size());
    for (const auto& g : committed_[d]) used |= g;
    for (const auto* c : chosen) used |= c->occ->pattern.vertices;
    if (used.intersects(next.occ->pattern.vertices)) return false;
    std::vector<const VertexSet*> groups;
    for (const auto& g : committed_[d]) groups.push_back(&g);
    for (const auto* c : chosen) groups.push_back(&c->occ->pattern.vertices);
    groups.push_back(&next.occ->pattern.vertices);
    return contraction_acyclic(dfgs_[d], groups);
  }

  Cover exact_block_cover(uint32_t bb_id, const std::vector<CoverCandidate>& candidates) const {
    std::vector<uint64_t> suffix(candidates.size() + 1, 0);
    for (size_t i = candidates.size(); i-- > 0;) suffix[i] = suffix[i + 1] + candidates[i].weight;

    std::vector<const CoverCandidate*> chosen, best;
    uint64_t best_weight = 0;
    uint64_t chosen_weight = 0;

    auto dfs = [&](auto&& self, size_t i) -> void {
      if (chosen_weight + suffix[i] <= best_weight && !best.empty()) return;
      if (i == candidates.size()) {
        if (chosen_weight > best_weight || best.empty()) {
          best_weight = chosen_weight;
          best = chosen;
        }
        return;
      }
      if (feasible_with(bb_id, chosen, candidates[i])) {
        chosen.push_back(&candidates[i]);
        chosen_weight += candidates[i].weight;
        self(self, i + 1);
        chosen_weight -= candidates[i].weight;
        chosen.pop_back();
      }
      self(self, i + 1);
    };
    dfs(dfs, 0);

    Cover cover;
    cover.merit = best_weight;
    for (const auto* c : best) cover.chosen.emplace_back(c->class_slot, c->occ);
    return cover;
  }

  Cover greedy_block_cover(uint32_t bb_id, const std::vector<CoverCandidate>& candidates) const {
    Cover cover;
    std::vector<const CoverCandidate*> chosen;
    for (const auto& c : candidates) {
      if (!feasible_with(bb_id, chosen, c)) continue;
      chosen.push_back(&c);
      cover.merit += c.weight;
      cover.chosen.emplace_back(c.class_slot, c.occ);
    }
    return cover;
  }

  const std::vector<DataFlowGraph>& dfgs_;
  const Profile& profile_;
  std::map<uint32_t, size_t> dfg_index_;
  std::vector<std::vector<VertexSet>> committed_;
};

/*! \brief M(U) under the current occupancy: maximum-weight feasible subset of
    the class's occurrences, each weighted (|S|-1) * f_BB. */
inline uint64_t merit_class(const IsoClass& cls, const Profile& profile,
                            const SelectorContext& ctx) {
  std::vector<const Occurrence*> occs;
  for (const auto& occ : cls.occurrences) occs.push_back(&occ);
  (void)profile;
  return ctx.feasible_cover({occs}).merit;
}

namespace detail {

inline std::vector<const Occurrence*> occ_ptrs(const IsoClass& cls) {
  std::vector<const Occurrence*> out;
  out.reserve(cls.occurrences.size());
  for (const auto& occ : cls.occurrences) out.push_back(&occ);
  return out;
}

class SelectionRun {
public:
  SelectionRun(const std::vector<IsoClass>& classes, const std::vector<DataFlowGraph>& dfgs,
               const Profile& profile, const ConstraintConfig& ccfg, CostOracle& oracle,
               SelectionPolicy policy)
      : classes_(classes), profile_(profile), ccfg_(ccfg), oracle_(oracle), policy_(policy),
        ctx_(dfgs, profile) {}

  SelectionResult run() {
    SelectionResult result;
    result.f_total = profile_.f_total;
    const CostEstimate base = oracle_.baseline();
    result.t_clk_base_ns = base.t_clk_ns;
    result.t_clk_custom_ns = base.t_clk_ns;
    result.baseline_area = base.area_units;
    result.custom_area = base.area_units;
    result.t_ex_base_ns = static_cast<double>(result.f_total) * base.t_clk_ns;
    result.t_ex_custom_ns = result.t_ex_base_ns;

    std::vector<size_t> candidates(classes_.size());
    for (size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;

    while (result.selected.size() < ccfg_.u_max && !candidates.empty()) {
      refresh_merits(candidates);
      const double t_ex_committed = result.t_ex_custom_ns;

      double t_ex_best = t_ex_committed;
      std::optional<size_t> u_best;
      CostEstimate est_best{};
      Cover cover_best;

      std::vector<size_t> current = candidates;
      while (!current.empty()) {
        const size_t u = choose_best_instruction(current);
        const Cover& cover = covers_.at(u);
        const CostEstimate est = estimate_with(result, u);
        const uint64_t m_u = cover.merit;
        const double t_ex_new =
            static_cast<double>(result.f_total - (result.total_merit + m_u)) * est.t_clk_ns;

        if (t_ex_new >= t_ex_committed) {
          // Discard for this outer iteration and keep searching.
          current.erase(std::find(current.begin(), current.end(), u));
          continue;
        }
        const double prev_best = t_ex_best;
        if (t_ex_new < prev_best) {
          t_ex_best = t_ex_new;
          u_best = u;
          est_best = est;
          cover_best = cover;
          current.erase(std::find(current.begin(), current.end(), u));
        }
        if (est.met_baseline_timing || t_ex_new >= prev_best) break;
      }

      if (!u_best) break;  // no candidate improves: terminate

      commit(result, *u_best, est_best, cover_best, t_ex_best);
      candidates.erase(std::find(candidates.begin(), candidates.end(), *u_best));
    }

    assign_encodings(result);
    return result;
  }

private:
  void refresh_merits(const std::vector<size_t>& candidates) {
    covers_.clear();
    joint_.clear();
    for (size_t i : candidates) covers_[i] = ctx_.feasible_cover({detail::occ_ptrs(classes_[i])});
  }

  uint64_t joint_merit(size_t i, size_t j) {
    const auto key = std::minmax(i, j);
    auto it = joint_.find(key);
    if (it != joint_.end()) return it->second;
    const uint64_t merit =
        ctx_.feasible_cover({detail::occ_ptrs(classes_[key.first]),
                             detail::occ_ptrs(classes_[key.second])})
            .merit;
    joint_.emplace(key, merit);
    return merit;
  }

  size_t choose_best_instruction(const std::vector<size_t>& current) {
    if (current.size() == 1) return current.front();
    if (policy_ == SelectionPolicy::greedy) {
      size_t best = current.front();
      for (size_t i : current)
        if (covers_.at(i).merit > covers_.at(best).merit) best = i;
      return best;  // ties keep the smallest index = smallest CF
    }
    // Two-optimal: score all unordered pairs by joint feasible-cover merit.
    size_t best_i = current[0], best_j = current[1];
    uint64_t best_joint = 0;
    bool have = false;
    for (size_t a = 0; a < current.size(); ++a) {
      for (size_t b = a + 1; b < current.size(); ++b) {
        const size_t i = current[a], j = current[b];
        if (covers_.at(i).merit == 0 && covers_.at(j).merit == 0) continue;
        const uint64_t joint = joint_merit(i, j);
        if (!have || joint > best_joint) {
          have = true;
          best_joint = joint;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (!have) return current.front();  // all merits zero
    const uint64_t mi = covers_.at(best_i).merit, mj = covers_.at(best_j).merit;
    if (mi != mj) return mi > mj ? best_i : best_j;
    return std::min(best_i, best_j);  // classes are CF-sorted
  }

  CostEstimate estimate_with(const SelectionResult& result, size_t extra) {
    std::vector<const IsoClass*> set;
    for (const auto& sel : result.selected) set.push_back(&sel.cls);
    set.push_back(&classes_[extra]);
    return oracle_.estimate(set);
  }

  void commit(SelectionResult& result, size_t u, const CostEstimate& est, const Cover& cover,
              double t_ex_new) {
    SelectedClass sel;
    sel.cls = classes_[u];
    sel.merit = cover.merit;
    for (const auto& [slot, occ] : cover.chosen) {
      ChosenOccurrence chosen;
      chosen.bb_id = occ->bb_id;
      chosen.bb_start = occ->bb_start;
      chosen.vertices = occ->pattern.vertices;
      const DataFlowGraph& dfg = ctx_.dfg_of(occ->bb_id);
      for (size_t v = occ->pattern.vertices.find_first(); v != VertexSet::npos;
           v = occ->pattern.vertices.find_next(v))
        chosen.addresses.push_back(dfg.vertices[v].address);
      chosen.weight =
          static_cast<uint64_t>(occ->pattern.size - 1) * profile_.count_of(occ->bb_start);
      sel.cover.push_back(std::move(chosen));
    }
    std::sort(sel.cover.begin(), sel.cover.end(),
              [](const ChosenOccurrence& a, const ChosenOccurrence& b) {
                if (a.bb_start != b.bb_start) return a.bb_start < b.bb_start;
                return a.addresses < b.addresses;
              });
    ctx_.commit(sel.cover);
    result.total_merit += cover.merit;
    result.t_clk_custom_ns = est.t_clk_ns;
    result.custom_area = est.area_units;
    result.t_ex_custom_ns = t_ex_new;
    result.selected.push_back(std::move(sel));
  }

  void assign_encodings(SelectionResult& result) {
    std::map<TemplateId, unsigned> used;
    const unsigned imm_width = ccfg_.imm_slot_width();
    for (auto& sel : result.selected) {
      bool assigned = false;
      for (TemplateId id : templates_for_shape(ccfg_.in_max, ccfg_.out_max)) {
        const EncodingTemplate& t = template_info(id);
        if (!template_fits(t, sel.cls.graph, imm_width)) continue;
        if (used[id] >= 8) continue;  // funct3 capacity
        sel.template_id = id;
        sel.funct3 = static_cast<uint8_t>(used[id]++);
        assigned = true;
        break;
      }
      if (!assigned)
        throw Error(Stage::encoding,
                    "no free encoding slot for class " + sel.cls.cf.hex().substr(0, 16) +
                        " (funct3 capacity is 8 per template)");
    }
  }

  const std::vector<IsoClass>& classes_;
  const Profile& profile_;
  const ConstraintConfig& ccfg_;
  CostOracle& oracle_;
  SelectionPolicy policy_;
  SelectorContext ctx_;
  std::map<size_t, Cover> covers_;
  std::map<std::pair<size_t, size_t>, uint64_t> joint_;
};

}  // namespace detail

/*! \brief Run the full selection loop over grouped classes.

  Classes must be sorted by canonical form (group_patterns output order);
  dfgs must contain the block each occurrence refers to.
*/
inline SelectionResult select(const std::vector<IsoClass>& classes,
                              const std::vector<DataFlowGraph>& dfgs, const Profile& profile,
                              const ConstraintConfig& ccfg, CostOracle& oracle,
                              SelectionPolicy policy = SelectionPolicy::two_optimal) {
  ccfg.validate();
  detail::SelectionRun run(classes, dfgs, profile, ccfg, oracle, policy);
  return run.run();
}

/*! \brief Structural feasibility of a finished selection: vertex-disjoint
    covers and contraction acyclicity in every touched block. */
inline bool selection_feasible(const SelectionResult& result,
                               const std::vector<DataFlowGraph>& dfgs) {
  std::map<uint32_t, size_t> index;
  for (size_t i = 0; i < dfgs.size(); ++i) index[dfgs[i].bb_id] = i;
  std::map<uint32_t, std::vector<const VertexSet*>> groups;
  for (const auto& sel : result.selected) {
    for (const auto& occ : sel.cover) {
      for (const VertexSet* prev : groups[occ.bb_id])
        if (prev->intersects(occ.vertices)) return false;
      groups[occ.bb_id].push_back(&occ.vertices);
    }
  }
  for (const auto& [bb_id, g] : groups)
    if (!contraction_acyclic(dfgs[index.at(bb_id)], g)) return false;
  return true;
}

/*! \brief Flatten a selection into replayable fused occurrences. */
inline std::vector<FusedOccurrence> fused_occurrences(const SelectionResult& result) {
  std::vector<FusedOccurrence> out;
  for (const auto& sel : result.selected)
    for (const auto& occ : sel.cover) out.push_back({occ.bb_start, occ.addresses});
  return out;
}

}  // namespace cidre
