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
  \file pipeline.hpp
  \brief End-to-end driver: load, decode, CFG/DFG, profile, enumerate,
  canonize, select, emit.

  Per-block enumeration and canonical-form computation fan out over a worker
  pool (`jobs`); results are merged in block order, so output is independent
  of the worker count.
*/

#pragma once

#include "cidre/canonical.hpp"
#include "cidre/cfg.hpp"
#include "cidre/cost.hpp"
#include "cidre/dfg.hpp"
#include "cidre/emit.hpp"
#include "cidre/enumerate.hpp"
#include "cidre/image.hpp"
#include "cidre/interp.hpp"
#include "cidre/profile.hpp"
#include "cidre/select.hpp"
#include "cidre/support.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace cidre {

enum class ProfileSource { simulate, file, uniform };

struct RunConfig {
  std::string input_path;
  std::optional<ImageFormat> format;
  uint64_t flat_base = 0x80000000;
  std::optional<uint64_t> entry;
  ProfileSource profile_source = ProfileSource::simulate;
  std::string profile_path;
  ConstraintConfig constraints;
  OracleConfig oracle;
  SelectionPolicy policy = SelectionPolicy::two_optimal;
  InterpLimits limits;
  std::string out_dir = "cidre-out";
  unsigned jobs = 1;
  int verbosity = 0;
  uint64_t seed = 0;  // echoed into the report; the pipeline is deterministic
  bool write_artifacts = true;

  Json echo() const {
    Json j;
    j["input"] = input_path;
    j["format"] = format ? format_name(*format) : "auto";
    j["flat_base"] = to_hex(flat_base);
    j["entry"] = entry ? to_hex(*entry) : "auto";
    j["profile_source"] = profile_source == ProfileSource::simulate ? "simulate"
                          : profile_source == ProfileSource::file   ? "file:" + profile_path
                                                                    : "uniform";
    j["constraints"] = Json{{"in_max", constraints.in_max},
                            {"out_max", constraints.out_max},
                            {"u_max", constraints.u_max},
                            {"min_pattern_size", constraints.min_pattern_size},
                            {"max_components", constraints.max_components},
                            {"candidate_cap", constraints.candidate_cap},
                            {"imm_slots", constraints.imm_slot_count()},
                            {"imm_slot_width", constraints.imm_slot_width()},
                            {"forbidden_extra", [&] {
                               Json a = Json::array();
                               for (OpId op : constraints.forbidden_extra)
                                 a.push_back(std::string(mnemonic(op)));
                               return a;
                             }()}};
    j["oracle"] = Json{{"mode", oracle.mode == OracleMode::analytic ? "analytic" : "external"},
                       {"t_clk_base_ns", oracle.t_clk_base_ns},
                       {"baseline_area", oracle.baseline_area},
                       {"decode_overhead_units", oracle.decode_overhead_units},
                       {"delay_unit_ns", oracle.delay_unit_ns},
                       {"external_command", oracle.external_command}};
    j["policy"] = policy == SelectionPolicy::two_optimal ? "two-optimal" : "greedy";
    j["max_steps"] = limits.max_steps;
    j["mem_size"] = limits.mem_size;
    j["out_dir"] = out_dir;
    j["jobs"] = jobs;
    j["seed"] = seed;
    return j;
  }
};

struct PipelineResult {
  ProgramImage image;
  Cfg cfg;
  std::vector<DataFlowGraph> dfgs;
  Profile profile;
  std::vector<std::vector<SubgraphPattern>> patterns;
  std::vector<std::vector<CanonicalForm>> forms;
  std::vector<IsoClass> classes;
  SelectionResult selection;
  std::optional<ExecResult> exec;
  Json report;

  size_t total_patterns() const {
    size_t n = 0;
    for (const auto& p : patterns) n += p.size();
    return n;
  }
};

namespace detail {

/*! \brief Run fn(block) over [0, n) on `jobs` workers; deterministic error
    choice (lowest block index wins). */
template <typename Fn>
inline void parallel_blocks(size_t n, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, jobs);
  if (jobs == 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::pair<size_t, std::exception_ptr>> errors;
  std::mutex errors_mutex;
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(errors_mutex);
        errors.emplace_back(i, std::current_exception());
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<size_t>(jobs, n); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!errors.empty()) {
    std::sort(errors.begin(), errors.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::rethrow_exception(errors.front().second);
  }
}

}  // namespace detail

/*! \brief Load, decode and recover the CFG/DFGs of an input. */
inline PipelineResult front_end(const RunConfig& config) {
  PipelineResult r;
  r.image = load_image(config.input_path, config.format, config.flat_base, config.entry);
  r.cfg = build_cfg(r.image.decode_all(), r.image.entry);
  r.dfgs.reserve(r.cfg.blocks.size());
  for (const auto& bb : r.cfg.blocks) r.dfgs.push_back(build_dfg(bb));
  return r;
}

inline void acquire_profile(const RunConfig& config, PipelineResult& r) {
  switch (config.profile_source) {
    case ProfileSource::simulate: {
      ExecResult exec = run_and_profile(r.image, r.cfg, config.limits);
      r.profile = exec.profile;
      r.exec = std::move(exec);
      break;
    }
    case ProfileSource::file:
      r.profile = load_profile(config.profile_path, r.cfg);
      break;
    case ProfileSource::uniform:
      r.profile = uniform_profile(r.cfg);
      break;
  }
}

/*! \brief Enumerate and canonize all blocks (parallel over `jobs`). */
inline void enumerate_and_canonize(const RunConfig& config, PipelineResult& r) {
  const size_t n = r.dfgs.size();
  r.patterns.assign(n, {});
  r.forms.assign(n, {});
  detail::parallel_blocks(n, config.jobs, [&](size_t i) {
    r.patterns[i] = enumerate_patterns(r.dfgs[i], config.constraints);
    r.forms[i].reserve(r.patterns[i].size());
    for (const auto& p : r.patterns[i]) r.forms[i].push_back(canonical_form(r.dfgs[i], p));
  });
  r.classes = group_patterns(r.dfgs, r.patterns, &r.forms);
}

inline CostOracle make_oracle(const RunConfig& config) {
  ModelWriter writer = [](const std::vector<const IsoClass*>& classes, const std::string& dir) {
    // Models for the external hook carry provisional encodings in class
    // order; final funct3 values are assigned after selection.
    std::vector<SelectedClass> tmp;
    std::map<TemplateId, unsigned> used;
    for (const IsoClass* cls : classes) {
      SelectedClass sel;
      sel.cls = *cls;
      for (const auto& t : all_templates()) {
        if (template_fits(t, cls->graph, 12) && used[t.id] < 8) {
          sel.template_id = t.id;
          sel.funct3 = static_cast<uint8_t>(used[t.id]++);
          break;
        }
      }
      tmp.push_back(std::move(sel));
    }
    std::vector<const SelectedClass*> ptrs;
    for (const auto& sel : tmp) ptrs.push_back(&sel);
    emit_model(ptrs, dir);
  };
  return CostOracle(config.oracle, config.constraints.in_max, config.constraints.out_max,
                    config.constraints.imm_slot_width(), std::move(writer));
}

/*! \brief Full pipeline; writes model/graphs/report artifacts when enabled. */
inline PipelineResult run_pipeline(const RunConfig& config) {
  config.constraints.validate();
  config.oracle.validate();

  PipelineResult r = front_end(config);
  acquire_profile(config, r);
  enumerate_and_canonize(config, r);

  CostOracle oracle = make_oracle(config);
  r.selection = select(r.classes, r.dfgs, r.profile, config.constraints, oracle, config.policy);

  ReportInputs inputs;
  inputs.config = config.echo();
  for (size_t i = 0; i < r.cfg.blocks.size(); ++i) {
    const auto& bb = r.cfg.blocks[i];
    inputs.blocks.push_back({bb.start_address, bb.instructions.size(),
                             r.profile.count_of(bb.start_address), r.patterns[i].size()});
  }
  inputs.total_patterns = r.total_patterns();
  inputs.total_classes = r.classes.size();
  inputs.selection = &r.selection;
  inputs.warnings = r.cfg.warnings;
  r.report = build_report(inputs);

  if (config.write_artifacts) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    emit_model(r.selection, config.out_dir + "/model");
    fs::create_directories(config.out_dir + "/graphs");
    for (const auto& dfg : r.dfgs) {
      std::ofstream dot(config.out_dir + "/graphs/bb_" + to_hex(dfg.bb_start) + ".dot");
      dot << emit_dot(dfg);
    }
    for (size_t i = 0; i < r.selection.selected.size(); ++i) {
      std::ofstream dot(config.out_dir + "/graphs/cid_" + std::to_string(i) + ".dot");
      dot << emit_dot(r.selection.selected[i].cls, r.dfgs);
    }
    std::ofstream report(config.out_dir + "/report.json");
    report << r.report.dump(2) << "\n";
    if (r.exec) {
      std::ofstream prof(config.out_dir + "/profile.txt");
      prof << to_profile_text(r.profile);
    }
  }
  return r;
}

/*! \brief Re-run the interpreter with a report's selection fused; exact check
    of replay_fused == f_total - sum M(U). */
struct VerifyResult {
  uint64_t f_total = 0;
  uint64_t total_merit = 0;
  uint64_t replayed = 0;
  bool exact() const { return replayed == f_total - total_merit; }
};

inline VerifyResult verify_report(const RunConfig& config, const Json& report) {
  PipelineResult r = front_end(config);
  std::vector<FusedOccurrence> occurrences;
  for (const auto& cls : report.at("selection")) {
    for (const auto& occ : cls.at("occurrences")) {
      FusedOccurrence fused;
      fused.bb_start = std::stoull(occ.at("bb").get<std::string>(), nullptr, 16);
      for (const auto& addr : occ.at("addresses"))
        fused.addresses.push_back(std::stoull(addr.get<std::string>(), nullptr, 16));
      occurrences.push_back(std::move(fused));
    }
  }
  VerifyResult v;
  v.f_total = report.at("totals").at("f_total").get<uint64_t>();
  v.total_merit = report.at("speedup").at("total_merit").get<uint64_t>();
  v.replayed = replay_fused(r.image, r.cfg, occurrences, config.limits);
  return v;
}

}  // namespace cidre
