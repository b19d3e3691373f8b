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
  \file cost.hpp
  \brief Clock-period and area estimation for candidate instruction sets.

  Stands in for the synthesis loop.  The analytic mode sums normalized
  per-operation delays along the critical path of each class and compares
  against the baseline clock period; its delay and area tables are
  non-physical placeholders meant to be overridden.  The external mode
  delegates to a user-supplied command that consumes an emitted model
  directory and writes `clock_period_ns=` / `area_units=` lines.
*/

#pragma once

#include "cidre/canonical.hpp"
#include "cidre/encoding.hpp"
#include "cidre/support.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

namespace cidre {

struct CostEstimate {
  double t_clk_ns = 0.0;
  double area_units = 0.0;
  bool met_baseline_timing = true;
};

enum class OracleMode { analytic, external };

struct OracleConfig {
  OracleMode mode = OracleMode::analytic;
  double t_clk_base_ns = 1.0;
  double baseline_area = 1000.0;
  double decode_overhead_units = 0.2;
  double delay_unit_ns = 0.2;
  std::map<OpId, double> delay_overrides;
  std::map<OpId, double> area_overrides;
  // Register-file port / decoder increments charged per class by template.
  std::map<TemplateId, double> template_area = {
      {TemplateId::R2_1_REG, 0.5},  {TemplateId::R2_1_IMM12, 0.8}, {TemplateId::R3_1_REG, 1.5},
      {TemplateId::R3_1_IMM6, 1.5}, {TemplateId::R3_2_REG, 3.0},
  };
  std::string external_command;  // `{model}` / `{result}` placeholders
  std::string external_workdir;

  void validate() const {
    if (t_clk_base_ns <= 0) throw Error(Stage::config, "t_clk_base must be > 0");
    if (delay_unit_ns <= 0) throw Error(Stage::config, "delay_unit_ns must be > 0");
    if (mode == OracleMode::external && external_command.empty())
      throw Error(Stage::config, "external oracle mode requires a command");
  }

  double delay_of(OpId op) const {
    auto it = delay_overrides.find(op);
    return it != delay_overrides.end() ? it->second : op_info(op).hw_delay_units;
  }
  double area_of(OpId op) const {
    auto it = area_overrides.find(op);
    return it != area_overrides.end() ? it->second : op_info(op).area_units;
  }
};

/*! \brief Critical path of a canonical graph under a delay table, in units. */
inline double critical_path_units(const CanonGraph& g, const OracleConfig& cfg) {
  const size_t n = g.vertices.size();
  std::vector<double> depth(n, 0.0);
  for (size_t v = 0; v < n; ++v) depth[v] = cfg.delay_of(g.vertices[v].op);
  // Edges of a canonical graph are not topologically sorted; relax until
  // stable (tiny DAGs).
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [src, dst, slot] : g.edges) {
      const double d = depth[src] + cfg.delay_of(g.vertices[dst].op);
      if (d > depth[dst] + 1e-12) {
        depth[dst] = d;
        changed = true;
      }
    }
  }
  double best = 0.0;
  for (double d : depth) best = std::max(best, d);
  return best;
}

/*! \brief Writes an emitted model for a class set into a directory; wired to
    the emitter by the driver so the oracle stays decoupled from it. */
using ModelWriter =
    std::function<void(const std::vector<const IsoClass*>&, const std::string& dir)>;

class CostOracle {
public:
  CostOracle(OracleConfig cfg, unsigned run_in_max, unsigned run_out_max, unsigned run_imm_width,
             ModelWriter writer = {})
      : cfg_(std::move(cfg)), run_in_max_(run_in_max), run_out_max_(run_out_max),
        run_imm_width_(run_imm_width), writer_(std::move(writer)) {
    cfg_.validate();
  }

  const OracleConfig& config() const { return cfg_; }

  CostEstimate baseline() const { return {cfg_.t_clk_base_ns, cfg_.baseline_area, true}; }

  CostEstimate estimate(const std::vector<const IsoClass*>& classes) {
    if (classes.empty()) return baseline();
    return cfg_.mode == OracleMode::analytic ? analytic(classes) : external(classes);
  }

private:
  CostEstimate analytic(const std::vector<const IsoClass*>& classes) const {
    double max_path = 0.0;
    double area = cfg_.baseline_area;
    for (const IsoClass* cls : classes) {
      max_path = std::max(max_path, critical_path_units(cls->graph, cfg_));
      for (const auto& v : cls->graph.vertices) area += cfg_.area_of(v.op);
      area += template_increment(cls->graph);
    }
    const double raw = (cfg_.decode_overhead_units + max_path) * cfg_.delay_unit_ns;
    CostEstimate est;
    est.t_clk_ns = std::max(cfg_.t_clk_base_ns, raw);
    est.area_units = area;
    est.met_baseline_timing = raw <= cfg_.t_clk_base_ns;
    return est;
  }

  double template_increment(const CanonGraph& g) const {
    for (TemplateId id : templates_for_shape(run_in_max_, run_out_max_)) {
      const EncodingTemplate& t = template_info(id);
      if (template_fits(t, g, run_imm_width_)) {
        auto it = cfg_.template_area.find(id);
        return it != cfg_.template_area.end() ? it->second : 0.0;
      }
    }
    return 0.0;  // unencodable shapes are rejected later, at assignment
  }

  CostEstimate external(const std::vector<const IsoClass*>& classes) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!writer_) throw Error(Stage::oracle, "external mode has no model writer");
    namespace fs = std::filesystem;
    char tmpl[] = "/tmp/cidre-oracle-XXXXXX";
    char* dir = mkdtemp(tmpl);
    if (!dir) throw Error(Stage::oracle, "cannot create oracle scratch directory");
    const std::string model_dir = std::string(dir) + "/model";
    const std::string result_path = std::string(dir) + "/result";
    fs::create_directories(model_dir);
    writer_(classes, model_dir);

    std::string cmd = cfg_.external_command;
    auto substitute = [&](const std::string& key, const std::string& value) {
      bool any = false;
      for (size_t pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos)) {
        cmd.replace(pos, key.size(), value);
        pos += value.size();
        any = true;
      }
      return any;
    };
    const bool had_model = substitute("{model}", model_dir);
    const bool had_result = substitute("{result}", result_path);
    if (!had_model || !had_result) cmd += " " + model_dir + " " + result_path;
    if (!cfg_.external_workdir.empty()) cmd = "cd " + cfg_.external_workdir + " && " + cmd;

    const int status = std::system(cmd.c_str());
    if (status != 0)
      throw Error(Stage::oracle, "external command failed with status " + std::to_string(status));

    std::ifstream in(result_path);
    if (!in) throw Error(Stage::oracle, "external command produced no result file");
    CostEstimate est;
    bool have_clk = false, have_area = false;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      if (line.rfind("clock_period_ns=", 0) == 0) {
        est.t_clk_ns = std::stod(line.substr(16));
        have_clk = true;
      } else if (line.rfind("area_units=", 0) == 0) {
        est.area_units = std::stod(line.substr(11));
        have_area = true;
      }
    }
    if (!have_clk || !have_area)
      throw Error(Stage::oracle, "malformed oracle result file: " + result_path);
    // A customized processor is never faster than the baseline.
    est.met_baseline_timing = est.t_clk_ns <= cfg_.t_clk_base_ns;
    est.t_clk_ns = std::max(est.t_clk_ns, cfg_.t_clk_base_ns);
    fs::remove_all(dir);
    return est;
  }

  OracleConfig cfg_;
  unsigned run_in_max_;
  unsigned run_out_max_;
  unsigned run_imm_width_;
  ModelWriter writer_;
  std::mutex mutex_;
};

}  // namespace cidre
