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

// cidre: discover, rank and emit custom-instruction candidates for an
// RV64IM baseline from a compiled program and its execution profile.
//
// Exit codes: 0 ok, 1 verification mismatch/internal, 2 config, 3 decode,
// 4 profile, 5 enumeration cap, 6 oracle, 7 encoding exhaustion.

#include "cidre/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

struct CommonOpts {
  std::string input;
  std::string format = "auto";
  std::string base = "0x80000000";
  std::string entry;
  std::string io = "3,1";
  unsigned umax = 8;
  unsigned min_size = 2;
  unsigned max_components = 2;
  uint64_t candidate_cap = 10'000'000;
  std::vector<std::string> forbid;
  std::string profile = "simulate";
  std::string policy = "two-optimal";
  std::string out_dir = "cidre-out";
  unsigned jobs = 1;
  uint64_t max_steps = 10'000'000;
  uint64_t mem_size = 16ull << 20;
  uint64_t seed = 0;
  int verbosity = 0;

  std::string oracle_mode = "analytic";
  double tclk_base = 1.0;
  double baseline_area = 1000.0;
  double decode_overhead = 0.2;
  double delay_unit = 0.2;
  std::string oracle_cmd;
  std::string oracle_workdir;
};

uint64_t parse_address(const std::string& text, const char* what) {
  try {
    size_t pos = 0;
    const uint64_t v = std::stoull(text, &pos, 0);
    if (pos != text.size()) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    throw cidre::Error(cidre::Stage::config, std::string("cannot parse ") + what + ": " + text);
  }
}

cidre::RunConfig to_run_config(const CommonOpts& opt) {
  cidre::RunConfig config;
  config.input_path = opt.input;
  if (opt.format == "elf64") config.format = cidre::ImageFormat::elf64;
  else if (opt.format == "flat") config.format = cidre::ImageFormat::flat;
  else if (opt.format == "listing") config.format = cidre::ImageFormat::listing;
  else if (opt.format != "auto")
    throw cidre::Error(cidre::Stage::config, "unknown format: " + opt.format);
  config.flat_base = parse_address(opt.base, "base address");
  if (!opt.entry.empty()) config.entry = parse_address(opt.entry, "entry address");

  unsigned in_max = 0, out_max = 0;
  if (std::sscanf(opt.io.c_str(), "%u,%u", &in_max, &out_max) != 2)
    throw cidre::Error(cidre::Stage::config, "cannot parse --io (expected e.g. 3,1): " + opt.io);
  config.constraints.in_max = in_max;
  config.constraints.out_max = out_max;
  config.constraints.u_max = opt.umax;
  config.constraints.min_pattern_size = opt.min_size;
  config.constraints.max_components = opt.max_components;
  config.constraints.candidate_cap = opt.candidate_cap;
  for (const auto& name : opt.forbid) {
    auto op = cidre::op_from_mnemonic(name);
    if (!op) throw cidre::Error(cidre::Stage::config, "unknown mnemonic in --forbid: " + name);
    config.constraints.forbidden_extra.insert(*op);
  }
  config.constraints.validate();

  if (opt.profile == "simulate") config.profile_source = cidre::ProfileSource::simulate;
  else if (opt.profile == "uniform") config.profile_source = cidre::ProfileSource::uniform;
  else if (opt.profile.rfind("file:", 0) == 0) {
    config.profile_source = cidre::ProfileSource::file;
    config.profile_path = opt.profile.substr(5);
  } else {
    throw cidre::Error(cidre::Stage::config,
                       "profile source must be simulate, uniform or file:<path>");
  }

  if (opt.policy == "two-optimal") config.policy = cidre::SelectionPolicy::two_optimal;
  else if (opt.policy == "greedy") config.policy = cidre::SelectionPolicy::greedy;
  else throw cidre::Error(cidre::Stage::config, "policy must be two-optimal or greedy");

  if (opt.oracle_mode == "analytic") config.oracle.mode = cidre::OracleMode::analytic;
  else if (opt.oracle_mode == "external") config.oracle.mode = cidre::OracleMode::external;
  else throw cidre::Error(cidre::Stage::config, "oracle mode must be analytic or external");
  config.oracle.t_clk_base_ns = opt.tclk_base;
  config.oracle.baseline_area = opt.baseline_area;
  config.oracle.decode_overhead_units = opt.decode_overhead;
  config.oracle.delay_unit_ns = opt.delay_unit;
  config.oracle.external_command = opt.oracle_cmd;
  config.oracle.external_workdir = opt.oracle_workdir;
  config.oracle.validate();

  config.out_dir = opt.out_dir;
  config.jobs = opt.jobs;
  config.limits.max_steps = opt.max_steps;
  config.limits.mem_size = opt.mem_size;
  config.seed = opt.seed;
  config.verbosity = opt.verbosity;
  return config;
}

void add_common(CLI::App* cmd, CommonOpts& opt, bool needs_input = true) {
  auto* input = cmd->add_option("--input,-i", opt.input, "Input program");
  if (needs_input) input->required();
  cmd->add_option("--format", opt.format, "Input format: auto|elf64|flat|listing");
  cmd->add_option("--base", opt.base, "Base address for flat images");
  cmd->add_option("--entry", opt.entry, "Entry point override");
  cmd->add_option("--io", opt.io, "I/O constraint IN,OUT: 2,1 3,1 or 3,2");
  cmd->add_option("--umax", opt.umax, "Maximum number of custom instructions");
  cmd->add_option("--min-size", opt.min_size, "Minimum pattern size");
  cmd->add_option("--max-components", opt.max_components, "Disconnected component cap");
  cmd->add_option("--candidate-cap", opt.candidate_cap, "Per-block enumeration safety cap");
  cmd->add_option("--forbid", opt.forbid, "Additional forbidden mnemonics");
  cmd->add_option("--profile", opt.profile, "Profile source: simulate|uniform|file:<path>");
  cmd->add_option("--policy", opt.policy, "Selection policy: two-optimal|greedy");
  cmd->add_option("--out", opt.out_dir, "Output directory");
  cmd->add_option("--jobs,-j", opt.jobs, "Worker threads for enumeration/canonization");
  cmd->add_option("--max-steps", opt.max_steps, "Simulator step limit");
  cmd->add_option("--mem-size", opt.mem_size, "Simulated memory size in bytes");
  cmd->add_option("--seed", opt.seed, "Deterministic seed (echoed in report)");
  cmd->add_flag("-v", opt.verbosity, "Verbosity (repeat for more)");

  cmd->add_option("--oracle.mode", opt.oracle_mode, "Cost oracle: analytic|external");
  cmd->add_option("--oracle.tclk-base", opt.tclk_base, "Baseline clock period [ns]");
  cmd->add_option("--oracle.baseline-area", opt.baseline_area, "Baseline area [units]");
  cmd->add_option("--oracle.decode-overhead", opt.decode_overhead,
                  "Decode overhead [delay units]");
  cmd->add_option("--oracle.delay-unit", opt.delay_unit, "Nanoseconds per delay unit");
  cmd->add_option("--oracle.command", opt.oracle_cmd,
                  "External synthesis command ({model} {result} placeholders)");
  cmd->add_option("--oracle.workdir", opt.oracle_workdir, "External command working directory");
}

int do_run(const CommonOpts& opt) {
  cidre::RunConfig config = to_run_config(opt);
  cidre::PipelineResult result = cidre::run_pipeline(config);
  if (result.exec) {
    if (!result.exec->stdout_text.empty()) std::fputs(result.exec->stdout_text.c_str(), stdout);
    std::fprintf(stderr, "simulated program exited with code %d after %llu instructions\n",
                 result.exec->exit_code,
                 static_cast<unsigned long long>(result.exec->retired));
  }
  std::fprintf(stderr,
               "blocks=%zu patterns=%zu classes=%zu selected=%zu cycle-speedup=%.4f "
               "exec-speedup=%.4f area-overhead=%.2f%%\n",
               result.cfg.blocks.size(), result.total_patterns(), result.classes.size(),
               result.selection.selected.size(), result.selection.cycle_speedup(),
               result.selection.execution_speedup(), result.selection.area_overhead_pct());
  std::fprintf(stderr, "artifacts written to %s\n", config.out_dir.c_str());
  return 0;
}

int do_decode(const CommonOpts& opt) {
  cidre::RunConfig config = to_run_config(opt);
  cidre::ProgramImage image =
      cidre::load_image(config.input_path, config.format, config.flat_base, config.entry);
  for (const auto& ins : image.decode_all())
    std::printf("%llx: %08x  %s\n", static_cast<unsigned long long>(ins.address), ins.raw,
                cidre::to_string(ins).c_str());
  return 0;
}

int do_graph(const CommonOpts& opt, const std::string& block) {
  cidre::RunConfig config = to_run_config(opt);
  cidre::PipelineResult r = cidre::front_end(config);
  if (block.empty()) {
    for (const auto& dfg : r.dfgs) std::fputs(cidre::emit_dot(dfg).c_str(), stdout);
    return 0;
  }
  const uint64_t addr = parse_address(block, "block address");
  for (const auto& dfg : r.dfgs) {
    if (dfg.bb_start == addr) {
      std::fputs(cidre::emit_dot(dfg).c_str(), stdout);
      return 0;
    }
  }
  throw cidre::Error(cidre::Stage::config, "no block starts at " + block);
}

int do_enumerate(const CommonOpts& opt) {
  cidre::RunConfig config = to_run_config(opt);
  cidre::PipelineResult r = cidre::front_end(config);
  cidre::enumerate_and_canonize(config, r);
  size_t total = 0;
  for (size_t i = 0; i < r.dfgs.size(); ++i) {
    std::printf("%llx: %zu patterns\n",
                static_cast<unsigned long long>(r.dfgs[i].bb_start), r.patterns[i].size());
    total += r.patterns[i].size();
  }
  std::printf("total: %zu patterns, %zu classes\n", total, r.classes.size());
  return 0;
}

int do_profile(const CommonOpts& opt, const std::string& out_path) {
  cidre::RunConfig config = to_run_config(opt);
  cidre::PipelineResult r = cidre::front_end(config);
  cidre::ExecResult exec = cidre::run_and_profile(r.image, r.cfg, config.limits);
  if (!exec.stdout_text.empty()) std::fputs(exec.stdout_text.c_str(), stdout);
  std::fprintf(stderr, "exit code %d, %llu instructions retired\n", exec.exit_code,
               static_cast<unsigned long long>(exec.retired));
  const std::string text = cidre::to_profile_text(exec.profile);
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream out(out_path);
    out << text;
  }
  return 0;
}

int do_verify(const CommonOpts& opt, const std::string& report_path) {
  cidre::RunConfig config = to_run_config(opt);
  std::ifstream in(report_path);
  if (!in) throw cidre::Error(cidre::Stage::config, "cannot open report: " + report_path);
  cidre::Json report = cidre::Json::parse(in);
  cidre::VerifyResult v = cidre::verify_report(config, report);
  std::printf("f_total=%llu total_merit=%llu replay_fused=%llu expected=%llu\n",
              static_cast<unsigned long long>(v.f_total),
              static_cast<unsigned long long>(v.total_merit),
              static_cast<unsigned long long>(v.replayed),
              static_cast<unsigned long long>(v.f_total - v.total_merit));
  if (v.exact()) {
    std::printf("exact\n");
    return 0;
  }
  std::printf("mismatch\n");
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cidre: custom-instruction candidate discovery for RV64IM"};
  app.require_subcommand(1);
  app.set_config("--config")->envname("CIDRE_CONFIG");

  CommonOpts opt;
  std::string block, report_path, profile_out;

  CLI::App* run = app.add_subcommand("run", "Run the full pipeline and emit artifacts");
  add_common(run, opt);
  CLI::App* decode = app.add_subcommand("decode", "Decode the input and dump a listing");
  add_common(decode, opt);
  CLI::App* graph = app.add_subcommand("graph", "Emit DOT for one block (or all)");
  add_common(graph, opt);
  graph->add_option("--block", block, "Block start address");
  CLI::App* enumerate = app.add_subcommand("enumerate", "Enumerate candidates, print counts");
  add_common(enumerate, opt);
  CLI::App* profile = app.add_subcommand("profile", "Run the simulator, write a profile");
  add_common(profile, opt);
  profile->add_option("--write", profile_out, "Profile output path (default stdout)");
  CLI::App* verify = app.add_subcommand("verify", "Replay a report's selection fused");
  add_common(verify, opt);
  verify->add_option("--report", report_path, "report.json of a prior run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return do_run(opt);
    if (decode->parsed()) return do_decode(opt);
    if (graph->parsed()) return do_graph(opt, block);
    if (enumerate->parsed()) return do_enumerate(opt);
    if (profile->parsed()) return do_profile(opt, profile_out);
    if (verify->parsed()) return do_verify(opt, report_path);
  } catch (const cidre::Error& e) {
    std::fprintf(stderr, "cidre: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cidre: %s\n", e.what());
    return 1;
  }
  return 2;
}
