// Copyright 2026 The primsel Authors
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

// primsel command-line tool.
//
// Exit codes: 0 success, 1 input error, 2 infeasible, 3 solver time limit hit.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "primsel/primsel.hpp"

namespace {

using namespace primsel;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitTimeout = 3;

struct Suffix {
  std::string_view text;
  std::uint64_t scale;
};

std::uint64_t ParseScaled(const std::string& raw, std::initializer_list<Suffix> suffixes,
                          std::string_view what) {
  std::string_view s = raw;
  std::uint64_t scale = 1;
  for (const auto& suf : suffixes) {
    if (s.size() > suf.text.size() && s.ends_with(suf.text)) {
      s.remove_suffix(suf.text.size());
      scale = suf.scale;
      break;
    }
  }
  std::uint64_t value = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::kInvalidRequest, "bad " + std::string(what) + " '" + raw + "'");
  }
  return CheckedMul(value, scale);
}

// Longer suffixes first so "ms" is not read as "s".
Bytes ParseSize(const std::string& s) {
  return ParseScaled(s, {{"GiB", 1ull << 30}, {"MiB", 1ull << 20}, {"KiB", 1ull << 10}, {"B", 1}},
                     "size");
}

Duration ParseDuration(const std::string& s) {
  return ParseScaled(s, {{"us", 1}, {"ms", 1000}, {"s", 1000000}}, "duration");
}

std::optional<std::chrono::milliseconds> ParseLimit(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const Duration us = ParseDuration(s);
  return std::chrono::milliseconds((us + 999) / 1000);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kParse, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kParse, "cannot write '" + path + "'");
}

// Writes to `path`, or to stdout when it is empty.
void Emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    WriteFile(path, text);
  }
}

Network LoadNetwork(const std::string& path) {
  return Network::Build(ParseProfile(ReadFile(path)));
}

std::vector<std::size_t> LoadChoice(const Network& net, const std::string& path) {
  std::istringstream in(ReadFile(path));
  return ParseChoice(net, in);
}

std::vector<Bytes> BudgetGrid(const Network& net, const std::string& list, std::size_t points,
                              bool workspace) {
  if (list.empty()) {
    if (points == 0) throw Error(ErrorCode::kInvalidRequest, "--points must be positive");
    return auto_grid(net, points, workspace);
  }
  std::vector<Bytes> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(ParseSize(item));
  if (out.empty()) throw Error(ErrorCode::kInvalidRequest, "empty budget list");
  return out;
}

std::string SidecarPath(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".selections.json");
  return p.string();
}

struct SolveArgs {
  std::string profile;
  std::string mode = "min-time";
  std::string memory_budget;
  std::string time_budget;
  bool workspace = false;
  std::string time_limit;
  std::string out;
  std::string lp_out;
};

int RunSolve(const SolveArgs& a) {
  const Network net = LoadNetwork(a.profile);
  SolveRequest req;
  if (a.mode == "min-time") {
    req.mode = SolveMode::kMinTime;
  } else if (a.mode == "min-memory") {
    req.mode = SolveMode::kMinMemorySum;
  } else if (a.mode == "min-workspace") {
    req.mode = SolveMode::kMinWorkspace;
  } else {
    throw Error(ErrorCode::kInvalidRequest, "unknown mode '" + a.mode + "'");
  }
  if (!a.memory_budget.empty()) req.memory_budget = ParseSize(a.memory_budget);
  if (!a.time_budget.empty()) req.time_budget = ParseDuration(a.time_budget);
  if (a.workspace) req.memory_measure = MemoryMeasure::kPeakLayer;
  req.time_limit = ParseLimit(a.time_limit);
  validate_request(req);

  if (!a.lp_out.empty()) {
    std::ostringstream lp;
    WriteLp(build_problem(net, req), lp);
    WriteFile(a.lp_out, lp.str());
  }

  const SolveOutcome outcome = Solve(net, req);
  std::cerr << "status " << SolveStatusName(outcome.status) << ", nodes " << outcome.stats.nodes
            << '\n';
  if (outcome.selection.has_value()) {
    Json j = SelectionToJson(net, *outcome.selection);
    j["status"] = SolveStatusName(outcome.status);
    Emit(a.out, j.dump(2) + "\n");
  }
  switch (outcome.status) {
    case SolveStatus::kOptimal: return kExitOk;
    case SolveStatus::kInfeasible: return kExitInfeasible;
    case SolveStatus::kTimedOut: return kExitTimeout;
  }
  return kExitInput;
}

int RunValidate(const std::string& path) {
  const NetworkProfile profile = ParseProfile(ReadFile(path));
  std::vector<Violation> violations = validate_profile(profile);
  if (violations.empty()) {
    try {
      Network::Build(profile);
    } catch (const Error& err) {
      violations.push_back({"layout_transforms", err.what()});
    }
  }
  if (violations.empty()) {
    std::cout << "OK\n";
    return kExitOk;
  }
  for (const auto& v : violations) std::cout << v.where << ": " << v.message << '\n';
  return kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-layer primitive selection under time and memory budgets"};
  app.require_subcommand(1);

  std::string profile_path;
  std::string selection_path;
  std::string out_path;

  auto* validate = app.add_subcommand("validate", "Check a profile for consistency");
  validate->add_option("profile", profile_path, "Profile JSON")->required();

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Solve for an optimal selection");
  solve->add_option("profile", solve_args.profile, "Profile JSON")->required();
  solve->add_option("--mode", solve_args.mode, "min-time | min-memory | min-workspace")
      ->check(CLI::IsMember({"min-time", "min-memory", "min-workspace"}));
  solve->add_option("--memory-budget", solve_args.memory_budget, "Memory budget, e.g. 64MiB");
  solve->add_option("--time-budget", solve_args.time_budget, "Time budget, e.g. 250ms");
  solve->add_flag("--workspace", solve_args.workspace,
                  "Apply the memory budget to the largest layer instead of the sum");
  solve->add_option("--time-limit", solve_args.time_limit, "Solver wall-clock limit, e.g. 30s");
  solve->add_option("--out", solve_args.out, "Selection JSON (default: stdout)");
  solve->add_option("--lp-out", solve_args.lp_out, "Also write the model in LP format");

  std::size_t points = 10;
  std::string budgets;
  bool workspace = false;
  unsigned threads = 1;
  std::string time_limit;
  std::string sidecar_path;
  auto* sweep = app.add_subcommand("sweep", "Min-time solves over a memory budget grid");
  sweep->add_option("profile", profile_path, "Profile JSON")->required();
  sweep->add_option("--points", points, "Evenly spaced budgets over the reachable range");
  sweep->add_option("--budgets", budgets, "Comma-separated budgets (overrides --points)");
  sweep->add_flag("--workspace", workspace, "Budget the largest layer instead of the sum");
  sweep->add_option("--threads", threads, "Concurrent solves");
  sweep->add_option("--time-limit", time_limit, "Per-solve wall-clock limit");
  sweep->add_option("--out", out_path, "Frontier CSV")->required();
  sweep->add_option("--selections", sidecar_path,
                    "Selection sidecar JSON (default: <out>.selections.json)");

  auto* cmp = app.add_subcommand("compare", "ILP against the greedy baseline over a budget grid");
  cmp->add_option("profile", profile_path, "Profile JSON")->required();
  cmp->add_option("--points", points, "Evenly spaced budgets over the reachable range");
  cmp->add_option("--budgets", budgets, "Comma-separated budgets (overrides --points)");
  cmp->add_option("--time-limit", time_limit, "Per-solve wall-clock limit");
  cmp->add_option("--out", out_path, "Comparison CSV (default: stdout)");

  GeneratorOptions gen_opts;
  std::string topology = "chain";
  auto* gen = app.add_subcommand("gen", "Write a seeded synthetic profile");
  gen->add_option("--layers", gen_opts.layers, "Layer count")->required();
  gen->add_option("--candidates", gen_opts.candidates, "Candidates per layer")->required();
  gen->add_option("--seed", gen_opts.seed, "Generator seed");
  gen->add_option("--topology", topology, "chain | fork-join")
      ->check(CLI::IsMember({"chain", "fork-join"}));
  gen->add_option("--name", gen_opts.name, "Profile name");
  gen->add_option("--out", out_path, "Profile JSON (default: stdout)");

  auto* score = app.add_subcommand("score", "Evaluate a selection");
  score->add_option("profile", profile_path, "Profile JSON")->required();
  score->add_option("selection", selection_path, "Selection JSON")->required();

  auto* plan = app.add_subcommand("plan", "Buffer plan for a selection on a chain");
  plan->add_option("profile", profile_path, "Profile JSON")->required();
  plan->add_option("selection", selection_path, "Selection JSON")->required();
  plan->add_option("--out", out_path, "Plan JSON (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*validate) return RunValidate(profile_path);
    if (*solve) return RunSolve(solve_args);

    if (*sweep) {
      const Network net = LoadNetwork(profile_path);
      const auto grid = BudgetGrid(net, budgets, points, workspace);
      SweepOptions opts;
      opts.workspace = workspace;
      opts.threads = threads;
      opts.time_limit = ParseLimit(time_limit);
      const auto swept = sweep_memory_budget(net, grid, opts);
      const FrontierFiles files = WriteFrontier(net, swept);
      WriteFile(out_path, files.csv);
      WriteFile(sidecar_path.empty() ? SidecarPath(out_path) : sidecar_path, files.sidecar);
      for (const auto& p : swept) {
        if (p.status == SolveStatus::kTimedOut) return kExitTimeout;
      }
      return kExitOk;
    }

    if (*cmp) {
      const Network net = LoadNetwork(profile_path);
      const auto grid = BudgetGrid(net, budgets, points, false);
      const ComparisonReport report = compare(net, grid, ParseLimit(time_limit));
      Emit(out_path, WriteComparison(report));
      return kExitOk;
    }

    if (*gen) {
      gen_opts.topology = topology == "fork-join" ? Topology::kForkJoin : Topology::kChain;
      Emit(out_path, SerializeProfile(GenerateProfile(gen_opts)));
      return kExitOk;
    }

    if (*score) {
      const Network net = LoadNetwork(profile_path);
      const auto choice = LoadChoice(net, selection_path);
      std::cout << BreakdownToJson(evaluate(net, choice)).dump(2) << '\n';
      return kExitOk;
    }

    if (*plan) {
      const Network net = LoadNetwork(profile_path);
      const auto choice = LoadChoice(net, selection_path);
      Emit(out_path, SerializePlan(net, plan_execution(net, choice)));
      return kExitOk;
    }
  } catch (const Error& err) {
    std::cerr << "error (" << ErrorCodeName(err.code()) << "): " << err.what() << '\n';
    return err.code() == ErrorCode::kInfeasible ? kExitInfeasible : kExitInput;
  }
  return kExitInput;
}
