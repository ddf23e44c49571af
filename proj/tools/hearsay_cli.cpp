#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "hearsay/checker.hpp"
#include "hearsay/netsim.hpp"
#include "hearsay/scenario.hpp"
#include "hearsay/trace.hpp"
#include "hearsay/utility.hpp"

namespace {

using namespace hearsay;

constexpr int kOk = 0;
constexpr int kCheckFail = 1;
constexpr int kConfigError = 2;
constexpr int kNonQuiescent = 3;

int exit_code(const Report* report, bool quiescent) {
  if (report != nullptr && std::ranges::any_of(report->results, [](const CheckResult& r) {
        return r.status == CheckStatus::Fail;
      })) {
    return kCheckFail;
  }
  return quiescent ? kOk : kNonQuiescent;
}

void print_summary(std::ostream& os, const Trace& trace, double msg_cost_c) {
  const Verdicts v = extract_verdicts(trace);
  os << "agent  strategy            executed  bad  balance(own view)  utility\n";
  for (std::size_t i = 0; i < v.config.n; ++i) {
    const AgentId a = AgentId::from_index(i);
    const auto bad = std::ranges::count_if(v.verdicts[i], [](const auto& kv) { return kv.second == Verdict::Bad; });
    os << std::left << std::setw(7) << a.value << std::setw(20) << v.config.strategies[i] << std::setw(10)
       << v.executed[i].size() << std::setw(5) << bad << std::setw(19) << v.balances[i][i] << std::fixed
       << std::setprecision(2) << utility(trace, a, msg_cost_c) << '\n';
  }
  os << "balances:\n";
  for (std::size_t i = 0; i < v.config.n; ++i) {
    os << "  agent " << i + 1 << " sees [";
    for (std::size_t j = 0; j < v.balances[i].size(); ++j) os << (j ? ", " : "") << v.balances[i][j];
    os << "]\n";
  }
}

int cmd_run(const std::string& path, const std::optional<std::uint64_t>& seed, const std::string& trace_path,
            bool check, bool summary) {
  Scenario sc = load_scenario(path);
  if (seed) sc.config.seed = *seed;
  RunResult result = run(sc.config);

  if (!trace_path.empty()) {
    std::ofstream out(trace_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + trace_path);
    write_trace(out, result.trace);
  }
  std::optional<Report> report;
  if (check) {
    report = run_all_checks(result.trace);
    std::cout << format_report(*report);
  }
  if (summary) print_summary(std::cout, result.trace, sc.msg_cost_c);
  if (!result.quiescent) std::cerr << "run did not reach quiescence after " << result.steps << " steps\n";
  return exit_code(report ? &*report : nullptr, result.quiescent);
}

int cmd_check(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceFormatError("cannot read " + path);
  const Trace trace = read_trace(in);
  const Report report = run_all_checks(trace);
  std::cout << format_report(report);
  const bool quiescent = !trace.empty() && std::holds_alternative<EndRecord>(trace.back().body) &&
                         std::get<EndRecord>(trace.back().body).quiescent;
  return exit_code(&report, quiescent);
}

struct SeedOutcome {
  std::uint64_t seed{0};
  int code{kOk};
  std::string detail;
};

SeedOutcome run_seed(SimConfig config, std::uint64_t seed) {
  config.seed = seed;
  const RunResult result = run(config);
  const Report report = run_all_checks(result.trace);
  SeedOutcome out{seed, exit_code(&report, result.quiescent), {}};
  for (const auto& r : report.results) {
    if (r.status != CheckStatus::Pass) {
      out.detail = r.name + " " + std::string(to_string(r.status)) + ": " + r.counterexample;
      break;
    }
  }
  if (out.detail.empty() && !result.quiescent) out.detail = "not quiescent";
  return out;
}

int cmd_sweep(const std::string& path, const std::string& seeds_text, unsigned workers) {
  const Scenario sc = load_scenario(path);
  const std::vector<std::uint64_t> seeds = seeds_text.empty() ? sc.seeds : parse_seed_range(seeds_text);
  std::vector<SeedOutcome> outcomes(seeds.size());

  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(seeds.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) outcomes[i] = run_seed(sc.config, seeds[i]);
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::ranges::sort(outcomes, {}, &SeedOutcome::seed);
  std::size_t passed = 0;
  int code = kOk;
  for (const auto& o : outcomes) {
    if (o.code == kOk) {
      ++passed;
      continue;
    }
    std::cout << "seed " << o.seed << ' ' << o.detail << '\n';
    if (o.code == kCheckFail || code == kOk) code = o.code;
  }
  std::cout << passed << '/' << outcomes.size() << " PASS\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded simulator and checker for the Hearsay payment protocol"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string trace_out;
  std::optional<std::uint64_t> seed;
  bool check = false;
  bool summary = false;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario");
  run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  run_cmd->add_option("--trace", trace_out, "Write the trace to this path");
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_flag("--check", check, "Run all checkers and print the report");
  run_cmd->add_flag("--summary", summary, "Print balances, executions and utilities");

  std::string trace_in;
  auto* check_cmd = app.add_subcommand("check", "Check a recorded trace");
  check_cmd->add_option("trace", trace_in, "Trace file")->required();

  std::string sweep_path;
  std::string seeds;
  unsigned workers = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run and check a scenario over many seeds");
  sweep_cmd->add_option("scenario", sweep_path, "Scenario file")->required();
  sweep_cmd->add_option("--seeds", seeds, "Seed range a..b (defaults to the scenario's seeds)");
  sweep_cmd->add_option("--workers", workers, "Parallel simulations")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(scenario_path, seed, trace_out, check, summary);
    if (*check_cmd) return cmd_check(trace_in);
    return cmd_sweep(sweep_path, seeds, workers);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const TraceFormatError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
  }
  return kConfigError;
}
