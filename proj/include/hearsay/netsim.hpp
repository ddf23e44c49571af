#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hearsay/ledger.hpp"
#include "hearsay/rrb.hpp"
#include "hearsay/strategy.hpp"
#include "hearsay/trace.hpp"
#include "hearsay/types.hpp"

namespace hearsay {

struct AgentSpec {
  AgentId id;
  StrategySpec strategy;
};

struct ScriptAction {
  Tick tick{0};
  AgentId agent;
  Action action;
};

struct SimConfig {
  std::uint32_t n{4};
  std::uint32_t t{1};
  Money epsilon{1};
  Money initial_balance{100};
  std::uint64_t seed{1};
  Tick d_min{1};
  Tick d_max{1};
  bool fifo_channels{false};
  bool condition3_strict{false};
  // Agents not listed are compliant.
  std::vector<AgentSpec> agents;
  std::vector<ScriptAction> script;
  std::uint64_t max_steps{10'000'000};
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws ConfigError naming the first violated constraint.
void validate(const SimConfig& config);

/// Strategy of every agent, indexed by AgentId::index().
std::vector<StrategySpec> strategies_of(const SimConfig& config);

struct ScheduledMessage {
  Tick deliver_at{0};
  std::uint64_t send_seq{0};
  AgentId from;
  AgentId to;
  RrbMessage msg;
};

struct RunResult {
  Trace trace;
  bool quiescent{true};
  std::uint64_t steps{0};
  std::vector<LedgerState> final_ledgers;  // indexed by AgentId::index()
};

/// Seeded discrete-event network of n agents over reliable, authenticated,
/// asynchronous point-to-point channels. Every message sent is delivered
/// exactly once, between d_min and d_max ticks later; messages an agent sends
/// to itself are delivered in the same tick. Delays are keyed by
/// (seed, send_seq) so a run is a pure function of its configuration.
class Simulation {
 public:
  explicit Simulation(SimConfig config);

  RunResult run();

  /// Delay for the message with the given global send index.
  Tick delay(std::uint64_t send_seq) const;

 private:
  struct Event {
    Tick at;
    std::uint64_t order;
    std::size_t slot;  // index into script_ when is_script, else into in_flight_
    bool is_script;

    bool operator>(const Event& o) const { return std::tie(at, order) > std::tie(o.at, o.order); }
  };

  void emit(Tick now, RecordBody body);
  void dispatch(Tick now, AgentId actor, std::vector<Effect> effects);
  void schedule(Tick now, AgentId from, Outbound out);

  SimConfig config_;
  std::vector<Agent> agents_;
  Trace trace_;
  std::uint64_t next_index_{0};
  std::uint64_t next_send_seq_{0};
  std::vector<ScheduledMessage> in_flight_;
  std::vector<std::size_t> free_slots_;
  std::vector<Event> queue_;  // min-heap on (at, order)
  std::vector<Tick> fifo_last_;
};

/// Convenience: Simulation(config).run().
RunResult run(const SimConfig& config);

}  // namespace hearsay
