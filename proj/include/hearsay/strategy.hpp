#pragma once

#include <cstdint>
#include <deque>
#include <set>
#include <string_view>
#include <variant>
#include <vector>

#include "hearsay/ledger.hpp"
#include "hearsay/rrb.hpp"
#include "hearsay/trace.hpp"
#include "hearsay/types.hpp"

namespace hearsay {

enum class StrategyKind : std::uint8_t {
  Compliant,
  ByzSilent,
  ByzEquivocate,
  ByzOverdraft,
  ByzBadDeps,
  RationalFreerider,
  RationalLazyExec,
};

std::string_view to_string(StrategyKind kind);
/// Accepts the upper-case names used in scenario files, e.g. "BYZ_SILENT".
StrategyKind strategy_kind_from_string(std::string_view s);
bool is_byzantine(StrategyKind kind);

struct StrategyParams {
  // RATIONAL_FREERIDER: channels and sequence numbers on which echo/ready
  // forwarding is suppressed. Empty means all.
  std::set<AgentId> channels;
  std::set<Seq> seqs;
  // Chance that a matching (channel, seq) is actually skipped; drawn per
  // (seed, agent, channel, seq), so it is reproducible.
  double skip_probability{1.0};
  // BYZ_OVERDRAFT / BYZ_BAD_DEPS: how far above the current balance the value goes.
  Money excess{100};
};

struct StrategySpec {
  StrategyKind kind{StrategyKind::Compliant};
  StrategyParams params;
};

struct PayAction {
  AgentId to;
  Money amount{0};
  bool convert_fees{false};
};

/// Freerider only: release every echo/ready it suppressed so far.
struct BackfillAction {};

using Action = std::variant<PayAction, BackfillAction>;

struct IncomingMessage {
  AgentId from;
  RrbMessage msg;
};

using AgentEvent = std::variant<IncomingMessage, Action>;

/// Something an agent produced while handling an event: a message to send or
/// a trace record describing a local state change. Order is significant.
using Effect = std::variant<Outbound, RecordBody>;

/// One simulated agent: n broadcast instances, a ledger, and the behavior
/// that decides what it does with them.
///
/// A compliant agent runs the protocol as written. Scripted payments are
/// queued and issued one at a time, each once the agent has executed all of
/// its own earlier transactions.
class Agent {
 public:
  Agent(AgentId id, StrategySpec spec, Thresholds thresholds, LedgerConfig ledger, std::uint64_t seed);

  std::vector<Effect> act(const AgentEvent& event);

  AgentId id() const { return id_; }
  const StrategySpec& strategy() const { return spec_; }
  const LedgerState& ledger() const { return ledger_; }
  const RrbInstance& instance(AgentId channel) const { return instances_.at(channel.index()); }
  std::size_t pending_payments() const { return pending_.size(); }
  std::size_t suppressed_messages() const { return suppressed_.size(); }

 private:
  void on_message(const IncomingMessage& in, std::vector<Effect>& out);
  void on_action(const Action& action, std::vector<Effect>& out);
  void record_execution(const ExecutionReport& report, std::vector<Effect>& out) const;
  void send(std::vector<Outbound> messages, std::vector<Effect>& out);
  void issue_pending(std::vector<Effect>& out);
  void equivocate(const PayAction& pay, std::vector<Effect>& out);
  bool suppress(const Outbound& o) const;

  AgentId id_;
  StrategySpec spec_;
  Thresholds thresholds_;
  std::uint64_t seed_;
  LedgerState ledger_;
  std::vector<RrbInstance> instances_;
  std::deque<PayAction> pending_;
  std::vector<Outbound> suppressed_;
};

}  // namespace hearsay
