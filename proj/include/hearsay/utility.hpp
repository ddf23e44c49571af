#pragma once

#include <cstdint>
#include <set>

#include "hearsay/trace.hpp"
#include "hearsay/types.hpp"

namespace hearsay {

/// Per-agent accounting recomputed from a finished trace.
///
/// Only records the agent produced about its own transactions count: what
/// the agent itself was able to credit and spend. Messages are counted per
/// network send; loopback deliveries are free.
struct UtilityLedger {
  AgentId agent;
  Money fee_income{0};         // epsilon per fee credit converted into balance
  Money payments_received{0};  // incoming payments credited into balance
  Money payments_sent{0};      // value of own committed transactions
  std::uint64_t messages_sent{0};
  double msg_cost_c{0.0};
  std::set<TxId> converted_credits;

  Money payments_net() const { return payments_received - payments_sent; }
  double msg_cost_total() const { return msg_cost_c * static_cast<double>(messages_sent); }
  double utility() const { return static_cast<double>(fee_income + payments_net()) - msg_cost_total(); }
};

UtilityLedger utility_ledger(const Trace& trace, AgentId agent, double msg_cost_c);

/// fee_income + payments_net - c * messages_sent.
double utility(const Trace& trace, AgentId agent, double msg_cost_c);

}  // namespace hearsay
