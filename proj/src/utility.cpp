#include "hearsay/utility.hpp"

#include <variant>

namespace hearsay {

UtilityLedger utility_ledger(const Trace& trace, AgentId agent, double msg_cost_c) {
  UtilityLedger u;
  u.agent = agent;
  u.msg_cost_c = msg_cost_c;
  for (const auto& rec : trace) {
    if (const auto* s = std::get_if<SendRecord>(&rec.body)) {
      if (s->from == agent && s->to != agent) ++u.messages_sent;
    } else if (const auto* fc = std::get_if<FeeConvertRecord>(&rec.body)) {
      if (fc->agent == agent && fc->tx.initiator == agent) {
        u.fee_income += fc->amount;
        u.converted_credits.insert(fc->converted.begin(), fc->converted.end());
      }
    } else if (const auto* ex = std::get_if<ExecuteRecord>(&rec.body)) {
      if (ex->agent == agent && ex->tx.initiator == agent) u.payments_received += ex->payments_credited;
    } else if (const auto* cm = std::get_if<CommitRecord>(&rec.body)) {
      if (cm->agent == agent && cm->tx.initiator == agent) u.payments_sent += cm->value;
    }
  }
  return u;
}

double utility(const Trace& trace, AgentId agent, double msg_cost_c) {
  return utility_ledger(trace, agent, msg_cost_c).utility();
}

}  // namespace hearsay
