#include "hearsay/strategy.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "hearsay/random.hpp"

namespace hearsay {

namespace {

constexpr std::pair<StrategyKind, std::string_view> kNames[] = {
    {StrategyKind::Compliant, "COMPLIANT"},
    {StrategyKind::ByzSilent, "BYZ_SILENT"},
    {StrategyKind::ByzEquivocate, "BYZ_EQUIVOCATE"},
    {StrategyKind::ByzOverdraft, "BYZ_OVERDRAFT"},
    {StrategyKind::ByzBadDeps, "BYZ_BAD_DEPS"},
    {StrategyKind::RationalFreerider, "RATIONAL_FREERIDER"},
    {StrategyKind::RationalLazyExec, "RATIONAL_LAZY_EXEC"},
};

// Salt separating freerider skip draws from network delay draws.
constexpr std::uint64_t kSkipSalt = 0x736b6970;

}  // namespace

std::string_view to_string(StrategyKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "?";
}

StrategyKind strategy_kind_from_string(std::string_view s) {
  for (const auto& [k, name] : kNames) {
    if (name == s) return k;
  }
  throw std::invalid_argument("unknown strategy kind: " + std::string(s));
}

bool is_byzantine(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::ByzSilent:
    case StrategyKind::ByzEquivocate:
    case StrategyKind::ByzOverdraft:
    case StrategyKind::ByzBadDeps:
      return true;
    default:
      return false;
  }
}

Agent::Agent(AgentId id, StrategySpec spec, Thresholds thresholds, LedgerConfig ledger, std::uint64_t seed)
    : id_(id), spec_(std::move(spec)), thresholds_(thresholds), seed_(seed), ledger_(id, ledger) {
  instances_.reserve(thresholds.n);
  for (std::size_t c = 0; c < thresholds.n; ++c) {
    instances_.emplace_back(AgentId::from_index(c), id, thresholds);
  }
  if (spec_.kind == StrategyKind::RationalLazyExec) ledger_.set_execute_others(false);
}

std::vector<Effect> Agent::act(const AgentEvent& event) {
  std::vector<Effect> out;
  if (spec_.kind == StrategyKind::ByzSilent) return out;
  if (const auto* in = std::get_if<IncomingMessage>(&event)) {
    on_message(*in, out);
  } else {
    on_action(std::get<Action>(event), out);
  }
  issue_pending(out);
  return out;
}

void Agent::on_message(const IncomingMessage& in, std::vector<Effect>& out) {
  const AgentId channel = in.msg.channel;
  if (channel.value < 1 || channel.value > thresholds_.n) {
    out.emplace_back(EvidenceRecord{id_, in.from, channel, in.msg.seq, "message for unknown channel"});
    return;
  }
  ReceiveResult result = instances_[channel.index()].on_receive(in.from, in.msg);

  for (const auto& g : result.gate_events) {
    if (g.peer == id_) continue;
    if (g.blocked) {
      out.emplace_back(RetalBlockRecord{{id_, g.peer, channel, g.seq}});
    } else {
      out.emplace_back(RetalUnblockRecord{{id_, g.peer, channel, g.seq}});
    }
  }
  for (const auto& e : result.evidence) {
    out.emplace_back(EvidenceRecord{id_, e.peer, channel, e.seq, e.what});
  }
  send(std::move(result.outbound), out);

  for (const auto& payload : result.delivered) {
    out.emplace_back(DeliverRecord{id_, channel, payload->tx.seq, payload->digest, payload->tx});
    // The ledger only accepts what arrived on the initiator's own channel.
    if (payload->tx.initiator != channel) {
      out.emplace_back(EvidenceRecord{id_, channel, channel, payload->tx.seq, "payload initiator differs from channel"});
      continue;
    }
    for (const auto& report : ledger_.on_rrb_deliver(payload->tx)) record_execution(report, out);
  }
}

void Agent::on_action(const Action& action, std::vector<Effect>& out) {
  if (const auto* pay = std::get_if<PayAction>(&action)) {
    if (spec_.kind == StrategyKind::ByzEquivocate) {
      equivocate(*pay, out);
    } else {
      pending_.push_back(*pay);
    }
    return;
  }
  // Backfill.
  for (auto& o : suppressed_) out.emplace_back(std::move(o));
  suppressed_.clear();
}

void Agent::record_execution(const ExecutionReport& report, std::vector<Effect>& out) const {
  const TxId id = report.tx.id();
  out.emplace_back(ExecuteRecord{id_, id, report.verdict, report.payments_credited});
  if (report.verdict == Verdict::Committed) {
    out.emplace_back(CommitRecord{id_, id, report.tx.recipient, report.tx.value});
  }
  if (!report.fees_converted.empty()) {
    out.emplace_back(FeeConvertRecord{id_, id, report.fees_converted,
                                      static_cast<Money>(report.fees_converted.size()) * ledger_.config().epsilon});
  }
  out.emplace_back(FeeCreditRecord{id_, id});

  SnapshotRecord snap;
  snap.agent = id_;
  snap.balances = ledger_.balances();
  snap.sequences = ledger_.sequences();
  for (std::size_t j = 0; j < thresholds_.n; ++j) {
    const AgentId a = AgentId::from_index(j);
    snap.fee_credits.push_back(ledger_.fee_credits(a).size());
    snap.payments.push_back(ledger_.payments(a).size());
    snap.payment_values.push_back(ledger_.pending_payment_value(a));
  }
  out.emplace_back(std::move(snap));
}

bool Agent::suppress(const Outbound& o) const {
  if (spec_.kind != StrategyKind::RationalFreerider) return false;
  if (o.msg.kind == MessageKind::Initial || o.to == id_) return false;
  const auto& p = spec_.params;
  if (!p.channels.empty() && !p.channels.contains(o.msg.channel)) return false;
  if (!p.seqs.empty() && !p.seqs.contains(o.msg.seq)) return false;
  if (p.skip_probability >= 1.0) return true;
  const auto draw = keyed_draw(seed_, {kSkipSalt, id_.value, o.msg.channel.value, o.msg.seq});
  return unit_interval(draw) < p.skip_probability;
}

void Agent::send(std::vector<Outbound> messages, std::vector<Effect>& out) {
  for (auto& o : messages) {
    if (suppress(o)) {
      suppressed_.push_back(std::move(o));
    } else {
      out.emplace_back(std::move(o));
    }
  }
}

void Agent::issue_pending(std::vector<Effect>& out) {
  while (!pending_.empty() && !ledger_.has_pending_own()) {
    const PayAction pay = pending_.front();
    pending_.pop_front();
    Transaction tx;
    try {
      switch (spec_.kind) {
        case StrategyKind::ByzOverdraft:
          tx = ledger_.compose(pay.to, ledger_.balance(id_) + spec_.params.excess, pay.convert_fees);
          break;
        case StrategyKind::ByzBadDeps: {
          const auto bad = ledger_.bad_transactions();
          if (bad.empty()) {
            // No bad transaction known yet: manufacture one.
            tx = ledger_.compose(pay.to, ledger_.balance(id_) + spec_.params.excess, pay.convert_fees);
          } else {
            tx = ledger_.compose(pay.to, pay.amount, pay.convert_fees);
            tx.deps.insert(bad.begin(), bad.end());
          }
          break;
        }
        default:
          tx = ledger_.pay(pay.to, pay.amount, pay.convert_fees);
          break;
      }
    } catch (const LedgerError&) {
      // Pay refuses: nothing is broadcast.
      continue;
    }
    auto msgs = instances_[id_.index()].broadcast(make_payload(std::move(tx)));
    for (auto& o : msgs) out.emplace_back(std::move(o));
  }
}

void Agent::equivocate(const PayAction& pay, std::vector<Effect>& out) {
  Transaction first;
  try {
    first = ledger_.compose(pay.to, pay.amount, pay.convert_fees);
  } catch (const LedgerError&) {
    return;
  }
  Transaction second = first;
  second.value = first.value + 1;
  // Pick a different recipient when there is one.
  for (std::uint32_t k = 1; k <= thresholds_.n; ++k) {
    AgentId r{k};
    if (r != id_ && r != first.recipient) {
      second.recipient = r;
      break;
    }
  }
  auto a = make_payload(std::move(first));
  auto b = make_payload(std::move(second));
  const std::size_t half = (thresholds_.n + 1) / 2;
  for (std::size_t i = 0; i < thresholds_.n; ++i) {
    const auto& payload = i < half ? a : b;
    out.emplace_back(Outbound{AgentId::from_index(i), RrbMessage{id_, MessageKind::Initial, payload->tx.seq, payload}});
  }
}

}  // namespace hearsay
