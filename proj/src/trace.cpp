#include "hearsay/trace.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace hearsay {

using json = nlohmann::ordered_json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

json id_json(const TxId& id) { return json::array({id.initiator.value, id.seq}); }

TxId id_from(const json& j) { return TxId{AgentId{j.at(0).get<std::uint32_t>()}, j.at(1).get<Seq>()}; }

json ids_json(const auto& ids) {
  json arr = json::array();
  for (const auto& id : ids) arr.push_back(id_json(id));
  return arr;
}

json tx_json(const Transaction& tx) {
  return json{{"initiator", tx.initiator.value}, {"recipient", tx.recipient.value}, {"value", tx.value},
              {"seq", tx.seq},                   {"deps", ids_json(tx.deps)},        {"fees", ids_json(tx.fees)}};
}

Transaction tx_from(const json& j) {
  Transaction tx;
  tx.initiator = AgentId{j.at("initiator").get<std::uint32_t>()};
  tx.recipient = AgentId{j.at("recipient").get<std::uint32_t>()};
  tx.value = j.at("value").get<Money>();
  tx.seq = j.at("seq").get<Seq>();
  for (const auto& d : j.at("deps")) tx.deps.insert(id_from(d));
  for (const auto& f : j.at("fees")) tx.fees.insert(id_from(f));
  return tx;
}

AgentId agent_from(const json& j, const char* key) { return AgentId{j.at(key).get<std::uint32_t>()}; }

void put_retal(json& j, const RetalRecord& r) {
  j["agent"] = r.agent.value;
  j["peer"] = r.peer.value;
  j["channel"] = r.channel.value;
  j["seq"] = r.seq;
}

RetalRecord retal_from(const json& j) {
  return RetalRecord{agent_from(j, "agent"), agent_from(j, "peer"), agent_from(j, "channel"), j.at("seq").get<Seq>()};
}

template <typename R>
R message_from(const json& j) {
  R r;
  r.from = agent_from(j, "from");
  r.to = agent_from(j, "to");
  r.channel = agent_from(j, "channel");
  r.kind = message_kind_from_string(j.at("msg").get<std::string>());
  r.seq = j.at("seq").get<Seq>();
  r.digest = digest_from_hex(j.at("digest").get<std::string>());
  return r;
}

void put_message(json& j, const auto& r) {
  j["from"] = r.from.value;
  j["to"] = r.to.value;
  j["channel"] = r.channel.value;
  j["msg"] = std::string(to_string(r.kind));
  j["seq"] = r.seq;
  j["digest"] = to_hex(r.digest);
}

}  // namespace

std::string_view kind_name(const RecordBody& body) {
  return std::visit(overloaded{
                        [](const ConfigRecord&) { return std::string_view("CONFIG"); },
                        [](const SendRecord&) { return std::string_view("SEND"); },
                        [](const RecvRecord&) { return std::string_view("RECV"); },
                        [](const DeliverRecord&) { return std::string_view("RRB_DELIVER"); },
                        [](const ExecuteRecord&) { return std::string_view("EXECUTE"); },
                        [](const CommitRecord&) { return std::string_view("COMMIT"); },
                        [](const FeeCreditRecord&) { return std::string_view("FEE_CREDIT"); },
                        [](const FeeConvertRecord&) { return std::string_view("FEE_CONVERT"); },
                        [](const RetalBlockRecord&) { return std::string_view("RETAL_BLOCK"); },
                        [](const RetalUnblockRecord&) { return std::string_view("RETAL_UNBLOCK"); },
                        [](const SnapshotRecord&) { return std::string_view("SNAPSHOT"); },
                        [](const EvidenceRecord&) { return std::string_view("EVIDENCE"); },
                        [](const EndRecord&) { return std::string_view("END"); },
                    },
                    body);
}

std::string to_json_line(const TraceRecord& record) {
  json j;
  j["tick"] = record.tick;
  j["index"] = record.index;
  j["kind"] = std::string(kind_name(record.body));
  std::visit(overloaded{
                 [&](const ConfigRecord& r) {
                   j["n"] = r.n;
                   j["t"] = r.t;
                   j["epsilon"] = r.epsilon;
                   j["initial_balance"] = r.initial_balance;
                   j["seed"] = r.seed;
                   j["condition3_strict"] = r.condition3_strict;
                   j["strategies"] = r.strategies;
                 },
                 [&](const SendRecord& r) { put_message(j, r); },
                 [&](const RecvRecord& r) { put_message(j, r); },
                 [&](const DeliverRecord& r) {
                   j["agent"] = r.agent.value;
                   j["channel"] = r.channel.value;
                   j["seq"] = r.seq;
                   j["digest"] = to_hex(r.digest);
                   j["tx"] = tx_json(r.tx);
                 },
                 [&](const ExecuteRecord& r) {
                   j["agent"] = r.agent.value;
                   j["tx"] = id_json(r.tx);
                   j["verdict"] = std::string(to_string(r.verdict));
                   j["payments_credited"] = r.payments_credited;
                 },
                 [&](const CommitRecord& r) {
                   j["agent"] = r.agent.value;
                   j["tx"] = id_json(r.tx);
                   j["recipient"] = r.recipient.value;
                   j["value"] = r.value;
                 },
                 [&](const FeeCreditRecord& r) {
                   j["agent"] = r.agent.value;
                   j["tx"] = id_json(r.tx);
                 },
                 [&](const FeeConvertRecord& r) {
                   j["agent"] = r.agent.value;
                   j["tx"] = id_json(r.tx);
                   j["converted"] = ids_json(r.converted);
                   j["amount"] = r.amount;
                 },
                 [&](const RetalBlockRecord& r) { put_retal(j, r); },
                 [&](const RetalUnblockRecord& r) { put_retal(j, r); },
                 [&](const SnapshotRecord& r) {
                   j["agent"] = r.agent.value;
                   j["B"] = r.balances;
                   j["S"] = r.sequences;
                   j["F"] = r.fee_credits;
                   j["Q"] = r.payments;
                   j["Q_value"] = r.payment_values;
                 },
                 [&](const EvidenceRecord& r) {
                   j["agent"] = r.agent.value;
                   j["peer"] = r.peer.value;
                   j["channel"] = r.channel.value;
                   j["seq"] = r.seq;
                   j["what"] = r.what;
                 },
                 [&](const EndRecord& r) {
                   j["quiescent"] = r.quiescent;
                   j["steps"] = r.steps;
                   j["pending"] = r.pending;
                 },
             },
             record.body);
  return j.dump();
}

TraceRecord parse_json_line(std::string_view line) {
  const json j = json::parse(line);
  TraceRecord rec;
  rec.tick = j.at("tick").get<Tick>();
  rec.index = j.at("index").get<std::uint64_t>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "CONFIG") {
    ConfigRecord r;
    r.n = j.at("n").get<std::uint32_t>();
    r.t = j.at("t").get<std::uint32_t>();
    r.epsilon = j.at("epsilon").get<Money>();
    r.initial_balance = j.at("initial_balance").get<Money>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.condition3_strict = j.at("condition3_strict").get<bool>();
    r.strategies = j.at("strategies").get<std::vector<std::string>>();
    rec.body = r;
  } else if (kind == "SEND") {
    rec.body = message_from<SendRecord>(j);
  } else if (kind == "RECV") {
    rec.body = message_from<RecvRecord>(j);
  } else if (kind == "RRB_DELIVER") {
    rec.body = DeliverRecord{agent_from(j, "agent"), agent_from(j, "channel"), j.at("seq").get<Seq>(),
                             digest_from_hex(j.at("digest").get<std::string>()), tx_from(j.at("tx"))};
  } else if (kind == "EXECUTE") {
    const auto v = j.at("verdict").get<std::string>();
    if (v != "committed" && v != "bad") throw TraceFormatError("unknown verdict " + v);
    rec.body = ExecuteRecord{agent_from(j, "agent"), id_from(j.at("tx")),
                             v == "bad" ? Verdict::Bad : Verdict::Committed, j.at("payments_credited").get<Money>()};
  } else if (kind == "COMMIT") {
    rec.body = CommitRecord{agent_from(j, "agent"), id_from(j.at("tx")), agent_from(j, "recipient"),
                            j.at("value").get<Money>()};
  } else if (kind == "FEE_CREDIT") {
    rec.body = FeeCreditRecord{agent_from(j, "agent"), id_from(j.at("tx"))};
  } else if (kind == "FEE_CONVERT") {
    FeeConvertRecord r{agent_from(j, "agent"), id_from(j.at("tx")), {}, j.at("amount").get<Money>()};
    for (const auto& c : j.at("converted")) r.converted.push_back(id_from(c));
    rec.body = r;
  } else if (kind == "RETAL_BLOCK") {
    rec.body = RetalBlockRecord{retal_from(j)};
  } else if (kind == "RETAL_UNBLOCK") {
    rec.body = RetalUnblockRecord{retal_from(j)};
  } else if (kind == "SNAPSHOT") {
    rec.body = SnapshotRecord{agent_from(j, "agent"),
                              j.at("B").get<std::vector<Money>>(),
                              j.at("S").get<std::vector<Seq>>(),
                              j.at("F").get<std::vector<std::uint64_t>>(),
                              j.at("Q").get<std::vector<std::uint64_t>>(),
                              j.at("Q_value").get<std::vector<Money>>()};
  } else if (kind == "EVIDENCE") {
    rec.body = EvidenceRecord{agent_from(j, "agent"), agent_from(j, "peer"), agent_from(j, "channel"),
                              j.at("seq").get<Seq>(), j.at("what").get<std::string>()};
  } else if (kind == "END") {
    rec.body = EndRecord{j.at("quiescent").get<bool>(), j.at("steps").get<std::uint64_t>(),
                         j.at("pending").get<std::uint64_t>()};
  } else {
    throw TraceFormatError("unknown record kind " + kind);
  }
  return rec;
}

void write_trace(std::ostream& os, const Trace& trace) {
  for (const auto& rec : trace) os << to_json_line(rec) << '\n';
}

std::string trace_to_string(const Trace& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

Trace read_trace(std::istream& is) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      trace.push_back(parse_json_line(line));
    } catch (const std::exception& e) {
      throw TraceFormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (trace.size() > 1) {
      const auto& a = trace[trace.size() - 2];
      const auto& b = trace.back();
      if (b.tick < a.tick || b.index <= a.index) {
        throw TraceFormatError("line " + std::to_string(lineno) + ": record out of (tick, index) order");
      }
    }
  }
  return trace;
}

}  // namespace hearsay
