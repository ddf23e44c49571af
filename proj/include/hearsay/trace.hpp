#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hearsay/ledger.hpp"
#include "hearsay/rrb.hpp"
#include "hearsay/transaction.hpp"
#include "hearsay/types.hpp"

namespace hearsay {

// Trace record bodies. Every record also carries the tick at which it was
// produced and a run-wide monotonic index.

/// First record of every trace: what the checkers need to know about the run.
struct ConfigRecord {
  std::uint32_t n{0};
  std::uint32_t t{0};
  Money epsilon{1};
  Money initial_balance{0};
  std::uint64_t seed{0};
  bool condition3_strict{false};
  std::vector<std::string> strategies;  // indexed by agent, strategy kind names
};

struct SendRecord {
  AgentId from;
  AgentId to;
  AgentId channel;
  MessageKind kind{MessageKind::Initial};
  Seq seq{0};
  Digest digest{};
};

struct RecvRecord {
  AgentId from;
  AgentId to;
  AgentId channel;
  MessageKind kind{MessageKind::Initial};
  Seq seq{0};
  Digest digest{};
};

struct DeliverRecord {
  AgentId agent;
  AgentId channel;
  Seq seq{0};
  Digest digest{};
  Transaction tx;
};

struct ExecuteRecord {
  AgentId agent;
  TxId tx;
  Verdict verdict{Verdict::Committed};
  Money payments_credited{0};
};

struct CommitRecord {
  AgentId agent;
  TxId tx;
  AgentId recipient;
  Money value{0};
};

/// Fee credits for `tx` were added to every agent's fee buffer.
struct FeeCreditRecord {
  AgentId agent;
  TxId tx;
};

/// Executing `tx` converted the listed fee credits into its initiator's balance.
struct FeeConvertRecord {
  AgentId agent;
  TxId tx;
  std::vector<TxId> converted;
  Money amount{0};
};

struct RetalRecord {
  AgentId agent;
  AgentId peer;
  AgentId channel;
  Seq seq{0};
};

struct RetalBlockRecord : RetalRecord {};
struct RetalUnblockRecord : RetalRecord {};

/// Full ledger view of `agent` after an execution.
struct SnapshotRecord {
  AgentId agent;
  std::vector<Money> balances;
  std::vector<Seq> sequences;
  std::vector<std::uint64_t> fee_credits;     // |F[j]|
  std::vector<std::uint64_t> payments;        // |Q[j]|
  std::vector<Money> payment_values;          // sum of values in Q[j]
};

struct EvidenceRecord {
  AgentId agent;
  AgentId peer;
  AgentId channel;
  Seq seq{0};
  std::string what;
};

/// Last record of every trace.
struct EndRecord {
  bool quiescent{true};
  std::uint64_t steps{0};
  std::uint64_t pending{0};
};

using RecordBody = std::variant<ConfigRecord, SendRecord, RecvRecord, DeliverRecord, ExecuteRecord, CommitRecord,
                                FeeCreditRecord, FeeConvertRecord, RetalBlockRecord, RetalUnblockRecord,
                                SnapshotRecord, EvidenceRecord, EndRecord>;

struct TraceRecord {
  Tick tick{0};
  std::uint64_t index{0};
  RecordBody body;
};

using Trace = std::vector<TraceRecord>;

/// Record kind name as written in trace files: CONFIG, SEND, RECV,
/// RRB_DELIVER, EXECUTE, COMMIT, FEE_CREDIT, FEE_CONVERT, RETAL_BLOCK,
/// RETAL_UNBLOCK, SNAPSHOT, EVIDENCE, END.
std::string_view kind_name(const RecordBody& body);

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One JSON object per line, no trailing whitespace.
std::string to_json_line(const TraceRecord& record);
TraceRecord parse_json_line(std::string_view line);

void write_trace(std::ostream& os, const Trace& trace);
std::string trace_to_string(const Trace& trace);
/// Throws TraceFormatError on ill-formed input, naming the line number.
Trace read_trace(std::istream& is);

}  // namespace hearsay
