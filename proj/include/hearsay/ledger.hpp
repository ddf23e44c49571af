#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hearsay/transaction.hpp"
#include "hearsay/types.hpp"

namespace hearsay {

struct LedgerConfig {
  std::uint32_t n{0};
  Money epsilon{1};
  Money initial_balance{0};
  // Condition 3 fee clause: false requires at least n credits, true requires more than n.
  bool condition3_strict{false};
};

enum class Verdict : std::uint8_t { Committed, Bad };

std::string_view to_string(Verdict v);

class LedgerError : public std::runtime_error {
 public:
  enum class Code { InsufficientBalance, InvalidRecipient, AlreadyExecuted, ConditionsNotMet };

  LedgerError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// What one execution did to the local view.
struct ExecutionReport {
  Transaction tx;
  Verdict verdict{Verdict::Committed};
  Money payments_credited{0};
  std::vector<TxId> payments_used;   // deps found in the initiator's payment buffer
  std::vector<TxId> fees_converted;  // fee credits found in the initiator's fee buffer
};

/// One agent's replica of the money-transfer state.
///
/// Balances, executed sequence numbers, fee-credit buffers and incoming-payment
/// buffers are kept for every agent. Delivered transactions wait in the
/// execution buffer until they pass all three execution conditions.
class LedgerState {
 public:
  LedgerState(AgentId self, LedgerConfig config);

  /// Builds this agent's next transaction after the balance checks a compliant
  /// agent performs. The payments and fee credits it references are claimed:
  /// later calls do not reference them again. They stay in the replicated
  /// buffers until the transaction executes and credits them.
  Transaction pay(AgentId recipient, Money amount, bool convert_fees);

  /// Same construction as pay() without any balance check. Lets deviating
  /// strategies build transactions a compliant agent would refuse.
  Transaction compose(AgentId recipient, Money amount, bool convert_fees);

  /// Buffers a delivered transaction and runs execution to a fixpoint.
  std::vector<ExecutionReport> on_rrb_deliver(const Transaction& tx);

  bool conditions_met(const Transaction& tx) const;

  ExecutionReport execute(const Transaction& tx);

  /// Transfers tx.value out of the initiator's balance into the recipient's
  /// payment buffer. Only meaningful as a step of execute().
  void commit(const Transaction& tx);

  /// Executes buffered transactions in ascending (initiator, seq) order until
  /// nothing more is executable.
  std::vector<ExecutionReport> try_execute();

  /// When false, transactions initiated by other agents are never executed.
  void set_execute_others(bool enabled) { execute_others_ = enabled; }

  AgentId self() const { return self_; }
  const LedgerConfig& config() const { return config_; }
  Money balance(AgentId a) const { return balances_.at(a.index()); }
  const std::vector<Money>& balances() const { return balances_; }
  Seq sequence(AgentId a) const { return sequences_.at(a.index()); }
  const std::vector<Seq>& sequences() const { return sequences_; }
  const std::set<TxId>& fee_credits(AgentId a) const { return fee_buffers_.at(a.index()); }
  const std::set<TxId>& payments(AgentId a) const { return payment_buffers_.at(a.index()); }
  Money pending_payment_value(AgentId a) const;
  /// Own payments and fee credits not yet referenced by an outgoing transaction.
  std::set<TxId> unreferenced_payments() const;
  std::set<TxId> unreferenced_fee_credits() const;
  Seq ctr() const { return ctr_; }
  bool has_pending_own() const { return sequences_[self_.index()] + 1 < ctr_; }
  const std::map<TxId, Transaction>& exec_buffer() const { return exec_buffer_; }
  bool executed(const TxId& id) const { return executed_.contains(id); }
  std::optional<Verdict> verdict(const TxId& id) const;
  std::vector<TxId> bad_transactions() const;

  /// Sum of balances, pending payment values and outstanding fee credits.
  /// Constant over every execution.
  Money total_value() const;

 private:
  struct Executed {
    Transaction tx;
    Verdict verdict;
  };

  void check_recipient(AgentId recipient) const;
  std::size_t valid_fee_credits(const Transaction& tx) const;

  AgentId self_;
  LedgerConfig config_;
  std::vector<Money> balances_;
  std::vector<Seq> sequences_;
  std::vector<std::set<TxId>> fee_buffers_;
  std::vector<std::set<TxId>> payment_buffers_;
  std::set<TxId> claimed_;
  Seq ctr_{1};
  std::map<TxId, Transaction> exec_buffer_;
  std::map<TxId, Executed> executed_;
  bool execute_others_{true};
};

}  // namespace hearsay
