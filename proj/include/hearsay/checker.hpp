#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hearsay/ledger.hpp"
#include "hearsay/trace.hpp"
#include "hearsay/transaction.hpp"
#include "hearsay/types.hpp"

namespace hearsay {

enum class CheckStatus : std::uint8_t { Pass, Fail, Unknown };

std::string_view to_string(CheckStatus s);

struct CheckResult {
  std::string name;
  CheckStatus status{CheckStatus::Pass};
  std::string counterexample;  // empty on PASS
};

struct Report {
  std::vector<CheckResult> results;

  bool passed() const;
  const CheckResult* find(std::string_view name) const;
};

/// One line per check: "<name> PASS" or "<name> FAIL: <counterexample>".
std::string format_report(const Report& report);

/// Per-agent outcome of a run, rebuilt from trace records only.
struct Verdicts {
  ConfigRecord config;
  bool quiescent{false};
  std::vector<bool> compliant;  // follows the protocol as written
  std::vector<bool> rational;   // not Byzantine
  std::vector<std::vector<TxId>> executed;  // execution order per agent
  std::vector<std::map<TxId, Verdict>> verdicts;
  std::vector<std::vector<Money>> balances;  // last snapshot, or the initial vector
};

/// Throws TraceFormatError when the trace has no leading CONFIG record.
Verdicts extract_verdicts(const Trace& trace);

using Universe = std::map<TxId, Transaction>;

/// Every delivered transaction, keyed by id (first delivery wins).
Universe universe_of(const Trace& trace);

class MissingTxError : public std::runtime_error {
 public:
  explicit MissingTxError(TxId id);
  TxId id() const { return id_; }

 private:
  TxId id_;
};

class CycleError : public std::runtime_error {
 public:
  explicit CycleError(TxId root);
};

/// The set of transactions that must execute no later than `root`: `root`
/// itself, closed under referenced payments, referenced fee credits and
/// earlier transactions of the same initiator.
struct PhiSet {
  TxId root;
  std::set<TxId> members;
  // True when the references among members form a cycle. Such a transaction
  // can never pass the dependency condition and stalls permanently.
  bool cyclic{false};
};

/// Throws MissingTxError if a referenced transaction is not in `universe`.
PhiSet phi(TxId root, const Universe& universe);

/// Length of the longest chain in phi(root); 1 when phi(root) = {root}.
/// Throws CycleError for cyclic references, MissingTxError as phi().
std::uint64_t height(TxId root, const Universe& universe);

/// References a transaction places on execution order: deps, fees and the
/// initiator's previous sequence number.
std::vector<TxId> direct_predecessors(const Transaction& tx);

CheckResult check_agreement(const Verdicts& verdicts);
CheckResult check_validity(const Trace& trace);
CheckResult check_integrity(const Trace& trace);
CheckResult check_no_debt(const Trace& trace);
CheckResult check_conservation(const Trace& trace);
CheckResult check_balance_locality(const Trace& trace);
CheckResult check_source_order(const Trace& trace);
CheckResult check_rrb_uniqueness(const Trace& trace);
CheckResult check_rrb_delivery(const Trace& trace);
CheckResult check_phi_closure(const Trace& trace);

/// Every check above, in a fixed order.
Report run_all_checks(const Trace& trace);

}  // namespace hearsay
