#include "hearsay/ledger.hpp"

#include <algorithm>

namespace hearsay {

std::string_view to_string(Verdict v) { return v == Verdict::Committed ? "committed" : "bad"; }

LedgerState::LedgerState(AgentId self, LedgerConfig config)
    : self_(self),
      config_(config),
      balances_(config.n, config.initial_balance),
      sequences_(config.n, 0),
      fee_buffers_(config.n),
      payment_buffers_(config.n) {
  if (self.value < 1 || self.value > config.n) throw std::out_of_range("ledger owner outside 1..n");
  if (config.epsilon < 1) throw std::invalid_argument("epsilon must be at least 1");
}

void LedgerState::check_recipient(AgentId recipient) const {
  if (recipient.value < 1 || recipient.value > config_.n) {
    throw LedgerError(LedgerError::Code::InvalidRecipient,
                      "recipient " + std::to_string(recipient.value) + " outside 1.." + std::to_string(config_.n));
  }
  if (recipient == self_) throw LedgerError(LedgerError::Code::InvalidRecipient, "self-payments are not allowed");
}

Transaction LedgerState::pay(AgentId recipient, Money amount, bool convert_fees) {
  check_recipient(recipient);
  if (amount < 0) throw LedgerError(LedgerError::Code::InvalidRecipient, "negative amount");
  const Money fee_total = static_cast<Money>(config_.n) * config_.epsilon;
  const Money own = balances_[self_.index()];
  if (own < amount + fee_total) {
    throw LedgerError(LedgerError::Code::InsufficientBalance, "balance " + std::to_string(own) + " < " +
                                                                  std::to_string(amount) + " + " +
                                                                  std::to_string(fee_total));
  }
  // A zero-value transaction can pass the check above with exactly n*epsilon;
  // it would then never satisfy the execution fee condition.
  if (own <= fee_total) {
    const std::size_t credits = convert_fees ? unreferenced_fee_credits().size() : 0;
    const bool enough = config_.condition3_strict ? credits > config_.n : credits >= config_.n;
    if (!enough) {
      throw LedgerError(LedgerError::Code::InsufficientBalance, "balance does not exceed the total fee");
    }
  }
  return compose(recipient, amount, convert_fees);
}

Transaction LedgerState::compose(AgentId recipient, Money amount, bool convert_fees) {
  Transaction tx;
  tx.initiator = self_;
  tx.recipient = recipient;
  tx.value = amount;
  tx.seq = ctr_;
  tx.deps = unreferenced_payments();
  if (convert_fees) tx.fees = unreferenced_fee_credits();
  claimed_.insert(tx.deps.begin(), tx.deps.end());
  claimed_.insert(tx.fees.begin(), tx.fees.end());
  ++ctr_;
  return tx;
}

std::set<TxId> LedgerState::unreferenced_payments() const {
  std::set<TxId> out;
  std::ranges::set_difference(payment_buffers_[self_.index()], claimed_, std::inserter(out, out.end()));
  return out;
}

std::set<TxId> LedgerState::unreferenced_fee_credits() const {
  std::set<TxId> out;
  std::ranges::set_difference(fee_buffers_[self_.index()], claimed_, std::inserter(out, out.end()));
  return out;
}

std::vector<ExecutionReport> LedgerState::on_rrb_deliver(const Transaction& tx) {
  if (executed_.contains(tx.id()) || exec_buffer_.contains(tx.id())) return {};
  if (tx.initiator.value < 1 || tx.initiator.value > config_.n) return {};
  exec_buffer_.emplace(tx.id(), tx);
  return try_execute();
}

std::size_t LedgerState::valid_fee_credits(const Transaction& tx) const {
  const auto& credits = fee_buffers_[tx.initiator.index()];
  return static_cast<std::size_t>(
      std::ranges::count_if(tx.fees, [&](const TxId& t) { return credits.contains(t); }));
}

bool LedgerState::conditions_met(const Transaction& tx) const {
  const auto init = tx.initiator.index();
  // Condition 1: source order.
  if (tx.seq == 0 || sequences_[init] != tx.seq - 1) return false;
  // Condition 2: everything referenced has been executed here.
  auto done = [&](const TxId& t) { return executed_.contains(t); };
  if (!std::ranges::all_of(tx.deps, done) || !std::ranges::all_of(tx.fees, done)) return false;
  // Condition 3: the fee can be paid without debt.
  const Money fee_total = static_cast<Money>(config_.n) * config_.epsilon;
  if (balances_[init] > fee_total) return true;
  const auto credits = valid_fee_credits(tx);
  return config_.condition3_strict ? credits > config_.n : credits >= config_.n;
}

ExecutionReport LedgerState::execute(const Transaction& tx) {
  if (executed_.contains(tx.id())) {
    throw LedgerError(LedgerError::Code::AlreadyExecuted, "transaction already executed");
  }
  if (!conditions_met(tx)) throw LedgerError(LedgerError::Code::ConditionsNotMet, "execution conditions not met");

  ExecutionReport report;
  report.tx = tx;
  const auto init = tx.initiator.index();
  Money& balance = balances_[init];
  auto& payments = payment_buffers_[init];
  auto& credits = fee_buffers_[init];

  for (const auto& t : tx.deps) {
    if (payments.erase(t) > 0) {
      const Money v = executed_.at(t).tx.value;
      balance += v;
      report.payments_credited += v;
      report.payments_used.push_back(t);
    }
  }
  for (const auto& t : tx.fees) {
    if (credits.erase(t) > 0) {
      balance += config_.epsilon;
      report.fees_converted.push_back(t);
    }
  }
  if (tx.initiator == self_) {
    for (const auto& t : tx.deps) claimed_.erase(t);
    for (const auto& t : tx.fees) claimed_.erase(t);
  }

  const Money fee_total = static_cast<Money>(config_.n) * config_.epsilon;
  const bool malformed = tx.recipient.value < 1 || tx.recipient.value > config_.n || tx.recipient == tx.initiator ||
                         tx.value < 0;
  const bool overdraft = balance < fee_total || balance - fee_total < tx.value;
  const bool bad_dep =
      std::ranges::any_of(tx.deps, [&](const TxId& t) { return executed_.at(t).verdict == Verdict::Bad; });
  report.verdict = (malformed || overdraft || bad_dep) ? Verdict::Bad : Verdict::Committed;

  if (report.verdict == Verdict::Committed) commit(tx);

  // Fees are charged whether or not the transaction is bad.
  balance -= fee_total;
  for (auto& buffer : fee_buffers_) buffer.insert(tx.id());
  ++sequences_[init];

  executed_.emplace(tx.id(), Executed{tx, report.verdict});
  exec_buffer_.erase(tx.id());
  return report;
}

void LedgerState::commit(const Transaction& tx) {
  balances_[tx.initiator.index()] -= tx.value;
  payment_buffers_[tx.recipient.index()].insert(tx.id());
}

std::vector<ExecutionReport> LedgerState::try_execute() {
  std::vector<ExecutionReport> done;
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto it = exec_buffer_.begin(); it != exec_buffer_.end();) {
      const Transaction& tx = it->second;
      if ((execute_others_ || tx.initiator == self_) && conditions_met(tx)) {
        auto next = std::next(it);
        const TxId next_id = next == exec_buffer_.end() ? TxId{} : next->first;
        const bool at_end = next == exec_buffer_.end();
        done.push_back(execute(Transaction(tx)));
        progress = true;
        it = at_end ? exec_buffer_.end() : exec_buffer_.find(next_id);
      } else {
        ++it;
      }
    }
  }
  return done;
}

Money LedgerState::pending_payment_value(AgentId a) const {
  Money sum = 0;
  for (const auto& t : payment_buffers_.at(a.index())) sum += executed_.at(t).tx.value;
  return sum;
}

std::optional<Verdict> LedgerState::verdict(const TxId& id) const {
  auto it = executed_.find(id);
  if (it == executed_.end()) return std::nullopt;
  return it->second.verdict;
}

std::vector<TxId> LedgerState::bad_transactions() const {
  std::vector<TxId> out;
  for (const auto& [id, e] : executed_) {
    if (e.verdict == Verdict::Bad) out.push_back(id);
  }
  return out;
}

Money LedgerState::total_value() const {
  Money total = 0;
  for (std::size_t j = 0; j < config_.n; ++j) {
    total += balances_[j];
    total += pending_payment_value(AgentId::from_index(j));
    total += static_cast<Money>(fee_buffers_[j].size()) * config_.epsilon;
  }
  return total;
}

}  // namespace hearsay
