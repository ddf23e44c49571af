#include "hearsay/checker.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <tuple>
#include <sstream>
#include <unordered_map>
#include <variant>

namespace hearsay {

namespace {

std::string str(const TxId& id) {
  std::ostringstream os;
  os << id;
  return os.str();
}

const ConfigRecord& header(const Trace& trace) {
  if (trace.empty()) throw TraceFormatError("empty trace");
  const auto* c = std::get_if<ConfigRecord>(&trace.front().body);
  if (c == nullptr) throw TraceFormatError("trace does not start with a CONFIG record");
  return *c;
}

bool ended_quiescent(const Trace& trace) {
  if (trace.empty()) return false;
  const auto* e = std::get_if<EndRecord>(&trace.back().body);
  return e != nullptr && e->quiescent;
}

bool is_compliant(const ConfigRecord& c, AgentId a) {
  return a.index() < c.strategies.size() && c.strategies[a.index()] == "COMPLIANT";
}

bool is_rational(const ConfigRecord& c, AgentId a) {
  return a.index() < c.strategies.size() && !c.strategies[a.index()].starts_with("BYZ_");
}

CheckResult pass(std::string name) { return CheckResult{std::move(name), CheckStatus::Pass, {}}; }

CheckResult fail(std::string name, std::string why) { return CheckResult{std::move(name), CheckStatus::Fail, std::move(why)}; }

// Liveness checks cannot fail before the run has settled.
CheckResult liveness_fail(std::string name, std::string why, bool quiescent) {
  if (!quiescent) return CheckResult{std::move(name), CheckStatus::Unknown, "run not quiescent: " + why};
  return fail(std::move(name), std::move(why));
}

bool valid_agent(const ConfigRecord& c, AgentId a) { return a.value >= 1 && a.value <= c.n; }

}  // namespace

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Unknown: return "UNKNOWN";
  }
  return "?";
}

bool Report::passed() const {
  return std::ranges::all_of(results, [](const CheckResult& r) { return r.status == CheckStatus::Pass; });
}

const CheckResult* Report::find(std::string_view name) const {
  for (const auto& r : results) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::string format_report(const Report& report) {
  std::ostringstream os;
  for (const auto& r : report.results) {
    os << r.name << ' ' << to_string(r.status);
    if (!r.counterexample.empty()) os << ": " << r.counterexample;
    os << '\n';
  }
  return os.str();
}

Verdicts extract_verdicts(const Trace& trace) {
  Verdicts v;
  v.config = header(trace);
  v.quiescent = ended_quiescent(trace);
  const std::size_t n = v.config.n;
  for (std::size_t i = 0; i < n; ++i) {
    v.compliant.push_back(is_compliant(v.config, AgentId::from_index(i)));
    v.rational.push_back(is_rational(v.config, AgentId::from_index(i)));
  }
  v.executed.resize(n);
  v.verdicts.resize(n);
  v.balances.assign(n, std::vector<Money>(n, v.config.initial_balance));
  for (const auto& rec : trace) {
    if (const auto* ex = std::get_if<ExecuteRecord>(&rec.body)) {
      if (!valid_agent(v.config, ex->agent)) throw TraceFormatError("EXECUTE for unknown agent");
      v.executed[ex->agent.index()].push_back(ex->tx);
      v.verdicts[ex->agent.index()][ex->tx] = ex->verdict;
    } else if (const auto* s = std::get_if<SnapshotRecord>(&rec.body)) {
      if (!valid_agent(v.config, s->agent)) throw TraceFormatError("SNAPSHOT for unknown agent");
      v.balances[s->agent.index()] = s->balances;
    }
  }
  return v;
}

Universe universe_of(const Trace& trace) {
  Universe u;
  for (const auto& rec : trace) {
    if (const auto* d = std::get_if<DeliverRecord>(&rec.body)) u.emplace(d->tx.id(), d->tx);
  }
  return u;
}

MissingTxError::MissingTxError(TxId id) : std::runtime_error("transaction " + str(id) + " missing"), id_(id) {}

CycleError::CycleError(TxId root) : std::runtime_error("cyclic references below " + str(root)) {}

std::vector<TxId> direct_predecessors(const Transaction& tx) {
  std::vector<TxId> out(tx.deps.begin(), tx.deps.end());
  out.insert(out.end(), tx.fees.begin(), tx.fees.end());
  if (tx.seq > 1) out.push_back(TxId{tx.initiator, tx.seq - 1});
  return out;
}

PhiSet phi(TxId root, const Universe& universe) {
  PhiSet result{root, {}, false};
  auto lookup = [&](const TxId& id) -> const Transaction& {
    auto it = universe.find(id);
    if (it == universe.end()) throw MissingTxError(id);
    return it->second;
  };

  std::vector<TxId> work{root};
  result.members.insert(root);
  while (!work.empty()) {
    const TxId v = work.back();
    work.pop_back();
    for (const auto& t : direct_predecessors(lookup(v))) {
      if (result.members.insert(t).second) work.push_back(t);
    }
  }

  // Cycle detection over the same references, restricted to members.
  enum class Mark : std::uint8_t { Unseen, Active, Done };
  std::map<TxId, Mark> mark;
  std::function<bool(const TxId&)> has_cycle = [&](const TxId& v) {
    mark[v] = Mark::Active;
    for (const auto& t : direct_predecessors(lookup(v))) {
      auto m = mark[t];
      if (m == Mark::Active) return true;
      if (m == Mark::Unseen && has_cycle(t)) return true;
    }
    mark[v] = Mark::Done;
    return false;
  };
  result.cyclic = has_cycle(root);
  return result;
}

std::uint64_t height(TxId root, const Universe& universe) {
  const PhiSet set = phi(root, universe);
  if (set.cyclic) throw CycleError(root);
  std::map<TxId, std::uint64_t> memo;
  std::function<std::uint64_t(const TxId&)> h = [&](const TxId& v) -> std::uint64_t {
    if (auto it = memo.find(v); it != memo.end()) return it->second;
    std::uint64_t best = 0;
    for (const auto& t : direct_predecessors(universe.at(v))) best = std::max(best, h(t));
    return memo[v] = best + 1;
  };
  return h(root);
}

CheckResult check_agreement(const Verdicts& v) {
  const std::string name = "check_agreement";
  std::optional<std::size_t> ref;
  for (std::size_t i = 0; i < v.compliant.size(); ++i) {
    if (!v.compliant[i]) continue;
    if (!ref) {
      ref = i;
      continue;
    }
    const auto& a = v.verdicts[*ref];
    const auto& b = v.verdicts[i];
    const auto ai = AgentId::from_index(*ref);
    const auto bi = AgentId::from_index(i);
    // First diverging transaction in id order.
    auto x = a.begin();
    auto y = b.begin();
    while (x != a.end() || y != b.end()) {
      std::ostringstream why;
      if (y == b.end() || (x != a.end() && x->first < y->first)) {
        why << "agent " << bi << " did not execute " << x->first << " (executed by agent " << ai << ")";
        return liveness_fail(name, why.str(), v.quiescent);
      }
      if (x == a.end() || y->first < x->first) {
        why << "agent " << ai << " did not execute " << y->first << " (executed by agent " << bi << ")";
        return liveness_fail(name, why.str(), v.quiescent);
      }
      if (x->second != y->second) {
        why << "agents " << ai << " and " << bi << " disagree on the verdict of " << x->first;
        return fail(name, why.str());
      }
      ++x;
      ++y;
    }
    if (v.balances[*ref] != v.balances[i]) {
      std::ostringstream why;
      why << "agents " << ai << " and " << bi << " end with different balance vectors";
      return liveness_fail(name, why.str(), v.quiescent);
    }
  }
  return pass(name);
}

CheckResult check_validity(const Trace& trace) {
  const std::string name = "check_validity";
  const auto& c = header(trace);
  std::set<TxId> broadcast;
  std::set<TxId> self_executed;
  for (const auto& rec : trace) {
    if (const auto* s = std::get_if<SendRecord>(&rec.body)) {
      if (s->kind == MessageKind::Initial && s->from == s->channel && is_compliant(c, s->from)) {
        broadcast.insert(TxId{s->from, s->seq});
      }
    } else if (const auto* ex = std::get_if<ExecuteRecord>(&rec.body)) {
      if (ex->agent == ex->tx.initiator) self_executed.insert(ex->tx);
    }
  }
  for (const auto& id : broadcast) {
    if (!self_executed.contains(id)) {
      return liveness_fail(name, "broadcast " + str(id) + " never executed by its broadcaster", ended_quiescent(trace));
    }
  }
  return pass(name);
}

CheckResult check_integrity(const Trace& trace) {
  const std::string name = "check_integrity";
  const auto& c = header(trace);
  std::set<std::pair<AgentId, TxId>> executed;
  std::map<std::tuple<AgentId, AgentId, Seq>, Digest> delivered;
  for (const auto& rec : trace) {
    if (const auto* ex = std::get_if<ExecuteRecord>(&rec.body)) {
      if (!is_rational(c, ex->agent)) continue;
      if (!executed.insert({ex->agent, ex->tx}).second) {
        std::ostringstream why;
        why << "agent " << ex->agent << " executed " << ex->tx << " twice";
        return fail(name, why.str());
      }
    } else if (const auto* d = std::get_if<DeliverRecord>(&rec.body)) {
      if (!is_rational(c, d->agent)) continue;
      auto [it, fresh] = delivered.emplace(std::tuple{d->agent, d->channel, d->seq}, d->digest);
      if (!fresh) {
        std::ostringstream why;
        why << "agent " << d->agent << " delivered channel " << d->channel << " seq " << d->seq << " twice";
        return fail(name, why.str());
      }
    }
  }
  return pass(name);
}

CheckResult check_no_debt(const Trace& trace) {
  const std::string name = "check_no_debt";
  for (const auto& rec : trace) {
    if (const auto* s = std::get_if<SnapshotRecord>(&rec.body)) {
      for (std::size_t j = 0; j < s->balances.size(); ++j) {
        if (s->balances[j] < 0) {
          std::ostringstream why;
          why << "agent " << s->agent << " sees balance " << s->balances[j] << " for agent " << j + 1
              << " at record " << rec.index;
          return fail(name, why.str());
        }
      }
    }
  }
  return pass(name);
}

CheckResult check_conservation(const Trace& trace) {
  const std::string name = "check_conservation";
  const auto& c = header(trace);
  const Money expected = static_cast<Money>(c.n) * c.initial_balance;
  for (const auto& rec : trace) {
    const auto* s = std::get_if<SnapshotRecord>(&rec.body);
    if (s == nullptr) continue;
    if (s->balances.size() != c.n || s->payment_values.size() != c.n || s->fee_credits.size() != c.n) {
      return fail(name, "malformed snapshot at record " + std::to_string(rec.index));
    }
    Money total = 0;
    for (std::size_t j = 0; j < c.n; ++j) {
      total += s->balances[j] + s->payment_values[j] + static_cast<Money>(s->fee_credits[j]) * c.epsilon;
    }
    if (total != expected) {
      std::ostringstream why;
      why << "agent " << s->agent << " holds total " << total << " != " << expected << " at record " << rec.index;
      return fail(name, why.str());
    }
  }
  return pass(name);
}

CheckResult check_balance_locality(const Trace& trace) {
  const std::string name = "check_balance_locality";
  const auto& c = header(trace);
  std::vector<std::vector<Money>> previous(c.n, std::vector<Money>(c.n, c.initial_balance));
  std::vector<std::optional<TxId>> last_exec(c.n);
  for (const auto& rec : trace) {
    if (const auto* ex = std::get_if<ExecuteRecord>(&rec.body)) {
      if (valid_agent(c, ex->agent)) last_exec[ex->agent.index()] = ex->tx;
    } else if (const auto* s = std::get_if<SnapshotRecord>(&rec.body)) {
      if (!valid_agent(c, s->agent)) continue;
      const auto a = s->agent.index();
      const auto& tx = last_exec[a];
      if (!tx) return fail(name, "snapshot without a preceding execution at record " + std::to_string(rec.index));
      for (std::size_t j = 0; j < c.n && j < s->balances.size(); ++j) {
        if (j != tx->initiator.index() && s->balances[j] != previous[a][j]) {
          std::ostringstream why;
          why << "agent " << s->agent << " executing " << *tx << " changed the balance of agent " << j + 1;
          return fail(name, why.str());
        }
      }
      previous[a] = s->balances;
      last_exec[a].reset();
    }
  }
  return pass(name);
}

CheckResult check_source_order(const Trace& trace) {
  const std::string name = "check_source_order";
  const auto& c = header(trace);
  std::map<std::pair<AgentId, AgentId>, Seq> last;
  for (const auto& rec : trace) {
    const auto* ex = std::get_if<ExecuteRecord>(&rec.body);
    if (ex == nullptr || !is_rational(c, ex->agent)) continue;
    Seq& prev = last[{ex->agent, ex->tx.initiator}];
    if (ex->tx.seq != prev + 1) {
      std::ostringstream why;
      why << "agent " << ex->agent << " executed " << ex->tx << " after seq " << prev;
      return fail(name, why.str());
    }
    prev = ex->tx.seq;
  }
  return pass(name);
}

CheckResult check_rrb_uniqueness(const Trace& trace) {
  const std::string name = "check_rrb_uniqueness";
  const auto& c = header(trace);
  std::map<std::pair<AgentId, Seq>, std::pair<Digest, AgentId>> seen;
  for (const auto& rec : trace) {
    const auto* d = std::get_if<DeliverRecord>(&rec.body);
    if (d == nullptr || !is_rational(c, d->agent)) continue;
    auto [it, fresh] = seen.emplace(std::pair{d->channel, d->seq}, std::pair{d->digest, d->agent});
    if (!fresh && it->second.first != d->digest) {
      std::ostringstream why;
      why << "channel " << d->channel << " seq " << d->seq << ": agents " << it->second.second << " and " << d->agent
          << " delivered different payloads";
      return fail(name, why.str());
    }
  }
  return pass(name);
}

CheckResult check_rrb_delivery(const Trace& trace) {
  const std::string name = "check_rrb_delivery";
  const auto& c = header(trace);
  std::set<std::pair<AgentId, Seq>> required;
  std::map<std::pair<AgentId, Seq>, std::set<AgentId>> delivered_by;
  for (const auto& rec : trace) {
    if (const auto* s = std::get_if<SendRecord>(&rec.body)) {
      if (s->kind == MessageKind::Initial && s->from == s->channel && is_compliant(c, s->from)) {
        required.insert({s->channel, s->seq});
      }
    } else if (const auto* d = std::get_if<DeliverRecord>(&rec.body)) {
      if (is_compliant(c, d->agent)) {
        delivered_by[{d->channel, d->seq}].insert(d->agent);
        required.insert({d->channel, d->seq});
      }
    }
  }
  for (const auto& key : required) {
    const auto& who = delivered_by[key];
    for (std::uint32_t k = 1; k <= c.n; ++k) {
      const AgentId a{k};
      if (is_compliant(c, a) && !who.contains(a)) {
        std::ostringstream why;
        why << "agent " << a << " never delivered channel " << key.first << " seq " << key.second;
        return liveness_fail(name, why.str(), ended_quiescent(trace));
      }
    }
  }
  return pass(name);
}

CheckResult check_phi_closure(const Trace& trace) {
  const std::string name = "check_phi_closure";
  const auto& c = header(trace);
  std::vector<std::map<TxId, Transaction>> delivered(c.n);
  std::vector<std::set<TxId>> executed(c.n);
  for (const auto& rec : trace) {
    if (const auto* d = std::get_if<DeliverRecord>(&rec.body)) {
      if (valid_agent(c, d->agent)) delivered[d->agent.index()].emplace(d->tx.id(), d->tx);
    } else if (const auto* ex = std::get_if<ExecuteRecord>(&rec.body)) {
      if (!is_rational(c, ex->agent)) continue;
      const auto a = ex->agent.index();
      auto it = delivered[a].find(ex->tx);
      if (it == delivered[a].end()) {
        std::ostringstream why;
        why << "agent " << ex->agent << " executed undelivered " << ex->tx;
        return fail(name, why.str());
      }
      // Predecessors executed earlier were themselves checked, so checking the
      // direct references keeps every prefix closed.
      for (const auto& p : direct_predecessors(it->second)) {
        if (!executed[a].contains(p)) {
          std::ostringstream why;
          why << "agent " << ex->agent << " executed " << ex->tx << " before " << p;
          return fail(name, why.str());
        }
      }
      executed[a].insert(ex->tx);
    }
  }
  return pass(name);
}

Report run_all_checks(const Trace& trace) {
  Report r;
  r.results.push_back(check_validity(trace));
  r.results.push_back(check_agreement(extract_verdicts(trace)));
  r.results.push_back(check_integrity(trace));
  r.results.push_back(check_no_debt(trace));
  r.results.push_back(check_conservation(trace));
  r.results.push_back(check_balance_locality(trace));
  r.results.push_back(check_source_order(trace));
  r.results.push_back(check_rrb_uniqueness(trace));
  r.results.push_back(check_rrb_delivery(trace));
  r.results.push_back(check_phi_closure(trace));
  return r;
}

}  // namespace hearsay
