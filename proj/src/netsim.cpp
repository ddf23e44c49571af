#include "hearsay/netsim.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <tuple>

#include "hearsay/random.hpp"

namespace hearsay {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void validate(const SimConfig& c) {
  require(c.n >= 1, "n must be at least 1");
  require(3 * static_cast<std::uint64_t>(c.t) < c.n,
          "3t < n violated (n=" + std::to_string(c.n) + ", t=" + std::to_string(c.t) + ")");
  require(c.epsilon >= 1, "epsilon must be at least 1");
  require(c.initial_balance > static_cast<Money>(c.n) * c.epsilon,
          "initial_balance must exceed n*epsilon (" + std::to_string(static_cast<Money>(c.n) * c.epsilon) + ")");
  require(c.d_min >= 1, "d_min must be at least 1");
  require(c.d_min <= c.d_max, "d_min must not exceed d_max");

  std::set<AgentId> seen;
  std::uint32_t byzantine = 0;
  for (const auto& a : c.agents) {
    require(a.id.value >= 1 && a.id.value <= c.n, "agent id " + std::to_string(a.id.value) + " outside 1..n");
    require(seen.insert(a.id).second, "agent " + std::to_string(a.id.value) + " listed twice");
    if (is_byzantine(a.strategy.kind)) ++byzantine;
    const auto& p = a.strategy.params;
    require(p.skip_probability >= 0.0 && p.skip_probability <= 1.0, "skip_probability must lie in [0, 1]");
    require(p.excess >= 0, "excess must be non-negative");
    for (auto ch : p.channels) require(ch.value >= 1 && ch.value <= c.n, "strategy channel outside 1..n");
  }
  require(byzantine <= c.t, "number of Byzantine agents (" + std::to_string(byzantine) + ") exceeds t=" +
                                std::to_string(c.t));

  for (const auto& s : c.script) {
    require(s.agent.value >= 1 && s.agent.value <= c.n, "script agent outside 1..n");
    if (const auto* pay = std::get_if<PayAction>(&s.action)) {
      require(pay->to.value >= 1 && pay->to.value <= c.n, "payment recipient outside 1..n");
      require(pay->amount >= 0, "payment amount must be non-negative");
    }
  }
}

std::vector<StrategySpec> strategies_of(const SimConfig& config) {
  std::vector<StrategySpec> out(config.n);
  for (const auto& a : config.agents) out.at(a.id.index()) = a.strategy;
  return out;
}

Simulation::Simulation(SimConfig config) : config_(std::move(config)) {
  validate(config_);
  const auto thresholds = Thresholds::make(config_.n, config_.t);
  const LedgerConfig ledger{config_.n, config_.epsilon, config_.initial_balance, config_.condition3_strict};
  const auto specs = strategies_of(config_);
  agents_.reserve(config_.n);
  for (std::size_t i = 0; i < config_.n; ++i) {
    agents_.emplace_back(AgentId::from_index(i), specs[i], thresholds, ledger, config_.seed);
  }
  fifo_last_.assign(static_cast<std::size_t>(config_.n) * config_.n, 0);
}

Tick Simulation::delay(std::uint64_t send_seq) const {
  const Tick span = config_.d_max - config_.d_min + 1;
  return config_.d_min + keyed_draw(config_.seed, {send_seq}) % span;
}

void Simulation::emit(Tick now, RecordBody body) {
  trace_.push_back(TraceRecord{now, next_index_++, std::move(body)});
}

void Simulation::schedule(Tick now, AgentId from, Outbound out) {
  const std::uint64_t send_seq = next_send_seq_++;
  Tick at = now;
  if (out.to != from) {
    at = now + delay(send_seq);
    if (config_.fifo_channels) {
      auto& last = fifo_last_[from.index() * config_.n + out.to.index()];
      at = std::max(at, last);
      last = at;
    }
  }
  emit(now, SendRecord{from, out.to, out.msg.channel, out.msg.kind, out.msg.seq, out.msg.digest()});

  std::size_t slot;
  ScheduledMessage sm{at, send_seq, from, out.to, std::move(out.msg)};
  if (free_slots_.empty()) {
    slot = in_flight_.size();
    in_flight_.push_back(std::move(sm));
  } else {
    slot = free_slots_.back();
    free_slots_.pop_back();
    in_flight_[slot] = std::move(sm);
  }
  queue_.push_back(Event{at, send_seq, slot, false});
  std::push_heap(queue_.begin(), queue_.end(), std::greater<>{});
}

void Simulation::dispatch(Tick now, AgentId actor, std::vector<Effect> effects) {
  for (auto& e : effects) {
    if (auto* out = std::get_if<Outbound>(&e)) {
      schedule(now, actor, std::move(*out));
    } else {
      emit(now, std::move(std::get<RecordBody>(e)));
    }
  }
}

RunResult Simulation::run() {
  ConfigRecord header;
  header.n = config_.n;
  header.t = config_.t;
  header.epsilon = config_.epsilon;
  header.initial_balance = config_.initial_balance;
  header.seed = config_.seed;
  header.condition3_strict = config_.condition3_strict;
  for (const auto& a : agents_) header.strategies.emplace_back(to_string(a.strategy().kind));
  emit(0, std::move(header));

  for (std::size_t i = 0; i < config_.script.size(); ++i) {
    queue_.push_back(Event{config_.script[i].tick, next_send_seq_++, i, true});
    std::push_heap(queue_.begin(), queue_.end(), std::greater<>{});
  }

  std::uint64_t steps = 0;
  Tick now = 0;
  while (!queue_.empty() && steps < config_.max_steps) {
    std::pop_heap(queue_.begin(), queue_.end(), std::greater<>{});
    const Event ev = queue_.back();
    queue_.pop_back();
    ++steps;
    now = ev.at;
    if (ev.is_script) {
      const auto& action = config_.script[ev.slot];
      dispatch(now, action.agent, agents_[action.agent.index()].act(action.action));
    } else {
      ScheduledMessage sm = std::move(in_flight_[ev.slot]);
      free_slots_.push_back(ev.slot);
      emit(now, RecvRecord{sm.from, sm.to, sm.msg.channel, sm.msg.kind, sm.msg.seq, sm.msg.digest()});
      dispatch(now, sm.to, agents_[sm.to.index()].act(IncomingMessage{sm.from, std::move(sm.msg)}));
    }
  }

  RunResult result;
  result.quiescent = queue_.empty();
  result.steps = steps;
  emit(now, EndRecord{result.quiescent, steps, queue_.size()});
  result.trace = std::move(trace_);
  for (const auto& a : agents_) result.final_ledgers.push_back(a.ledger());
  return result;
}

RunResult run(const SimConfig& config) { return Simulation(config).run(); }

}  // namespace hearsay
