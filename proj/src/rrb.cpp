#include "hearsay/rrb.hpp"

#include <algorithm>

namespace hearsay {

PayloadRef make_payload(Transaction tx) {
  auto d = digest(tx);
  return std::make_shared<const Payload>(Payload{std::move(tx), d});
}

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::Initial: return "INITIAL";
    case MessageKind::Echo: return "ECHO";
    case MessageKind::Ready: return "READY";
  }
  return "?";
}

MessageKind message_kind_from_string(std::string_view s) {
  if (s == "INITIAL") return MessageKind::Initial;
  if (s == "ECHO") return MessageKind::Echo;
  if (s == "READY") return MessageKind::Ready;
  throw std::invalid_argument("unknown message kind: " + std::string(s));
}

Thresholds Thresholds::make(std::uint32_t n, std::uint32_t t) {
  if (n == 0 || 3 * t >= n) {
    throw std::invalid_argument("thresholds require 3t < n (n=" + std::to_string(n) + ", t=" + std::to_string(t) + ")");
  }
  Thresholds th;
  th.n = n;
  th.t = t;
  th.echo_quorum = (n + t) / 2 + 1;
  th.ready_init = t + 1;
  th.deliver_quorum = 2 * t + 1;
  return th;
}

RrbInstance::RrbInstance(AgentId owner, AgentId self, Thresholds thresholds)
    : owner_(owner),
      self_(self),
      thresholds_(thresholds),
      last_echo_(thresholds.n, 0),
      last_ready_(thresholds.n, 0),
      in_echo_(thresholds.n),
      in_ready_(thresholds.n),
      out_(thresholds.n),
      blocked_at_(thresholds.n) {
  check_peer(owner);
  check_peer(self);
}

void RrbInstance::check_peer(AgentId peer) const {
  if (peer.value < 1 || peer.value > thresholds_.n) {
    throw std::out_of_range("agent id " + std::to_string(peer.value) + " outside 1.." + std::to_string(thresholds_.n));
  }
}

std::vector<Outbound> RrbInstance::broadcast(PayloadRef payload) {
  if (self_ != owner_) {
    throw RrbError(RrbError::Code::NotOwner,
                   "agent " + std::to_string(self_.value) + " cannot broadcast on channel " + std::to_string(owner_.value));
  }
  const Seq seq = payload->tx.seq;
  if (seq != next_seq_ || broadcast_.contains(seq)) {
    throw RrbError(RrbError::Code::SeqMismatch,
                   "broadcast seq " + std::to_string(seq) + " but next_seq is " + std::to_string(next_seq_));
  }
  broadcast_.insert(seq);
  std::vector<Outbound> out;
  out.reserve(thresholds_.n);
  for (std::size_t i = 0; i < thresholds_.n; ++i) {
    out.push_back({AgentId::from_index(i), RrbMessage{owner_, MessageKind::Initial, seq, payload}});
  }
  return out;
}

ReceiveResult RrbInstance::on_receive(AgentId from, const RrbMessage& msg) {
  if (msg.channel != owner_) {
    throw RrbError(RrbError::Code::WrongChannel, "message for channel " + std::to_string(msg.channel.value) +
                                                     " delivered to instance " + std::to_string(owner_.value));
  }
  check_peer(from);
  ReceiveResult result;

  if (msg.kind == MessageKind::Initial) {
    if (from != owner_) {
      result.evidence.push_back({from, msg.seq, "INITIAL from non-owner"});
      return result;
    }
    auto [it, fresh] = initial_seen_.emplace(msg.seq, msg.digest());
    if (!fresh && it->second != msg.digest()) {
      result.evidence.push_back({from, msg.seq, "conflicting INITIAL payloads"});
    }
    if (msg.seq >= 1 && !echo_sent_.contains(msg.seq)) {
      enqueue_all(MessageKind::Echo, msg.seq, msg.payload);
    }
  } else {
    auto& queue = msg.kind == MessageKind::Echo ? in_echo_[from.index()] : in_ready_[from.index()];
    queue.emplace(msg.seq, msg.payload);

    auto credited = flush_in_queues();
    std::sort(credited.begin(), credited.end());
    credited.erase(std::unique(credited.begin(), credited.end()), credited.end());

    for (const auto& key : credited) {
      const Tally& tally = tallies_.at(key);
      const Seq seq = key.first;
      if (tally.echoes.size() >= thresholds_.echo_quorum || tally.readies.size() >= thresholds_.ready_init) {
        if (!echo_sent_.contains(seq)) enqueue_all(MessageKind::Echo, seq, tally.payload);
        if (!ready_sent_.contains(seq)) enqueue_all(MessageKind::Ready, seq, tally.payload);
      }
      if (tally.readies.size() >= thresholds_.deliver_quorum) {
        if (auto d = deliver(tally.payload, seq)) result.delivered.push_back(*d);
      }
    }
  }

  auto flushed = flush_out_queue();
  result.outbound = std::move(flushed.sent);
  result.gate_events = std::move(flushed.gate_events);
  for (auto& e : evidence_) result.evidence.push_back(std::move(e));
  evidence_.clear();
  return result;
}

std::vector<RrbInstance::TallyKey> RrbInstance::flush_in_queues() {
  std::vector<TallyKey> credited;
  for (std::size_t i = 0; i < thresholds_.n; ++i) {
    drain(i, in_echo_[i], last_echo_[i], true, credited);
    drain(i, in_ready_[i], last_ready_[i], false, credited);
  }
  return credited;
}

void RrbInstance::drain(std::size_t peer, InQueue& queue, Seq& last, bool echo, std::vector<TallyKey>& credited) {
  while (!queue.empty()) {
    auto it = queue.begin();
    if (it->first <= last) {
      // Already have this peer's message for the sequence: duplicates are ignored.
      queue.erase(it);
    } else if (it->first == last + 1) {
      last = it->first;
      credit(peer, it->first, it->second, echo, credited);
      queue.erase(it);
    } else {
      break;
    }
  }
}

void RrbInstance::credit(std::size_t peer, Seq seq, const PayloadRef& payload, bool echo,
                         std::vector<TallyKey>& credited) {
  TallyKey key{seq, payload->digest};
  auto [it, fresh] = tallies_.try_emplace(key);
  if (fresh) {
    it->second.payload = payload;
    auto first = tallies_.lower_bound(TallyKey{seq, Digest{}});
    bool conflict = false;
    for (auto j = first; j != tallies_.end() && j->first.first == seq; ++j) {
      if (j->first.second != key.second) conflict = true;
    }
    if (conflict && conflict_reported_.insert(seq).second) {
      evidence_.push_back({AgentId::from_index(peer), seq, "conflicting digests for one sequence"});
    }
  }
  auto& voters = echo ? it->second.echoes : it->second.readies;
  voters.insert(AgentId::from_index(peer));
  credited.push_back(key);
}

void RrbInstance::enqueue_all(MessageKind kind, Seq seq, const PayloadRef& payload) {
  (kind == MessageKind::Echo ? echo_sent_ : ready_sent_).insert(seq);
  for (auto& queue : out_) {
    queue.emplace(seq, RrbMessage{owner_, kind, seq, payload});
  }
}

bool RrbInstance::gate_open(std::size_t peer, Seq seq) const {
  return std::min(last_echo_[peer], last_ready_[peer]) + 1 >= seq;
}

OutFlush RrbInstance::flush_out_queue() {
  OutFlush result;
  for (std::size_t i = 0; i < thresholds_.n; ++i) {
    auto& queue = out_[i];
    while (!queue.empty() && gate_open(i, queue.begin()->first)) {
      result.sent.push_back({AgentId::from_index(i), std::move(queue.begin()->second)});
      queue.erase(queue.begin());
    }
    std::optional<Seq> head;
    if (!queue.empty()) head = queue.begin()->first;
    auto& previous = blocked_at_[i];
    if (previous && previous != head) result.gate_events.push_back({AgentId::from_index(i), *previous, false});
    if (head && previous != head) result.gate_events.push_back({AgentId::from_index(i), *head, true});
    previous = head;
  }
  return result;
}

std::optional<PayloadRef> RrbInstance::deliver(PayloadRef payload, Seq seq) {
  if (delivered_.contains(seq)) return std::nullopt;
  delivered_.emplace(seq, payload->digest);
  if (self_ == owner_ && seq >= next_seq_) next_seq_ = seq + 1;
  return payload;
}

std::size_t RrbInstance::echo_count(Seq seq, const Digest& d) const {
  auto it = tallies_.find(TallyKey{seq, d});
  return it == tallies_.end() ? 0 : it->second.echoes.size();
}

std::size_t RrbInstance::ready_count(Seq seq, const Digest& d) const {
  auto it = tallies_.find(TallyKey{seq, d});
  return it == tallies_.end() ? 0 : it->second.readies.size();
}

std::optional<Digest> RrbInstance::delivered_digest(Seq seq) const {
  auto it = delivered_.find(seq);
  if (it == delivered_.end()) return std::nullopt;
  return it->second;
}

}  // namespace hearsay
