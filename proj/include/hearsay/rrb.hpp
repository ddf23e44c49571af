#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hearsay/transaction.hpp"
#include "hearsay/types.hpp"

namespace hearsay {

/// Immutable transaction payload shared by every message that carries it. The
/// digest is computed once, at construction, from the canonical encoding.
struct Payload {
  Transaction tx;
  Digest digest;
};

using PayloadRef = std::shared_ptr<const Payload>;

PayloadRef make_payload(Transaction tx);

enum class MessageKind : std::uint8_t { Initial, Echo, Ready };

std::string_view to_string(MessageKind kind);
MessageKind message_kind_from_string(std::string_view s);

struct RrbMessage {
  AgentId channel;  // owner of the broadcast instance
  MessageKind kind{MessageKind::Initial};
  Seq seq{0};
  PayloadRef payload;

  const Transaction& tx() const { return payload->tx; }
  const Digest& digest() const { return payload->digest; }
};

struct Outbound {
  AgentId to;
  RrbMessage msg;
};

/// Quorum sizes for n agents of which at most t are Byzantine.
struct Thresholds {
  std::uint32_t n{0};
  std::uint32_t t{0};
  std::uint32_t echo_quorum{0};     // smallest integer strictly greater than (n+t)/2
  std::uint32_t ready_init{0};      // t+1
  std::uint32_t deliver_quorum{0};  // 2t+1

  /// Throws std::invalid_argument unless 3t < n.
  static Thresholds make(std::uint32_t n, std::uint32_t t);
};

class RrbError : public std::runtime_error {
 public:
  enum class Code { NotOwner, SeqMismatch, WrongChannel };

  RrbError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// Retaliation gate transition toward one peer. `blocked` is true when the
/// message at the head of the peer's out-queue (sequence `seq`) is withheld,
/// false when a previously withheld head is released.
struct GateEvent {
  AgentId peer;
  Seq seq{0};
  bool blocked{false};
};

/// Observed Byzantine behavior. Logged only; the state machine does not act on it.
struct Evidence {
  AgentId peer;
  Seq seq{0};
  std::string what;
};

struct ReceiveResult {
  std::vector<Outbound> outbound;
  std::vector<PayloadRef> delivered;  // ascending by seq
  std::vector<GateEvent> gate_events;
  std::vector<Evidence> evidence;
};

struct OutFlush {
  std::vector<Outbound> sent;
  std::vector<GateEvent> gate_events;
};

/// One Rational Reliable Broadcast channel as seen by one agent.
///
/// Echo and ready messages from each peer are consumed strictly in sequence
/// order through per-peer in-queues; quorums are tallied per (seq, digest)
/// over distinct peers. Outgoing echo/ready messages to a peer are held in a
/// per-peer out-queue and released for sequence `s` only once that peer's
/// echo and ready for `s - 1` have been consumed. That is the retaliation
/// rule: a peer that skips its messages for `s` hears nothing more above `s`
/// on this channel until it backfills.
///
/// The agent participates in its own instance through loopback: messages it
/// addresses to itself come back through on_receive and count toward quorums.
class RrbInstance {
 public:
  using TallyKey = std::pair<Seq, Digest>;

  RrbInstance(AgentId owner, AgentId self, Thresholds thresholds);

  /// Owner only. Returns one INITIAL per agent, self included. INITIALs are
  /// not subject to the out-queue gate.
  std::vector<Outbound> broadcast(PayloadRef payload);

  ReceiveResult on_receive(AgentId from, const RrbMessage& msg);

  /// Drains every in-queue as far as sequence order allows and returns the
  /// tally keys credited, in consumption order.
  std::vector<TallyKey> flush_in_queues();

  /// Releases every queued message whose gate is open, per peer, in sequence order.
  OutFlush flush_out_queue();

  /// Returns the payload the first time `seq` is delivered, nothing afterwards.
  std::optional<PayloadRef> deliver(PayloadRef payload, Seq seq);

  AgentId owner() const { return owner_; }
  AgentId self() const { return self_; }
  const Thresholds& thresholds() const { return thresholds_; }
  Seq next_seq() const { return next_seq_; }
  Seq last_echo(AgentId peer) const { return last_echo_.at(peer.index()); }
  Seq last_ready(AgentId peer) const { return last_ready_.at(peer.index()); }
  std::size_t echo_count(Seq seq, const Digest& d) const;
  std::size_t ready_count(Seq seq, const Digest& d) const;
  std::optional<Digest> delivered_digest(Seq seq) const;
  bool echo_sent(Seq seq) const { return echo_sent_.contains(seq); }
  bool ready_sent(Seq seq) const { return ready_sent_.contains(seq); }
  std::size_t out_queue_size(AgentId peer) const { return out_.at(peer.index()).size(); }
  std::size_t in_echo_queue_size(AgentId peer) const { return in_echo_.at(peer.index()).size(); }
  std::size_t in_ready_queue_size(AgentId peer) const { return in_ready_.at(peer.index()).size(); }
  /// Head sequence withheld from `peer`, if its out-queue is currently blocked.
  std::optional<Seq> blocked_at(AgentId peer) const { return blocked_at_.at(peer.index()); }

 private:
  struct Tally {
    std::set<AgentId> echoes;
    std::set<AgentId> readies;
    PayloadRef payload;
  };

  using InQueue = std::multimap<Seq, PayloadRef>;

  void check_peer(AgentId peer) const;
  void drain(std::size_t peer, InQueue& queue, Seq& last, bool echo, std::vector<TallyKey>& credited);
  void credit(std::size_t peer, Seq seq, const PayloadRef& payload, bool echo, std::vector<TallyKey>& credited);
  void enqueue_all(MessageKind kind, Seq seq, const PayloadRef& payload);
  bool gate_open(std::size_t peer, Seq seq) const;

  AgentId owner_;
  AgentId self_;
  Thresholds thresholds_;
  Seq next_seq_{1};
  std::set<Seq> broadcast_;
  std::vector<Seq> last_echo_;
  std::vector<Seq> last_ready_;
  std::vector<InQueue> in_echo_;
  std::vector<InQueue> in_ready_;
  std::vector<std::multimap<Seq, RrbMessage>> out_;
  std::vector<std::optional<Seq>> blocked_at_;
  std::set<Seq> echo_sent_;
  std::set<Seq> ready_sent_;
  std::map<TallyKey, Tally> tallies_;
  std::map<Seq, Digest> delivered_;
  std::map<Seq, Digest> initial_seen_;
  std::set<Seq> conflict_reported_;
  std::vector<Evidence> evidence_;
};

}  // namespace hearsay
