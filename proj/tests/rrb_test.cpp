#include <gtest/gtest.h>

#include <deque>
#include <map>
#include <random>
#include <set>

#include "hearsay/rrb.hpp"

using namespace hearsay;

namespace {

Transaction tx_of(AgentId from, Seq seq, Money value = 1) {
  return Transaction{from, AgentId{from.value % 4 + 1}, value, seq, {}, {}};
}

// Smallest k with 2k > n + t, by search rather than by formula.
std::uint32_t echo_quorum_oracle(std::uint32_t n, std::uint32_t t) {
  std::uint32_t k = 0;
  while (2 * k <= n + t) ++k;
  return k;
}

// All n replicas of one channel plus an in-memory network. Messages are
// delivered in random order; agents listed in `mute` receive but never send.
struct Channel {
  Thresholds th;
  AgentId owner;
  std::vector<RrbInstance> inst;
  std::vector<std::pair<AgentId, Outbound>> wire;
  std::vector<std::map<Seq, Digest>> delivered;
  std::vector<std::uint32_t> delivery_count;
  std::vector<GateEvent> gates;
  std::set<AgentId> mute;

  Channel(std::uint32_t n, std::uint32_t t, AgentId own) : th(Thresholds::make(n, t)), owner(own) {
    for (std::uint32_t i = 1; i <= n; ++i) inst.emplace_back(owner, AgentId{i}, th);
    delivered.resize(n);
    delivery_count.assign(n, 0);
  }

  void post(AgentId from, const std::vector<Outbound>& out) {
    for (const auto& o : out) {
      if (!mute.contains(from) || o.to == from) wire.emplace_back(from, o);
    }
  }

  void step(std::size_t k) {
    auto [from, o] = wire[k];
    wire.erase(wire.begin() + static_cast<std::ptrdiff_t>(k));
    auto r = inst[o.to.index()].on_receive(from, o.msg);
    for (const auto& p : r.delivered) {
      ++delivery_count[o.to.index()];
      auto [it, fresh] = delivered[o.to.index()].emplace(p->tx.seq, p->digest);
      EXPECT_TRUE(fresh) << "agent " << o.to << " delivered seq " << p->tx.seq << " twice";
    }
    gates.insert(gates.end(), r.gate_events.begin(), r.gate_events.end());
    post(o.to, r.outbound);
  }

  void run(std::mt19937_64& rng) {
    while (!wire.empty()) step(std::uniform_int_distribution<std::size_t>(0, wire.size() - 1)(rng));
  }

  void run_fifo() {
    while (!wire.empty()) step(0);
  }
};

}  // namespace

TEST(Thresholds, MatchQuorumDefinitions) {
  for (std::uint32_t n = 1; n <= 31; ++n) {
    for (std::uint32_t t = 0; 3 * t < n; ++t) {
      const auto th = Thresholds::make(n, t);
      EXPECT_EQ(th.echo_quorum, echo_quorum_oracle(n, t));
      EXPECT_EQ(th.ready_init, t + 1);
      EXPECT_EQ(th.deliver_quorum, 2 * t + 1);
      // Delivery must stay reachable when t agents are silent.
      EXPECT_LE(th.deliver_quorum, n - t);
      EXPECT_LE(th.echo_quorum, n - t);
    }
  }
  EXPECT_EQ(Thresholds::make(4, 1).echo_quorum, 3U);
  EXPECT_EQ(Thresholds::make(7, 2).echo_quorum, 5U);
}

TEST(Thresholds, RejectTooManyFaults) {
  EXPECT_THROW(Thresholds::make(3, 1), std::invalid_argument);
  EXPECT_THROW(Thresholds::make(6, 2), std::invalid_argument);
  EXPECT_NO_THROW(Thresholds::make(7, 2));
}

TEST(RrbInstance, BroadcastSendsOneInitialPerAgent) {
  RrbInstance a(AgentId{1}, AgentId{1}, Thresholds::make(4, 1));
  auto out = a.broadcast(make_payload(tx_of(AgentId{1}, 1)));
  ASSERT_EQ(out.size(), 4U);
  std::set<AgentId> targets;
  for (const auto& o : out) {
    EXPECT_EQ(o.msg.kind, MessageKind::Initial);
    EXPECT_EQ(o.msg.seq, 1U);
    targets.insert(o.to);
  }
  EXPECT_EQ(targets.size(), 4U);
}

TEST(RrbInstance, BroadcastErrors) {
  RrbInstance other(AgentId{1}, AgentId{2}, Thresholds::make(4, 1));
  try {
    other.broadcast(make_payload(tx_of(AgentId{1}, 1)));
    FAIL();
  } catch (const RrbError& e) {
    EXPECT_EQ(e.code(), RrbError::Code::NotOwner);
  }
  RrbInstance own(AgentId{1}, AgentId{1}, Thresholds::make(4, 1));
  try {
    own.broadcast(make_payload(tx_of(AgentId{1}, 2)));
    FAIL();
  } catch (const RrbError& e) {
    EXPECT_EQ(e.code(), RrbError::Code::SeqMismatch);
  }
  own.broadcast(make_payload(tx_of(AgentId{1}, 1)));
  EXPECT_THROW(own.broadcast(make_payload(tx_of(AgentId{1}, 1))), RrbError);
}

TEST(RrbInstance, RejectsMessageForOtherChannel) {
  RrbInstance a(AgentId{1}, AgentId{2}, Thresholds::make(4, 1));
  RrbMessage m{AgentId{3}, MessageKind::Echo, 1, make_payload(tx_of(AgentId{3}, 1))};
  try {
    a.on_receive(AgentId{3}, m);
    FAIL();
  } catch (const RrbError& e) {
    EXPECT_EQ(e.code(), RrbError::Code::WrongChannel);
  }
}

TEST(RrbInstance, InitialFromNonOwnerIsEvidenceOnly) {
  RrbInstance a(AgentId{1}, AgentId{2}, Thresholds::make(4, 1));
  RrbMessage m{AgentId{1}, MessageKind::Initial, 1, make_payload(tx_of(AgentId{1}, 1))};
  auto r = a.on_receive(AgentId{3}, m);
  EXPECT_TRUE(r.outbound.empty());
  EXPECT_EQ(r.evidence.size(), 1U);
  EXPECT_FALSE(a.echo_sent(1));
}

TEST(RrbInstance, QuorumCountsDistinctPeers) {
  const auto th = Thresholds::make(4, 1);
  RrbInstance a(AgentId{1}, AgentId{2}, th);
  auto p = make_payload(tx_of(AgentId{1}, 1));
  RrbMessage echo{AgentId{1}, MessageKind::Echo, 1, p};
  a.on_receive(AgentId{3}, echo);
  a.on_receive(AgentId{3}, echo);
  EXPECT_EQ(a.echo_count(1, p->digest), 1U);
  EXPECT_FALSE(a.ready_sent(1));
  a.on_receive(AgentId{4}, echo);
  EXPECT_EQ(a.echo_count(1, p->digest), 2U);
  EXPECT_FALSE(a.ready_sent(1));
  a.on_receive(AgentId{1}, echo);
  EXPECT_EQ(a.echo_count(1, p->digest), 3U);
  EXPECT_TRUE(a.ready_sent(1));
}

TEST(RrbInstance, ReadyAmplificationAtTPlusOne) {
  RrbInstance a(AgentId{1}, AgentId{2}, Thresholds::make(4, 1));
  auto p = make_payload(tx_of(AgentId{1}, 1));
  RrbMessage ready{AgentId{1}, MessageKind::Ready, 1, p};
  a.on_receive(AgentId{3}, ready);
  EXPECT_FALSE(a.ready_sent(1));
  a.on_receive(AgentId{4}, ready);
  EXPECT_TRUE(a.ready_sent(1));
  EXPECT_FALSE(a.delivered_digest(1));
  a.on_receive(AgentId{1}, ready);
  ASSERT_TRUE(a.delivered_digest(1));
  EXPECT_EQ(*a.delivered_digest(1), p->digest);
}

TEST(RrbInstance, InQueueConsumesInSequenceOrder) {
  RrbInstance a(AgentId{1}, AgentId{2}, Thresholds::make(4, 1));
  auto p2 = make_payload(tx_of(AgentId{1}, 2));
  a.on_receive(AgentId{3}, RrbMessage{AgentId{1}, MessageKind::Echo, 2, p2});
  EXPECT_EQ(a.last_echo(AgentId{3}), 0U);
  EXPECT_EQ(a.in_echo_queue_size(AgentId{3}), 1U);
  EXPECT_EQ(a.echo_count(2, p2->digest), 0U);

  auto p1 = make_payload(tx_of(AgentId{1}, 1));
  a.on_receive(AgentId{3}, RrbMessage{AgentId{1}, MessageKind::Echo, 1, p1});
  EXPECT_EQ(a.last_echo(AgentId{3}), 2U);
  EXPECT_EQ(a.in_echo_queue_size(AgentId{3}), 0U);
  EXPECT_EQ(a.echo_count(2, p2->digest), 1U);
}

TEST(RrbInstance, DeliverOnce) {
  RrbInstance a(AgentId{1}, AgentId{2}, Thresholds::make(4, 1));
  auto p = make_payload(tx_of(AgentId{1}, 1));
  EXPECT_TRUE(a.deliver(p, 1));
  EXPECT_FALSE(a.deliver(p, 1));
}

TEST(RrbChannel, AllHonestDeliverEverything) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::mt19937_64 rng(seed);
    Channel ch(4, 1, AgentId{1});
    // The owner broadcasts the next sequence number once it has delivered the previous one.
    Seq issued = 1;
    ch.post(AgentId{1}, ch.inst[0].broadcast(make_payload(tx_of(AgentId{1}, 1))));
    while (!ch.wire.empty()) {
      ch.step(std::uniform_int_distribution<std::size_t>(0, ch.wire.size() - 1)(rng));
      if (issued < 3 && ch.inst[0].next_seq() == issued + 1) {
        ++issued;
        ch.post(AgentId{1}, ch.inst[0].broadcast(make_payload(tx_of(AgentId{1}, issued))));
      }
    }
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(ch.delivered[i].size(), 3U) << "seed " << seed << " agent " << i + 1;
      EXPECT_EQ(ch.delivered[i], ch.delivered[0]);
      EXPECT_EQ(ch.inst[i].out_queue_size(AgentId{2}), 0U);
    }
    EXPECT_TRUE(ch.gates.empty() || ch.gates.size() % 2 == 0);
  }
}

TEST(RrbChannel, SilentFaultsDoNotBlockDelivery) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::mt19937_64 rng(seed);
    Channel ch(7, 2, AgentId{1});
    ch.mute = {AgentId{6}, AgentId{7}};
    ch.post(AgentId{1}, ch.inst[0].broadcast(make_payload(tx_of(AgentId{1}, 1))));
    ch.run(rng);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(ch.delivered[i].size(), 1U) << "seed " << seed;
  }
}

TEST(RrbChannel, EquivocationNeverSplitsDeliveries) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    std::mt19937_64 rng(seed);
    Channel ch(4, 1, AgentId{1});
    ch.mute = {AgentId{1}};
    auto a = make_payload(tx_of(AgentId{1}, 1, 10));
    auto b = make_payload(tx_of(AgentId{1}, 1, 11));
    for (std::uint32_t i = 2; i <= 4; ++i) {
      ch.wire.emplace_back(AgentId{1}, Outbound{AgentId{i}, RrbMessage{AgentId{1}, MessageKind::Initial, 1, i == 2 ? a : b}});
    }
    ch.run(rng);
    std::set<Digest> seen;
    for (std::size_t i = 1; i < 4; ++i) {
      if (auto it = ch.delivered[i].find(1); it != ch.delivered[i].end()) seen.insert(it->second);
    }
    EXPECT_LE(seen.size(), 1U) << "seed " << seed;
  }
}

TEST(RrbChannel, PeerSkippingSeqOneIsCutOffAboveIt) {
  // Agent 4 consumes everything but never sends its echo/ready for seq 1.
  Channel ch(4, 1, AgentId{1});
  auto p1 = make_payload(tx_of(AgentId{1}, 1));
  auto p2 = make_payload(tx_of(AgentId{1}, 2));
  ch.mute = {AgentId{4}};
  ch.post(AgentId{1}, ch.inst[0].broadcast(p1));
  ch.run_fifo();
  ch.post(AgentId{1}, ch.inst[0].broadcast(p2));
  ch.run_fifo();

  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(ch.delivered[i].size(), 2U);
    EXPECT_EQ(ch.inst[i].blocked_at(AgentId{4}), std::optional<Seq>(2));
    EXPECT_GT(ch.inst[i].out_queue_size(AgentId{4}), 0U);
  }
  // The freerider got seq 1 but nothing above it.
  EXPECT_EQ(ch.delivered[3].size(), 1U);
  std::size_t blocks = 0;
  for (const auto& g : ch.gates) blocks += g.blocked && g.peer == AgentId{4} && g.seq == 2;
  EXPECT_EQ(blocks, 3U);

  // Backfill: agent 4 sends its seq 1 and seq 2 traffic to everyone.
  ch.mute.clear();
  for (auto kind : {MessageKind::Echo, MessageKind::Ready}) {
    for (std::uint32_t to = 1; to <= 4; ++to) {
      ch.post(AgentId{4}, {Outbound{AgentId{to}, RrbMessage{AgentId{1}, kind, 1, p1}}});
    }
  }
  ch.run_fifo();
  for (std::size_t i = 0; i < 3; ++i) EXPECT_FALSE(ch.inst[i].blocked_at(AgentId{4}));
  EXPECT_EQ(ch.delivered[3].size(), 2U);
  std::size_t unblocks = 0;
  for (const auto& g : ch.gates) unblocks += !g.blocked && g.peer == AgentId{4};
  EXPECT_EQ(unblocks, 3U);
}
