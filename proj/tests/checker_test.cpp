#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "hearsay/checker.hpp"
#include "hearsay/netsim.hpp"
#include "oracle.hpp"

using namespace hearsay;

namespace {

Transaction tx(std::uint32_t i, Seq s, std::set<TxId> deps = {}, std::set<TxId> fees = {}) {
  return Transaction{AgentId{i}, AgentId{i % 4 + 1}, 1, s, std::move(deps), std::move(fees)};
}

TxId id(std::uint32_t i, Seq s) { return TxId{AgentId{i}, s}; }

Universe of(std::initializer_list<Transaction> txs) {
  Universe u;
  for (const auto& t : txs) u.emplace(t.id(), t);
  return u;
}

Trace reference_trace() {
  SimConfig c;
  c.d_min = 1;
  c.d_max = 6;
  c.seed = 3;
  c.script = {{0, AgentId{1}, PayAction{AgentId{2}, 10, false}},
              {0, AgentId{3}, PayAction{AgentId{2}, 3, false}},
              {30, AgentId{2}, PayAction{AgentId{4}, 4, true}}};
  return run(c).trace;
}

CheckStatus status(const Report& r, std::string_view name) { return r.find(name)->status; }

}  // namespace

TEST(Phi, SingleTransactionHasHeightOne) {
  const auto u = of({tx(1, 1)});
  EXPECT_EQ(phi(id(1, 1), u).members, std::set<TxId>{id(1, 1)});
  EXPECT_EQ(height(id(1, 1), u), 1U);
}

TEST(Phi, FollowsDepsFeesAndSourceOrder) {
  const auto u = of({tx(1, 1), tx(1, 2), tx(2, 1, {id(1, 2)}), tx(3, 1), tx(2, 2, {}, {id(3, 1)})});
  const auto p = phi(id(2, 2), u);
  EXPECT_EQ(p.members, (std::set<TxId>{id(1, 1), id(1, 2), id(2, 1), id(2, 2), id(3, 1)}));
  EXPECT_FALSE(p.cyclic);
  // (1,1) -> (1,2) -> (2,1) -> (2,2)
  EXPECT_EQ(height(id(2, 2), u), 4U);
}

TEST(Phi, MissingReference) {
  const auto u = of({tx(1, 2)});
  try {
    phi(id(1, 2), u);
    FAIL();
  } catch (const MissingTxError& e) {
    EXPECT_EQ(e.id(), id(1, 1));
  }
}

TEST(Phi, CyclicReferencesDetected) {
  const auto u = of({tx(1, 1, {id(2, 1)}), tx(2, 1, {id(1, 1)})});
  EXPECT_TRUE(phi(id(1, 1), u).cyclic);
  EXPECT_THROW(height(id(1, 1), u), CycleError);
}

TEST(Phi, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    std::mt19937_64 rng(seed);
    const auto u = oracle::random_history(rng, 2 + seed % 5, 1 + seed % 40);
    const oracle::Closure c(u);
    for (const auto& [root, _] : u) {
      const auto p = phi(root, u);
      ASSERT_EQ(p.members, c.phi(root)) << "seed " << seed << " root " << root;
      ASSERT_EQ(height(root, u), c.height(root)) << "seed " << seed << " root " << root;
      // Monotone, and strictly larger than any member's closure.
      for (const auto& t : p.members) {
        if (t == root) continue;
        const auto inner = phi(t, u).members;
        EXPECT_TRUE(std::includes(p.members.begin(), p.members.end(), inner.begin(), inner.end()));
        EXPECT_LT(inner.size(), p.members.size());
        EXPECT_LT(height(t, u), height(root, u));
      }
    }
  }
}

TEST(Checks, ReferenceTracePasses) {
  const auto r = run_all_checks(reference_trace());
  EXPECT_TRUE(r.passed()) << format_report(r);
  EXPECT_EQ(r.results.size(), 10U);
  EXPECT_NE(format_report(r).find("check_agreement PASS\n"), std::string::npos);
}

TEST(Checks, FlippedVerdictFailsAgreement) {
  auto t = reference_trace();
  for (auto& rec : t) {
    if (auto* e = std::get_if<ExecuteRecord>(&rec.body); e && e->agent == AgentId{3}) {
      e->verdict = Verdict::Bad;
      break;
    }
  }
  const auto r = run_all_checks(t);
  EXPECT_EQ(status(r, "check_agreement"), CheckStatus::Fail);
  EXPECT_NE(r.find("check_agreement")->counterexample.find("disagree"), std::string::npos);
}

TEST(Checks, NegativeBalanceFailsNoDebt) {
  auto t = reference_trace();
  for (auto& rec : t) {
    if (auto* s = std::get_if<SnapshotRecord>(&rec.body)) {
      s->balances[0] = -1;
      break;
    }
  }
  const auto r = run_all_checks(t);
  EXPECT_EQ(status(r, "check_no_debt"), CheckStatus::Fail);
  EXPECT_EQ(status(r, "check_conservation"), CheckStatus::Fail);
}

TEST(Checks, ForeignBalanceChangeFailsLocality) {
  auto t = reference_trace();
  // Move one unit between two agents that did not initiate the transaction.
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto* e = std::get_if<ExecuteRecord>(&t[i].body);
    if (e == nullptr || e->tx.initiator != AgentId{1}) continue;
    for (std::size_t k = i + 1; k < t.size(); ++k) {
      if (auto* s = std::get_if<SnapshotRecord>(&t[k].body)) {
        s->balances[2] += 1;
        s->balances[3] -= 1;
        break;
      }
    }
    break;
  }
  const auto r = run_all_checks(t);
  EXPECT_EQ(status(r, "check_balance_locality"), CheckStatus::Fail);
  EXPECT_EQ(status(r, "check_conservation"), CheckStatus::Pass);
}

TEST(Checks, RepeatedExecutionFailsIntegrity) {
  auto t = reference_trace();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::holds_alternative<ExecuteRecord>(t[i].body)) {
      auto copy = t[i];
      t.insert(t.begin() + static_cast<std::ptrdiff_t>(i + 1), copy);
      break;
    }
  }
  const auto r = run_all_checks(t);
  EXPECT_EQ(status(r, "check_integrity"), CheckStatus::Fail);
  EXPECT_EQ(status(r, "check_source_order"), CheckStatus::Fail);
}

TEST(Checks, ConflictingDeliveryFailsUniqueness) {
  auto t = reference_trace();
  for (auto& rec : t) {
    if (auto* d = std::get_if<DeliverRecord>(&rec.body); d && d->agent == AgentId{4}) {
      d->digest[0] ^= 1;
      break;
    }
  }
  EXPECT_EQ(status(run_all_checks(t), "check_rrb_uniqueness"), CheckStatus::Fail);
}

TEST(Checks, ExecutionBeforeDependencyFailsClosure) {
  auto t = reference_trace();
  // Find a transaction with a predecessor and drop agent 4's execution of
  // that predecessor, so agent 4 appears to execute out of order.
  std::optional<TxId> pred;
  for (const auto& [id, tx] : universe_of(t)) {
    if (const auto p = direct_predecessors(tx); !p.empty()) {
      pred = p.front();
      break;
    }
  }
  ASSERT_TRUE(pred);
  std::erase_if(t, [&](const TraceRecord& rec) {
    const auto* e = std::get_if<ExecuteRecord>(&rec.body);
    return e && e->agent == AgentId{4} && e->tx == *pred;
  });
  EXPECT_EQ(status(run_all_checks(t), "check_phi_closure"), CheckStatus::Fail);
}

TEST(Checks, MissingDeliveryFailsDelivery) {
  auto t = reference_trace();
  std::erase_if(t, [](const TraceRecord& rec) {
    const auto* d = std::get_if<DeliverRecord>(&rec.body);
    return d && d->agent == AgentId{2} && d->channel == AgentId{3};
  });
  EXPECT_EQ(status(run_all_checks(t), "check_rrb_delivery"), CheckStatus::Fail);
}

TEST(Checks, LivenessUnknownWhenNotQuiescent) {
  SimConfig c;
  c.script = {{0, AgentId{1}, PayAction{AgentId{2}, 10, false}}};
  c.max_steps = 8;
  const auto r = run_all_checks(run(c).trace);
  EXPECT_EQ(status(r, "check_validity"), CheckStatus::Unknown);
  EXPECT_EQ(status(r, "check_no_debt"), CheckStatus::Pass);
}

TEST(Checks, ByzantineAgentsAreExcludedFromAgreement) {
  SimConfig c;
  c.agents = {{AgentId{4}, {StrategyKind::ByzSilent, {}}}};
  c.script = {{0, AgentId{1}, PayAction{AgentId{2}, 10, false}}};
  const auto t = run(c).trace;
  EXPECT_TRUE(run_all_checks(t).passed()) << format_report(run_all_checks(t));
}
