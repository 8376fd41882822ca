#include "nodeop/consensus.hpp"

#include <map>
#include <string>

#include <gtest/gtest.h>

#include "nodeop/errors.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace nodeop {
namespace {

std::vector<ValidatorDescriptor> equal_validators(int n) {
  std::vector<ValidatorDescriptor> out;
  for (int i = 0; i < n; ++i) out.push_back({testing::op(i), 1.0, Behavior::kHonest, 1});
  return out;
}

Batch sample_batch() { return Batch{{"tx-a", "tx-b", "tx-c"}}; }

// Every honest decision names the same digest, and it is the batch's.
void expect_safe(const RoundOutcome& out, const Batch& batch) {
  for (const auto& d : out.decisions) EXPECT_EQ(d.digest, batch.digest());
  if (out.committed) {
    ASSERT_TRUE(out.signature.has_value());
    EXPECT_TRUE(out.signature->valid());
    EXPECT_EQ(out.batch_digest, batch.digest());
  }
}

TEST(Digest, HexRoundTrip) {
  Digest d = sample_batch().digest();
  EXPECT_EQ(d.hex().size(), 16u);
  EXPECT_EQ(Digest::from_hex(d.hex()), d);
  EXPECT_THROW(Digest::from_hex("xyz"), DomainError);
  EXPECT_NE(Batch{{"a"}}.digest(), Batch{{"b"}}.digest());
  EXPECT_NE((Batch{{"ab", "c"}}.digest()), (Batch{{"a", "bc"}}.digest()));
}

TEST(Behavior, StringRoundTrip) {
  for (auto b : {Behavior::kHonest, Behavior::kSilent, Behavior::kEquivocating, Behavior::kInvalidProposer}) {
    EXPECT_EQ(behavior_from_string(to_string(b)), b);
  }
  EXPECT_THROW(behavior_from_string("lazy"), DomainError);
}

TEST(Quorum, Strict) {
  EXPECT_TRUE(has_quorum(3.0, 4.0));
  EXPECT_FALSE(has_quorum(2.0, 3.0));
  EXPECT_TRUE(has_quorum(2.0000001, 3.0));
  EXPECT_FALSE(has_quorum(0.0, 0.0));
}

TEST(AggregateSignature, Examples) {
  std::vector<ValidatorDescriptor> vals;
  for (int i = 0; i < 4; ++i) vals.push_back({testing::op(i), 10.0, Behavior::kHonest, 1});
  const Digest d = sample_batch().digest();
  auto pc = [&](int i, std::optional<Digest> dig) {
    ConsensusMessage m;
    m.kind = MessageKind::kPrecommit;
    m.sender = testing::op(i);
    m.batch_digest = dig;
    return m;
  };
  std::vector<ConsensusMessage> three{pc(0, d), pc(1, d), pc(2, d)};
  auto agg = aggregate_signature(three, vals, d);
  EXPECT_EQ(agg.signature.signed_stake, 30.0);
  EXPECT_EQ(agg.signature.total_stake, 40.0);
  EXPECT_TRUE(agg.signature.valid());
  EXPECT_EQ(agg.signature.signer_set.size(), 3u);

  auto empty = aggregate_signature(std::vector<ConsensusMessage>{}, vals, d);
  EXPECT_EQ(empty.signature.signed_stake, 0.0);
  EXPECT_FALSE(empty.signature.valid());

  std::vector<ConsensusMessage> two{pc(0, d), pc(1, d), pc(1, d), pc(2, std::nullopt), pc(3, Digest{d.value + 1})};
  agg = aggregate_signature(two, vals, d);
  EXPECT_EQ(agg.signature.signed_stake, 20.0);
  EXPECT_FALSE(agg.signature.valid());

  std::vector<ConsensusMessage> stranger{pc(0, d), pc(9, d)};
  agg = aggregate_signature(stranger, vals, d);
  EXPECT_EQ(agg.signature.signer_set.size(), 1u);
  ASSERT_EQ(agg.faults.size(), 1u);
  EXPECT_EQ(agg.faults[0].kind, FaultKind::kUnknownSender);
  EXPECT_EQ(agg.faults[0].offender, testing::op(9));
}

TEST(GossipNetwork, LosslessDeliversOnceAfterLatency) {
  GossipNetwork net({});
  std::vector<OperatorId> peers{testing::op(1), testing::op(2), testing::op(3)};
  ConsensusMessage m;
  m.sender = testing::op(0);
  m.send_tick = 5;
  net.send(m, testing::op(0), peers, 5);
  EXPECT_TRUE(net.gossip_step(5).empty());
  auto got = net.gossip_step(6);
  ASSERT_EQ(got.size(), 3u);
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].deliver_at, 6u);
    EXPECT_EQ(got[i].to, peers[i]);
  }
  EXPECT_TRUE(net.idle());
  EXPECT_TRUE(net.gossip_step(100).empty());
  EXPECT_EQ(net.delivered(), 3u);
  EXPECT_THROW(net.gossip_step(50), DomainError);
}

TEST(GossipNetwork, SameSeedSameTrace) {
  auto run = [](std::uint64_t seed) {
    NetworkModel model;
    model.drop_probability = 0.3;
    model.latency_jitter = 3;
    model.rng_seed = seed;
    GossipNetwork net(model);
    net.set_latency(testing::op(0), 2);
    std::vector<OperatorId> peers{testing::op(1), testing::op(2), testing::op(3), testing::op(4)};
    std::vector<Envelope> all;
    for (Tick t = 0; t < 20; ++t) {
      ConsensusMessage m;
      m.round = static_cast<std::uint32_t>(t);
      net.send(m, testing::op(0), peers, t);
      auto got = net.gossip_step(t);
      all.insert(all.end(), got.begin(), got.end());
    }
    auto rest = net.gossip_step(1000);
    all.insert(all.end(), rest.begin(), rest.end());
    return all;
  };
  EXPECT_EQ(run(7), run(7));
  EXPECT_NE(run(7), run(8));
}

TEST(GossipNetwork, PartitionCutsLinks) {
  NetworkModel model;
  model.partition_schedule.push_back({0, 10, {testing::op(0)}});
  GossipNetwork net(model);
  std::vector<OperatorId> peers{testing::op(1)};
  net.send({}, testing::op(0), peers, 0);
  net.send({}, testing::op(0), peers, 10);
  auto got = net.gossip_step(100);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].deliver_at, 11u);
  EXPECT_EQ(net.dropped(), 1u);
}

TEST(NetworkModel, Validate) {
  NetworkModel m;
  m.drop_probability = 1.0;
  EXPECT_THROW(m.validate(), DomainError);
  m.drop_probability = -0.1;
  EXPECT_THROW(m.validate(), DomainError);
  m.drop_probability = 0.5;
  EXPECT_NO_THROW(m.validate());
}

TEST(RunHeight, FourHonestCommitInRoundZero) {
  auto vals = equal_validators(4);
  auto out = run_height(vals, sample_batch(), {}, {});
  ASSERT_TRUE(out.committed);
  EXPECT_EQ(out.rounds_used, 1u);
  ASSERT_TRUE(out.signature.has_value());
  EXPECT_EQ(out.signature->signer_set.size(), 4u);
  EXPECT_EQ(out.decisions.size(), 4u);
  for (const auto& d : out.decisions) EXPECT_EQ(d.round, 0u);
  expect_safe(out, sample_batch());
  EXPECT_TRUE(out.faults.empty());
}

TEST(RunHeight, OneSilentStillCommits) {
  auto vals = equal_validators(4);
  vals[2].behavior = Behavior::kSilent;
  auto out = run_height(vals, sample_batch(), {}, {});
  ASSERT_TRUE(out.committed);
  EXPECT_DOUBLE_EQ(out.signature->signed_stake / out.signature->total_stake, 0.75);
  EXPECT_FALSE(out.signature->signer_set.contains(vals[2].id));
  EXPECT_FALSE(out.participants.contains(vals[2].id));
  bool flagged = false;
  for (const auto& f : out.faults) {
    flagged |= f.kind == FaultKind::kNonParticipation && f.offender == vals[2].id;
  }
  EXPECT_TRUE(flagged);
}

TEST(RunHeight, TwoSilentNeverCommit) {
  auto vals = equal_validators(4);
  vals[1].behavior = Behavior::kSilent;
  vals[3].behavior = Behavior::kSilent;
  ConsensusParams p;
  p.max_rounds = 5;
  auto out = run_height(vals, sample_batch(), {}, p);
  EXPECT_FALSE(out.committed);
  EXPECT_FALSE(out.signature.has_value());
  EXPECT_TRUE(out.decisions.empty());
  EXPECT_EQ(out.rounds_used, 5u);
}

TEST(RunHeight, SilentProposerSkipsToNextRound) {
  auto vals = equal_validators(4);
  const auto order = proposer_order(vals);
  for (auto& v : vals) {
    if (v.id == order[0].id) v.behavior = Behavior::kSilent;
  }
  auto out = run_height(vals, sample_batch(), {}, {});
  ASSERT_TRUE(out.committed);
  EXPECT_EQ(out.rounds_used, 2u);
  for (const auto& d : out.decisions) EXPECT_EQ(d.round, 1u);
}

TEST(RunHeight, InvalidProposerAndEquivocatorAreFlagged) {
  auto vals = equal_validators(4);
  const auto order = proposer_order(vals);
  for (auto& v : vals) {
    if (v.id == order[0].id) v.behavior = Behavior::kInvalidProposer;
  }
  auto out = run_height(vals, sample_batch(), {}, {});
  ASSERT_TRUE(out.committed);
  expect_safe(out, sample_batch());
  bool invalid = false;
  for (const auto& f : out.faults) invalid |= f.kind == FaultKind::kInvalidProposal;
  EXPECT_TRUE(invalid);

  vals = equal_validators(4);
  vals[3].behavior = Behavior::kEquivocating;
  out = run_height(vals, sample_batch(), {}, {});
  ASSERT_TRUE(out.committed);
  expect_safe(out, sample_batch());
  bool equivocation = false;
  for (const auto& f : out.faults) equivocation |= f.kind == FaultKind::kEquivocation;
  EXPECT_TRUE(equivocation);
}

TEST(RunHeight, AlmostCertainDropsPreventCommit) {
  NetworkModel net;
  net.drop_probability = 1.0 - 1e-15;
  net.rng_seed = 99;
  ConsensusParams p;
  p.max_rounds = 3;
  auto out = run_height(equal_validators(4), sample_batch(), net, p);
  EXPECT_FALSE(out.committed);
}

TEST(RunHeight, StakeWeightedQuorum) {
  // One validator holds 70% of the stake: without it nothing commits.
  std::vector<ValidatorDescriptor> vals{{testing::op(0), 70.0, Behavior::kSilent, 1},
                                        {testing::op(1), 10.0, Behavior::kHonest, 1},
                                        {testing::op(2), 10.0, Behavior::kHonest, 1},
                                        {testing::op(3), 10.0, Behavior::kHonest, 1}};
  ConsensusParams p;
  p.max_rounds = 4;
  EXPECT_FALSE(run_height(vals, sample_batch(), {}, p).committed);
  vals[0].behavior = Behavior::kHonest;
  vals[1].behavior = Behavior::kSilent;
  vals[2].behavior = Behavior::kSilent;
  EXPECT_TRUE(run_height(vals, sample_batch(), {}, p).committed);
}

TEST(RunHeight, Deterministic) {
  auto vals = equal_validators(5);
  vals[4].behavior = Behavior::kEquivocating;
  NetworkModel net;
  net.drop_probability = 0.2;
  net.latency_jitter = 3;
  net.rng_seed = 1234;
  auto a = run_height(vals, sample_batch(), net, {});
  auto b = run_height(vals, sample_batch(), net, {});
  EXPECT_EQ(a.committed, b.committed);
  EXPECT_EQ(a.ticks_elapsed, b.ticks_elapsed);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.decisions, b.decisions);
  EXPECT_EQ(export_trace(a.trace), export_trace(b.trace));
}

TEST(RunHeight, Errors) {
  EXPECT_THROW(run_height(std::vector<ValidatorDescriptor>{}, sample_batch(), {}, {}), DomainError);
  auto vals = equal_validators(2);
  vals[1].id = vals[0].id;
  EXPECT_THROW(run_height(vals, sample_batch(), {}, {}), DomainError);
  vals = equal_validators(2);
  vals[0].stake = 0.0;
  EXPECT_THROW(run_height(vals, sample_batch(), {}, {}), DomainError);
  EXPECT_THROW(run_height(equal_validators(2), Batch{}, {}, {}), DomainError);
  ConsensusParams p;
  p.max_rounds = 0;
  EXPECT_THROW(run_height(equal_validators(2), sample_batch(), {}, p), DomainError);
}

TEST(ProposerOrder, StakeThenId) {
  std::vector<ValidatorDescriptor> vals{{OperatorId("b"), 1.0, Behavior::kHonest, 1},
                                        {OperatorId("c"), 5.0, Behavior::kHonest, 1},
                                        {OperatorId("a"), 1.0, Behavior::kHonest, 1}};
  auto order = proposer_order(vals);
  EXPECT_EQ(order[0].id, OperatorId("c"));
  EXPECT_EQ(order[1].id, OperatorId("a"));
  EXPECT_EQ(order[2].id, OperatorId("b"));
}

TEST(ExportTrace, Format) {
  std::vector<TraceEvent> trace{{3, TraceKind::kPrevote, 1, 0, OperatorId("v1"), Digest{0xabc}},
                                {4, TraceKind::kPrecommit, 1, 0, OperatorId("v2"), std::nullopt}};
  EXPECT_EQ(export_trace(trace),
            "3\tprevote\t1\t0\tv1\t0000000000000abc\n4\tprecommit\t1\t0\tv2\tnil\n");
}

TEST(RunHeight, RandomizedSafetyUnderPartitions) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 4 + static_cast<int>(rng.up_to(3));
    auto vals = equal_validators(n);
    for (auto& v : vals) v.stake = 1.0 + static_cast<double>(rng.up_to(4));
    vals[rng.up_to(static_cast<std::uint64_t>(n - 1))].behavior = Behavior::kEquivocating;
    NetworkModel net;
    net.rng_seed = rng.next();
    net.drop_probability = 0.1 * rng.uniform();
    net.latency_jitter = rng.up_to(3);
    net.partition_schedule.push_back({rng.up_to(10), 10 + rng.up_to(30), {vals[0].id, vals[1].id}});
    auto out = run_height(vals, sample_batch(), net, {});
    expect_safe(out, sample_batch());
  }
}

}  // namespace
}  // namespace nodeop
