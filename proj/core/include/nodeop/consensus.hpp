#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nodeop/ids.hpp"
#include "nodeop/random.hpp"

namespace nodeop {

// Opaque batch digest (simulated; no real cryptography).
struct Digest {
  std::uint64_t value = 0;

  std::string hex() const;
  static Digest from_hex(std::string_view text);
  auto operator<=>(const Digest&) const = default;
};

// An ordered batch of transactions packaged by the operators.
struct Batch {
  std::vector<std::string> transactions;

  Digest digest() const;
};

enum class Behavior { kHonest, kSilent, kEquivocating, kInvalidProposer };

std::string_view to_string(Behavior behavior);
Behavior behavior_from_string(std::string_view text);

struct ValidatorDescriptor {
  OperatorId id;
  double stake = 1.0;  // > 0
  Behavior behavior = Behavior::kHonest;
  Tick region_latency = 1;  // base delay of messages sent by this validator
};

enum class MessageKind { kProposal, kPrevote, kPrecommit };

std::string_view to_string(MessageKind kind);

struct ConsensusMessage {
  MessageKind kind = MessageKind::kPrevote;
  std::uint64_t height = 0;
  std::uint32_t round = 0;
  OperatorId sender;
  std::optional<Digest> batch_digest;  // nullopt is a nil vote
  Tick send_tick = 0;
  std::int32_t valid_round = -1;  // proposals only: proof-of-lock round

  bool operator==(const ConsensusMessage&) const = default;
};

// Strict quorum: signed > 2/3 of total.
bool has_quorum(double signed_stake, double total_stake);

struct AggregatedSignature {
  Digest batch_digest;
  std::set<OperatorId> signer_set;
  double signed_stake = 0.0;
  double total_stake = 0.0;

  bool valid() const { return has_quorum(signed_stake, total_stake); }
  bool operator==(const AggregatedSignature&) const = default;
};

enum class FaultKind { kUnknownSender, kEquivocation, kInvalidProposal, kNonParticipation };

std::string_view to_string(FaultKind kind);

struct ProtocolFault {
  FaultKind kind = FaultKind::kEquivocation;
  OperatorId offender;
  std::uint64_t height = 0;
  std::uint32_t round = 0;
  Tick tick = 0;

  bool operator==(const ProtocolFault&) const = default;
};

struct SignatureAggregation {
  AggregatedSignature signature;
  std::vector<ProtocolFault> faults;
};

// Signer set = distinct known senders of non-nil precommits for `digest`.
// Precommits from unknown validators are ignored and reported as faults.
SignatureAggregation aggregate_signature(std::span<const ConsensusMessage> precommits,
                                         std::span<const ValidatorDescriptor> validators,
                                         const Digest& digest);

struct Partition {
  Tick start = 0;  // inclusive
  Tick end = 0;    // exclusive
  std::set<OperatorId> members;  // cut off from everyone else during [start, end)

  bool operator==(const Partition&) const = default;
};

struct NetworkModel {
  double drop_probability = 0.0;  // in [0, 1)
  Tick latency_jitter = 0;
  std::uint64_t rng_seed = 0;
  std::vector<Partition> partition_schedule;

  void validate() const;
  bool operator==(const NetworkModel&) const = default;
};

struct Envelope {
  ConsensusMessage message;
  OperatorId from;
  OperatorId to;
  Tick deliver_at = 0;
  std::uint64_t seq = 0;

  bool operator==(const Envelope&) const = default;
};

// Lossy point-to-point links with per-sender latency. Every copy of a message
// draws its drop and jitter from the single seeded generator in send order,
// so identical inputs yield an identical delivery trace.
class GossipNetwork {
 public:
  explicit GossipNetwork(NetworkModel model);

  void set_latency(const OperatorId& sender, Tick latency);

  // Queues one copy per peer, delivered at tick >= now + sender latency.
  void send(const ConsensusMessage& message, const OperatorId& from,
            std::span<const OperatorId> peers, Tick now);

  // Removes and returns every queued copy due at or before `tick`, ordered by
  // (deliver_at, seq). Ticks must be non-decreasing across calls.
  std::vector<Envelope> gossip_step(Tick tick);

  std::optional<Tick> next_delivery() const;
  bool idle() const { return queue_.empty(); }

  std::uint64_t sent() const { return sent_; }
  std::uint64_t dropped() const { return dropped_; }
  std::uint64_t delivered() const { return delivered_; }

 private:
  struct Later {
    bool operator()(const Envelope& a, const Envelope& b) const {
      if (a.deliver_at != b.deliver_at) return a.deliver_at > b.deliver_at;
      return a.seq > b.seq;
    }
  };

  bool partitioned(const OperatorId& a, const OperatorId& b, Tick tick) const;

  NetworkModel model_;
  Rng rng_;
  std::vector<std::pair<OperatorId, Tick>> latency_;
  std::priority_queue<Envelope, std::vector<Envelope>, Later> queue_;
  std::uint64_t next_seq_ = 0;
  std::optional<Tick> last_step_;
  std::uint64_t sent_ = 0;
  std::uint64_t dropped_ = 0;
  std::uint64_t delivered_ = 0;
};

enum class TraceKind {
  kNewRound,
  kProposal,
  kPrevote,
  kPrecommit,
  kTimeoutPropose,
  kTimeoutPrevote,
  kTimeoutPrecommit,
  kCommit,
  kFault,
};

std::string_view to_string(TraceKind kind);

struct TraceEvent {
  Tick tick = 0;
  TraceKind kind = TraceKind::kNewRound;
  std::uint64_t height = 0;
  std::uint32_t round = 0;
  OperatorId sender;
  std::optional<Digest> digest;

  bool operator==(const TraceEvent&) const = default;
};

// One record per line: tick, kind, height, round, sender, digest
// (tab-separated; "nil" for an absent digest).
std::string export_trace(std::span<const TraceEvent> trace);

struct ConsensusParams {
  std::uint32_t max_rounds = 10;
  Tick base_timeout = 4;  // per phase, doubled every round
  std::uint64_t height = 0;
  Tick start_tick = 0;
};

struct Decision {
  OperatorId validator;
  Digest digest;
  std::uint32_t round = 0;
  Tick tick = 0;

  bool operator==(const Decision&) const = default;
};

struct RoundOutcome {
  bool committed = false;
  std::optional<Digest> batch_digest;
  std::optional<AggregatedSignature> signature;
  std::uint32_t rounds_used = 0;
  Tick ticks_elapsed = 0;

  // Decisions of honest validators; all must agree (safety).
  std::vector<Decision> decisions;
  // Validators that sent at least one vote during the height.
  std::set<OperatorId> participants;
  std::vector<ProtocolFault> faults;
  std::vector<TraceEvent> trace;
};

// Executes one height of propose -> prevote -> precommit rounds with
// Tendermint locking. Proposers rotate round-robin over validators sorted by
// descending stake then id. Returns once every honest validator decided (and
// the network drained) or all rounds up to max_rounds were exhausted.
RoundOutcome run_height(std::span<const ValidatorDescriptor> validators, const Batch& batch,
                        const NetworkModel& network, const ConsensusParams& params);

// Validator sorted order used for proposer rotation.
std::vector<ValidatorDescriptor> proposer_order(std::span<const ValidatorDescriptor> validators);

}  // namespace nodeop
