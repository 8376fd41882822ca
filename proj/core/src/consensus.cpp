#include "nodeop/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>
#include <tuple>

#include "nodeop/errors.hpp"
#include "nodeop/hash.hpp"

namespace nodeop {

std::string Digest::hex() const { return to_hex(value); }

Digest Digest::from_hex(std::string_view text) {
  if (text.size() != 16) throw DomainError("digest must be 16 hex characters");
  std::uint64_t v = 0;
  for (char c : text) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
    else throw DomainError("digest must be lowercase hex");
  }
  return Digest{v};
}

Digest Batch::digest() const {
  Fnv1a h;
  h.update(static_cast<std::uint64_t>(transactions.size()));
  for (const auto& tx : transactions) {
    h.update(static_cast<std::uint64_t>(tx.size()));
    h.update(tx);
  }
  return Digest{h.value()};
}

std::string_view to_string(Behavior behavior) {
  switch (behavior) {
    case Behavior::kHonest: return "honest";
    case Behavior::kSilent: return "silent";
    case Behavior::kEquivocating: return "equivocating";
    case Behavior::kInvalidProposer: return "invalid-proposer";
  }
  return "honest";
}

Behavior behavior_from_string(std::string_view text) {
  if (text == "honest") return Behavior::kHonest;
  if (text == "silent") return Behavior::kSilent;
  if (text == "equivocating") return Behavior::kEquivocating;
  if (text == "invalid-proposer") return Behavior::kInvalidProposer;
  throw DomainError("unknown behavior '" + std::string(text) + "'");
}

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::kProposal: return "proposal";
    case MessageKind::kPrevote: return "prevote";
    case MessageKind::kPrecommit: return "precommit";
  }
  return "proposal";
}

std::string_view to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::kUnknownSender: return "unknown-sender";
    case FaultKind::kEquivocation: return "equivocation";
    case FaultKind::kInvalidProposal: return "invalid-proposal";
    case FaultKind::kNonParticipation: return "non-participation";
  }
  return "equivocation";
}

std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::kNewRound: return "new-round";
    case TraceKind::kProposal: return "proposal";
    case TraceKind::kPrevote: return "prevote";
    case TraceKind::kPrecommit: return "precommit";
    case TraceKind::kTimeoutPropose: return "timeout-propose";
    case TraceKind::kTimeoutPrevote: return "timeout-prevote";
    case TraceKind::kTimeoutPrecommit: return "timeout-precommit";
    case TraceKind::kCommit: return "commit";
    case TraceKind::kFault: return "fault";
  }
  return "fault";
}

bool has_quorum(double signed_stake, double total_stake) {
  return 3.0 * signed_stake > 2.0 * total_stake;
}

SignatureAggregation aggregate_signature(std::span<const ConsensusMessage> precommits,
                                         std::span<const ValidatorDescriptor> validators,
                                         const Digest& digest) {
  SignatureAggregation out;
  out.signature.batch_digest = digest;
  std::map<OperatorId, double> stake_of;
  for (const auto& v : validators) {
    stake_of[v.id] = v.stake;
    out.signature.total_stake += v.stake;
  }
  for (const auto& m : precommits) {
    if (m.kind != MessageKind::kPrecommit) continue;
    auto it = stake_of.find(m.sender);
    if (it == stake_of.end()) {
      out.faults.push_back({FaultKind::kUnknownSender, m.sender, m.height, m.round, m.send_tick});
      continue;
    }
    if (!m.batch_digest || *m.batch_digest != digest) continue;
    if (out.signature.signer_set.insert(m.sender).second) {
      out.signature.signed_stake += it->second;
    }
  }
  return out;
}

void NetworkModel::validate() const {
  if (!(drop_probability >= 0.0 && drop_probability < 1.0)) {
    throw DomainError("drop_probability must lie in [0, 1)");
  }
  for (const auto& p : partition_schedule) {
    if (p.end < p.start) throw DomainError("partition range must have start <= end");
  }
}

GossipNetwork::GossipNetwork(NetworkModel model) : model_(std::move(model)), rng_(model_.rng_seed) {
  model_.validate();
}

void GossipNetwork::set_latency(const OperatorId& sender, Tick latency) {
  for (auto& entry : latency_) {
    if (entry.first == sender) {
      entry.second = latency;
      return;
    }
  }
  latency_.emplace_back(sender, latency);
}

bool GossipNetwork::partitioned(const OperatorId& a, const OperatorId& b, Tick tick) const {
  for (const auto& p : model_.partition_schedule) {
    if (tick < p.start || tick >= p.end) continue;
    if (p.members.contains(a) != p.members.contains(b)) return true;
  }
  return false;
}

void GossipNetwork::send(const ConsensusMessage& message, const OperatorId& from,
                         std::span<const OperatorId> peers, Tick now) {
  Tick base = 1;
  for (const auto& [id, lat] : latency_) {
    if (id == from) base = lat;
  }
  for (const auto& peer : peers) {
    ++sent_;
    // Both draws happen for every copy so the stream layout does not depend
    // on which copies survive.
    const bool drop = rng_.uniform() < model_.drop_probability;
    const Tick jitter = model_.latency_jitter > 0 ? rng_.up_to(model_.latency_jitter) : 0;
    if (drop || partitioned(from, peer, now)) {
      ++dropped_;
      continue;
    }
    queue_.push(Envelope{message, from, peer, now + base + jitter, next_seq_++});
  }
}

std::vector<Envelope> GossipNetwork::gossip_step(Tick tick) {
  if (last_step_ && tick < *last_step_) throw DomainError("gossip_step ticks must be non-decreasing");
  last_step_ = tick;
  std::vector<Envelope> out;
  while (!queue_.empty() && queue_.top().deliver_at <= tick) {
    out.push_back(queue_.top());
    queue_.pop();
  }
  delivered_ += out.size();
  return out;
}

std::optional<Tick> GossipNetwork::next_delivery() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.top().deliver_at;
}

std::string export_trace(std::span<const TraceEvent> trace) {
  std::ostringstream os;
  for (const auto& e : trace) {
    os << e.tick << '\t' << to_string(e.kind) << '\t' << e.height << '\t' << e.round << '\t'
       << e.sender.str() << '\t' << (e.digest ? e.digest->hex() : std::string("nil")) << '\n';
  }
  return os.str();
}

std::vector<ValidatorDescriptor> proposer_order(std::span<const ValidatorDescriptor> validators) {
  std::vector<ValidatorDescriptor> order(validators.begin(), validators.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.stake != b.stake) return a.stake > b.stake;
    return a.id < b.id;
  });
  return order;
}

namespace {

enum class Step { kPropose, kPrevote, kPrecommit };
enum class TimeoutKind { kPropose, kPrevote, kPrecommit };

struct Proposal {
  OperatorId sender;
  Digest digest;
  std::int32_t valid_round = -1;
};

struct RoundBook {
  std::optional<Proposal> proposal;
  std::map<OperatorId, std::optional<Digest>> prevotes;
  std::map<OperatorId, std::optional<Digest>> precommits;
  std::set<OperatorId> senders;
  bool prevote_timer = false;
  bool precommit_timer = false;
  bool locked_on_quorum = false;
};

using SeenKey = std::tuple<int, std::uint32_t, OperatorId, bool, std::uint64_t>;

struct Replica {
  ValidatorDescriptor desc;
  std::uint32_t round = 0;
  Step step = Step::kPropose;
  bool started = false;
  bool exhausted = false;
  std::optional<Digest> locked_value;
  std::int32_t locked_round = -1;
  std::optional<Digest> valid_value;
  std::int32_t valid_round = -1;
  std::optional<Decision> decision;
  std::map<std::uint32_t, RoundBook> rounds;
  std::set<SeenKey> seen;
};

struct Timer {
  Tick tick;
  std::uint64_t seq;
  std::size_t replica;
  TimeoutKind kind;
  std::uint32_t round;
};

struct TimerLater {
  bool operator()(const Timer& a, const Timer& b) const {
    if (a.tick != b.tick) return a.tick > b.tick;
    return a.seq > b.seq;
  }
};

class HeightSimulation {
 public:
  HeightSimulation(std::span<const ValidatorDescriptor> validators, const Batch& batch,
                   const NetworkModel& network, const ConsensusParams& params)
      : params_(params), network_(network), valid_digest_(batch.digest()) {
    if (validators.empty()) throw DomainError("run_height needs at least one validator");
    if (batch.transactions.empty()) throw DomainError("run_height needs a non-empty batch");
    if (params.max_rounds < 1) throw DomainError("max_rounds must be at least 1");
    if (params.max_rounds > 40) throw DomainError("max_rounds must not exceed 40");
    if (params.base_timeout < 1) throw DomainError("base_timeout must be at least 1");

    std::set<OperatorId> ids;
    for (const auto& v : validators) {
      if (!(std::isfinite(v.stake) && v.stake > 0.0)) {
        throw DomainError("validator '" + v.id.str() + "' must have positive stake");
      }
      if (!ids.insert(v.id).second) throw DomainError("duplicate validator '" + v.id.str() + "'");
      total_stake_ += v.stake;
    }
    if (!(total_stake_ > 0.0)) throw DomainError("total stake must be positive");

    order_ = proposer_order(validators);
    for (const auto& v : order_) stake_of_[v.id] = v.stake;
    // Replicas and peer lists in id order.
    std::vector<ValidatorDescriptor> by_id(validators.begin(), validators.end());
    std::sort(by_id.begin(), by_id.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < by_id.size(); ++i) {
      index_of_[by_id[i].id] = i;
      ids_.push_back(by_id[i].id);
      network_.set_latency(by_id[i].id, by_id[i].region_latency);
      Replica r;
      r.desc = by_id[i];
      replicas_.push_back(std::move(r));
    }
    invalid_digest_ = Digest{fnv1a(valid_digest_.hex() + "#invalid")};
  }

  RoundOutcome run() {
    Tick tick = params_.start_tick;
    last_tick_ = tick;
    for (std::size_t i = 0; i < replicas_.size(); ++i) {
      if (replicas_[i].desc.behavior == Behavior::kSilent) continue;
      replicas_[i].started = true;
      start_round(i, 0, tick);
    }
    for (;;) {
      drain(tick);
      if (finished()) break;
      std::optional<Tick> next = network_.next_delivery();
      if (!timers_.empty() && (!next || timers_.top().tick < *next)) next = timers_.top().tick;
      if (!next) break;
      tick = std::max(tick, *next);
    }
    return assemble();
  }

 private:
  Tick timeout(std::uint32_t round) const { return params_.base_timeout << round; }

  const OperatorId& proposer(std::uint32_t round) const {
    return order_[(params_.height + round) % order_.size()].id;
  }

  bool valid(const Digest& d) const { return d == valid_digest_; }

  double stake_of(const std::map<OperatorId, std::optional<Digest>>& votes,
                  const std::optional<Digest>& value, bool any) const {
    double s = 0.0;
    for (const auto& [sender, v] : votes) {
      if (any || v == value) s += stake_of_.at(sender);
    }
    return s;
  }

  bool quorum(double s) const { return has_quorum(s, total_stake_); }
  bool one_third(double s) const { return 3.0 * s > total_stake_; }

  void trace(Tick tick, TraceKind kind, std::uint32_t round, const OperatorId& who,
             std::optional<Digest> digest) {
    trace_.push_back({tick, kind, params_.height, round, who, digest});
  }

  void fault(FaultKind kind, const OperatorId& offender, std::uint32_t round, Tick tick) {
    if (!fault_keys_.insert({static_cast<int>(kind), offender, round}).second) return;
    faults_.push_back({kind, offender, params_.height, round, tick});
    trace(tick, TraceKind::kFault, round, offender, std::nullopt);
  }

  Digest forged(const OperatorId& sender) const {
    return Digest{fnv1a(valid_digest_.hex() + "#forged:" + sender.str())};
  }

  void broadcast(std::size_t p, ConsensusMessage msg, Tick now) {
    Replica& r = replicas_[p];
    msg.height = params_.height;
    msg.sender = r.desc.id;
    msg.send_tick = now;
    const TraceKind kind = msg.kind == MessageKind::kProposal   ? TraceKind::kProposal
                           : msg.kind == MessageKind::kPrevote ? TraceKind::kPrevote
                                                               : TraceKind::kPrecommit;
    trace(now, kind, msg.round, r.desc.id, msg.batch_digest);
    if (msg.kind != MessageKind::kProposal) participants_.insert(r.desc.id);

    std::vector<OperatorId> peers;
    for (const auto& id : ids_) {
      if (id != r.desc.id) peers.push_back(id);
    }
    if (r.desc.behavior == Behavior::kEquivocating && !peers.empty()) {
      // Conflicting versions to disjoint halves of the peer set.
      const std::size_t half = (peers.size() + 1) / 2;
      ConsensusMessage other = msg;
      other.batch_digest = forged(r.desc.id);
      other.valid_round = -1;
      trace(now, kind, msg.round, r.desc.id, other.batch_digest);
      network_.send(msg, r.desc.id, std::span(peers).first(half), now);
      network_.send(other, r.desc.id, std::span(peers).subspan(half), now);
    } else {
      network_.send(msg, r.desc.id, peers, now);
    }
    self_queue_.emplace_back(p, std::move(msg));
  }

  void schedule(std::size_t p, TimeoutKind kind, std::uint32_t round, Tick now) {
    timers_.push(Timer{now + timeout(round), timer_seq_++, p, kind, round});
  }

  void start_round(std::size_t p, std::uint32_t round, Tick now) {
    Replica& r = replicas_[p];
    if (round >= params_.max_rounds) {
      r.exhausted = true;
      return;
    }
    r.round = round;
    r.step = Step::kPropose;
    max_round_started_ = std::max(max_round_started_, round);
    trace(now, TraceKind::kNewRound, round, r.desc.id, std::nullopt);
    if (proposer(round) == r.desc.id) {
      ConsensusMessage msg;
      msg.kind = MessageKind::kProposal;
      msg.round = round;
      if (r.desc.behavior == Behavior::kInvalidProposer) {
        msg.batch_digest = invalid_digest_;
      } else {
        msg.batch_digest = r.valid_value ? *r.valid_value : valid_digest_;
        msg.valid_round = r.valid_value ? r.valid_round : -1;
      }
      broadcast(p, std::move(msg), now);
    }
    schedule(p, TimeoutKind::kPropose, round, now);
  }

  void vote(std::size_t p, MessageKind kind, std::optional<Digest> value, Tick now) {
    ConsensusMessage msg;
    msg.kind = kind;
    msg.round = replicas_[p].round;
    msg.batch_digest = value;
    broadcast(p, std::move(msg), now);
  }

  void receive(std::size_t p, const ConsensusMessage& msg, const OperatorId& from, Tick now) {
    Replica& r = replicas_[p];
    if (r.desc.behavior == Behavior::kSilent) return;
    const SeenKey key{static_cast<int>(msg.kind), msg.round, msg.sender,
                      msg.batch_digest.has_value(),
                      msg.batch_digest ? msg.batch_digest->value : 0};
    if (!r.seen.insert(key).second) return;

    // Gossip relay by well-behaved replicas.
    const bool relays = r.desc.behavior == Behavior::kHonest ||
                        r.desc.behavior == Behavior::kInvalidProposer;
    if (relays && msg.sender != r.desc.id) {
      std::vector<OperatorId> peers;
      for (const auto& id : ids_) {
        if (id != r.desc.id && id != msg.sender && id != from) peers.push_back(id);
      }
      network_.send(msg, r.desc.id, peers, now);
    }

    if (msg.height != params_.height) return;
    if (!stake_of_.contains(msg.sender)) {
      fault(FaultKind::kUnknownSender, msg.sender, msg.round, now);
      return;
    }

    RoundBook& book = r.rounds[msg.round];
    book.senders.insert(msg.sender);
    switch (msg.kind) {
      case MessageKind::kProposal: {
        if (msg.sender != proposer(msg.round) || !msg.batch_digest) break;
        if (!valid(*msg.batch_digest)) fault(FaultKind::kInvalidProposal, msg.sender, msg.round, now);
        if (!book.proposal) {
          book.proposal = Proposal{msg.sender, *msg.batch_digest, msg.valid_round};
        } else if (book.proposal->digest != *msg.batch_digest) {
          fault(FaultKind::kEquivocation, msg.sender, msg.round, now);
        }
        break;
      }
      case MessageKind::kPrevote:
      case MessageKind::kPrecommit: {
        auto& votes = msg.kind == MessageKind::kPrevote ? book.prevotes : book.precommits;
        auto [it, inserted] = votes.emplace(msg.sender, msg.batch_digest);
        if (!inserted && it->second != msg.batch_digest) {
          fault(FaultKind::kEquivocation, msg.sender, msg.round, now);
        }
        if (msg.kind == MessageKind::kPrecommit) precommit_log_[p].push_back(msg);
        break;
      }
    }
    evaluate(p, now);
  }

  void decide(std::size_t p, const Digest& v, std::uint32_t round, Tick now) {
    Replica& r = replicas_[p];
    r.decision = Decision{r.desc.id, v, round, now};
    trace(now, TraceKind::kCommit, round, r.desc.id, v);
    if (r.desc.behavior == Behavior::kHonest) {
      decisions_.push_back(*r.decision);
      decider_of_.push_back(p);
    }
  }

  // Applies every enabled transition for replica p until none fires.
  void evaluate(std::size_t p, Tick now) {
    Replica& r = replicas_[p];
    bool fired = true;
    while (fired && !r.decision) {
      fired = false;

      for (auto& [round, book] : r.rounds) {
        if (!book.proposal || !valid(book.proposal->digest)) continue;
        if (quorum(stake_of(book.precommits, book.proposal->digest, false))) {
          decide(p, book.proposal->digest, round, now);
          return;
        }
      }
      if (r.exhausted || !r.started) return;

      std::optional<std::uint32_t> skip_to;
      for (const auto& [round, book] : r.rounds) {
        if (round <= r.round) continue;
        double s = 0.0;
        for (const auto& sender : book.senders) s += stake_of_.at(sender);
        if (one_third(s)) skip_to = round;
      }
      if (skip_to) {
        start_round(p, *skip_to, now);
        fired = true;
        continue;
      }

      RoundBook& cur = r.rounds[r.round];
      const auto& prop = cur.proposal;

      if (r.step == Step::kPropose && prop) {
        const Digest v = prop->digest;
        if (prop->valid_round < 0) {
          const bool ok = valid(v) && (r.locked_round < 0 || r.locked_value == v);
          vote(p, MessageKind::kPrevote, ok ? std::optional<Digest>(v) : std::nullopt, now);
          r.step = Step::kPrevote;
          fired = true;
          continue;
        }
        const auto vr = static_cast<std::uint32_t>(prop->valid_round);
        if (vr < r.round) {
          auto it = r.rounds.find(vr);
          if (it != r.rounds.end() && quorum(stake_of(it->second.prevotes, v, false))) {
            const bool ok = valid(v) && (r.locked_round <= prop->valid_round || r.locked_value == v);
            vote(p, MessageKind::kPrevote, ok ? std::optional<Digest>(v) : std::nullopt, now);
            r.step = Step::kPrevote;
            fired = true;
            continue;
          }
        }
      }

      if (r.step == Step::kPrevote && !cur.prevote_timer) {
        cur.prevote_timer = true;
        schedule(p, TimeoutKind::kPrevote, r.round, now);
      }

      if (r.step != Step::kPropose && prop && valid(prop->digest) && !cur.locked_on_quorum &&
          quorum(stake_of(cur.prevotes, prop->digest, false))) {
        cur.locked_on_quorum = true;
        if (r.step == Step::kPrevote) {
          r.locked_value = prop->digest;
          r.locked_round = static_cast<std::int32_t>(r.round);
          vote(p, MessageKind::kPrecommit, prop->digest, now);
          r.step = Step::kPrecommit;
        }
        r.valid_value = prop->digest;
        r.valid_round = static_cast<std::int32_t>(r.round);
        fired = true;
        continue;
      }

      if (r.step == Step::kPrevote && quorum(stake_of(cur.prevotes, std::nullopt, false))) {
        vote(p, MessageKind::kPrecommit, std::nullopt, now);
        r.step = Step::kPrecommit;
        fired = true;
        continue;
      }

      if (!cur.precommit_timer &&
          (r.step == Step::kPrecommit || quorum(stake_of(cur.precommits, std::nullopt, true)))) {
        cur.precommit_timer = true;
        schedule(p, TimeoutKind::kPrecommit, r.round, now);
      }
    }
  }

  void on_timer(const Timer& t) {
    Replica& r = replicas_[t.replica];
    if (r.decision || r.exhausted || t.round != r.round) return;
    switch (t.kind) {
      case TimeoutKind::kPropose:
        if (r.step != Step::kPropose) return;
        trace(t.tick, TraceKind::kTimeoutPropose, t.round, r.desc.id, std::nullopt);
        vote(t.replica, MessageKind::kPrevote, std::nullopt, t.tick);
        r.step = Step::kPrevote;
        break;
      case TimeoutKind::kPrevote:
        if (r.step != Step::kPrevote) return;
        trace(t.tick, TraceKind::kTimeoutPrevote, t.round, r.desc.id, std::nullopt);
        vote(t.replica, MessageKind::kPrecommit, std::nullopt, t.tick);
        r.step = Step::kPrecommit;
        break;
      case TimeoutKind::kPrecommit:
        trace(t.tick, TraceKind::kTimeoutPrecommit, t.round, r.desc.id, std::nullopt);
        start_round(t.replica, t.round + 1, t.tick);
        break;
    }
    evaluate(t.replica, t.tick);
  }

  void drain(Tick tick) {
    for (;;) {
      bool any = false;
      while (!self_queue_.empty()) {
        auto [p, msg] = std::move(self_queue_.front());
        self_queue_.pop_front();
        receive(p, msg, replicas_[p].desc.id, tick);
        any = true;
      }
      for (const auto& env : network_.gossip_step(tick)) {
        receive(index_of_.at(env.to), env.message, env.from, tick);
        any = true;
      }
      while (!timers_.empty() && timers_.top().tick <= tick) {
        const Timer t = timers_.top();
        timers_.pop();
        on_timer(t);
        any = true;
      }
      if (!any) break;
      last_tick_ = tick;
    }
  }

  bool finished() const {
    for (const auto& r : replicas_) {
      if (r.desc.behavior == Behavior::kSilent) continue;
      if (!r.decision && !r.exhausted) return false;
    }
    return network_.idle() && self_queue_.empty();
  }

  RoundOutcome assemble() {
    RoundOutcome out;
    out.decisions = decisions_;
    out.participants = participants_;
    for (const auto& r : replicas_) {
      if (!participants_.contains(r.desc.id)) {
        fault(FaultKind::kNonParticipation, r.desc.id, 0, last_tick_);
      }
    }
    out.faults = faults_;
    if (!decisions_.empty()) {
      const Decision& first = decisions_.front();
      std::vector<ConsensusMessage> precommits;
      for (const auto& m : precommit_log_[decider_of_.front()]) {
        if (m.round == first.round) precommits.push_back(m);
      }
      SignatureAggregation agg = aggregate_signature(precommits, order_, first.digest);
      out.committed = agg.signature.valid();
      out.batch_digest = first.digest;
      out.signature = std::move(agg.signature);
      out.rounds_used = first.round + 1;
      out.ticks_elapsed = first.tick - params_.start_tick;
    } else {
      out.rounds_used = std::min(params_.max_rounds, max_round_started_ + 1);
      out.ticks_elapsed = last_tick_ - params_.start_tick;
    }
    out.trace = std::move(trace_);
    return out;
  }

  ConsensusParams params_;
  GossipNetwork network_;
  Digest valid_digest_;
  Digest invalid_digest_;
  double total_stake_ = 0.0;
  std::vector<ValidatorDescriptor> order_;
  std::map<OperatorId, double> stake_of_;
  std::map<OperatorId, std::size_t> index_of_;
  std::vector<OperatorId> ids_;
  std::vector<Replica> replicas_;
  std::deque<std::pair<std::size_t, ConsensusMessage>> self_queue_;
  std::priority_queue<Timer, std::vector<Timer>, TimerLater> timers_;
  std::uint64_t timer_seq_ = 0;
  std::map<std::size_t, std::vector<ConsensusMessage>> precommit_log_;
  std::vector<Decision> decisions_;
  std::vector<std::size_t> decider_of_;
  std::set<OperatorId> participants_;
  std::set<std::tuple<int, OperatorId, std::uint32_t>> fault_keys_;
  std::vector<ProtocolFault> faults_;
  std::vector<TraceEvent> trace_;
  std::uint32_t max_round_started_ = 0;
  Tick last_tick_ = 0;
};

}  // namespace

RoundOutcome run_height(std::span<const ValidatorDescriptor> validators, const Batch& batch,
                        const NetworkModel& network, const ConsensusParams& params) {
  return HeightSimulation(validators, batch, network, params).run();
}

}  // namespace nodeop
