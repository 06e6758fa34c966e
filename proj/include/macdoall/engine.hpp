#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "macdoall/adversary.hpp"
#include "macdoall/channel.hpp"
#include "macdoall/protocols.hpp"
#include "macdoall/round.hpp"
#include "macdoall/trace.hpp"

namespace macdoall {

/// 50 * (t + p * ceil(sqrt t) * ceil(log2 p)^2).
inline Round default_round_cap(std::uint32_t p, std::uint32_t t) {
  const std::uint64_t l = ceil_log2(p);
  return static_cast<Round>(50 * (t + static_cast<std::uint64_t>(p) * ceil_sqrt(t) * l * l));
}

/// Re-randomizes every station coin from round `from` on. Used to show that
/// a delayed adversary's choices do not depend on coins it may not see.
struct CoinPerturbation {
  Round from = 1;
  std::uint64_t salt = 1;
};

struct RunSetup {
  ProtocolKind protocol = ProtocolKind::TwoLists;
  ChannelKind channel = ChannelKind::NoCD;
  std::uint32_t p = 1;
  std::uint32_t t = 1;
  std::uint64_t seed = 0;
  Round round_cap = 0;  // 0 = default_round_cap(p, t)
  ProtocolOptions protocol_options;
  bool keep_rounds = true;
  bool record_digests = true;
  std::optional<CoinPerturbation> perturb;
};

struct RunResult {
  ExecutionTrace trace;
  Metrics metrics;
};

namespace detail {

class Simulation final : public RoundContext {
 public:
  Simulation(const RunSetup& setup, const AdversarySpec& spec, Strategy& strategy)
      : setup_(setup),
        spec_(spec),
        strategy_(strategy),
        legality_(spec, setup.p),
        alive_(setup.p + 1, 1),
        pending_by_round_() {
    alive_[0] = 0;
    cap_ = setup.round_cap > 0 ? setup.round_cap : default_round_cap(setup.p, setup.t);
    auto& tr = trace_;
    tr.p = setup.p;
    tr.t = setup.t;
    tr.f = spec.f;
    tr.delay = spec.delay;
    tr.seed = setup.seed;
    tr.round_cap = cap_;
    tr.channel = std::string(to_string(setup.channel));
    tr.adversary = spec.describe();
    tr.strategy = std::string(strategy.name());
    tr.rounds_kept = setup.keep_rounds;
    tr.task_performed.assign(setup.t + 1, 0);
    tr.crash_round.assign(setup.p + 1, 0);
    tr.halt_round.assign(setup.p + 1, 0);
    operational_ = setup.p;
  }

  // RoundContext -----------------------------------------------------------

  Feedback step(std::span<const Action> actions, RoundTag tag) override {
    if (round_ >= cap_) throw RoundCapExceeded(cap_);
    const Round r = ++round_;

    RoundRecord& rec = scratch_;
    rec.intents.clear();
    rec.crashes.clear();
    rec.performed.clear();
    rec.halts.clear();
    rec.operational_after.clear();
    rec.echo_pair.reset();
    rec.round = r;
    rec.tag = tag;
    rec.digest = digest_;
    rec.leader = leader_;
    rec.note = std::move(note_);
    note_.clear();
    rec.operational_before = operational_;

    // Delayed adversary: decides from history through r-1, effective at r+c.
    if (spec_.delay > 0) {
      const auto targets = strategy_.decide(view(r, r + spec_.delay, {}));
      if (!targets.empty()) submit(targets, r + spec_.delay);
    }

    for (const auto& a : actions) {
      if (a.station >= 1 && a.station <= setup_.p && alive_[a.station]) rec.intents.push_back(a);
    }

    if (const auto it = pending_by_round_.find(r); it != pending_by_round_.end()) {
      for (auto s : it->second) apply_crash(s, rec);
      pending_by_round_.erase(it);
    }
    if (spec_.delay == 0) {
      const auto targets = strategy_.decide(view(r, r, rec.intents));
      if (!targets.empty()) {
        submit(targets, r);
        for (auto s : targets) apply_crash(s, rec);
      }
    }

    totals_.work += rec.operational_before;

    transmissions_.clear();
    for (const auto& a : rec.intents) {
      if (!alive_[a.station]) continue;
      if (a.kind == Action::Kind::Transmit) {
        transmissions_.push_back({a.station, a.value});
      } else if (a.value >= 1 && a.value <= setup_.t) {
        trace_.task_performed[a.value] = 1;
        rec.performed.emplace_back(a.station, static_cast<TaskId>(a.value));
      }
    }
    totals_.energy += transmissions_.size();
    rec.feedback = resolve(setup_.channel, transmissions_);
    if (tag == RoundTag::EchoSecond && have_last_ && last_.tag == RoundTag::EchoFirst) {
      rec.echo_pair = std::make_pair(last_.feedback, rec.feedback);
    }

    if (setup_.keep_rounds) {
      for (StationId s = 1; s <= setup_.p; ++s) {
        if (alive_[s]) rec.operational_after.push_back(s);
      }
      trace_.rounds.push_back(rec);
    }
    std::swap(last_, rec);
    have_last_ = true;
    return last_.feedback;
  }

  bool toss(StationId v, Probability heads) override {
    const Round r = round_ + 1;
    std::uint64_t salt = 0;
    if (setup_.perturb && r >= setup_.perturb->from) salt = setup_.perturb->salt;
    return heads.heads(station_word(setup_.seed, v, r, salt));
  }

  std::uint32_t p() const override { return setup_.p; }
  std::uint32_t t() const override { return setup_.t; }
  ChannelKind channel() const override { return setup_.channel; }
  Round round() const override { return round_; }
  void publish_digest(std::uint64_t d) override { digest_ = d; }
  bool wants_digest() const override { return setup_.record_digests; }
  void set_leader(StationId leader) override { leader_ = leader; }
  void note(std::string_view text) override {
    if (!note_.empty()) note_ += ';';
    note_ += text;
  }

  // Driver -----------------------------------------------------------------

  RunResult run(Protocol& protocol) {
    trace_.protocol = std::string(protocol.name());
    try {
      protocol.execute(*this);
      halt_survivors();
    } catch (const RoundCapExceeded& e) {
      violate("Timeout", e.what());
    } catch (const IllegalCrash& e) {
      violate("IllegalCrash", e.what());
    }
    trace_.totals = totals_;
    trace_.totals.time = round_;
    if (trace_.outcome.kind == Outcome::Kind::Solved) {
      for (TaskId x = 1; x <= setup_.t; ++x) {
        if (!trace_.task_performed[x]) {
          violate("TaskUnperformed", "task " + std::to_string(x));
          break;
        }
      }
    }
    const Metrics metrics = trace_.totals;
    return {std::move(trace_), metrics};
  }

 private:
  DecisionView view(Round r, Round effective, std::span<const Action> intents) const {
    DecisionView v;
    v.round = r;
    v.effective_round = effective;
    v.delay = spec_.delay;
    v.last = have_last_ ? &last_ : nullptr;
    v.history = trace_.rounds;
    v.intents = intents;
    v.leader = leader_;
    v.legality = &legality_;
    return v;
  }

  void submit(std::vector<StationId> targets, Round effective) {
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    legality_.check_batch(targets);
    for (auto s : targets) legality_.mark_pending(s);
    if (effective > round_) {
      auto& q = pending_by_round_[effective];
      q.insert(q.end(), targets.begin(), targets.end());
    }
  }

  void apply_crash(StationId s, RoundRecord& rec) {
    if (!alive_[s]) return;
    legality_.mark_crashed(s);
    alive_[s] = 0;
    --operational_;
    trace_.crash_round[s] = rec.round;
    rec.crashes.push_back(s);
  }

  void halt_survivors() {
    std::vector<StationId> halts;
    for (StationId s = 1; s <= setup_.p; ++s) {
      if (!alive_[s]) continue;
      halts.push_back(s);
      trace_.halt_round[s] = round_;
      legality_.mark_halted(s);
    }
    if (setup_.keep_rounds && !trace_.rounds.empty()) {
      trace_.rounds.back().halts = halts;
      trace_.rounds.back().operational_after.clear();
    }
    if (have_last_) last_.halts = halts;
  }

  void violate(const std::string& kind, const std::string& detail) {
    trace_.outcome = {Outcome::Kind::Violation, kind};
    trace_.violations.push_back(kind + ": " + detail);
  }

  const RunSetup& setup_;
  const AdversarySpec& spec_;
  Strategy& strategy_;
  Legality legality_;
  std::vector<std::uint8_t> alive_;
  std::map<Round, std::vector<StationId>> pending_by_round_;
  Round cap_ = 0;
  Round round_ = 0;
  std::size_t operational_ = 0;
  std::uint64_t digest_ = 0;
  StationId leader_ = 0;
  std::string note_;
  Metrics totals_;
  ExecutionTrace trace_;
  RoundRecord scratch_;
  RoundRecord last_;
  bool have_last_ = false;
  std::vector<Transmission> transmissions_;
};

}  // namespace detail

/// Runs `protocol` against the adversary until every survivor halts or the
/// round cap is hit.
inline RunResult run(const RunSetup& setup, Protocol& protocol, const AdversarySpec& spec,
                     Strategy& strategy) {
  if (setup.p < 1 || setup.t < 1) throw ConfigInvalid("p and t must be at least 1");
  spec.validate(setup.p);
  detail::Simulation sim(setup, spec, strategy);
  return sim.run(protocol);
}

inline RunResult run(const RunSetup& setup, const AdversarySpec& spec, Strategy& strategy) {
  auto protocol = make_protocol(setup.protocol, setup.protocol_options);
  return run(setup, *protocol, spec, strategy);
}

inline RunResult run(const RunSetup& setup) {
  NoOp noop;
  return run(setup, AdversarySpec::none(), noop);
}

/// Work, time and energy recomputed from the round records.
inline Metrics compute_metrics(const ExecutionTrace& trace) {
  if (!trace.rounds_kept) return trace.totals;
  if (trace.rounds.empty()) throw Error("compute_metrics: empty trace");
  Metrics m;
  std::size_t operational = trace.p;
  for (const auto& r : trace.rounds) {
    m.work += operational;
    m.energy += r.transmitters().size();
    operational = operational - r.crashes.size() - r.halts.size();
    m.time = r.round;
  }
  return m;
}

struct ReliabilityReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Every task performed by some station, every never-crashed station halted,
/// no crash outside the adversary's envelope.
inline ReliabilityReport verify_reliability(const ExecutionTrace& trace, std::uint32_t t) {
  ReliabilityReport rep;
  auto fail = [&](std::string v) {
    rep.ok = false;
    rep.violations.push_back(std::move(v));
  };
  std::vector<std::uint8_t> performed(t + 1, 0);
  std::vector<std::uint8_t> crashed(trace.p + 1, 0), halted(trace.p + 1, 0);
  std::size_t crashes = 0;
  if (trace.rounds_kept) {
    std::size_t operational = trace.p;
    for (const auto& r : trace.rounds) {
      for (const auto& [s, x] : r.performed) {
        if (x >= 1 && x <= t) performed[x] = 1;
      }
      for (auto s : r.crashes) crashed[s] = 1;
      for (auto s : r.halts) halted[s] = 1;
      crashes += r.crashes.size();
      operational -= r.crashes.size();
      if (operational == 0) fail("NoSurvivor(" + std::to_string(r.round) + ")");
    }
  } else {
    for (TaskId x = 1; x <= t && x < trace.task_performed.size(); ++x) performed[x] = trace.task_performed[x];
    for (StationId s = 1; s <= trace.p; ++s) {
      crashed[s] = trace.crash_round[s] != 0;
      halted[s] = trace.halt_round[s] != 0;
      crashes += crashed[s];
    }
  }
  for (TaskId x = 1; x <= t; ++x) {
    if (!performed[x]) fail("TaskUnperformed(" + std::to_string(x) + ")");
  }
  for (StationId s = 1; s <= trace.p; ++s) {
    if (!crashed[s] && !halted[s]) fail("StationNotHalted(" + std::to_string(s) + ")");
    if (crashed[s] && halted[s]) fail("CrashedAndHalted(" + std::to_string(s) + ")");
  }
  if (crashes > trace.f) fail("BudgetExceeded(" + std::to_string(crashes) + ")");
  for (const auto& v : trace.violations) fail(v);
  return rep;
}

// ---------------------------------------------------------------------------
// Replay: drive a protocol from a recorded feedback sequence
// ---------------------------------------------------------------------------

/// Feeds a protocol the recorded feedback while drawing its coins from a
/// different seed. Since shared lists may depend on feedback alone, the
/// round tags and published digests must match the recording exactly.
class ReplayContext final : public RoundContext {
 public:
  ReplayContext(const ExecutionTrace& trace, ChannelKind channel, std::uint64_t coin_seed)
      : trace_(trace), channel_(channel), seed_(coin_seed) {}

  Feedback step(std::span<const Action>, RoundTag tag) override {
    if (index_ >= trace_.rounds.size()) throw Error("replay ran past the recording");
    const auto& rec = trace_.rounds[index_++];
    if (rec.tag != tag) {
      mismatch("round " + std::to_string(rec.round) + " tag " + std::string(to_string(tag)) +
               " vs recorded " + std::string(to_string(rec.tag)));
    }
    if (rec.digest != digest_) mismatch("round " + std::to_string(rec.round) + " digest");
    if (rec.leader != leader_) mismatch("round " + std::to_string(rec.round) + " leader");
    return rec.feedback;
  }
  bool toss(StationId v, Probability heads) override {
    return heads.heads(station_word(seed_, v, static_cast<Round>(index_ + 1)));
  }
  std::uint32_t p() const override { return trace_.p; }
  std::uint32_t t() const override { return trace_.t; }
  ChannelKind channel() const override { return channel_; }
  Round round() const override { return static_cast<Round>(index_); }
  void publish_digest(std::uint64_t d) override { digest_ = d; }
  bool wants_digest() const override { return true; }
  void set_leader(StationId leader) override { leader_ = leader; }
  void note(std::string_view) override {}

  std::size_t consumed() const { return index_; }
  const std::vector<std::string>& mismatches() const { return mismatches_; }

 private:
  void mismatch(std::string m) {
    if (mismatches_.size() < 16) mismatches_.push_back(std::move(m));
  }

  const ExecutionTrace& trace_;
  ChannelKind channel_;
  std::uint64_t seed_;
  std::size_t index_ = 0;
  std::uint64_t digest_ = 0;
  StationId leader_ = 0;
  std::vector<std::string> mismatches_;
};

/// Re-derives the shared lists from the public feedback alone and compares
/// them round by round with what the run published. Empty result = consistent.
inline std::vector<std::string> check_common_knowledge(const ExecutionTrace& trace,
                                                       const RunSetup& setup,
                                                       std::uint64_t coin_seed) {
  if (!trace.rounds_kept || trace.rounds.empty()) return {"trace has no round records"};
  auto protocol = make_protocol(setup.protocol, setup.protocol_options);
  ReplayContext ctx(trace, setup.channel, coin_seed);
  std::vector<std::string> out;
  try {
    protocol->execute(ctx);
  } catch (const Error& e) {
    out.push_back(e.what());
  }
  out.insert(out.end(), ctx.mismatches().begin(), ctx.mismatches().end());
  if (out.empty() && ctx.consumed() != trace.rounds.size()) {
    out.push_back("replay stopped after " + std::to_string(ctx.consumed()) + " of " +
                  std::to_string(trace.rounds.size()) + " rounds");
  }
  return out;
}

}  // namespace macdoall
