#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "macdoall/poset.hpp"
#include "macdoall/rng.hpp"
#include "macdoall/trace.hpp"

namespace macdoall {

enum class AdversaryLabel : std::uint8_t {
  StronglyAdaptive,
  WeaklyAdaptive,
  LinearlyOrdered,
  KChainOrdered,
  KThickOrdered,
  Oblivious,
  Delayed,  // c-RD
};

inline std::string_view to_string(AdversaryLabel l) {
  switch (l) {
    case AdversaryLabel::StronglyAdaptive: return "strongly_adaptive";
    case AdversaryLabel::WeaklyAdaptive: return "weakly_adaptive";
    case AdversaryLabel::LinearlyOrdered: return "linearly_ordered";
    case AdversaryLabel::KChainOrdered: return "k_chain_ordered";
    case AdversaryLabel::KThickOrdered: return "k_thick_ordered";
    case AdversaryLabel::Oblivious: return "oblivious";
    case AdversaryLabel::Delayed: return "delayed";
  }
  return "?";
}

inline AdversaryLabel parse_label(std::string_view s) {
  for (auto l : {AdversaryLabel::StronglyAdaptive, AdversaryLabel::WeaklyAdaptive,
                 AdversaryLabel::LinearlyOrdered, AdversaryLabel::KChainOrdered,
                 AdversaryLabel::KThickOrdered, AdversaryLabel::Oblivious,
                 AdversaryLabel::Delayed}) {
    if (to_string(l) == s) return l;
  }
  throw ConfigInvalid("unknown adversary label '" + std::string(s) + "'");
}

/// The adversary's legality envelope: budget, decision delay and the order
/// its crashes must respect. Adaptive labels that pick their victims online
/// use an antichain over all p stations; the budget still caps them at f.
struct AdversarySpec {
  std::uint32_t f = 0;
  std::uint32_t delay = 0;
  std::shared_ptr<const Poset> order = std::make_shared<const Poset>();
  AdversaryLabel label = AdversaryLabel::WeaklyAdaptive;
  std::uint32_t k = 0;  // for the k-chain and k-thick labels

  static AdversarySpec none() { return {}; }

  static AdversarySpec strongly_adaptive(std::uint32_t p, std::uint32_t f) {
    return {f, 0, share(generate::antichain(p)), AdversaryLabel::StronglyAdaptive, 0};
  }
  /// Fault-prone set defaults to the lowest ids.
  static AdversarySpec weakly_adaptive(std::uint32_t f) {
    return {f, 0, share(generate::antichain(f)), AdversaryLabel::WeaklyAdaptive, 0};
  }
  static AdversarySpec linearly_ordered(std::uint32_t f) {
    return {f, 0, share(generate::chain(f)), AdversaryLabel::LinearlyOrdered, 0};
  }
  static AdversarySpec k_chain_ordered(std::uint32_t f, std::uint32_t k) {
    return {f, 0, share(generate::k_chains(generate::balanced_lengths(f, k), f)),
            AdversaryLabel::KChainOrdered, k};
  }
  static AdversarySpec delayed(std::uint32_t p, std::uint32_t f, std::uint32_t c) {
    return {f, c, share(generate::antichain(p)), AdversaryLabel::Delayed, 0};
  }
  static AdversarySpec oblivious(std::uint32_t p, std::uint32_t f) {
    return {f, 0, share(generate::antichain(p)), AdversaryLabel::Oblivious, 0};
  }

  static std::shared_ptr<const Poset> share(Poset p) {
    return std::make_shared<const Poset>(std::move(p));
  }

  std::string describe() const {
    std::string s(to_string(label));
    if (label == AdversaryLabel::KChainOrdered || label == AdversaryLabel::KThickOrdered) {
      s += "(" + std::to_string(k) + ")";
    }
    if (delay > 0) s += "[c=" + std::to_string(delay) + "]";
    return s;
  }

  /// Throws ConfigInvalid when the spec is inconsistent for p stations.
  void validate(std::uint32_t p) const {
    if (p == 0) throw ConfigInvalid("p must be at least 1");
    if (f > p - 1) throw ConfigInvalid("f=" + std::to_string(f) + " exceeds p-1");
    for (auto s : order->elements()) {
      if (s < 1 || s > p) throw ConfigInvalid("fault-prone id " + std::to_string(s) + " outside 1..p");
    }
    const bool online = label == AdversaryLabel::StronglyAdaptive ||
                        label == AdversaryLabel::Delayed || label == AdversaryLabel::Oblivious;
    if (!online && order->size() > f) {
      throw ConfigInvalid("order has " + std::to_string(order->size()) + " elements but f=" +
                          std::to_string(f));
    }
    if (label == AdversaryLabel::StronglyAdaptive && delay != 0) {
      throw ConfigInvalid("strongly adaptive adversary must have delay 0");
    }
    if ((label == AdversaryLabel::StronglyAdaptive || label == AdversaryLabel::WeaklyAdaptive) &&
        !order->is_antichain()) {
      throw ConfigInvalid("adaptive adversaries use an antichain order");
    }
    if (label == AdversaryLabel::LinearlyOrdered && !order->is_chain()) {
      throw ConfigInvalid("linearly ordered adversary needs a chain");
    }
    if (label == AdversaryLabel::KChainOrdered) {
      const auto chains = disjoint_chain_count(*order);
      if (chains < 0 || static_cast<std::uint32_t>(chains) > k) {
        throw ConfigInvalid("order is not a union of at most k disjoint chains");
      }
    }
    if (label == AdversaryLabel::KThickOrdered &&
        thickness(*order, std::max<std::size_t>(kExactSolveCap, 256)) > k) {
      throw ConfigInvalid("order is thicker than k");
    }
  }

  /// Number of chains if the order is a disjoint union of chains, else -1.
  static long disjoint_chain_count(const Poset& order) {
    std::vector<int> up(order.size(), 0);
    long heads = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto& low = order.lower_covers(i);
      if (low.size() > 1) return -1;
      if (low.empty()) ++heads;
      for (auto j : low) {
        if (++up[j] > 1) return -1;
      }
    }
    return heads;
  }
};

/// Live legality bookkeeping for one run. Pending crashes (submitted but not
/// yet effective) count against the budget and satisfy precedence.
class Legality {
 public:
  Legality(const AdversarySpec& spec, std::uint32_t p)
      : spec_(&spec),
        crashed_(p + 1, 0),
        pending_(p + 1, 0),
        halted_(p + 1, 0),
        mask_(spec.order->empty_mask()) {}

  const Poset& order() const { return *spec_->order; }
  const AdversarySpec& spec() const { return *spec_; }

  bool crashed(StationId s) const { return s < crashed_.size() && crashed_[s]; }
  bool pending(StationId s) const { return s < pending_.size() && pending_[s]; }
  bool halted(StationId s) const { return s < halted_.size() && halted_[s]; }
  std::uint32_t used() const { return used_; }
  std::uint32_t budget_left() const { return spec_->f > used_ ? spec_->f - used_ : 0; }

  bool is_candidate(StationId s) const {
    if (budget_left() == 0 || crashed(s) || pending(s) || halted(s)) return false;
    const auto i = order().find(s);
    if (i == Poset::npos) return false;
    return order().predecessor_row(i).subset_of(mask_);
  }

  std::vector<StationId> candidates() const {
    std::vector<StationId> out;
    if (budget_left() == 0) return out;
    for (auto s : order().elements()) {
      if (is_candidate(s)) out.push_back(s);
    }
    return out;
  }

  /// Fault-prone predecessors of `s` that are neither crashed nor pending.
  std::vector<StationId> open_predecessors(StationId s) const {
    std::vector<StationId> out;
    for (auto q : order().predecessors(s)) {
      if (!crashed(q) && !pending(q)) out.push_back(q);
    }
    return out;
  }

  /// Throws IllegalCrash unless the batch may be submitted now.
  void check_batch(const std::vector<StationId>& batch) const {
    for (auto s : batch) {
      if (!order().contains(s)) {
        throw IllegalCrash("station " + std::to_string(s) + " is not fault-prone");
      }
      if (crashed(s) || pending(s) || halted(s)) {
        throw IllegalCrash("station " + std::to_string(s) + " is already crashed, pending or halted");
      }
    }
    if (batch.size() > budget_left()) {
      throw IllegalCrash("batch of " + std::to_string(batch.size()) + " exceeds remaining budget " +
                         std::to_string(budget_left()));
    }
    if (const auto bad = first_illegal_in_batch(order(), mask_, batch); bad != 0) {
      throw IllegalCrash("station " + std::to_string(bad) + " has a live predecessor");
    }
  }

  void mark_pending(StationId s) {
    pending_[s] = 1;
    ++used_;
    mask_.set(order().require(s));
  }

  void mark_crashed(StationId s) {
    if (!pending_[s]) {
      ++used_;
      mask_.set(order().require(s));
    }
    pending_[s] = 0;
    crashed_[s] = 1;
  }

  void mark_halted(StationId s) { halted_[s] = 1; }

 private:
  const AdversarySpec* spec_;
  std::vector<std::uint8_t> crashed_, pending_, halted_;
  BitRow mask_;  // crashed or pending, over order indices
  std::uint32_t used_ = 0;
};

/// What a strategy may look at when it decides.
struct DecisionView {
  Round round = 0;            // round in which the decision is made
  Round effective_round = 0;  // round in which requested crashes happen
  std::uint32_t delay = 0;
  const RoundRecord* last = nullptr;      // latest completed round, if any
  std::span<const RoundRecord> history;   // all completed rounds, when kept
  std::span<const Action> intents;        // current intents; delay 0 only
  StationId leader = 0;                   // as of the latest completed round
  const Legality* legality = nullptr;
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string_view name() const = 0;
  /// Targets to crash at view.effective_round. Must be legal as a batch.
  virtual std::vector<StationId> decide(const DecisionView& view) = 0;
};

/// Stateless form of Legality::candidates for a given crash history.
inline std::vector<StationId> legal_candidates(const AdversarySpec& spec,
                                               const std::set<StationId>& crashed,
                                               std::uint32_t budget_used) {
  std::vector<StationId> out;
  if (budget_used >= spec.f) return out;
  for (auto s : spec.order->elements()) {
    if (crashed.count(s) == 0 && crash_is_legal(*spec.order, crashed, s)) out.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in strategies
// ---------------------------------------------------------------------------

class NoOp final : public Strategy {
 public:
  std::string_view name() const override { return "noop"; }
  std::vector<StationId> decide(const DecisionView&) override { return {}; }
};

/// Fixed targets keyed by effective round. Targets are passed through as
/// given, so an illegal schedule surfaces as IllegalCrash.
class ObliviousSchedule final : public Strategy {
 public:
  explicit ObliviousSchedule(std::map<Round, std::vector<StationId>> schedule)
      : schedule_(std::move(schedule)) {}
  std::string_view name() const override { return "oblivious_schedule"; }
  std::vector<StationId> decide(const DecisionView& view) override {
    const auto it = schedule_.find(view.effective_round);
    return it == schedule_.end() ? std::vector<StationId>{} : it->second;
  }

 private:
  std::map<Round, std::vector<StationId>> schedule_;
};

/// Kills whoever is about to be heard alone. With a delay it can only go
/// after the most recent lone speaker.
class LoneTransmitterKiller final : public Strategy {
 public:
  std::string_view name() const override { return "lone_transmitter_killer"; }
  std::vector<StationId> decide(const DecisionView& view) override {
    StationId target = 0;
    if (view.delay == 0) {
      for (const auto& a : view.intents) {
        if (a.kind != Action::Kind::Transmit) continue;
        if (target != 0) return {};
        target = a.station;
      }
    } else if (view.last != nullptr && view.last->feedback.is_single()) {
      const auto tx = view.last->transmitters();
      if (tx.size() == 1) target = tx.front();
    }
    if (target != 0 && view.legality->is_candidate(target)) return {target};
    return {};
  }
};

/// Crashes the current leader together with whatever still precedes it.
class LeaderHunter final : public Strategy {
 public:
  std::string_view name() const override { return "leader_hunter"; }
  std::vector<StationId> decide(const DecisionView& view) override {
    const auto& legal = *view.legality;
    const StationId leader = view.leader;
    if (leader == 0 || !legal.order().contains(leader)) return {};
    if (legal.crashed(leader) || legal.pending(leader) || legal.halted(leader)) return {};
    auto batch = legal.open_predecessors(leader);
    batch.push_back(leader);
    for (auto s : batch) {
      if (legal.halted(s)) return {};
    }
    if (batch.size() > legal.budget_left()) return {};
    return batch;
  }
};

/// Each round, with probability `rate`, crashes one uniformly chosen
/// candidate.
class FrontierRandom final : public Strategy {
 public:
  FrontierRandom(std::uint64_t seed, double rate) : rng_(seed), rate_(rate) {}
  std::string_view name() const override { return "frontier_random"; }
  std::vector<StationId> decide(const DecisionView& view) override {
    if (rng_.uniform01() >= rate_) return {};
    const auto cands = view.legality->candidates();
    if (cands.empty()) return {};
    return {cands[rng_.uniform_below(cands.size())]};
  }

 private:
  Rng rng_;
  double rate_;
};

/// Spends the whole budget in one round, walking the order topologically.
class BigBang final : public Strategy {
 public:
  explicit BigBang(Round round) : round_(std::max<Round>(round, 1)) {}
  std::string_view name() const override { return "big_bang"; }
  std::vector<StationId> decide(const DecisionView& view) override {
    if (fired_ || view.effective_round < round_) return {};
    fired_ = true;
    const auto& legal = *view.legality;
    const auto& order = legal.order();
    std::vector<StationId> batch;
    std::vector<std::uint8_t> in_batch(order.size(), 0);
    for (auto idx : order.topological_indices()) {
      if (batch.size() >= legal.budget_left()) break;
      const StationId s = order.element(idx);
      if (legal.crashed(s) || legal.pending(s) || legal.halted(s)) continue;
      bool ok = true;
      const auto& preds = order.predecessor_row(idx);
      for (std::size_t q = 0; q < order.size() && ok; ++q) {
        if (!preds.test(q)) continue;
        const StationId qs = order.element(q);
        ok = legal.crashed(qs) || legal.pending(qs) || in_batch[q];
      }
      if (!ok) continue;
      in_batch[idx] = 1;
      batch.push_back(s);
    }
    return batch;
  }

 private:
  Round round_;
  bool fired_ = false;
};

/// Catalog entry; the fields a given strategy ignores are simply unused.
struct StrategyConfig {
  std::string name = "noop";
  std::uint64_t seed = 0;
  double rate = 0.05;   // frontier_random
  Round round = 1;      // big_bang
  std::map<Round, std::vector<StationId>> schedule;  // oblivious_schedule
};

inline std::vector<std::string> built_in_strategies() {
  return {"noop", "oblivious_schedule", "lone_transmitter_killer", "leader_hunter",
          "frontier_random", "big_bang"};
}

inline std::string canonical_strategy_name(std::string_view name) {
  static const std::map<std::string, std::string, std::less<>> aliases = {
      {"NoOp", "noop"},
      {"ObliviousSchedule", "oblivious_schedule"},
      {"LoneTransmitterKiller", "lone_transmitter_killer"},
      {"LeaderHunter", "leader_hunter"},
      {"FrontierRandom", "frontier_random"},
      {"BigBang", "big_bang"},
  };
  if (const auto it = aliases.find(name); it != aliases.end()) return it->second;
  return std::string(name);
}

inline std::unique_ptr<Strategy> make_strategy(const StrategyConfig& cfg) {
  const auto name = canonical_strategy_name(cfg.name);
  if (name == "noop") return std::make_unique<NoOp>();
  if (name == "oblivious_schedule") return std::make_unique<ObliviousSchedule>(cfg.schedule);
  if (name == "lone_transmitter_killer") return std::make_unique<LoneTransmitterKiller>();
  if (name == "leader_hunter") return std::make_unique<LeaderHunter>();
  if (name == "frontier_random") return std::make_unique<FrontierRandom>(cfg.seed, cfg.rate);
  if (name == "big_bang") return std::make_unique<BigBang>(cfg.round);
  throw UnknownStrategy("no strategy named '" + cfg.name + "'");
}

}  // namespace macdoall
