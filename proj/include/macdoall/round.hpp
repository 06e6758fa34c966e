#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "macdoall/channel.hpp"
#include "macdoall/rng.hpp"
#include "macdoall/types.hpp"

namespace macdoall {

/// What one station does in one round. Stations without an action listen.
struct Action {
  enum class Kind : std::uint8_t { Perform, Transmit };

  StationId station = 0;
  Kind kind = Kind::Perform;
  std::uint64_t value = 0;  // task id for Perform, payload for Transmit

  static constexpr Action perform(StationId s, TaskId task) { return {s, Kind::Perform, task}; }
  static constexpr Action transmit(StationId s, std::uint64_t payload) {
    return {s, Kind::Transmit, payload};
  }

  constexpr bool operator==(const Action&) const = default;
};

/// Label of a round inside a protocol's structure. Only used for traces and
/// replay checks; the engine treats every round the same way.
enum class RoundTag : std::uint8_t {
  Perform,
  Transmit,
  Update,
  EchoFirst,
  EchoSecond,
  Elect,
  ElectRoundRobin,
  MixTest,
  ConfirmWork,
  ModConfirm,
  CheckOutstanding,
  Saturate,
  Probe,
};

inline std::string_view to_string(RoundTag tag) {
  switch (tag) {
    case RoundTag::Perform: return "perform";
    case RoundTag::Transmit: return "transmit";
    case RoundTag::Update: return "update";
    case RoundTag::EchoFirst: return "echo1";
    case RoundTag::EchoSecond: return "echo2";
    case RoundTag::Elect: return "elect";
    case RoundTag::ElectRoundRobin: return "elect_rr";
    case RoundTag::MixTest: return "mix_test";
    case RoundTag::ConfirmWork: return "confirm_work";
    case RoundTag::ModConfirm: return "mod_confirm";
    case RoundTag::CheckOutstanding: return "check_outstanding";
    case RoundTag::Saturate: return "saturate";
    case RoundTag::Probe: return "probe";
  }
  return "?";
}

/// The only window a protocol has onto the world. Everything a protocol can
/// learn arrives through step()'s return value, which is identical for every
/// station; that is what keeps the shared lists common knowledge.
class RoundContext {
 public:
  virtual ~RoundContext() = default;

  /// Executes one synchronous round and returns the channel feedback.
  virtual Feedback step(std::span<const Action> actions, RoundTag tag) = 0;

  /// Private coin of station `v` for the round about to be stepped.
  virtual bool toss(StationId v, Probability heads) = 0;

  virtual std::uint32_t p() const = 0;
  virtual std::uint32_t t() const = 0;
  virtual ChannelKind channel() const = 0;
  /// Rounds completed so far.
  virtual Round round() const = 0;

  /// Digest of the shared lists, attached to the next recorded round.
  virtual void publish_digest(std::uint64_t digest) = 0;
  virtual bool wants_digest() const = 0;
  /// Current leader (0 = none); common knowledge, so adversaries may read it.
  virtual void set_leader(StationId leader) = 0;
  /// Free-form annotation attached to the next recorded round.
  virtual void note(std::string_view text) = 0;
};

struct ProtocolOptions {
  EchoSemantics echo = EchoSemantics::Prose;
  /// Skip ROBAL's saturation branch even when its guard holds.
  bool robal_force_main_loop = false;
};

class Protocol {
 public:
  virtual ~Protocol() = default;
  virtual std::string_view name() const = 0;
  /// Runs until every station halts. Returning is the halt.
  virtual void execute(RoundContext& ctx) = 0;
};

enum class ProtocolKind : std::uint8_t { TwoLists, GroupsTogether, Robal, GrubTech, Gilet };

inline std::string_view to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::TwoLists: return "two_lists";
    case ProtocolKind::GroupsTogether: return "groups_together";
    case ProtocolKind::Robal: return "robal";
    case ProtocolKind::GrubTech: return "grubtech";
    case ProtocolKind::Gilet: return "gilet";
  }
  return "?";
}

inline ProtocolKind parse_protocol(std::string_view s) {
  for (auto k : {ProtocolKind::TwoLists, ProtocolKind::GroupsTogether, ProtocolKind::Robal,
                 ProtocolKind::GrubTech, ProtocolKind::Gilet}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigInvalid("unknown protocol '" + std::string(s) + "'");
}

/// Order-sensitive fold used for shared-state digests.
class Digest {
 public:
  Digest& add(std::uint64_t v) {
    h_ = hash_combine(h_, v);
    return *this;
  }
  template <class Range>
  Digest& add_range(const Range& r) {
    add(static_cast<std::uint64_t>(std::size(r)));
    for (const auto& v : r) add(static_cast<std::uint64_t>(v));
    return *this;
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0x6d616364;
};

}  // namespace macdoall
