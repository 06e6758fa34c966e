#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "macdoall/types.hpp"

namespace macdoall {

enum class ChannelKind { NoCD, CD, Beeping };

inline std::string_view to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::NoCD: return "nocd";
    case ChannelKind::CD: return "cd";
    case ChannelKind::Beeping: return "beeping";
  }
  return "?";
}

inline ChannelKind parse_channel(std::string_view s) {
  if (s == "nocd") return ChannelKind::NoCD;
  if (s == "cd") return ChannelKind::CD;
  if (s == "beeping") return ChannelKind::Beeping;
  throw ConfigInvalid("unknown channel '" + std::string(s) + "'");
}

struct Feedback {
  enum class Kind : std::uint8_t { Silence, Single, Collision, Beep };

  Kind kind = Kind::Silence;
  std::uint64_t payload = 0;  // meaningful only for Single

  static constexpr Feedback silence() { return {Kind::Silence, 0}; }
  static constexpr Feedback single(std::uint64_t payload) { return {Kind::Single, payload}; }
  static constexpr Feedback collision() { return {Kind::Collision, 0}; }
  static constexpr Feedback beep() { return {Kind::Beep, 0}; }

  constexpr bool is_single() const { return kind == Kind::Single; }
  constexpr bool is_silence() const { return kind == Kind::Silence; }
  /// Anything other than silence: some station transmitted.
  constexpr bool is_noisy() const { return kind != Kind::Silence; }

  constexpr bool operator==(const Feedback&) const = default;
};

inline std::string_view to_string(Feedback::Kind k) {
  switch (k) {
    case Feedback::Kind::Silence: return "silence";
    case Feedback::Kind::Single: return "single";
    case Feedback::Kind::Collision: return "collision";
    case Feedback::Kind::Beep: return "beep";
  }
  return "?";
}

struct Transmission {
  StationId station = 0;
  std::uint64_t payload = 0;
};

/// Channel feedback for one round. Depends only on how many stations
/// transmitted and, for exactly one, on its payload.
inline Feedback resolve(ChannelKind kind, std::span<const Transmission> transmissions) {
  const auto n = transmissions.size();
  if (n == 0) return Feedback::silence();
  if (kind == ChannelKind::Beeping) return Feedback::beep();
  if (n == 1) return Feedback::single(transmissions.front().payload);
  return kind == ChannelKind::CD ? Feedback::collision() : Feedback::silence();
}

/// A transmitter learns its message got through iff the feedback is a
/// Single (or a Beep) and it was among the transmitters.
inline bool acknowledged(const Feedback& fb, bool was_transmitter) {
  return was_transmitter && (fb.kind == Feedback::Kind::Single || fb.kind == Feedback::Kind::Beep);
}

enum class CrashEchoOutcome : std::uint8_t { Progress, LeaderOnly, LeaderLost };

inline std::string_view to_string(CrashEchoOutcome o) {
  switch (o) {
    case CrashEchoOutcome::Progress: return "progress";
    case CrashEchoOutcome::LeaderOnly: return "leader_only";
    case CrashEchoOutcome::LeaderLost: return "leader_lost";
  }
  return "?";
}

/// How a (loud, loud) echo is read when the scheduled group is the leader's
/// own group. Prose: the leader did the group's tasks, so it is progress.
/// Algorithm: the group is removed regardless.
enum class EchoSemantics : std::uint8_t { Prose, Algorithm };

/// Classifies the two Crash-Echo rounds: in the first the scheduled group and
/// the leader transmit, in the second only the leader does.
inline CrashEchoOutcome classify_crash_echo(const Feedback& first, const Feedback& second,
                                            bool leader_home_group,
                                            EchoSemantics semantics = EchoSemantics::Prose) {
  auto check = [](const Feedback& fb) {
    if (fb.kind == Feedback::Kind::Collision || fb.kind == Feedback::Kind::Beep) {
      throw InvalidPair("crash-echo needs no-collision-detection feedback, got " +
                        std::string(to_string(fb.kind)));
    }
  };
  check(first);
  check(second);
  if (second.is_silence()) return CrashEchoOutcome::LeaderLost;
  if (first.is_silence()) return CrashEchoOutcome::Progress;
  if (leader_home_group && semantics == EchoSemantics::Prose) return CrashEchoOutcome::Progress;
  return CrashEchoOutcome::LeaderOnly;
}

}  // namespace macdoall
