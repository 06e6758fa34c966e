#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "macdoall/channel.hpp"
#include "macdoall/round.hpp"
#include "macdoall/types.hpp"

namespace macdoall {

struct RoundRecord {
  Round round = 0;
  RoundTag tag = RoundTag::Update;
  std::vector<Action> intents;  // from stations operational at the start of the round
  std::vector<StationId> crashes;
  Feedback feedback;
  std::optional<std::pair<Feedback, Feedback>> echo_pair;
  std::vector<std::pair<StationId, TaskId>> performed;
  std::vector<StationId> halts;
  std::vector<StationId> operational_after;
  std::size_t operational_before = 0;
  std::uint64_t digest = 0;
  StationId leader = 0;
  std::string note;

  /// Transmitters that were not crashed in this round.
  std::vector<StationId> transmitters() const {
    std::vector<StationId> out;
    for (const auto& a : intents) {
      if (a.kind != Action::Kind::Transmit) continue;
      bool crashed = false;
      for (auto c : crashes) crashed = crashed || c == a.station;
      if (!crashed) out.push_back(a.station);
    }
    return out;
  }
};

struct Metrics {
  std::uint64_t work = 0;
  Round time = 0;
  std::uint64_t energy = 0;

  bool operator==(const Metrics&) const = default;
};

struct Outcome {
  enum class Kind : std::uint8_t { Solved, Completed, Violation };
  Kind kind = Kind::Solved;
  std::string reason;

  bool ok() const { return kind == Kind::Solved; }
};

inline std::string_view to_string(Outcome::Kind k) {
  switch (k) {
    case Outcome::Kind::Solved: return "solved";
    case Outcome::Kind::Completed: return "completed";
    case Outcome::Kind::Violation: return "violation";
  }
  return "?";
}

/// Everything a run produced. `rounds` is empty unless records were kept;
/// the per-station and per-task summaries are always filled.
struct ExecutionTrace {
  // config echo
  std::string protocol;
  std::string channel;
  std::string adversary;
  std::string strategy;
  std::uint32_t p = 0;
  std::uint32_t t = 0;
  std::uint32_t f = 0;
  std::uint32_t delay = 0;
  std::uint64_t seed = 0;
  Round round_cap = 0;

  bool rounds_kept = false;
  std::vector<RoundRecord> rounds;
  Outcome outcome;

  // summaries
  std::vector<std::uint8_t> task_performed;  // index by task id
  std::vector<Round> crash_round;            // index by station id; 0 = never
  std::vector<Round> halt_round;             // index by station id; 0 = never
  std::vector<std::string> violations;
  Metrics totals;
};

// ---------------------------------------------------------------------------
// JSON export
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const Feedback& fb) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(fb.kind);
  if (fb.is_single()) j["payload"] = fb.payload;
  return j;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 15];
  return s;
}

inline nlohmann::ordered_json to_json(const RoundRecord& r) {
  nlohmann::ordered_json j;
  j["round"] = r.round;
  j["tag"] = to_string(r.tag);
  auto intents = nlohmann::ordered_json::array();
  for (const auto& a : r.intents) {
    intents.push_back({a.station, a.kind == Action::Kind::Perform ? "perform" : "transmit", a.value});
  }
  j["intents"] = std::move(intents);
  j["crashes"] = r.crashes;
  j["feedback"] = to_json(r.feedback);
  if (r.echo_pair) j["echo"] = {to_json(r.echo_pair->first), to_json(r.echo_pair->second)};
  auto performed = nlohmann::ordered_json::array();
  for (const auto& [s, x] : r.performed) performed.push_back({s, x});
  j["performed"] = std::move(performed);
  j["halts"] = r.halts;
  j["operational_after"] = r.operational_after;
  j["digest"] = hex64(r.digest);
  j["leader"] = r.leader;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline nlohmann::ordered_json to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["work"] = m.work;
  j["time"] = m.time;
  j["energy"] = m.energy;
  return j;
}

/// One JSON object per round, newline-terminated.
inline std::string trace_to_jsonl(const ExecutionTrace& trace) {
  std::string out;
  for (const auto& r : trace.rounds) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json summary_json(const ExecutionTrace& trace) {
  nlohmann::ordered_json j;
  j["protocol"] = trace.protocol;
  j["channel"] = trace.channel;
  j["adversary"] = trace.adversary;
  j["strategy"] = trace.strategy;
  j["p"] = trace.p;
  j["t"] = trace.t;
  j["f"] = trace.f;
  j["delay"] = trace.delay;
  j["seed"] = trace.seed;
  j["outcome"] = to_string(trace.outcome.kind);
  if (!trace.outcome.reason.empty()) j["reason"] = trace.outcome.reason;
  j["work"] = trace.totals.work;
  j["time"] = trace.totals.time;
  j["energy"] = trace.totals.energy;
  return j;
}

}  // namespace macdoall
