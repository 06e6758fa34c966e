#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "macdoall/adversary.hpp"
#include "macdoall/engine.hpp"
#include "macdoall/protocols/grubtech.hpp"
#include "macdoall/rng.hpp"

namespace macdoall {

/// One statistical or exact check. Upper-bound checks pass iff
/// statistic <= bound + margin; lower-bound checks iff statistic >= bound - margin.
struct StatCheck {
  std::string name;
  std::uint64_t trials = 0;
  double statistic = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  bool lower_bound = false;
  bool pass = false;

  void decide() { pass = lower_bound ? statistic >= bound - margin : statistic <= bound + margin; }
};

inline nlohmann::ordered_json to_json(const StatCheck& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["trials"] = c.trials;
  j["statistic"] = c.statistic;
  j["bound"] = c.bound;
  j["margin"] = c.margin;
  j["kind"] = c.lower_bound ? "lower" : "upper";
  j["pass"] = c.pass;
  return j;
}

/// z for a one-sided 99% interval.
inline constexpr double kZ99 = 2.326;

/// Upper end of the one-sided Wilson score interval for a proportion.
inline double wilson_upper(double phat, double n, double z = kZ99) {
  if (n <= 0) return 1.0;
  const double z2 = z * z;
  const double center = phat + z2 / (2 * n);
  const double spread = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n));
  return std::min(1.0, (center + spread) / (1 + z2 / n));
}

inline double wilson_lower(double phat, double n, double z = kZ99) {
  if (n <= 0) return 0.0;
  const double z2 = z * z;
  const double center = phat + z2 / (2 * n);
  const double spread = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n));
  return std::max(0.0, (center - spread) / (1 + z2 / n));
}

/// P[X >= k] for X ~ Hypergeometric(population, successes, draws), by summation.
inline double hypergeometric_upper_tail(std::uint64_t population, std::uint64_t successes,
                                        std::uint64_t draws, std::uint64_t k) {
  auto lchoose = [](double n, double r) {
    return std::lgamma(n + 1) - std::lgamma(r + 1) - std::lgamma(n - r + 1);
  };
  const double denom = lchoose(static_cast<double>(population), static_cast<double>(draws));
  double tail = 0.0;
  const std::uint64_t hi = std::min(draws, successes);
  for (std::uint64_t x = k; x <= hi; ++x) {
    if (draws - x > population - successes) continue;
    tail += std::exp(lchoose(static_cast<double>(successes), static_cast<double>(x)) +
                     lchoose(static_cast<double>(population - successes), static_cast<double>(draws - x)) -
                     denom);
  }
  return tail;
}

/// Exact min over x in [2, x_max] and m in (x/2, x] of (m/x)(1 - 1/x)^(m-1),
/// against the lower bound 1/(2 sqrt e).
inline StatCheck check_single_transmit_bound(std::uint32_t x_max) {
  StatCheck c;
  c.name = "single_transmit_bound";
  c.lower_bound = true;
  c.bound = 1.0 / (2.0 * std::sqrt(std::exp(1.0)));
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t x = 2; x <= x_max; ++x) {
    for (std::uint32_t m = x / 2 + 1; m <= x; ++m) {
      const double xd = x;
      const double v = (m / xd) * std::pow(1.0 - 1.0 / xd, static_cast<double>(m - 1));
      best = std::min(best, v);
      ++c.trials;
    }
  }
  c.statistic = best;
  c.decide();
  return c;
}

/// Draws `leaders` of `n` positions without replacement and counts those in
/// the first floor(n/2) positions of a linear order. Returns the fraction of
/// trials where at least three quarters of the leaders fall there.
inline double leader_crash_frequency(std::uint32_t n, std::uint32_t leaders, std::uint64_t trials,
                                     std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::uint32_t> pos(n);
  std::uint64_t hits = 0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    for (std::uint32_t i = 0; i < n; ++i) pos[i] = i;
    std::uint32_t count = 0;
    for (std::uint32_t i = 0; i < leaders; ++i) {
      const auto j = i + static_cast<std::uint32_t>(rng.uniform_below(n - i));
      std::swap(pos[i], pos[j]);
      if (pos[i] < n / 2) ++count;
    }
    if (4 * count >= 3 * leaders) ++hits;
  }
  return trials == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(trials);
}

inline StatCheck check_leader_crash_tail(std::uint32_t n, std::uint32_t sqrt_t, std::uint64_t trials,
                                         std::uint64_t seed) {
  if (sqrt_t > n) throw ConfigInvalid("more leaders than stations");
  StatCheck c;
  c.name = "leader_crash_tail(n=" + std::to_string(n) + ",s=" + std::to_string(sqrt_t) + ")";
  c.trials = trials;
  c.statistic = leader_crash_frequency(n, sqrt_t, trials, seed);
  c.bound = std::exp(-static_cast<double>(sqrt_t) / 8.0);
  c.margin = wilson_upper(c.statistic, static_cast<double>(trials)) - c.statistic;
  c.decide();
  return c;
}

/// Elect a leader, let it speak once, and elect again if it was silenced.
/// The first leader that survives its probe round does every task and the
/// run ends.
class ElectionProbe final : public Protocol {
 public:
  std::string_view name() const override { return "election_probe"; }
  void execute(RoundContext& ctx) override {
    LeaderElection election(ctx.p());
    election_rounds_ = 0;
    elections_ = 0;
    found_ = false;
    for (;;) {
      const Round before = ctx.round();
      const StationId leader = election.elect(ctx);
      election_rounds_ += static_cast<std::uint64_t>(ctx.round() - before);
      ++elections_;
      ctx.set_leader(leader);
      const Action a = Action::transmit(leader, leader);
      if (ctx.step({&a, 1}, RoundTag::Probe).is_single()) {
        found_ = true;
        for (TaskId x = 1; x <= ctx.t(); ++x) {
          const Action work = Action::perform(leader, x);
          ctx.step({&work, 1}, RoundTag::Perform);
        }
        return;
      }
      election.forget(leader);
    }
  }
  std::uint64_t election_rounds() const { return election_rounds_; }
  std::uint64_t elections() const { return elections_; }
  /// True once a leader survived its probe round.
  bool found() const { return found_; }

 private:
  bool found_ = false;
  std::uint64_t election_rounds_ = 0;
  std::uint64_t elections_ = 0;
};

/// Frequency with which the election rounds spent before a sustainable leader
/// stays within (4p / (p - f)) log2 p, against a leader-hunting adversary
/// with f fault-prone stations. Passes iff frequency >= 1 - 1/p - margin.
inline StatCheck check_elect_leader_rounds(std::uint32_t p, std::uint32_t f, std::uint64_t trials,
                                           std::uint64_t seed, double margin = 0.05) {
  if (f >= p) throw ConfigInvalid("f must be below p");
  const double limit = 4.0 * p / static_cast<double>(p - f) * std::log2(static_cast<double>(p));
  const auto spec = AdversarySpec::weakly_adaptive(f);
  std::uint64_t within = 0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    RunSetup setup;
    setup.p = p;
    setup.t = 1;
    setup.seed = hash_combine(seed, trial);
    setup.keep_rounds = false;
    setup.record_digests = false;
    LeaderHunter hunter;
    ElectionProbe probe;
    run(setup, probe, spec, hunter);
    if (probe.found() && static_cast<double>(probe.election_rounds()) <= limit) ++within;
  }
  StatCheck c;
  c.name = "elect_leader_rounds(p=" + std::to_string(p) + ",f=" + std::to_string(f) + ")";
  c.trials = trials;
  c.statistic = trials == 0 ? 0.0 : static_cast<double>(within) / static_cast<double>(trials);
  c.bound = 1.0 - 1.0 / p;
  c.margin = margin;
  c.lower_bound = true;
  c.decide();
  return c;
}

/// Minimum work of any schedule, clairvoyant of the crashes, that gets all t
/// tasks done. crash_round[v-1] is the round station v crashes in (0 =
/// never); a crashing station still counts that round but does nothing in it.
/// Stations may halt at any time.
inline std::uint64_t brute_force_doall_oracle(std::uint32_t p, std::uint32_t t,
                                              const std::vector<Round>& crash_round) {
  if (p < 1 || p > 3 || t < 1 || t > 3) throw TooLarge("oracle handles p, t in [1, 3]");
  if (crash_round.size() != p) throw ConfigInvalid("one crash round per station");
  Round last_crash = 0;
  for (auto c : crash_round) last_crash = std::max(last_crash, c);
  const Round horizon = last_crash + t + 2;
  const std::uint32_t full = (1U << t) - 1;
  constexpr std::uint64_t inf = std::numeric_limits<std::uint64_t>::max() / 4;

  std::map<std::tuple<Round, std::uint32_t, std::uint32_t>, std::uint64_t> memo;
  // Minimum work from round r on, given tasks done and stations still active.
  std::function<std::uint64_t(Round, std::uint32_t, std::uint32_t)> best =
      [&](Round r, std::uint32_t done, std::uint32_t active) -> std::uint64_t {
    if (done == full) return 0;
    if (active == 0 || r > horizon) return inf;
    const auto key = std::make_tuple(r, done, active);
    if (const auto it = memo.find(key); it != memo.end()) return it->second;

    std::vector<std::uint32_t> members;
    for (std::uint32_t v = 0; v < p; ++v) {
      if (active >> v & 1U) members.push_back(v);
    }
    const std::uint64_t here = members.size();
    std::uint64_t result = inf;
    // Each member picks a task (0 = idle) and whether it halts after this round.
    const std::uint32_t per = 2 * (t + 1);
    std::uint64_t combos = 1;
    for (std::size_t i = 0; i < members.size(); ++i) combos *= per;
    for (std::uint64_t code = 0; code < combos; ++code) {
      std::uint64_t rest = code;
      std::uint32_t next_done = done;
      std::uint32_t next_active = 0;
      for (auto v : members) {
        const auto choice = static_cast<std::uint32_t>(rest % per);
        rest /= per;
        const std::uint32_t task = choice % (t + 1);
        const bool halts = choice / (t + 1) == 1;
        const bool crashes = crash_round[v] == r;
        if (!crashes && task != 0) next_done |= 1U << (task - 1);
        if (!crashes && !halts) next_active |= 1U << v;
      }
      const auto tail = best(r + 1, next_done, next_done == full ? 0 : next_active);
      if (tail < inf) result = std::min(result, here + tail);
    }
    memo[key] = result;
    return result;
  };
  return best(1, 0, (1U << p) - 1);
}

/// The full check suite behind the `verify` command.
inline std::vector<StatCheck> run_verify_suite(std::uint64_t seed) {
  std::vector<StatCheck> out;
  out.push_back(check_single_transmit_bound(64));
  out.push_back(check_leader_crash_tail(400, 20, 10000, seed));
  for (std::uint32_t f : {0U, 32U, 63U}) {
    out.push_back(check_elect_leader_rounds(64, f, 1000, hash_combine(seed, f)));
  }
  return out;
}

}  // namespace macdoall
