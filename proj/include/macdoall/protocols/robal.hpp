#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "macdoall/protocols/two_lists.hpp"
#include "macdoall/round.hpp"

namespace macdoall {

/// Two-Lists with a randomly drawn set of leaders moved to the front of the
/// schedule, so that an adversary bound to a fixed linear order cannot aim
/// its crashes at the stations about to report.
class Robal final : public Protocol {
 public:
  enum class Branch { TwoLists, Saturation, MainLoop };

  explicit Robal(bool force_main_loop = false) : force_main_loop_(force_main_loop) {}

  std::string_view name() const override { return "robal"; }

  /// log2 p > e^(sqrt(t)/32): every station simply does every task.
  static bool saturation_guard(std::uint32_t p, std::uint32_t t) {
    return std::log2(static_cast<double>(p)) > std::exp(std::sqrt(static_cast<double>(t)) / 32.0);
  }

  void execute(RoundContext& ctx) override {
    const std::uint64_t p = ctx.p();
    const std::uint64_t t = ctx.t();
    TaskBoard tasks(ctx.t());
    mix_results_.clear();

    if (p * p <= t) {
      branch_ = Branch::TwoLists;
      TwoListsCore core(ctx, all_stations(ctx.p()), tasks);
      core.run_to_completion();
      return;
    }

    auto stations = all_stations(ctx.p());
    if (!force_main_loop_ && saturation_guard(ctx.p(), ctx.t())) {
      branch_ = Branch::Saturation;
      std::vector<Action> acts;
      for (TaskId x = 1; x <= t; ++x) {
        acts.clear();
        for (StationId s : stations) acts.push_back(Action::perform(s, x));
        ctx.step(acts, RoundTag::Saturate);
      }
      confirm_work(ctx, stations, tasks);
      return;
    }

    branch_ = Branch::MainLoop;
    TwoListsCore core(ctx, std::move(stations), tasks);
    const std::uint64_t root = ceil_sqrt(t);
    const std::uint32_t levels = ceil_log2(p);
    for (std::uint32_t i = 0; i < levels; ++i) {
      // p / 2^i <= sqrt(t)
      if (p * p <= t * (std::uint64_t{1} << (2 * i))) {
        core.run_to_completion();
        return;
      }
      const bool many = mix_and_test(ctx, core, i);
      mix_results_.push_back(many);
      if (many) {
        std::uint64_t heard = 0;
        do {
          heard = core.run_phases(root);
          if (core.halted()) return;
        } while (4 * heard >= root);
      }
    }
    core.run_to_completion();
  }

  /// ceil(sqrt t) * ceil(log2 p) single-round trials. Stations not yet
  /// promoted in this call transmit with probability 1 / (p/2^i - promoted);
  /// each Single moves the speaker to the front of STATIONS.
  static bool mix_and_test(RoundContext& ctx, TwoListsCore& core, std::uint32_t i) {
    const std::uint64_t p = ctx.p();
    const std::uint64_t root = ceil_sqrt(ctx.t());
    const std::uint64_t trials = root * ceil_log2(p);
    const std::uint64_t scale = std::uint64_t{1} << i;
    std::set<StationId> promoted;
    std::uint64_t heard = 0;
    std::vector<Action> tx;
    auto& stations = core.stations();
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
      const std::uint64_t spent = promoted.size() * scale;
      const Probability prob = spent >= p ? Probability::always() : Probability::inverse(p - spent, scale);
      tx.clear();
      for (StationId s : stations) {
        if (promoted.count(s) == 0 && ctx.toss(s, prob)) tx.push_back(Action::transmit(s, s));
      }
      const Feedback fb = ctx.step(tx, RoundTag::MixTest);
      if (fb.is_single()) {
        const auto w = static_cast<StationId>(fb.payload);
        const auto it = std::find(stations.begin(), stations.end(), w);
        std::rotate(stations.begin(), it, it + 1);
        promoted.insert(w);
        ++heard;
      }
      if (ctx.wants_digest()) ctx.publish_digest(core.digest());
    }
    core.restart_epoch();
    return heard >= root;
  }

  /// Repeats until one station is heard: transmit with probability 2^i / p,
  /// cycling i through 0..ceil(log2 p).
  static void confirm_work(RoundContext& ctx, const std::vector<StationId>& stations,
                           TaskBoard& tasks) {
    const std::uint32_t wrap = ceil_log2(ctx.p()) + 1;
    std::uint32_t i = 0;
    std::vector<Action> tx;
    for (;;) {
      const Probability prob{std::uint64_t{1} << i, ctx.p()};
      tx.clear();
      for (StationId s : stations) {
        if (ctx.toss(s, prob)) tx.push_back(Action::transmit(s, s));
      }
      if (ctx.step(tx, RoundTag::ConfirmWork).is_single()) {
        tasks.clear();
        return;
      }
      i = (i + 1) % wrap;
    }
  }

  Branch branch() const { return branch_; }
  const std::vector<bool>& mix_results() const { return mix_results_; }

 private:
  bool force_main_loop_;
  Branch branch_ = Branch::TwoLists;
  std::vector<bool> mix_results_;
};

}  // namespace macdoall
