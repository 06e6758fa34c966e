#pragma once

#include <algorithm>
#include <vector>

#include "macdoall/protocols/group_board.hpp"
#include "macdoall/round.hpp"

namespace macdoall {

/// Leader election shared by GrubTEch and the election probe. Phase one is
/// a budget of p coin rounds (probability 1/p each) that persists across
/// calls; once it is spent, elections go round-robin over the stations not
/// yet known to have crashed.
class LeaderElection {
 public:
  explicit LeaderElection(std::uint32_t p) : p_(p), candidates_(p) {
    for (std::uint32_t i = 0; i < p; ++i) candidates_[i] = i + 1;
  }

  StationId elect(RoundContext& ctx) {
    std::vector<Action> tx;
    while (coin_rounds_ < p_) {
      tx.clear();
      for (StationId s : candidates_) {
        if (ctx.toss(s, Probability{1, p_})) tx.push_back(Action::transmit(s, s));
      }
      const Feedback fb = ctx.step(tx, RoundTag::Elect);
      if (fb.is_single()) return static_cast<StationId>(fb.payload);
      ++coin_rounds_;
    }
    for (std::size_t i = 0; i < candidates_.size();) {
      const StationId s = candidates_[i];
      const Action a = Action::transmit(s, s);
      const Feedback fb = ctx.step({&a, 1}, RoundTag::ElectRoundRobin);
      if (fb.is_single()) return s;
      candidates_.erase(candidates_.begin() + static_cast<std::ptrdiff_t>(i));
    }
    throw Error("leader election: no station answered");
  }

  /// Stations known to have crashed are dropped from the round-robin order.
  void forget(StationId s) {
    candidates_.erase(std::remove(candidates_.begin(), candidates_.end(), s), candidates_.end());
  }

  std::uint32_t coin_rounds() const { return coin_rounds_; }
  const std::vector<StationId>& candidates() const { return candidates_; }

 private:
  std::uint32_t p_;
  std::uint32_t coin_rounds_ = 0;
  std::vector<StationId> candidates_;
};

/// Groups-Together on a channel without collision detection: a leader echoes
/// every group's transmission so that the pair of rounds tells a live group
/// from a dead one.
class GrubTech final : public Protocol {
 public:
  explicit GrubTech(EchoSemantics semantics = EchoSemantics::Prose) : semantics_(semantics) {}

  std::string_view name() const override { return "grubtech"; }

  void execute(RoundContext& ctx) override {
    GroupBoard board(ctx.p(), ctx.t());
    LeaderElection election(ctx.p());
    leaders_.clear();
    outcomes_.clear();

    StationId leader = election.elect(ctx);
    leaders_.push_back(leader);
    ctx.set_leader(leader);
    std::vector<Action> tx;

    for (;;) {
      const std::size_t n = board.epoch_size();
      std::size_t k = 0;
      while (k < n) {
        if (board.group(k).removed) {
          ++k;
          continue;
        }
        board.perform_round(ctx);

        tx.clear();
        bool leader_in = false;
        for (StationId s : board.group(k).members) {
          tx.push_back(Action::transmit(s, s));
          leader_in = leader_in || s == leader;
        }
        if (!leader_in) tx.push_back(Action::transmit(leader, leader));
        const Feedback first = ctx.step(tx, RoundTag::EchoFirst);
        const Action echo = Action::transmit(leader, leader);
        const Feedback second = ctx.step({&echo, 1}, RoundTag::EchoSecond);

        const bool home = board.group_of(leader) == k;
        const auto outcome = classify_crash_echo(first, second, home, semantics_);
        outcomes_.push_back(outcome);
        if (home && outcome == CrashEchoOutcome::Progress && first.is_single()) {
          ctx.note("echo:home_group_progress");
        }
        bool finished = false;
        switch (outcome) {
          case CrashEchoOutcome::Progress:
            finished = board.confirm(k);
            ++k;
            break;
          case CrashEchoOutcome::LeaderOnly:
            for (StationId s : board.group(k).members) {
              if (s != leader) election.forget(s);
            }
            board.remove(k);
            ++k;
            break;
          case CrashEchoOutcome::LeaderLost:
            board.remove_member(leader);
            election.forget(leader);
            break;
        }
        publish(ctx, board, k, leader);
        ctx.step({}, RoundTag::Update);
        if (finished) {
          epochs_ = board.epochs();
          return;
        }
        if (outcome == CrashEchoOutcome::LeaderLost) {
          leader = election.elect(ctx);
          leaders_.push_back(leader);
          ctx.set_leader(leader);
        }
      }
      // The leader keeps its place even if its own group was dropped.
      board.rearrange({leader});
      publish(ctx, board, 0, leader);
    }
  }

  const std::vector<StationId>& leaders() const { return leaders_; }
  const std::vector<CrashEchoOutcome>& outcomes() const { return outcomes_; }
  const std::vector<EpochInfo>& epochs() const { return epochs_; }

 private:
  static void publish(RoundContext& ctx, const GroupBoard& board, std::size_t transmit,
                      StationId leader) {
    if (ctx.wants_digest()) ctx.publish_digest(hash_combine(board.digest(transmit), leader));
  }

  EchoSemantics semantics_;
  std::vector<StationId> leaders_;
  std::vector<CrashEchoOutcome> outcomes_;
  std::vector<EpochInfo> epochs_;
};

}  // namespace macdoall
