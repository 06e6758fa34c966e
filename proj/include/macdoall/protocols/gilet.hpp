#pragma once

#include <algorithm>
#include <vector>

#include "macdoall/protocols/group_board.hpp"
#include "macdoall/round.hpp"

namespace macdoall {

/// Groups confirm their work by electing a speaker among themselves with
/// geometrically growing transmission probabilities. A group that stays
/// silent through every attempt is declared dead, and the survivors finish
/// the remaining tasks without further coordination.
class Gilet final : public Protocol {
 public:
  std::string_view name() const override { return "gilet"; }

  /// Smallest j with 2^j * g >= p, i.e. ceil(log2(p / g)) for rational p/g.
  static std::uint32_t levels(std::uint32_t p, std::uint32_t g) {
    std::uint32_t j = 0;
    while ((static_cast<std::uint64_t>(g) << j) < p) ++j;
    return j;
  }

  static std::uint32_t repetitions(std::uint32_t p) { return std::max<std::uint32_t>(1, 4 * ceil_log2(p)); }

  /// One window of attempts j = 0..levels inclusive; member transmits with
  /// probability min(1, 2^j * g / p). True on the first Single.
  static bool mod_confirm_work(RoundContext& ctx, const std::vector<StationId>& members,
                               std::uint32_t p, std::uint32_t g) {
    std::vector<Action> tx;
    const std::uint32_t top = levels(p, g);
    for (std::uint32_t j = 0; j <= top; ++j) {
      const Probability prob{static_cast<std::uint64_t>(g) << j, p};
      tx.clear();
      for (StationId s : members) {
        if (ctx.toss(s, prob)) tx.push_back(Action::transmit(s, s));
      }
      if (ctx.step(tx, RoundTag::ModConfirm).is_single()) return true;
    }
    return false;
  }

  void execute(RoundContext& ctx) override {
    GroupBoard board(ctx.p(), ctx.t());
    const std::uint32_t p = ctx.p();
    const auto g = static_cast<std::uint32_t>(board.epoch_size());  // k = p / g, fixed
    const std::uint32_t reps = repetitions(p);
    removed_.clear();

    for (;;) {
      const std::size_t n = board.epoch_size();
      for (std::size_t k = 0; k < n; ++k) {
        board.perform_round(ctx);
        bool heard = false;
        for (std::uint32_t r = 0; r < reps && !heard; ++r) {
          heard = mod_confirm_work(ctx, board.group(k).members, p, g);
        }
        if (heard) {
          const bool finished = board.confirm(k);
          publish(ctx, board, k + 1);
          ctx.step({}, RoundTag::Update);
          if (finished) return;
          continue;
        }
        const auto& lost = board.group(k).members;
        removed_.insert(removed_.end(), lost.begin(), lost.end());
        board.remove(k);
        publish(ctx, board, k);
        ctx.step({}, RoundTag::Update);
        check_outstanding(ctx, board);
        return;
      }
      // Later epochs want fewer groups, but the coins are tuned to k, so no
      // group may outgrow the initial ones.
      board.rearrange({}, (p + g - 1) / g);
    }
  }

  /// Stations given up on when their group went silent.
  const std::vector<StationId>& removed() const { return removed_; }

 private:
  /// Every station performs every remaining task, one per round. Stations
  /// listed in REMOVED take part too: silence only suggests they crashed.
  static void check_outstanding(RoundContext& ctx, GroupBoard& board) {
    std::vector<StationId> live(ctx.p());
    for (std::uint32_t i = 0; i < ctx.p(); ++i) live[i] = i + 1;
    std::vector<Action> acts;
    for (TaskId x : board.tasks().snapshot()) {
      acts.clear();
      for (StationId s : live) acts.push_back(Action::perform(s, x));
      ctx.step(acts, RoundTag::CheckOutstanding);
    }
    board.tasks().clear();
  }

  static void publish(RoundContext& ctx, const GroupBoard& board, std::size_t transmit) {
    if (ctx.wants_digest()) ctx.publish_digest(board.digest(transmit));
  }

  std::vector<StationId> removed_;
};

}  // namespace macdoall
