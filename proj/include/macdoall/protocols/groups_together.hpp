#pragma once

#include <vector>

#include "macdoall/protocols/group_board.hpp"
#include "macdoall/round.hpp"

namespace macdoall {

/// Groups transmit together; a noisy slot (Single, Collision or Beep) means
/// someone in the group is alive and did the group's work, silence means the
/// whole group crashed. Needs a channel that can tell the two apart.
class GroupsTogether final : public Protocol {
 public:
  std::string_view name() const override { return "groups_together"; }

  void execute(RoundContext& ctx) override {
    if (ctx.channel() == ChannelKind::NoCD) {
      throw WrongChannel("groups_together needs collision detection or beeping");
    }
    GroupBoard board(ctx.p(), ctx.t());
    std::vector<Action> tx;
    for (;;) {
      const std::size_t n = board.epoch_size();
      for (std::size_t k = 0; k < n; ++k) {
        board.perform_round(ctx);
        tx.clear();
        for (StationId s : board.group(k).members) tx.push_back(Action::transmit(s, s));
        const Feedback fb = ctx.step(tx, RoundTag::Transmit);
        decisions_.push_back(fb.is_noisy());
        bool finished = false;
        if (fb.is_noisy()) {
          finished = board.confirm(k);
        } else {
          board.remove(k);
        }
        publish(ctx, board, k + 1);
        ctx.step({}, RoundTag::Update);
        if (finished) {
          epochs_ = board.epochs();
          return;
        }
        if (board.dense() && (k + 1) * (k + 2) / 2 >= board.epoch_tasks()) break;
      }
      board.rearrange();
    }
  }

  /// Per-phase progress decisions of the last execution (true = confirmed).
  const std::vector<bool>& decisions() const { return decisions_; }
  const std::vector<EpochInfo>& epochs() const { return epochs_; }

 private:
  static void publish(RoundContext& ctx, const GroupBoard& board, std::size_t transmit) {
    if (ctx.wants_digest()) ctx.publish_digest(board.digest(transmit));
  }

  std::vector<bool> decisions_;
  std::vector<EpochInfo> epochs_;
};

}  // namespace macdoall
