#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "macdoall/protocols/task_board.hpp"
#include "macdoall/round.hpp"

namespace macdoall {

/// Two-Lists state machine over an externally owned TASKS list. Runs phase by
/// phase so that callers can interleave it with other procedures; ROBAL does.
class TwoListsCore {
 public:
  TwoListsCore(RoundContext& ctx, std::vector<StationId> stations, TaskBoard& tasks)
      : ctx_(ctx),
        tasks_(tasks),
        stations_(std::move(stations)),
        stride_(tasks.total() + 1),
        done_(static_cast<std::size_t>(ctx.p() + 1) * stride_, 0),
        pending_(ctx.p() + 1) {}

  bool halted() const { return halted_; }

  /// The STATIONS list. Reordering it must be followed by restart_epoch().
  std::vector<StationId>& stations() { return stations_; }
  const std::vector<StationId>& stations() const { return stations_; }

  /// Abandons the current epoch; the next phase opens a fresh one.
  void restart_epoch() { in_epoch_ = false; }

  /// Runs at most `max_phases` phases. Returns how many broadcasts were heard.
  std::uint64_t run_phases(std::uint64_t max_phases) {
    std::uint64_t heard = 0;
    for (std::uint64_t i = 0; i < max_phases && !halted_; ++i) {
      if (phase()) ++heard;
    }
    return heard;
  }

  void run_to_completion() { run_phases(std::numeric_limits<std::uint64_t>::max()); }

  const std::vector<EpochInfo>& epochs() const { return epochs_; }

  std::uint64_t digest() const {
    Digest d;
    d.add_range(stations_).add(tasks_.digest()).add(k_).add(epochs_.size());
    return d.value();
  }

 private:
  bool done(StationId v, TaskId x) const { return done_[v * stride_ + x] != 0; }

  void begin_epoch() {
    epoch_stations_ = stations_;
    snap_ = tasks_.snapshot();
    const std::size_t n = epoch_stations_.size();
    cursor_.resize(n);
    for (std::size_t k = 0; k < n; ++k) cursor_[k] = segment_offset(k, snap_.size());
    removed_.assign(n, 0);
    dense_ = is_dense(n, snap_.size());
    epochs_.push_back({n, snap_.size(), dense_});
    k_ = 0;
    in_epoch_ = true;
  }

  /// One perform / transmit / update phase. True iff the broadcast was heard.
  bool phase() {
    if (!in_epoch_) begin_epoch();
    if (epoch_stations_.empty()) throw Error("two-lists: STATIONS is empty");

    actions_.clear();
    for (std::size_t j = 0; j < epoch_stations_.size(); ++j) {
      if (removed_[j]) continue;
      const StationId v = epoch_stations_[j];
      const TaskId x = next_task(snap_, tasks_, cursor_[j], [&](TaskId y) { return done(v, y); });
      if (x == 0) continue;
      done_[v * stride_ + x] = 1;
      pending_[v].push_back(x);
      actions_.push_back(Action::perform(v, x));
    }
    ctx_.step(actions_, RoundTag::Perform);

    const StationId scheduled = epoch_stations_[k_];
    const Action tx = Action::transmit(scheduled, scheduled);
    const Feedback fb = ctx_.step({&tx, 1}, RoundTag::Transmit);

    const bool heard = fb.is_single();
    if (heard) {
      for (TaskId x : pending_[scheduled]) tasks_.remove(x);
      pending_[scheduled].clear();
      halted_ = tasks_.empty();
    } else {
      stations_.erase(std::find(stations_.begin(), stations_.end(), scheduled));
      removed_[k_] = 1;
    }
    ++k_;
    if (k_ == epoch_stations_.size() || (dense_ && k_ * (k_ + 1) / 2 >= snap_.size())) {
      in_epoch_ = false;
    }
    // The update round's digest is the lists as they stand after it.
    publish();
    ctx_.step({}, RoundTag::Update);
    return heard;
  }

  void publish() {
    if (ctx_.wants_digest()) ctx_.publish_digest(digest());
  }

  RoundContext& ctx_;
  TaskBoard& tasks_;
  std::vector<StationId> stations_;
  std::size_t stride_;
  std::vector<std::uint8_t> done_;               // DONE_v, indexed v * stride + x
  std::vector<std::vector<TaskId>> pending_;     // DONE_v entries not yet announced
  std::vector<Action> actions_;

  bool in_epoch_ = false;
  bool halted_ = false;
  std::vector<StationId> epoch_stations_;
  std::vector<TaskId> snap_;
  std::vector<std::size_t> cursor_;  // Task_To_Do per epoch position
  std::vector<std::uint8_t> removed_;
  bool dense_ = false;
  std::size_t k_ = 0;  // Transmit, as an epoch position
  std::vector<EpochInfo> epochs_;
};

inline std::vector<StationId> all_stations(std::uint32_t p) {
  std::vector<StationId> out(p);
  for (std::uint32_t i = 0; i < p; ++i) out[i] = i + 1;
  return out;
}

class TwoLists final : public Protocol {
 public:
  std::string_view name() const override { return "two_lists"; }

  void execute(RoundContext& ctx) override {
    TaskBoard tasks(ctx.t());
    TwoListsCore core(ctx, all_stations(ctx.p()), tasks);
    core.run_to_completion();
    epochs_ = core.epochs();
  }

  /// Epoch shapes of the last execution.
  const std::vector<EpochInfo>& epochs() const { return epochs_; }

 private:
  std::vector<EpochInfo> epochs_;
};

}  // namespace macdoall
