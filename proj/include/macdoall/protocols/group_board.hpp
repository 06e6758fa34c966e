#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "macdoall/protocols/task_board.hpp"
#include "macdoall/round.hpp"

namespace macdoall {

/// GROUPS plus TASKS for the group-based protocols. Every member of a group
/// performs the same task each phase, so DONE is kept per group and reset
/// whenever the groups are rearranged.
class GroupBoard {
 public:
  struct Group {
    std::vector<StationId> members;
    std::vector<std::uint8_t> done;  // per epoch, indexed by task id
    std::vector<TaskId> performed;   // done entries not yet confirmed
    std::size_t cursor = 0;
    bool removed = false;
  };

  GroupBoard(std::uint32_t p, std::uint32_t t) : tasks_(t) { arrange(all(p)); }

  TaskBoard& tasks() { return tasks_; }
  const TaskBoard& tasks() const { return tasks_; }

  std::size_t epoch_size() const { return groups_.size(); }
  const Group& group(std::size_t k) const { return groups_[k]; }
  Group& group(std::size_t k) { return groups_[k]; }
  bool dense() const { return dense_; }
  std::size_t epoch_tasks() const { return snap_.size(); }
  const std::vector<EpochInfo>& epochs() const { return epochs_; }

  /// Index of the live group containing `s`, or npos.
  std::size_t group_of(StationId s) const {
    for (std::size_t k = 0; k < groups_.size(); ++k) {
      if (groups_[k].removed) continue;
      const auto& m = groups_[k].members;
      if (std::find(m.begin(), m.end(), s) != m.end()) return k;
    }
    return npos;
  }

  /// Members of all live groups, sorted.
  std::vector<StationId> live_members() const {
    std::vector<StationId> out;
    for (const auto& g : groups_) {
      if (!g.removed) out.insert(out.end(), g.members.begin(), g.members.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Round 1 of a phase: each live group picks its next task and all of its
  /// members perform it.
  void perform_round(RoundContext& ctx) {
    actions_.clear();
    for (auto& g : groups_) {
      if (g.removed || g.members.empty()) continue;
      const TaskId x = next_task(snap_, tasks_, g.cursor, [&](TaskId y) { return g.done[y] != 0; });
      if (x == 0) continue;
      g.done[x] = 1;
      g.performed.push_back(x);
      for (StationId s : g.members) actions_.push_back(Action::perform(s, x));
    }
    ctx.step(actions_, RoundTag::Perform);
  }

  /// Removes the group's performed tasks from TASKS. True iff TASKS emptied.
  bool confirm(std::size_t k) {
    auto& g = groups_[k];
    for (TaskId x : g.performed) tasks_.remove(x);
    g.performed.clear();
    return tasks_.empty();
  }

  void remove(std::size_t k) { groups_[k].removed = true; }

  void remove_member(StationId s) {
    for (auto& g : groups_) {
      g.members.erase(std::remove(g.members.begin(), g.members.end(), s), g.members.end());
    }
  }

  /// Regroups the survivors (plus `extra`) into min(ceil(sqrt|TASKS|), m)
  /// groups by position modulo the group count, and opens a new epoch. A
  /// nonzero `max_size` adds groups until none has more members than that.
  void rearrange(const std::vector<StationId>& extra = {}, std::size_t max_size = 0) {
    auto pool = live_members();
    pool.insert(pool.end(), extra.begin(), extra.end());
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    arrange(pool, max_size);
  }

  std::uint64_t digest(std::size_t transmit) const {
    Digest d;
    d.add(tasks_.digest()).add(transmit).add(epochs_.size());
    for (const auto& g : groups_) {
      d.add(g.removed ? 1 : 0);
      d.add_range(g.members);
    }
    return d.value();
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  static std::vector<StationId> all(std::uint32_t p) {
    std::vector<StationId> out(p);
    for (std::uint32_t i = 0; i < p; ++i) out[i] = i + 1;
    return out;
  }

  void arrange(const std::vector<StationId>& pool, std::size_t max_size = 0) {
    const std::size_t m = pool.size();
    std::size_t want = std::max<std::size_t>(1, ceil_sqrt(tasks_.size()));
    if (max_size > 0) want = std::max(want, (m + max_size - 1) / max_size);
    const std::size_t g = std::max<std::size_t>(1, std::min(want, m));
    groups_.assign(g, Group{});
    for (std::size_t i = 0; i < m; ++i) groups_[i % g].members.push_back(pool[i]);
    snap_ = tasks_.snapshot();
    for (std::size_t k = 0; k < g; ++k) {
      groups_[k].done.assign(tasks_.total() + 1, 0);
      groups_[k].cursor = segment_offset(k, snap_.size());
    }
    dense_ = is_dense(g, snap_.size());
    epochs_.push_back({g, snap_.size(), dense_});
  }

  TaskBoard tasks_;
  std::vector<Group> groups_;
  std::vector<TaskId> snap_;
  bool dense_ = false;
  std::vector<EpochInfo> epochs_;
  std::vector<Action> actions_;
};

}  // namespace macdoall
