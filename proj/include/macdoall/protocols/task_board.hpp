#pragma once

#include <cstdint>
#include <vector>

#include "macdoall/rng.hpp"
#include "macdoall/types.hpp"

namespace macdoall {

/// The shared TASKS list. Tasks only ever leave it, so the remaining tasks in
/// id order are exactly the list order.
class TaskBoard {
 public:
  explicit TaskBoard(std::uint32_t t) : in_(t + 1, 1), count_(t) {
    in_[0] = 0;
    for (TaskId x = 1; x <= t; ++x) sum_ += mix64(x);
  }

  std::uint32_t total() const { return static_cast<std::uint32_t>(in_.size() - 1); }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  bool contains(TaskId x) const { return x < in_.size() && in_[x] != 0; }

  bool remove(TaskId x) {
    if (!contains(x)) return false;
    in_[x] = 0;
    --count_;
    sum_ -= mix64(x);
    return true;
  }

  void clear() {
    for (TaskId x = 1; x < in_.size(); ++x) in_[x] = 0;
    count_ = 0;
    sum_ = 0;
  }

  std::vector<TaskId> snapshot() const {
    std::vector<TaskId> out;
    out.reserve(count_);
    for (TaskId x = 1; x < in_.size(); ++x) {
      if (in_[x]) out.push_back(x);
    }
    return out;
  }

  /// Order-free digest of the membership, maintained incrementally.
  std::uint64_t digest() const { return hash_combine(sum_, count_); }

 private:
  std::vector<std::uint8_t> in_;
  std::size_t count_ = 0;
  std::uint64_t sum_ = 0;
};

/// Start of the segment owned by the unit at 0-based position k: the
/// triangular number 1 + 2 + ... + k, wrapped onto the list.
constexpr std::size_t segment_offset(std::size_t k, std::size_t list_size) {
  return list_size == 0 ? 0 : (k * (k + 1) / 2) % list_size;
}

/// n units with segments 1..n cover n(n+1)/2 slots.
constexpr bool is_dense(std::size_t n, std::size_t tasks) { return n * (n + 1) / 2 >= tasks; }

struct EpochInfo {
  std::size_t units = 0;
  std::size_t tasks = 0;
  bool dense = false;
};

/// Walks the epoch snapshot from `cursor` (wrapping) to the first task still
/// on TASKS that `done` does not contain. Advances the cursor past it.
/// Returns 0 when nothing qualifies.
template <class DonePred>
TaskId next_task(const std::vector<TaskId>& snap, const TaskBoard& tasks, std::size_t& cursor,
                 DonePred&& done) {
  const std::size_t n = snap.size();
  if (n == 0 || tasks.empty()) return 0;
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t pos = (cursor + step) % n;
    const TaskId x = snap[pos];
    if (tasks.contains(x) && !done(x)) {
      cursor = pos + 1;
      return x;
    }
  }
  return 0;
}

}  // namespace macdoall
