#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "macdoall/rng.hpp"
#include "macdoall/types.hpp"

namespace macdoall {

/// Fixed-width bit row over element indices of a poset.
class BitRow {
 public:
  BitRow() = default;
  explicit BitRow(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

  std::size_t size() const { return n_; }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i) { words_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

  BitRow& operator|=(const BitRow& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
    return *this;
  }

  /// True iff every bit set here is also set in `other`.
  bool subset_of(const BitRow& other) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      if (words_[w] & ~other.words_[w]) return false;
    }
    return true;
  }

  bool any() const {
    return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
  }

  bool operator==(const BitRow&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

using Relation = std::pair<StationId, StationId>;

/// A finite partial order over station ids, stored as its transitive reduction
/// plus a strict-reachability table (row a has bit b iff a precedes b).
///
/// Immutable once built.
class Poset {
 public:
  Poset() = default;

  /// Transitive reduction of the closure of `relations`.
  static Poset build(std::vector<StationId> elements, const std::vector<Relation>& relations) {
    Poset p;
    std::sort(elements.begin(), elements.end());
    elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
    p.elements_ = std::move(elements);
    const std::size_t n = p.elements_.size();
    for (std::size_t i = 0; i < n; ++i) p.index_[p.elements_[i]] = i;

    std::vector<std::vector<std::size_t>> succ(n);
    for (const auto& [a, b] : relations) {
      const auto ia = p.find(a);
      const auto ib = p.find(b);
      if (ia == npos || ib == npos) {
        throw UnknownElement("relation (" + std::to_string(a) + "," + std::to_string(b) +
                             ") mentions an id outside the element set");
      }
      if (ia == ib) throw CycleDetected("element " + std::to_string(a) + " precedes itself");
      succ[ia].push_back(ib);
    }
    for (auto& s : succ) {
      std::sort(s.begin(), s.end());
      s.erase(std::unique(s.begin(), s.end()), s.end());
    }

    // Kahn with a min-heap so that ties always break by station id.
    std::vector<std::size_t> indeg(n, 0);
    for (const auto& s : succ) {
      for (auto b : s) ++indeg[b];
    }
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i) {
      if (indeg[i] == 0) ready.push(i);
    }
    std::vector<std::size_t> topo;
    topo.reserve(n);
    while (!ready.empty()) {
      const auto i = ready.top();
      ready.pop();
      topo.push_back(i);
      for (auto b : succ[i]) {
        if (--indeg[b] == 0) ready.push(b);
      }
    }
    if (topo.size() != n) throw CycleDetected("relation closure is cyclic");
    p.topo_ = std::move(topo);

    // Reachability in reverse topological order.
    p.down_.assign(n, BitRow(n));
    for (auto it = p.topo_.rbegin(); it != p.topo_.rend(); ++it) {
      const auto a = *it;
      for (auto b : succ[a]) {
        p.down_[a].set(b);
        p.down_[a] |= p.down_[b];
      }
    }
    p.up_.assign(n, BitRow(n));
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (p.down_[a].test(b)) p.up_[b].set(a);
      }
    }

    // (a,b) is a cover iff no c sits strictly between them.
    p.lower_covers_.assign(n, {});
    for (std::size_t a = 0; a < n; ++a) {
      for (auto b : succ[a]) {
        bool implied = false;
        for (auto c : succ[a]) {
          if (c != b && p.down_[c].test(b)) {
            implied = true;
            break;
          }
        }
        if (!implied) p.lower_covers_[b].push_back(a);
      }
    }
    for (std::size_t b = 0; b < n; ++b) {
      std::sort(p.lower_covers_[b].begin(), p.lower_covers_[b].end());
      for (auto a : p.lower_covers_[b]) p.covers_.emplace_back(p.elements_[a], p.elements_[b]);
    }
    std::sort(p.covers_.begin(), p.covers_.end());
    return p;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  const std::vector<StationId>& elements() const { return elements_; }
  const std::vector<Relation>& covers() const { return covers_; }
  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }

  std::size_t find(StationId id) const {
    const auto it = index_.find(id);
    return it == index_.end() ? npos : it->second;
  }
  bool contains(StationId id) const { return find(id) != npos; }
  StationId element(std::size_t index) const { return elements_[index]; }

  /// Strict precedence a < b.
  bool precedes(StationId a, StationId b) const {
    const auto ia = require(a);
    const auto ib = require(b);
    return down_[ia].test(ib);
  }
  bool comparable(StationId a, StationId b) const {
    return a == b || precedes(a, b) || precedes(b, a);
  }

  /// Strict predecessors as an index row.
  const BitRow& predecessor_row(std::size_t index) const { return up_[index]; }
  const std::vector<std::size_t>& lower_covers(std::size_t index) const {
    return lower_covers_[index];
  }

  std::vector<StationId> predecessors(StationId id) const {
    const auto& row = up_[require(id)];
    std::vector<StationId> out;
    for (std::size_t i = 0; i < size(); ++i) {
      if (row.test(i)) out.push_back(elements_[i]);
    }
    return out;
  }

  /// Deterministic linear extension (ties by id).
  std::vector<StationId> topological_order() const {
    std::vector<StationId> out;
    out.reserve(topo_.size());
    for (auto i : topo_) out.push_back(elements_[i]);
    return out;
  }
  const std::vector<std::size_t>& topological_indices() const { return topo_; }

  bool is_antichain() const { return covers_.empty(); }
  bool is_chain() const { return size() <= 1 || (covers_.size() + 1 == size() && is_total()); }

  BitRow empty_mask() const { return BitRow(size()); }

  std::size_t require(StationId id) const {
    const auto i = find(id);
    if (i == npos) throw NotFaultProne("station " + std::to_string(id) + " is not in the order");
    return i;
  }

 private:
  bool is_total() const {
    for (std::size_t a = 0; a < size(); ++a) {
      if (down_[a].count() + up_[a].count() + 1 != size()) return false;
    }
    return true;
  }

  std::vector<StationId> elements_;
  std::map<StationId, std::size_t> index_;
  std::vector<Relation> covers_;
  std::vector<std::size_t> topo_;
  std::vector<BitRow> down_;
  std::vector<BitRow> up_;
  std::vector<std::vector<std::size_t>> lower_covers_;
};

/// Legal iff every strict predecessor of `candidate` is in `crashed`.
inline bool crash_is_legal(const Poset& poset, const BitRow& crashed_mask, StationId candidate) {
  return poset.predecessor_row(poset.require(candidate)).subset_of(crashed_mask);
}

inline bool crash_is_legal(const Poset& poset, const std::set<StationId>& crashed,
                           StationId candidate) {
  const auto idx = poset.require(candidate);
  BitRow mask = poset.empty_mask();
  for (auto s : crashed) {
    const auto i = poset.find(s);
    if (i != Poset::npos) mask.set(i);
  }
  return poset.predecessor_row(idx).subset_of(mask);
}

/// Validates a same-round batch: members are taken in topological order and
/// each is checked with the earlier members counted as crashed. Returns the
/// first offender, or 0 if the batch is legal.
inline StationId first_illegal_in_batch(const Poset& poset, BitRow crashed_mask,
                                        std::vector<StationId> batch) {
  for (auto s : batch) {
    if (!poset.contains(s)) return s;
  }
  std::vector<std::size_t> rank(poset.size(), 0);
  const auto& topo = poset.topological_indices();
  for (std::size_t r = 0; r < topo.size(); ++r) rank[topo[r]] = r;
  std::sort(batch.begin(), batch.end(), [&](StationId a, StationId b) {
    return rank[poset.find(a)] < rank[poset.find(b)];
  });
  for (auto s : batch) {
    const auto i = poset.find(s);
    if (!poset.predecessor_row(i).subset_of(crashed_mask)) return s;
    crashed_mask.set(i);
  }
  return 0;
}

using ChainDecomposition = std::vector<std::vector<StationId>>;

inline constexpr std::size_t kExactSolveCap = 20;

namespace detail {

/// Maximum matching in the split graph (left a -> right b iff a < b).
/// match_right[b] is the left partner of b, or npos.
struct SplitMatching {
  std::vector<std::size_t> match_left;
  std::vector<std::size_t> match_right;
  std::size_t size = 0;
};

inline SplitMatching max_split_matching(const Poset& poset) {
  const std::size_t n = poset.size();
  constexpr auto none = Poset::npos;
  SplitMatching m{std::vector<std::size_t>(n, none), std::vector<std::size_t>(n, none), 0};
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (poset.predecessor_row(b).test(a)) adj[a].push_back(b);
    }
  }
  std::vector<char> seen;
  std::function<bool(std::size_t)> augment = [&](std::size_t a) {
    for (auto b : adj[a]) {
      if (seen[b]) continue;
      seen[b] = 1;
      if (m.match_right[b] == none || augment(m.match_right[b])) {
        m.match_left[a] = b;
        m.match_right[b] = a;
        return true;
      }
    }
    return false;
  };
  for (std::size_t a = 0; a < n; ++a) {
    seen.assign(n, 0);
    if (augment(a)) ++m.size;
  }
  return m;
}

inline void check_cap(const Poset& poset, std::size_t cap) {
  if (poset.size() > cap) {
    throw TooLarge(std::to_string(poset.size()) + " elements exceeds exact-solve cap " +
                   std::to_string(cap));
  }
}

}  // namespace detail

/// Minimum chain partition. Chains are listed in order of their least element.
inline ChainDecomposition min_chain_cover(const Poset& poset, std::size_t cap = kExactSolveCap) {
  detail::check_cap(poset, cap);
  const auto m = detail::max_split_matching(poset);
  ChainDecomposition chains;
  for (std::size_t b = 0; b < poset.size(); ++b) {
    if (m.match_right[b] != Poset::npos) continue;  // not a chain head
    std::vector<StationId> chain;
    for (auto cur = b; cur != Poset::npos; cur = m.match_left[cur]) {
      chain.push_back(poset.element(cur));
    }
    chains.push_back(std::move(chain));
  }
  return chains;
}

/// Maximum antichain via König: the complement of a minimum vertex cover of
/// the split graph, folded back onto elements.
inline std::vector<StationId> max_antichain(const Poset& poset, std::size_t cap = kExactSolveCap) {
  detail::check_cap(poset, cap);
  const std::size_t n = poset.size();
  const auto m = detail::max_split_matching(poset);
  // Alternating BFS from unmatched left vertices.
  std::vector<char> left_seen(n, 0), right_seen(n, 0);
  std::queue<std::size_t> q;
  for (std::size_t a = 0; a < n; ++a) {
    if (m.match_left[a] == Poset::npos) {
      left_seen[a] = 1;
      q.push(a);
    }
  }
  while (!q.empty()) {
    const auto a = q.front();
    q.pop();
    for (std::size_t b = 0; b < n; ++b) {
      if (!poset.predecessor_row(b).test(a) || right_seen[b]) continue;
      right_seen[b] = 1;
      const auto a2 = m.match_right[b];
      if (a2 != Poset::npos && !left_seen[a2]) {
        left_seen[a2] = 1;
        q.push(a2);
      }
    }
  }
  // Cover = (left unseen) + (right seen). Antichain = elements in neither.
  std::vector<StationId> out;
  for (std::size_t x = 0; x < n; ++x) {
    if (left_seen[x] && !right_seen[x]) out.push_back(poset.element(x));
  }
  return out;
}

inline std::size_t thickness(const Poset& poset, std::size_t cap = kExactSolveCap) {
  if (poset.is_antichain()) return poset.size();
  if (poset.is_chain()) return poset.empty() ? 0 : 1;
  return max_antichain(poset, cap).size();
}

// ---------------------------------------------------------------------------
// Generators. Elements are always {first, ..., first + f - 1}.
// ---------------------------------------------------------------------------

namespace generate {

inline std::vector<StationId> ids(std::uint32_t f, StationId first = 1) {
  std::vector<StationId> out(f);
  for (std::uint32_t i = 0; i < f; ++i) out[i] = first + i;
  return out;
}

inline Poset chain(std::uint32_t f, StationId first = 1) {
  std::vector<Relation> rel;
  for (std::uint32_t i = 1; i < f; ++i) rel.emplace_back(first + i - 1, first + i);
  return Poset::build(ids(f, first), rel);
}

inline Poset antichain(std::uint32_t f, StationId first = 1) { return Poset::build(ids(f, first), {}); }

inline Poset k_chains(const std::vector<std::uint32_t>& lengths, std::uint32_t f,
                      StationId first = 1) {
  std::uint64_t sum = 0;
  for (auto l : lengths) sum += l;
  if (sum != f) {
    throw BadLengths("chain lengths sum to " + std::to_string(sum) + ", expected " +
                     std::to_string(f));
  }
  std::vector<Relation> rel;
  StationId next = first;
  for (auto l : lengths) {
    for (std::uint32_t i = 1; i < l; ++i) rel.emplace_back(next + i - 1, next + i);
    next += l;
  }
  return Poset::build(ids(f, first), rel);
}

/// Chains of the given lengths laid out back to back from `first`.
inline Poset chains_of(const std::vector<std::uint32_t>& lengths, StationId first = 1) {
  std::uint32_t f = 0;
  for (auto l : lengths) f += l;
  return k_chains(lengths, f, first);
}

/// k near-equal chains covering f elements (longer chains first).
inline std::vector<std::uint32_t> balanced_lengths(std::uint32_t f, std::uint32_t k) {
  if (k == 0) throw BadLengths("k must be positive");
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < k; ++i) {
    const std::uint32_t l = f / k + (i < f % k ? 1 : 0);
    if (l > 0) out.push_back(l);
  }
  return out;
}

/// Random DAG: a seeded shuffle fixes a linear extension, then each forward
/// pair is related with probability `density`.
inline Poset random(std::uint32_t f, double density, std::uint64_t seed, StationId first = 1) {
  if (!(density >= 0.0 && density <= 1.0)) throw ConfigInvalid("density must lie in [0,1]");
  Rng rng(seed);
  auto order = ids(f, first);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_below(i)]);
  }
  std::vector<Relation> rel;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (rng.uniform01() < density) rel.emplace_back(order[i], order[j]);
    }
  }
  return Poset::build(ids(f, first), rel);
}

}  // namespace generate

}  // namespace macdoall
