#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "macdoall/adversary.hpp"
#include "macdoall/engine.hpp"

namespace macdoall {

// ---------------------------------------------------------------------------
// Closed-form work bounds (log is log2)
// ---------------------------------------------------------------------------

namespace bounds {

inline double lg(std::uint32_t p) { return std::log2(static_cast<double>(p)); }
inline double root(std::uint32_t t) { return std::sqrt(static_cast<double>(t)); }

inline double two_lists(std::uint32_t p, std::uint32_t t, std::uint32_t f) {
  return t + p * root(t) + static_cast<double>(p) * std::min(f, t);
}
inline double robal(std::uint32_t p, std::uint32_t t) { return t + p * root(t) * lg(p); }
/// p / (p - f) taken as an exact rational before conversion.
inline double grubtech(std::uint32_t p, std::uint32_t t, std::uint32_t f) {
  const double ratio = static_cast<double>(p) / static_cast<double>(p - f);
  return t + p * root(t) + p * std::min(ratio, static_cast<double>(t)) * lg(p);
}
inline double grubtech_k(std::uint32_t p, std::uint32_t t, std::uint32_t f, std::uint32_t k) {
  const double ratio = static_cast<double>(p) / static_cast<double>(p - f);
  const double m = std::min({ratio, static_cast<double>(t), static_cast<double>(k)});
  return t + p * root(t) + p * m * lg(p);
}
inline double gilet(std::uint32_t p, std::uint32_t t) { return t + p * root(t) * lg(p) * lg(p); }

inline std::vector<std::string> names() {
  return {"two_lists", "groups_together", "robal", "grubtech", "grubtech_k", "gilet"};
}

/// Evaluates the named bound. groups_together shares the Two-Lists formula.
inline double evaluate(std::string_view name, std::uint32_t p, std::uint32_t t, std::uint32_t f,
                       std::uint32_t k) {
  if (name == "two_lists" || name == "groups_together") return two_lists(p, t, f);
  if (name == "robal") return robal(p, t);
  if (name == "grubtech") return grubtech(p, t, f);
  if (name == "grubtech_k") return grubtech_k(p, t, f, k);
  if (name == "gilet") return gilet(p, t);
  throw ConfigInvalid("unknown bound '" + std::string(name) + "'");
}

/// The bound a protocol is measured against by default.
inline std::string default_for(ProtocolKind protocol, AdversaryLabel label) {
  if (protocol == ProtocolKind::GrubTech &&
      (label == AdversaryLabel::KChainOrdered || label == AdversaryLabel::KThickOrdered)) {
    return "grubtech_k";
  }
  return std::string(to_string(protocol));
}

}  // namespace bounds

// ---------------------------------------------------------------------------
// Sweep configuration
// ---------------------------------------------------------------------------

/// How each cell's adversary is built. `order` overrides the default
/// order for the label (an antichain, chain or balanced chains over 1..f).
struct AdversaryTemplate {
  AdversaryLabel label = AdversaryLabel::WeaklyAdaptive;
  std::uint32_t delay = 0;
  std::shared_ptr<const Poset> order;

  AdversarySpec instantiate(std::uint32_t p, std::uint32_t f, std::uint32_t k) const {
    AdversarySpec spec;
    switch (label) {
      case AdversaryLabel::StronglyAdaptive: spec = AdversarySpec::strongly_adaptive(p, f); break;
      case AdversaryLabel::WeaklyAdaptive: spec = AdversarySpec::weakly_adaptive(f); break;
      case AdversaryLabel::LinearlyOrdered: spec = AdversarySpec::linearly_ordered(f); break;
      case AdversaryLabel::KChainOrdered:
      case AdversaryLabel::KThickOrdered:
        spec = AdversarySpec::k_chain_ordered(f, std::max<std::uint32_t>(k, 1));
        spec.label = label;
        spec.k = k;
        break;
      case AdversaryLabel::Oblivious: spec = AdversarySpec::oblivious(p, f); break;
      case AdversaryLabel::Delayed: spec = AdversarySpec::delayed(p, f, delay); break;
    }
    if (label != AdversaryLabel::Delayed) spec.delay = delay;
    if (order) spec.order = order;
    return spec;
  }
};

struct SweepConfig {
  ProtocolKind protocol = ProtocolKind::TwoLists;
  ChannelKind channel = ChannelKind::NoCD;
  ProtocolOptions protocol_options;
  AdversaryTemplate adversary;
  StrategyConfig strategy;
  std::vector<std::uint32_t> ps;
  std::vector<std::string> ts = {"p"};  // expressions in p
  std::vector<std::string> fs = {"0"};  // expressions in p
  std::vector<std::uint32_t> ks = {0};
  std::uint32_t seeds_per_cell = 100;
  std::uint64_t master_seed = 1;
  std::string bound;  // empty = bounds::default_for
  Round round_cap = 0;
};

struct Cell {
  std::size_t index = 0;
  std::uint32_t p = 0;
  std::uint32_t t = 0;
  std::uint32_t f = 0;
  std::uint32_t k = 0;
};

namespace detail {

class ExpressionParser {
 public:
  ExpressionParser(std::string_view text, std::int64_t p) : text_(text), p_(p) {}

  std::int64_t parse() {
    const auto v = sum();
    skip();
    if (pos_ != text_.size()) fail("trailing input");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigInvalid("bad expression '" + std::string(text_) + "': " + why);
  }
  void skip() {
    while (pos_ < text_.size() && text_[pos_] == ' ') ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::int64_t sum() {
    auto v = product();
    for (;;) {
      if (eat('+')) v += product();
      else if (eat('-')) v -= product();
      else return v;
    }
  }
  std::int64_t product() {
    auto v = unary();
    for (;;) {
      if (eat('*')) {
        v *= unary();
      } else if (eat('/')) {
        const auto d = unary();
        if (d == 0) fail("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }
  std::int64_t unary() {
    if (eat('-')) return -unary();
    if (eat('(')) {
      const auto v = sum();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (eat('p')) return p_;
    skip();
    if (pos_ >= text_.size() || text_[pos_] < '0' || text_[pos_] > '9') fail("expected a number or p");
    std::int64_t v = 0;
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
      v = v * 10 + (text_[pos_++] - '0');
    }
    return v;
  }

  std::string_view text_;
  std::int64_t p_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Integer expressions over the variable p: literals, p, + - * / (integer
/// division) and parentheses. "p-1", "p/2", "4*p".
inline std::int64_t eval_expression(std::string_view text, std::int64_t p) {
  return detail::ExpressionParser(text, p).parse();
}

inline std::string cell_label(const Cell& c) {
  return "cell " + std::to_string(c.index) + " (p=" + std::to_string(c.p) + ", t=" + std::to_string(c.t) +
         ", f=" + std::to_string(c.f) + ", k=" + std::to_string(c.k) + ")";
}

/// Expands the grid in p-major, then t, f, k order. Throws ConfigInvalid
/// naming the offending cell.
inline std::vector<Cell> expand_grid(const SweepConfig& cfg) {
  if (cfg.ps.empty()) throw ConfigInvalid("sweep grid has no p values");
  if (cfg.seeds_per_cell == 0) throw ConfigInvalid("seeds_per_cell must be positive");
  const bool uses_k = cfg.adversary.label == AdversaryLabel::KChainOrdered ||
                      cfg.adversary.label == AdversaryLabel::KThickOrdered;
  std::vector<Cell> cells;
  for (auto p : cfg.ps) {
    for (const auto& te : cfg.ts) {
      for (const auto& fe : cfg.fs) {
        for (auto k : cfg.ks) {
          Cell c;
          c.index = cells.size();
          c.p = p;
          const auto t = eval_expression(te, p);
          const auto f = eval_expression(fe, p);
          c.t = static_cast<std::uint32_t>(std::max<std::int64_t>(t, 0));
          c.f = static_cast<std::uint32_t>(std::max<std::int64_t>(f, 0));
          c.k = k;
          if (p < 1) throw ConfigInvalid(cell_label(c) + ": p must be at least 1");
          if (t < 1) throw ConfigInvalid(cell_label(c) + ": t must be at least 1");
          if (f < 0 || f > static_cast<std::int64_t>(p) - 1) {
            throw ConfigInvalid(cell_label(c) + ": f must lie in [0, p-1]");
          }
          if (uses_k && (k < 1 || (c.f > 0 && k > c.f))) {
            throw ConfigInvalid(cell_label(c) + ": k must lie in [1, f]");
          }
          cells.push_back(c);
        }
      }
    }
  }
  return cells;
}

/// Seed of run j in a cell: derived from master_seed + cell index.
inline std::uint64_t run_seed(std::uint64_t master_seed, std::size_t cell_index, std::uint32_t j) {
  return mix64(master_seed + cell_index) + j;
}

/// Worker count: hardware concurrency, capped by MACDOALL_THREADS.
inline unsigned worker_count() {
  unsigned n = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MACDOALL_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs job(i) for i in [0, n) on up to `workers` threads.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& job) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1U, workers), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

struct SeedRow {
  std::uint64_t seed = 0;
  Metrics metrics;
  bool reliable = true;
  std::vector<std::string> violations;
};

struct ResultRow {
  Cell cell;
  std::string protocol;
  std::string channel;
  std::string adversary;
  std::string strategy;
  std::vector<SeedRow> runs;
  double mean_work = 0;
  double median_work = 0;
  double max_work = 0;
  std::string bound_name;
  double bound_value = 0;
  double ratio = 0;
  std::size_t failures = 0;
};

inline void aggregate(ResultRow& row) {
  std::vector<double> w;
  w.reserve(row.runs.size());
  row.failures = 0;
  for (const auto& r : row.runs) {
    w.push_back(static_cast<double>(r.metrics.work));
    if (!r.reliable) ++row.failures;
  }
  if (w.empty()) return;
  double total = 0;
  for (double x : w) total += x;
  row.mean_work = total / static_cast<double>(w.size());
  std::sort(w.begin(), w.end());
  const std::size_t n = w.size();
  row.median_work = n % 2 == 1 ? w[n / 2] : (w[n / 2 - 1] + w[n / 2]) / 2;
  row.max_work = w.back();
  row.bound_value = bounds::evaluate(row.bound_name, row.cell.p, row.cell.t, row.cell.f, row.cell.k);
  row.ratio = row.mean_work / row.bound_value;
}

/// One simulation of a cell, checked for reliability.
inline SeedRow run_cell_seed(const SweepConfig& cfg, const Cell& cell, std::uint64_t seed) {
  RunSetup setup;
  setup.protocol = cfg.protocol;
  setup.channel = cfg.channel;
  setup.p = cell.p;
  setup.t = cell.t;
  setup.seed = seed;
  setup.round_cap = cfg.round_cap;
  setup.protocol_options = cfg.protocol_options;
  setup.keep_rounds = false;
  setup.record_digests = false;
  const auto spec = cfg.adversary.instantiate(cell.p, cell.f, cell.k);
  StrategyConfig sc = cfg.strategy;
  sc.seed = hash_combine(cfg.strategy.seed, seed);
  auto strategy = make_strategy(sc);
  const auto result = run(setup, spec, *strategy);
  SeedRow row;
  row.seed = seed;
  row.metrics = result.metrics;
  const auto report = verify_reliability(result.trace, cell.t);
  row.reliable = report.ok;
  row.violations = report.violations;
  return row;
}

/// Runs every (cell, seed) pair, in parallel across runs; rows come back
/// ordered by cell index and then seed regardless of scheduling.
inline std::vector<ResultRow> sweep(const SweepConfig& cfg, unsigned workers = worker_count()) {
  const auto cells = expand_grid(cfg);
  const std::string bound = cfg.bound.empty() ? bounds::default_for(cfg.protocol, cfg.adversary.label)
                                              : cfg.bound;
  bounds::evaluate(bound, 2, 1, 0, 1);  // rejects unknown names up front
  std::vector<ResultRow> rows(cells.size());
  for (const auto& c : cells) {
    auto& row = rows[c.index];
    row.cell = c;
    row.protocol = std::string(to_string(cfg.protocol));
    row.channel = std::string(to_string(cfg.channel));
    row.adversary = cfg.adversary.instantiate(c.p, c.f, c.k).describe();
    row.strategy = canonical_strategy_name(cfg.strategy.name);
    row.bound_name = bound;
    row.runs.resize(cfg.seeds_per_cell);
  }
  const std::size_t per = cfg.seeds_per_cell;
  parallel_for(cells.size() * per, workers, [&](std::size_t i) {
    const auto& c = cells[i / per];
    const auto j = static_cast<std::uint32_t>(i % per);
    rows[c.index].runs[j] = run_cell_seed(cfg, c, run_seed(cfg.master_seed, c.index, j));
  });
  for (auto& row : rows) aggregate(row);
  return rows;
}

struct FitResult {
  double estimate = 0;  // largest ratio: the smallest constant that covers every cell
  double min_ratio = 0;
  double max_ratio = 0;
  double spread = 0;    // max / min
  std::size_t cells = 0;

  bool holds(double threshold = 10.0) const { return spread < threshold; }
};

inline FitResult fit_ratio(const std::vector<double>& ratios) {
  if (ratios.size() < 3) {
    throw InsufficientCells("need at least 3 cells, got " + std::to_string(ratios.size()));
  }
  FitResult fit;
  fit.cells = ratios.size();
  fit.min_ratio = *std::min_element(ratios.begin(), ratios.end());
  fit.max_ratio = *std::max_element(ratios.begin(), ratios.end());
  if (!(fit.min_ratio > 0) || !std::isfinite(fit.max_ratio)) {
    throw ConfigInvalid("ratios must be finite and positive");
  }
  fit.estimate = fit.max_ratio;
  fit.spread = fit.max_ratio / fit.min_ratio;
  return fit;
}

inline FitResult fit_ratio(const std::vector<ResultRow>& rows) {
  std::vector<double> ratios;
  ratios.reserve(rows.size());
  for (const auto& r : rows) ratios.push_back(r.ratio);
  return fit_ratio(ratios);
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader = "protocol,channel,adversary,strategy,p,t,f,k,seed,work,time,energy";

/// One line per run, cells in index order.
inline std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& row : rows) {
    for (const auto& r : row.runs) {
      out << row.protocol << ',' << row.channel << ',' << row.adversary << ',' << row.strategy << ','
          << row.cell.p << ',' << row.cell.t << ',' << row.cell.f << ',' << row.cell.k << ',' << r.seed
          << ',' << r.metrics.work << ',' << r.metrics.time << ',' << r.metrics.energy << '\n';
    }
  }
  return out.str();
}

inline nlohmann::ordered_json to_json(const FitResult& fit) {
  nlohmann::ordered_json j;
  j["estimate"] = fit.estimate;
  j["min_ratio"] = fit.min_ratio;
  j["max_ratio"] = fit.max_ratio;
  j["spread"] = fit.spread;
  j["cells"] = fit.cells;
  return j;
}

inline nlohmann::ordered_json report_json(const std::vector<ResultRow>& rows) {
  nlohmann::ordered_json j;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json r;
    r["cell"] = row.cell.index;
    r["protocol"] = row.protocol;
    r["channel"] = row.channel;
    r["adversary"] = row.adversary;
    r["strategy"] = row.strategy;
    r["p"] = row.cell.p;
    r["t"] = row.cell.t;
    r["f"] = row.cell.f;
    r["k"] = row.cell.k;
    r["seeds"] = row.runs.size();
    r["mean_work"] = row.mean_work;
    r["median_work"] = row.median_work;
    r["max_work"] = row.max_work;
    r["bound"] = row.bound_name;
    r["bound_value"] = row.bound_value;
    r["ratio"] = row.ratio;
    r["failures"] = row.failures;
    arr.push_back(std::move(r));
  }
  j["rows"] = std::move(arr);
  if (rows.size() >= 3) j["fit"] = to_json(fit_ratio(rows));
  return j;
}

}  // namespace macdoall
