// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. `acceptance --write-golden` regenerates the golden
// traces instead (only do that when the trace format changes on purpose).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "macdoall/channel.hpp"
#include "macdoall/engine.hpp"
#include "macdoall/harness.hpp"
#include "macdoall/poset.hpp"
#include "macdoall/verify.hpp"

using namespace macdoall;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;
  std::function<Verdict()> body;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const std::vector<ProtocolKind> kProtocols = {ProtocolKind::TwoLists, ProtocolKind::GroupsTogether,
                                              ProtocolKind::Robal, ProtocolKind::GrubTech,
                                              ProtocolKind::Gilet};

ChannelKind channel_for(ProtocolKind k) {
  return k == ProtocolKind::GroupsTogether ? ChannelKind::CD : ChannelKind::NoCD;
}

// ---------------------------------------------------------------------------
// 1. channel table
// ---------------------------------------------------------------------------

Verdict channel_table() {
  using K = Feedback::Kind;
  // expected[kind][count index] for counts {0, 1, 2, 5}
  const std::map<ChannelKind, std::vector<K>> expected = {
      {ChannelKind::NoCD, {K::Silence, K::Single, K::Silence, K::Silence}},
      {ChannelKind::CD, {K::Silence, K::Single, K::Collision, K::Collision}},
      {ChannelKind::Beeping, {K::Silence, K::Beep, K::Beep, K::Beep}},
  };
  const std::vector<std::size_t> counts = {0, 1, 2, 5};
  int ok = 0, total = 0;
  for (const auto& [kind, row] : expected) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      std::vector<Transmission> tx;
      for (std::size_t s = 0; s < counts[i]; ++s) tx.push_back({static_cast<StationId>(s + 3), 100 + s});
      const auto fb = resolve(kind, tx);
      bool match = fb.kind == row[i];
      if (match && fb.kind == K::Single) match = fb.payload == 100;
      if (match && fb.kind != K::Single) match = fb.payload == 0;
      ok += match;
      ++total;
    }
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " cells match"};
}

// ---------------------------------------------------------------------------
// 2. Dilworth equality against brute force
// ---------------------------------------------------------------------------

Verdict dilworth() {
  Rng rng(20261016);
  int agree = 0;
  const int trials = 1000;
  std::string first_bad;
  for (int trial = 0; trial < trials; ++trial) {
    const auto n = static_cast<std::uint32_t>(1 + rng.uniform_below(8));
    const double density = rng.uniform01();
    // Relations only go from a lower to a higher shuffled position, so the
    // graph is acyclic.
    std::vector<StationId> ids(n);
    for (std::uint32_t i = 0; i < n; ++i) ids[i] = i + 1;
    for (std::uint32_t i = n; i > 1; --i) std::swap(ids[i - 1], ids[rng.uniform_below(i)]);
    std::vector<Relation> rel;
    bool reach[9][9] = {};
    for (std::uint32_t a = 0; a < n; ++a) {
      for (std::uint32_t b = a + 1; b < n; ++b) {
        if (rng.uniform01() < density) {
          rel.emplace_back(ids[a], ids[b]);
          reach[ids[a]][ids[b]] = true;
        }
      }
    }
    for (std::uint32_t k = 1; k <= n; ++k)
      for (std::uint32_t i = 1; i <= n; ++i)
        for (std::uint32_t j = 1; j <= n; ++j) reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);
    auto comparable = [&](StationId a, StationId b) { return reach[a][b] || reach[b][a]; };

    std::size_t brute = 0;
    for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
      bool anti = true;
      for (std::uint32_t i = 0; i < n && anti; ++i)
        for (std::uint32_t j = i + 1; j < n && anti; ++j)
          if ((mask >> i & 1U) && (mask >> j & 1U) && comparable(i + 1, j + 1)) anti = false;
      if (anti) brute = std::max<std::size_t>(brute, static_cast<std::size_t>(__builtin_popcount(mask)));
    }

    std::vector<StationId> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    const auto poset = Poset::build(sorted, rel);
    const auto cover = min_chain_cover(poset);
    const auto anti = max_antichain(poset);

    bool valid = true;
    std::set<StationId> seen;
    for (const auto& chain : cover) {
      for (std::size_t i = 0; i < chain.size(); ++i) {
        valid = valid && seen.insert(chain[i]).second;
        for (std::size_t j = i + 1; j < chain.size(); ++j) valid = valid && comparable(chain[i], chain[j]);
      }
    }
    valid = valid && seen.size() == n;
    for (std::size_t i = 0; i < anti.size(); ++i)
      for (std::size_t j = i + 1; j < anti.size(); ++j) valid = valid && !comparable(anti[i], anti[j]);

    if (valid && cover.size() == brute && anti.size() == brute) {
      ++agree;
    } else if (first_bad.empty()) {
      first_bad = "; first mismatch at trial " + std::to_string(trial);
    }
  }
  return {agree == trials, std::to_string(agree) + "/" + std::to_string(trials) + " posets agree" + first_bad};
}

// ---------------------------------------------------------------------------
// 3. reliability matrix
// ---------------------------------------------------------------------------

AdversarySpec matrix_adversary(ProtocolKind k, std::uint32_t p, std::uint32_t f) {
  switch (k) {
    case ProtocolKind::TwoLists:
    case ProtocolKind::GroupsTogether: return AdversarySpec::strongly_adaptive(p, f);
    case ProtocolKind::Robal: return AdversarySpec::linearly_ordered(f);
    case ProtocolKind::GrubTech: return AdversarySpec::weakly_adaptive(f);
    case ProtocolKind::Gilet: return AdversarySpec::delayed(p, f, 1);
  }
  return AdversarySpec::none();
}

Verdict reliability_matrix() {
  const std::vector<std::string> strategies = {"noop", "big_bang", "lone_transmitter_killer", "leader_hunter",
                                               "frontier_random"};
  const std::vector<std::uint32_t> ps = {4, 8, 16, 32};
  const std::vector<std::uint32_t> ts = {4, 16, 64, 256};
  constexpr std::uint32_t seeds = 100;

  struct Job {
    ProtocolKind protocol;
    std::string strategy;
    std::uint32_t p, t, f;
  };
  std::vector<Job> jobs;
  for (auto k : kProtocols)
    for (const auto& s : strategies)
      for (auto p : ps)
        for (auto t : ts)
          for (auto f : {0U, p / 2, p - 1}) jobs.push_back({k, s, p, t, f});

  std::mutex mu;
  std::size_t failures = 0;
  std::vector<std::string> examples;
  parallel_for(jobs.size() * seeds, worker_count(), [&](std::size_t i) {
    const auto& job = jobs[i / seeds];
    const std::uint64_t seed = run_seed(3, i / seeds, static_cast<std::uint32_t>(i % seeds));
    RunSetup setup;
    setup.protocol = job.protocol;
    setup.channel = channel_for(job.protocol);
    setup.p = job.p;
    setup.t = job.t;
    setup.seed = seed;
    setup.keep_rounds = false;
    setup.record_digests = false;
    StrategyConfig sc;
    sc.name = job.strategy;
    sc.seed = hash_combine(seed, 77);
    // Spread the single burst over the run instead of always hitting round 1.
    sc.round = 1 + static_cast<Round>(seed % (2 * job.t + 1));
    auto strategy = make_strategy(sc);
    const auto result = run(setup, matrix_adversary(job.protocol, job.p, job.f), *strategy);
    const auto report = verify_reliability(result.trace, job.t);
    if (!report.ok) {
      std::lock_guard lock(mu);
      ++failures;
      if (examples.size() < 3) {
        examples.push_back(std::string(to_string(job.protocol)) + "/" + job.strategy + " p=" +
                           std::to_string(job.p) + " t=" + std::to_string(job.t) + " f=" +
                           std::to_string(job.f) + " seed=" + std::to_string(seed) + ": " +
                           (report.violations.empty() ? "?" : report.violations.front()));
      }
    }
  });
  std::string detail = std::to_string(jobs.size() * seeds - failures) + "/" +
                       std::to_string(jobs.size() * seeds) + " runs reliable";
  for (const auto& e : examples) detail += "; " + e;
  return {failures == 0, detail};
}

// ---------------------------------------------------------------------------
// 4. Two-Lists deterministic bound
// ---------------------------------------------------------------------------

Verdict two_lists_bound() {
  const std::vector<std::uint32_t> grid = {16, 32, 64, 128, 256, 512, 1024};
  double lo = 1e300, hi = 0;
  double worst_bang = 0;
  std::string worst_cell;
  for (auto p : grid) {
    for (auto t : grid) {
      RunSetup setup;
      setup.p = p;
      setup.t = t;
      setup.keep_rounds = false;
      setup.record_digests = false;
      const auto free = run(setup);
      const double ratio = static_cast<double>(free.metrics.work) /
                           (static_cast<double>(t) + static_cast<double>(p) * static_cast<double>(ceil_sqrt(t)));
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      for (auto f : {p / 2, p - 1}) {
        BigBang bang(1);
        const auto crashed = run(setup, AdversarySpec::strongly_adaptive(p, f), bang);
        const double r = static_cast<double>(crashed.metrics.work) / (3.0 * bounds::two_lists(p, t, f));
        if (r > worst_bang) {
          worst_bang = r;
          worst_cell = "p=" + std::to_string(p) + " t=" + std::to_string(t) + " f=" + std::to_string(f) +
                       " work=" + std::to_string(crashed.metrics.work);
        }
      }
    }
  }
  const double spread = hi / lo;
  const bool pass = spread < 4 && worst_bang <= 1.0;
  return {pass, "failure-free spread " + fmt("%.3f", spread) + " (limit 4); BigBang worst work/(3*bound) " +
                    fmt("%.3f", worst_bang) + " at " + worst_cell + " (limit 1)"};
}

// ---------------------------------------------------------------------------
// 5-7. randomized bound fits
// ---------------------------------------------------------------------------

std::string ratios_of(const std::vector<ResultRow>& rows) {
  std::string s;
  for (const auto& r : rows) {
    if (!s.empty()) s += ' ';
    s += "(" + std::to_string(r.cell.p) + "," + std::to_string(r.cell.t) + "," + std::to_string(r.cell.f) +
         ")=" + fmt("%.2f", r.ratio);
  }
  return s;
}

std::size_t failures_of(const std::vector<ResultRow>& rows) {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.failures;
  return n;
}

Verdict robal_fit() {
  SweepConfig cfg;
  cfg.protocol = ProtocolKind::Robal;
  cfg.ps = {64, 128, 256, 512};
  cfg.ts = {"p", "4*p"};
  cfg.seeds_per_cell = 100;
  cfg.master_seed = 5;
  cfg.adversary.label = AdversaryLabel::StronglyAdaptive;
  cfg.fs = {"0"};
  const auto free = sweep(cfg);

  cfg.adversary.label = AdversaryLabel::LinearlyOrdered;
  cfg.strategy.name = "lone_transmitter_killer";
  cfg.fs = {"p-1"};
  const auto chain = sweep(cfg);

  std::vector<ResultRow> all = free;
  all.insert(all.end(), chain.begin(), chain.end());
  const auto fit = fit_ratio(all);
  const auto bad = failures_of(all);
  return {fit.spread < 10 && bad == 0, "spread " + fmt("%.3f", fit.spread) + " over " +
                                          std::to_string(fit.cells) + " cells; " + std::to_string(bad) +
                                          " unreliable; free: " + ratios_of(free) + "; chain: " + ratios_of(chain)};
}

Verdict grubtech_fit() {
  SweepConfig cfg;
  cfg.protocol = ProtocolKind::GrubTech;
  cfg.ps = {64, 128};
  cfg.ts = {"p"};
  cfg.fs = {"p/2", "p-p/8"};
  cfg.seeds_per_cell = 100;
  cfg.master_seed = 6;
  cfg.adversary.label = AdversaryLabel::WeaklyAdaptive;
  cfg.strategy.name = "leader_hunter";
  const auto anti = sweep(cfg);
  const auto fit_anti = fit_ratio(anti);

  cfg.adversary.label = AdversaryLabel::KChainOrdered;
  cfg.ks = {4};
  const auto chains = sweep(cfg);
  const auto fit_chains = fit_ratio(chains);
  const auto bad = failures_of(anti) + failures_of(chains);

  return {fit_anti.spread < 10 && fit_chains.spread < 10 && bad == 0,
          "antichain spread " + fmt("%.3f", fit_anti.spread) + " [" + ratios_of(anti) + "]; 4-chains spread " +
              fmt("%.3f", fit_chains.spread) + " [" + ratios_of(chains) + "]; " + std::to_string(bad) +
              " unreliable"};
}

Verdict gilet_fit() {
  SweepConfig cfg;
  cfg.protocol = ProtocolKind::Gilet;
  cfg.ps = {64, 128};
  cfg.ts = {"p"};
  cfg.fs = {"p-1"};
  cfg.seeds_per_cell = 100;
  cfg.master_seed = 7;
  cfg.adversary.label = AdversaryLabel::Delayed;
  cfg.adversary.delay = 1;
  cfg.strategy.name = "lone_transmitter_killer";
  const auto rows = sweep(cfg);
  // Two cells only, so the spread is taken directly.
  double lo = 1e300, hi = 0;
  for (const auto& r : rows) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  const auto bad = failures_of(rows);
  return {hi / lo < 10 && bad == 0,
          "spread " + fmt("%.3f", hi / lo) + " [" + ratios_of(rows) + "]; " + std::to_string(bad) + " unreliable"};
}

// ---------------------------------------------------------------------------
// 8. probability lemmas
// ---------------------------------------------------------------------------

Verdict probability_lemmas() {
  std::vector<StatCheck> checks;
  checks.push_back(check_single_transmit_bound(64));
  checks.push_back(check_leader_crash_tail(400, 20, 10000, 8));
  for (std::uint32_t f : {0U, 32U, 63U}) checks.push_back(check_elect_leader_rounds(64, f, 1000, 80 + f));
  bool all = true;
  std::string detail;
  for (const auto& c : checks) {
    all = all && c.pass;
    detail += (detail.empty() ? "" : "; ") + c.name + " " + fmt("%.4f", c.statistic) +
              (c.lower_bound ? " >= " : " <= ") + fmt("%.4f", c.bound) +
              (c.lower_bound ? " - " : " + ") + fmt("%.4f", c.margin) + (c.pass ? "" : " FAILED");
  }
  return {all, detail};
}

// ---------------------------------------------------------------------------
// 9. beeping equivalence
// ---------------------------------------------------------------------------

Verdict beeping_equivalence() {
  int cases = 0, same = 0;
  for (std::uint32_t p : {4U, 8U, 16U, 32U}) {
    for (std::uint32_t t : {4U, 16U, 64U, 256U}) {
      for (std::uint32_t seed = 0; seed < 25; ++seed) {
        Rng rng(hash_combine(p * 1000 + t, seed));
        const auto f = static_cast<std::uint32_t>(rng.uniform_below(p));
        std::vector<StationId> ids(p);
        for (std::uint32_t i = 0; i < p; ++i) ids[i] = i + 1;
        std::map<Round, std::vector<StationId>> schedule;
        for (std::uint32_t i = 0; i < f; ++i) {
          std::swap(ids[i], ids[i + rng.uniform_below(p - i)]);
          schedule[1 + static_cast<Round>(rng.uniform_below(4 * t))].push_back(ids[i]);
        }
        std::vector<bool> decisions[2];
        Metrics metrics[2];
        int idx = 0;
        for (auto ch : {ChannelKind::CD, ChannelKind::Beeping}) {
          RunSetup setup;
          setup.protocol = ProtocolKind::GroupsTogether;
          setup.channel = ch;
          setup.p = p;
          setup.t = t;
          setup.seed = seed;
          setup.keep_rounds = false;
          GroupsTogether protocol;
          ObliviousSchedule strategy(schedule);
          metrics[idx] = run(setup, protocol, AdversarySpec::oblivious(p, f), strategy).metrics;
          decisions[idx] = protocol.decisions();
          ++idx;
        }
        ++cases;
        same += decisions[0] == decisions[1] && metrics[0].work == metrics[1].work;
      }
    }
  }
  return {same == cases, std::to_string(same) + "/" + std::to_string(cases) + " schedules identical"};
}

// ---------------------------------------------------------------------------
// 10. golden traces
// ---------------------------------------------------------------------------

struct GoldenCase {
  std::string file;
  ProtocolKind protocol;
  std::uint32_t p, t;
  std::uint64_t seed;
};

const std::vector<GoldenCase> kGolden = {
    {"two_lists_p1_t1.jsonl", ProtocolKind::TwoLists, 1, 1, 0},
    {"grubtech_p4_t4_s11.jsonl", ProtocolKind::GrubTech, 4, 4, 11},
    {"gilet_p4_t16_s11.jsonl", ProtocolKind::Gilet, 4, 16, 11},
};

std::string golden_trace(const GoldenCase& g) {
  RunSetup setup;
  setup.protocol = g.protocol;
  setup.p = g.p;
  setup.t = g.t;
  setup.seed = g.seed;
  return trace_to_jsonl(run(setup).trace);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict golden_traces() {
  int ok = 0;
  std::string detail;
  for (const auto& g : kGolden) {
    const auto expected = read_file(std::string(MACDOALL_GOLDEN_DIR) + "/" + g.file);
    const auto actual = golden_trace(g);
    const bool match = !expected.empty() && expected == actual && golden_trace(g) == actual;
    ok += match;
    if (!match) detail += "; " + g.file + " differs";
  }
  return {ok == static_cast<int>(kGolden.size()),
          std::to_string(ok) + "/" + std::to_string(kGolden.size()) + " traces byte-identical" + detail};
}

int write_golden() {
  for (const auto& g : kGolden) {
    const auto path = std::string(MACDOALL_GOLDEN_DIR) + "/" + g.file;
    std::ofstream(path, std::ios::binary) << golden_trace(g);
    std::cout << "wrote " << path << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// 11. oracle floor
// ---------------------------------------------------------------------------

Verdict oracle_floor() {
  std::size_t runs = 0, below = 0, unreliable = 0;
  std::string example;
  std::map<std::vector<Round>, std::uint64_t> oracle_cache;
  for (auto kind : kProtocols) {
    for (std::uint32_t p = 1; p <= 3; ++p) {
      for (std::uint32_t t = 1; t <= 3; ++t) {
        RunSetup setup;
        setup.protocol = kind;
        setup.channel = channel_for(kind);
        setup.p = p;
        setup.t = t;
        setup.seed = 1;
        setup.keep_rounds = false;
        setup.record_digests = false;
        // Crash runs outlast failure-free ones (re-elections, removed
        // groups), so crash rounds range well past the failure-free length.
        const Round horizon = 3 * run(setup).metrics.time + 3;
        std::vector<Round> crash(p, 0);
        for (;;) {
          std::uint32_t crashing = 0;
          std::map<Round, std::vector<StationId>> schedule;
          for (std::uint32_t v = 0; v < p; ++v) {
            if (crash[v] > 0) {
              ++crashing;
              schedule[crash[v]].push_back(v + 1);
            }
          }
          if (crashing < p) {
            // Only round-1 crashes change the clairvoyant optimum (a later
            // crasher can do its share first and halt), so later rounds
            // share one oracle evaluation.
            std::vector<Round> key(p);
            for (std::uint32_t v = 0; v < p; ++v) key[v] = crash[v] == 1 ? 1 : 0;
            key.push_back(t);
            auto it = oracle_cache.find(key);
            if (it == oracle_cache.end()) {
              const std::vector<Round> rounds(key.begin(), key.end() - 1);
              it = oracle_cache.emplace(key, brute_force_doall_oracle(p, t, rounds)).first;
            }
            ObliviousSchedule strategy(schedule);
            const auto result = run(setup, AdversarySpec::oblivious(p, p - 1), strategy);
            ++runs;
            if (!verify_reliability(result.trace, t).ok) ++unreliable;
            if (result.metrics.work < it->second) {
              ++below;
              if (example.empty()) {
                example = std::string("; ") + std::string(to_string(kind)) + " p=" + std::to_string(p) +
                          " t=" + std::to_string(t) + " work " + std::to_string(result.metrics.work) +
                          " < oracle " + std::to_string(it->second);
              }
            }
          }
          std::uint32_t v = 0;
          while (v < p && crash[v] == horizon) crash[v++] = 0;
          if (v == p) break;
          ++crash[v];
        }
      }
    }
  }
  return {below == 0 && unreliable == 0, std::to_string(runs) + " schedules, " + std::to_string(below) +
                                              " below the oracle, " + std::to_string(unreliable) +
                                              " unreliable" + example};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1 && std::string(argv[1]) == "--write-golden") return write_golden();
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<Criterion> criteria = {
      {1, "channel semantics table", 1, channel_table},
      {2, "chain cover equals max antichain", 30, dilworth},
      {3, "reliability matrix", 600, reliability_matrix},
      {4, "two-lists work bound", 120, two_lists_bound},
      {5, "robal bound fit", 600, robal_fit},
      {6, "grubtech bound fit", 600, grubtech_fit},
      {7, "gilet bound fit", 600, gilet_fit},
      {8, "probability lemmas", 120, probability_lemmas},
      {9, "beeping equivalence", 60, beeping_equivalence},
      {10, "golden traces", 1, golden_traces},
      {11, "oracle floor", 60, oracle_floor},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && only.count(c.id) == 0) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.body();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.title << ": " << v.detail << " ("
              << fmt("%.2f", secs) << " s, limit " << fmt("%.0f", c.limit_seconds) << " s"
              << (in_time ? "" : ", too slow") << ")" << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
