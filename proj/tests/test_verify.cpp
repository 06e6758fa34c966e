#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "macdoall/verify.hpp"

using namespace macdoall;

namespace {

// Closed form for the clairvoyant optimum when some station never crashes:
// the z round-one casualties each cost one unit, and the rest need
// max(t, p - z) more because every live station is charged at least once.
std::uint64_t closed_form(std::uint32_t p, std::uint32_t t, const std::vector<Round>& crash) {
  std::uint64_t z = 0;
  for (auto c : crash) z += c == 1;
  return z + std::max<std::uint64_t>(t, p - z);
}

}  // namespace

TEST(SingleTransmit, SmallValues) {
  auto value = [](double x, double m) { return (m / x) * std::pow(1.0 - 1.0 / x, m - 1); };
  EXPECT_DOUBLE_EQ(value(2, 1), 0.5);
  EXPECT_DOUBLE_EQ(value(2, 2), 0.5);
  const auto c = check_single_transmit_bound(64);
  EXPECT_TRUE(c.pass);
  EXPECT_TRUE(c.lower_bound);
  EXPECT_NEAR(c.bound, 0.30327, 1e-5);
  EXPECT_GE(c.statistic, c.bound);
  EXPECT_LE(c.statistic, 0.5);
}

TEST(SingleTransmit, MinimumShrinksWithX) {
  // The minimum drifts down towards the bound as x grows.
  EXPECT_GT(check_single_transmit_bound(8).statistic, check_single_transmit_bound(64).statistic);
}

TEST(LeaderTail, AllLeadersSplitEvenly) {
  // With every position drawn, exactly half sit in the crashed prefix.
  EXPECT_EQ(leader_crash_frequency(40, 40, 200, 1), 0.0);
  EXPECT_THROW(check_leader_crash_tail(10, 11, 10, 1), ConfigInvalid);
}

TEST(LeaderTail, BoundHoldsAtSpecPoint) {
  const auto c = check_leader_crash_tail(400, 20, 10000, 3);
  EXPECT_NEAR(c.bound, std::exp(-2.5), 1e-12);
  EXPECT_TRUE(c.pass);
}

TEST(LeaderTail, HypergeometricMatchesMonteCarlo) {
  const std::uint32_t n = 100, s = 10;
  // P[count >= ceil(3s/4)] with count ~ Hypergeometric(n, n/2, s).
  const std::uint64_t k = (3 * s + 3) / 4;
  const double exact = hypergeometric_upper_tail(n, n / 2, s, k);
  const std::uint64_t trials = 200000;
  const double mc = leader_crash_frequency(n, s, trials, 17);
  const double sd = std::sqrt(exact * (1 - exact) / static_cast<double>(trials));
  EXPECT_NEAR(mc, exact, 4 * sd);
}

TEST(LeaderTail, HypergeometricSumsToOne) {
  EXPECT_NEAR(hypergeometric_upper_tail(30, 12, 9, 0), 1.0, 1e-9);
  EXPECT_NEAR(hypergeometric_upper_tail(5, 2, 2, 2), 0.1, 1e-12);
  EXPECT_EQ(hypergeometric_upper_tail(5, 2, 2, 3), 0.0);
}

TEST(Wilson, Monotone) {
  EXPECT_GT(wilson_upper(0.1, 100), 0.1);
  EXPECT_LT(wilson_lower(0.1, 100), 0.1);
  EXPECT_LT(wilson_upper(0.1, 10000), wilson_upper(0.1, 100));
  EXPECT_GT(wilson_lower(0.1, 10000), wilson_lower(0.1, 100));
  EXPECT_EQ(wilson_upper(0.5, 0), 1.0);
  EXPECT_EQ(wilson_lower(0.5, 0), 0.0);
  EXPECT_LE(wilson_upper(1.0, 10), 1.0);
}

TEST(ElectLeader, FailureFreeFindsLeaderQuickly) {
  const auto c = check_elect_leader_rounds(32, 0, 300, 5);
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(c.statistic, 1.0);
}

TEST(ElectLeader, HuntedElectionsStayWithinLimit) {
  for (std::uint32_t f : {16U, 31U}) {
    const auto c = check_elect_leader_rounds(32, f, 300, 9);
    EXPECT_TRUE(c.pass) << c.name << " " << c.statistic;
  }
  EXPECT_THROW(check_elect_leader_rounds(8, 8, 1, 1), ConfigInvalid);
}

TEST(ElectionProbe, CountsOnlyElectionRounds) {
  RunSetup setup;
  setup.p = 8;
  setup.t = 3;
  setup.seed = 4;
  ElectionProbe probe;
  NoOp noop;
  const auto res = run(setup, probe, AdversarySpec::none(), noop);
  EXPECT_TRUE(probe.found());
  EXPECT_EQ(probe.elections(), 1U);
  EXPECT_EQ(static_cast<Round>(probe.election_rounds()) + 1 + 3, res.metrics.time);
  EXPECT_TRUE(verify_reliability(res.trace, 3).ok);
}

TEST(Oracle, Examples) {
  EXPECT_EQ(brute_force_doall_oracle(1, 1, {0}), 1U);
  EXPECT_EQ(brute_force_doall_oracle(2, 2, {0, 0}), 2U);
  EXPECT_EQ(brute_force_doall_oracle(2, 2, {0, 1}), 3U);
  EXPECT_EQ(brute_force_doall_oracle(3, 1, {0, 0, 0}), 3U);
}

TEST(Oracle, MatchesClosedForm) {
  // Every crash vector for p <= 2 with rounds 0..4, and all of p = 3 with
  // rounds 0..3, keeping at least one station that never crashes.
  for (std::uint32_t p = 1; p <= 3; ++p) {
    const Round top = p == 3 ? 3 : 4;
    std::vector<Round> crash(p, 0);
    for (;;) {
      if (std::find(crash.begin(), crash.end(), 0) != crash.end()) {
        for (std::uint32_t t = 1; t <= 3; ++t) {
          EXPECT_EQ(brute_force_doall_oracle(p, t, crash), closed_form(p, t, crash)) << "p=" << p << " t=" << t;
        }
      }
      std::size_t i = 0;
      while (i < p && crash[i] == top) crash[i++] = 0;
      if (i == p) break;
      ++crash[i];
    }
  }
}

TEST(Oracle, Limits) {
  EXPECT_THROW(brute_force_doall_oracle(4, 1, {0, 0, 0, 0}), TooLarge);
  EXPECT_THROW(brute_force_doall_oracle(1, 4, {0}), TooLarge);
  EXPECT_THROW(brute_force_doall_oracle(2, 1, {0}), ConfigInvalid);
}

TEST(Suite, AllChecksPass) {
  const auto checks = run_verify_suite(1);
  EXPECT_EQ(checks.size(), 5U);
  for (const auto& c : checks) {
    EXPECT_TRUE(c.pass) << c.name;
    const auto j = to_json(c);
    EXPECT_EQ(j["name"], c.name);
    EXPECT_EQ(j["pass"], c.pass);
  }
}
