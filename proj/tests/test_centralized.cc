#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coordbeam/centralized.h"
#include "coordbeam/errors.h"
#include "support.h"

using namespace coordbeam;
using test::make_s2;

TEST_CASE("feasibility on the scalar instance, loose target") {
  // gamma = 1: p_k = gamma (0.25 p_other + 1) solves to p = (4/3, 4/3).
  const ChannelSet s2 = make_s2();
  const FeasibilityResult r = solve_sum_power_feasibility(s2, 1.0);
  REQUIRE(r.feasible());
  CHECK(r.powers[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
  CHECK(r.powers[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
  CHECK(r.powers.sum() == doctest::Approx(8.0 / 3.0).epsilon(1e-6));
  // Equal weighted SINRs at the target.
  for (std::size_t k = 0; k < 2; ++k)
    CHECK(downlink_sinr(s2, r.beams, r.powers, k) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("feasibility on the scalar instance, unreachable target") {
  // gamma = 3 needs p = (12, 12), beyond both budgets.
  const ChannelSet s2 = make_s2();
  BalancingConfig cfg;
  cfg.dual_max_outer = 300;  // M = 1 leaves no beam freedom, fail fast
  const FeasibilityResult r = solve_sum_power_feasibility(s2, 3.0, cfg);
  CHECK_FALSE(r.feasible());
  CHECK_FALSE(r.certificate.empty());
}

TEST_CASE("feasibility on a single link") {
  std::vector<std::vector<CVec>> channels = {{CVec{cplx(1, 0), cplx(1, 0)}}};
  const ChannelSet ch(1, 2, {0}, std::move(channels), {1.0}, 4.0);
  // gamma <= P ||h||^2 / sigma^2 = 8 is feasible with p = gamma / ||h||^2.
  const FeasibilityResult r = solve_sum_power_feasibility(ch, 6.0);
  REQUIRE(r.feasible());
  CHECK(r.powers[0] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(norm(r.beams[0]) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("max-min balancing on the scalar instance matches the grid oracle") {
  const ChannelSet s2 = make_s2();
  const SolveOutcome out = solve_max_min(s2);
  CHECK(out.gamma_star == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(out.powers[0] == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(out.powers[1] == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(out.active_bs[0]);
  CHECK(out.active_bs[1]);
  const double oracle = test::downlink_maxmin_oracle(s2, 200);
  CHECK(test::rel_err(out.gamma_star, oracle) < 0.02);
}

TEST_CASE("max-min on a single link is MRT at full power") {
  std::vector<std::vector<CVec>> channels = {{CVec{cplx(1, 0), cplx(0, 1)}}};
  const ChannelSet ch(1, 2, {0}, std::move(channels), {0.5}, 2.0);
  const SolveOutcome out = solve_max_min(ch);
  CHECK(out.gamma_star == doctest::Approx(2.0 * 2.0 / 0.5).epsilon(1e-6));
  CHECK(out.powers[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("decoupled symmetric cells balance at the interference-free level") {
  const ChannelSet dec = test::make_decoupled(4.0);
  const SolveOutcome out = solve_max_min(dec);
  CHECK(out.gamma_star == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(out.powers[0] == doctest::Approx(4.0).epsilon(1e-4));
  CHECK(out.powers[1] == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("balancing invariants on random drops") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ChannelSet ch = test::drop_instance(4, 3, 10.0, seed);
    const SolveOutcome out = solve_max_min(ch);
    const auto sinrs = all_downlink_sinr(ch, out.beams, out.powers);
    for (double s : sinrs) CHECK(std::abs(s - out.gamma_star) <= 1e-4 * out.gamma_star);
    const auto sums = per_bs_power(ch, out.powers);
    double max_ratio = 0.0;
    for (double s : sums) {
      CHECK(s <= ch.power_limit() * (1.0 + 1e-8));
      max_ratio = std::max(max_ratio, s / ch.power_limit());
    }
    CHECK(max_ratio >= 1.0 - 1e-5);
    CHECK(max_ratio <= 1.0 + 1e-8);
  }
}

TEST_CASE("improvement step on the constructed two-antenna instance") {
  // BS 0 serves user 0 with h00 = (1,1), the victim channel is h10 = (0,1):
  // the complement direction is (1,0). Start from f = (1,0), p = 1.
  std::vector<std::vector<CVec>> channels = {
      {CVec{cplx(1, 0), cplx(1, 0)}, CVec{cplx(0, 0), cplx(0, 0)}},
      {CVec{cplx(0, 0), cplx(1, 0)}, CVec{cplx(1, 0), cplx(0, 0)}},
  };
  const ChannelSet ch(2, 2, {0, 1}, std::move(channels), {1.0, 1.0}, 4.0);
  SolveOutcome base;
  base.gamma_star = 1.0;
  base.beams.f = {CVec{cplx(1, 0), cplx(0, 0)}, CVec{cplx(1, 0), cplx(0, 0)}};
  base.powers = PowerVector({1.0, 4.0}, PowerKind::kDownlink);

  const SolveOutcome up = pareto_improve(ch, base);
  // User 0 rises to the full budget along (1,0): f stays (1,0), p becomes 4.
  CHECK(up.powers[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::abs(up.beams[0][0] - cplx(1, 0)) < 1e-12);
  CHECK(std::abs(up.beams[0][1]) < 1e-12);
  // Interference on user 1 stays zero, signal power rises 1 -> 4.
  CHECK(std::norm(dot(ch.channel(1, 0), up.beams[0])) * up.powers[0] < 1e-20);
  CHECK(up.powers[0] * std::norm(dot(ch.channel(0, 0), up.beams[0])) ==
        doctest::Approx(4.0).epsilon(1e-12));
  // User 1 untouched.
  CHECK(up.powers[1] == 4.0);
}

TEST_CASE("improvement is a no-op at full power or with no null space") {
  const ChannelSet s2 = make_s2();
  SolveOutcome full;
  full.gamma_star = 2.0;
  full.beams.f = {CVec{cplx(1, 0)}, CVec{cplx(1, 0)}};
  full.powers = PowerVector({4.0, 4.0}, PowerKind::kDownlink);
  const SolveOutcome same = pareto_improve(s2, full);
  CHECK(same.powers[0] == 4.0);
  CHECK(same.powers[1] == 4.0);

  // Under-powered but M = 1: the complement is empty, update skipped.
  SolveOutcome under = full;
  under.powers = PowerVector({1.0, 4.0}, PowerKind::kDownlink);
  const SolveOutcome skipped = pareto_improve(s2, under);
  CHECK(skipped.powers[0] == 1.0);
}

TEST_CASE("improvement invariants on random drops") {
  int fired = 0;
  for (std::uint64_t seed = 0; seed < 30 && fired < 12; ++seed) {
    const ChannelSet ch = test::drop_instance(4, 2, 12.0, seed);
    const SolveOutcome step1 = solve_max_min(ch);
    const auto sums = per_bs_power(ch, step1.powers);
    bool any_slack = false;
    for (double s : sums) any_slack |= s < ch.power_limit() * (1.0 - 1e-6);
    if (!any_slack) continue;
    ++fired;

    const SolveOutcome step2 = pareto_improve(ch, step1);
    const auto before = all_downlink_sinr(ch, step1.beams, step1.powers);
    const auto after = all_downlink_sinr(ch, step2.beams, step2.powers);
    for (std::size_t k = 0; k < ch.num_users(); ++k) {
      if (step2.powers[k] != step1.powers[k]) {
        CHECK(after[k] > before[k]);
        // Interference invariance onto every other user.
        for (std::size_t i = 0; i < ch.num_users(); ++i) {
          if (i == k) continue;
          const auto bk = static_cast<std::size_t>(ch.serving(k));
          const double pre =
              step1.powers[k] * std::norm(dot(ch.channel(i, bk), step1.beams[k]));
          const double post =
              step2.powers[k] * std::norm(dot(ch.channel(i, bk), step2.beams[k]));
          CHECK(std::abs(post - pre) <= 1e-8 * std::max(pre, 1e-30));
        }
      } else {
        CHECK(test::rel_err(after[k], before[k]) < 1e-8);
      }
    }
    // The updated BS now sits on its budget.
    const auto sums2 = per_bs_power(ch, step2.powers);
    for (double s : sums2) CHECK(s <= ch.power_limit() * (1.0 + 1e-9));
  }
  CHECK(fired > 0);
}

TEST_CASE("two-user verification gap") {
  for (std::uint64_t seed = 3; seed < 6; ++seed) {
    const ChannelSet ch = test::drop_instance(4, 2, 15.0, seed);
    const SolveOutcome two_step = pareto_improve(ch, solve_max_min(ch));
    const double gap = verify_pareto_2user(ch, two_step, 100);
    CHECK(gap <= 0.05);

    // A deliberately halved-power outcome is dominated.
    SolveOutcome weak = two_step;
    for (auto& p : weak.powers.value) p *= 0.5;
    CHECK(verify_pareto_2user(ch, weak, 100) > 0.0);
  }
}

TEST_CASE("oracle equivalence on tiny instances") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const ChannelSet ch1 = test::random_instance(1, 2, 2, 8.0, seed, 0.6, 2.0);
    const SolveOutcome o1 = solve_max_min(ch1);
    CHECK(test::rel_err(o1.gamma_star, test::downlink_maxmin_oracle(ch1, 200)) < 0.02);

    const ChannelSet ch2 = test::random_instance(2, 2, 2, 10.0, seed + 50, 0.8, 2.0);
    const SolveOutcome o2 = solve_max_min(ch2);
    CHECK(test::rel_err(o2.gamma_star, test::downlink_maxmin_oracle(ch2, 200)) < 0.02);
  }
}
