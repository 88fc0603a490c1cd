#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "coordbeam/distributed.h"
#include "coordbeam/errors.h"
#include "coordbeam/fixtures.h"
#include "coordbeam/harness.h"
#include "support.h"

using namespace coordbeam;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("worst rate and sum-rate ratio") {
  RatePoint a{{1.0, 2.0}, "a"};
  CHECK(worst_user_rate(a) == 1.0);
  CHECK(worst_user_rate(RatePoint{{3.5}, "single"}) == 3.5);

  RatePoint half{{0.5, 1.0}, "half"};
  CHECK(sum_rate_ratio(a, a) == doctest::Approx(1.0));
  CHECK(sum_rate_ratio(half, a) == doctest::Approx(0.5));
  CHECK_THROWS_AS(sum_rate_ratio(a, RatePoint{{0.0, 0.0}, "zero"}), ZeroReference);
}

TEST_CASE("s2 balanced worst rate") {
  const ChannelSet s2 = test::make_s2();
  const SolveOutcome out = solve_max_min(s2);
  const auto rates = user_rates(all_downlink_sinr(s2, out.beams, out.powers));
  CHECK(worst_user_rate(rates) == doctest::Approx(std::log2(3.0)).epsilon(1e-5));
}

TEST_CASE("empirical cdf") {
  const auto one = empirical_cdf({1.0});
  REQUIRE(one.size() == 1);
  CHECK(one[0].first == 1.0);
  CHECK(one[0].second == 1.0);

  const auto two = empirical_cdf({2.0, 1.0});
  REQUIRE(two.size() == 2);
  CHECK(two[0] == std::pair<double, double>{1.0, 0.5});
  CHECK(two[1] == std::pair<double, double>{2.0, 1.0});

  // P(phi <= 0) recoverable from the output.
  std::vector<double> phi;
  for (int i = 0; i < 500; ++i) phi.push_back(i < 350 ? -0.01 * (i + 1) : 0.001 * i);
  const auto cdf = empirical_cdf(phi);
  double p_le_zero = 0.0;
  for (const auto& [v, p] : cdf)
    if (v <= 0.0) p_le_zero = p;
  CHECK(p_le_zero == doctest::Approx(0.7));

  CHECK_THROWS_AS(empirical_cdf({}), EmptySamples);
}

TEST_CASE("sum-rate ratio against the 2-user boundary is at most one") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const ChannelSet ch = test::drop_instance(4, 2, 15.0, seed);
    const SolveOutcome two_step = pareto_improve(ch, solve_max_min(ch));
    const auto rates = user_rates(all_downlink_sinr(ch, two_step.beams, two_step.powers));
    double best_sum = 0.0;
    for (const auto& pt : pareto_boundary_2user(ch, 150))
      best_sum = std::max(best_sum, pt.rates[0] + pt.rates[1]);
    CHECK(rates[0] + rates[1] <= best_sum * (1.0 + 0.02));
  }
}

TEST_CASE("run_experiment is deterministic byte for byte") {
  ExperimentSpec spec;
  spec.id = "custom";
  spec.num_bs = 2;
  spec.antennas = 2;
  spec.snr_db = {10.0};
  spec.drops = 4;
  spec.schemes = {"ne", "sginr", "distributed"};
  spec.seed = 9;
  spec.write_svg = false;
  spec.out_dir = "harness_det_a";
  run_experiment(spec);
  spec.out_dir = "harness_det_b";
  run_experiment(spec);
  CHECK(slurp("harness_det_a/rows.csv") == slurp("harness_det_b/rows.csv"));
  CHECK(slurp("harness_det_a/summary.csv") == slurp("harness_det_b/summary.csv"));
  std::filesystem::remove_all("harness_det_a");
  std::filesystem::remove_all("harness_det_b");
}

TEST_CASE("decoupled-style sanity: centralized two-step on easy drops") {
  // On every drop the two-step worst rate is no lower than step 1 (the
  // run_scheme guard throws otherwise and the row would fail).
  ExperimentSpec spec;
  spec.id = "custom";
  spec.num_bs = 2;
  spec.antennas = 4;
  spec.snr_db = {15.0};
  spec.drops = 6;
  spec.schemes = {"centralized", "centralized_step1"};
  spec.seed = 4;
  spec.write_svg = false;
  spec.out_dir = "harness_two_step";
  const MetricsTable table = run_experiment(spec);
  CHECK(table.total_failures == 0);
  const MetricsCell* two = table.find("centralized", 15.0);
  const MetricsCell* one = table.find("centralized_step1", 15.0);
  REQUIRE(two != nullptr);
  REQUIRE(one != nullptr);
  CHECK(two->mean_worst_rate >= one->mean_worst_rate - 1e-9);
  CHECK(two->mean_sum_rate >= one->mean_sum_rate - 1e-9);
  std::filesystem::remove_all("harness_two_step");
}

TEST_CASE("experiment spec file parsing") {
  const std::string path = "exp_spec_test.cfg";
  {
    std::ofstream out(path);
    out << "experiment = fig7_quantization\n";
    out << "m = 4\nb = 3\n";
    out << "snr_db = 0,10,20\n";
    out << "drops = 12\n";
    out << "seed = 5\n";
    out << "fixed_iters = 2\n";
    out << "quant_bits_list = 0,3\n";
    out << "distributed.max_iters = 30\n";
  }
  const ExperimentSpec spec = load_experiment_spec(path);
  CHECK(spec.id == "fig7_quantization");
  CHECK(spec.antennas == 4);
  CHECK(spec.num_bs == 3);
  CHECK(spec.snr_db == std::vector<double>{0.0, 10.0, 20.0});
  CHECK(spec.drops == 12);
  CHECK(spec.quant_bits_list == std::vector<int>{0, 3});
  CHECK(spec.distributed.max_iters == 30);
  std::remove(path.c_str());
}

TEST_CASE("golden fixture: the shipped scalar instance solves to its known point") {
  const ChannelSet ch = load_channel_set(std::string(COORDBEAM_SOURCE_DIR) +
                                         "/data/s2_instance.json");
  const SolveOutcome out = solve_max_min(ch);
  CHECK(out.gamma_star == doctest::Approx(2.0).epsilon(1e-5));
  const std::string dumped = outcome_to_json(out);
  CHECK(dumped.find("\"gamma\"") != std::string::npos);
  CHECK(dumped.find("\"trace\"") != std::string::npos);

  DistributedRun run = run_to_convergence(ch, {});
  CHECK(run.uplink.gamma_star == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(run.log.total_scalars == 2 * 2 * 1);  // two rounds of K(B-1)
}

TEST_CASE("fig5 and fig6 experiment flows emit their CDF files") {
  ExperimentSpec spec;
  spec.id = "fig5_worst_cdf";
  spec.num_bs = 2;
  spec.antennas = 4;
  spec.snr_db = {15.0};
  spec.drops = 5;
  spec.schemes = {"distributed", "sginr"};
  spec.seed = 2;
  spec.write_svg = false;
  spec.out_dir = "harness_fig5";
  run_experiment(spec);
  CHECK(std::filesystem::exists("harness_fig5/cdf_worst_distributed_snr15.csv"));

  spec.id = "fig6_sumrate_cdf";
  spec.boundary_resolution = 60;
  spec.out_dir = "harness_fig6";
  const MetricsTable t = run_experiment(spec);
  CHECK(std::filesystem::exists("harness_fig6/cdf_sumratio_sginr_snr15.csv"));
  // Ratios against the 2-user boundary reference stay at or below one.
  for (const auto& c : t.cells)
    for (double r : c.sum_ratio_samples) CHECK(r <= 1.0 + 0.02);
  std::filesystem::remove_all("harness_fig5");
  std::filesystem::remove_all("harness_fig6");
}

TEST_CASE("channel set fixture round trip") {
  const ChannelSet ch = test::random_instance(3, 3, 3, 10.0, 55);
  const std::string text = channel_set_to_json(ch);
  const ChannelSet back = channel_set_from_json(text);
  CHECK(back.num_users() == ch.num_users());
  CHECK(back.num_bs() == ch.num_bs());
  CHECK(back.power_limit() == ch.power_limit());
  for (std::size_t k = 0; k < ch.num_users(); ++k) {
    CHECK(back.noise(k) == ch.noise(k));
    for (std::size_t b = 0; b < ch.num_bs(); ++b)
      CHECK(norm(back.channel(k, b) - ch.channel(k, b)) == 0.0);
  }

  const DropScenario drop = generate_drop({}, 3);
  const DropScenario dback = drop_from_json(drop_to_json(drop));
  CHECK(dback.rng_seed == drop.rng_seed);
  CHECK(dback.gains == drop.gains);
  CHECK(dback.cluster == drop.cluster);
}
