#include <gtest/gtest.h>

#include <cmath>

#include "stochem/errors.hpp"
#include "stochem/gmm.hpp"
#include "stochem/solvers.hpp"
#include "toy_model.hpp"

using namespace stochem;

namespace {

GmmModel small_gmm(std::size_t n, std::uint64_t seed) {
  const double w[] = {0.5};
  const double mu[] = {0.5, -0.5};
  return GmmModel(generate_gmm_data(n, make_gmm_params(w, mu), seed), GmmConfig{});
}

RunConfig config(VariantKind kind, StepSchedule schedule, std::size_t iterations,
                 std::uint64_t seed = 1) {
  RunConfig rc;
  rc.variant.kind = kind;
  rc.schedule = schedule;
  rc.max_iterations = iterations;
  rc.seed = seed;
  rc.record_residual = false;
  return rc;
}

}  // namespace

TEST(Schedule, Validation) {
  EXPECT_THROW(StepSchedule::constant(1.5), ContractError);
  EXPECT_THROW(StepSchedule::constant(-0.1), ContractError);
  EXPECT_THROW(StepSchedule::harmonic(3.0, 2.0), ContractError);
  EXPECT_DOUBLE_EQ(StepSchedule::harmonic(3.0, 10.0).step(2), 0.25);
  EXPECT_NO_THROW(StepSchedule::constant(0.0));
}

TEST(Variants, NamesRoundTrip) {
  for (auto k : {VariantKind::Batch, VariantKind::IEM, VariantKind::SEM,
                 VariantKind::SEMVR, VariantKind::FIEM}) {
    EXPECT_EQ(parse_variant(variant_name(k)), k);
  }
  EXPECT_THROW(parse_variant("saga"), ContractError);
}

TEST(SeStep, UnitStepReturnsSurrogate) {
  auto layout = std::make_shared<const StatLayout>(
      std::vector<std::pair<std::string, std::size_t>>{{"a", 2}});
  SuffStats s(layout, {1.0, 2.0});
  SuffStats t(layout, {3.0, -1.0});
  EXPECT_EQ(se_step(s, t, 1.0), t);
  EXPECT_EQ(se_step(s, t, 0.0), s);
  EXPECT_DOUBLE_EQ(se_step(s, t, 0.5)[0], 2.0);
}

TEST(Run, IemWithOneSampleMatchesBatch) {
  const GmmModel model = small_gmm(1, 3);
  Rng r(1);
  const Parameter theta0 = model.initial_parameter(r);
  const auto batch = run(model, config(VariantKind::Batch, StepSchedule::constant(1.0), 10), theta0);
  const auto iem = run(model, config(VariantKind::IEM, StepSchedule::constant(1.0), 10), theta0);
  const auto a = batch.final_theta.reduced_coordinates();
  const auto b = iem.final_theta.reduced_coordinates();
  for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(a[j], b[j], 1e-12);
}

TEST(Run, Deterministic) {
  const GmmModel model = small_gmm(200, 4);
  Rng r(2);
  const Parameter theta0 = model.initial_parameter(r);
  for (auto kind : {VariantKind::SEM, VariantKind::IEM, VariantKind::SEMVR, VariantKind::FIEM}) {
    const auto schedule = kind == VariantKind::SEM ? StepSchedule::harmonic(3, 10)
                                                   : StepSchedule::constant(0.05);
    const auto a = run(model, config(kind, schedule, 700, 9), theta0);
    const auto b = run(model, config(kind, schedule, 700, 9), theta0);
    EXPECT_EQ(a.final_theta, b.final_theta) << variant_name(kind);
    EXPECT_EQ(a.final_s_hat, b.final_s_hat) << variant_name(kind);
  }
}

TEST(Run, EpochAccounting) {
  const std::size_t n = 50;
  const GmmModel model = small_gmm(n, 5);
  Rng r(3);
  const Parameter theta0 = model.initial_parameter(r);
  // Initialization pass plus one evaluation per iteration.
  auto t = run(model, config(VariantKind::IEM, StepSchedule::constant(1.0), 30), theta0);
  EXPECT_EQ(t.evaluations, n + 30);
  t = run(model, config(VariantKind::FIEM, StepSchedule::constant(0.1), 30), theta0);
  EXPECT_EQ(t.evaluations, n + 60);
  // Two evaluations per iteration plus a full pass at every epoch start after
  // the first.
  t = run(model, config(VariantKind::SEMVR, StepSchedule::constant(0.1), 2 * n + 1), theta0);
  EXPECT_EQ(t.evaluations, n + 2 * (2 * n + 1) + 2 * n);
  // Budget of 3 epochs: nothing past 3n.
  RunConfig rc = config(VariantKind::SEMVR, StepSchedule::constant(0.1), 100000);
  rc.max_epochs = 3.0;
  t = run(model, rc, theta0);
  EXPECT_LE(t.evaluations, 3 * n);
  EXPECT_GT(t.evaluations + 2 + n, 3 * n);
}

TEST(Run, ZeroEpochBudgetKeepsOnlyInitialRecord) {
  const GmmModel model = small_gmm(20, 6);
  Rng r(4);
  RunConfig rc = config(VariantKind::SEM, StepSchedule::harmonic(1, 2), 1000);
  rc.max_epochs = 0.0;
  const auto t = run(model, rc, model.initial_parameter(r));
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_EQ(t.records[0].k, 0u);
  EXPECT_EQ(t.iterations, 0u);
}

TEST(Run, DomainErrorBecomesSolverAbort) {
  const ToyMeanModel model({0.0, 10.0}, 1.0);
  try {
    run(model, config(VariantKind::Batch, StepSchedule::constant(1.0), 5),
        Parameter({Parameter::real_vector("m", {0.0})}));
    FAIL();
  } catch (const SolverAbort& e) {
    EXPECT_EQ(e.iteration(), 0u);
  }
}

TEST(Run, ObserverStopsRun) {
  const ToyMeanModel model({1.0, 2.0, 3.0});
  RunConfig rc = config(VariantKind::SEM, StepSchedule::harmonic(1, 1), 100);
  rc.observer = [](const VariantState& st) { return st.k < 7; };
  const auto t = run(model, rc, Parameter({Parameter::real_vector("m", {0.0})}));
  EXPECT_TRUE(t.stopped_by_observer);
  EXPECT_EQ(t.iterations, 7u);
}

TEST(Run, SemHarmonicOneIsRunningMean) {
  // gamma_k = 1/(k+1) averages the sampled statistics.
  const ToyMeanModel model({4.0});
  const auto t = run(model, config(VariantKind::SEM, StepSchedule::harmonic(1, 1), 5),
                     Parameter({Parameter::real_vector("m", {0.0})}));
  EXPECT_DOUBLE_EQ(t.final_theta.block(0).values[0], 4.0);
}

TEST(Termination, ProportionalToStep) {
  Rng r(11);
  std::vector<int> counts(4, 0);
  const auto schedule = StepSchedule::harmonic(1, 1);
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) ++counts[draw_termination(schedule, 4, r)];
  const double z = 1.0 + 0.5 + 1.0 / 3 + 0.25;
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(counts[k] / double(draws), (1.0 / (k + 1)) / z, 0.005);
  }
}

TEST(Memory, FiemRunningAverageTracksTable) {
  const GmmModel model = small_gmm(30, 8);
  Rng r(5);
  VariantState st = initialize_state(model, Variant{VariantKind::FIEM, 0},
                                     model.initial_parameter(r), Rng(6));
  for (int k = 0; k < 100; ++k) advance(model, st, StepSchedule::constant(0.2));
  EXPECT_LE(max_abs_diff(*st.running_avg, memory_mean(model, *st.memory)), 1e-13);
}

TEST(Memory, StaleAnchorIsContractError) {
  const GmmModel model = small_gmm(10, 9);
  Rng r(7);
  VariantState st = initialize_state(model, Variant{VariantKind::SEMVR, 0},
                                     model.initial_parameter(r), Rng(8));
  st.anchor.reset();
  EXPECT_THROW(surrogate_semvr(model, st, 0, model.per_sample_stats(0, st.theta)),
               ContractError);
}
