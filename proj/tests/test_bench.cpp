#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "stochem/bench.hpp"
#include "stochem/errors.hpp"

using namespace stochem;

namespace {

ExperimentConfig small_fixed_n(double epochs) {
  ExperimentConfig c = default_config(kGmmFixedN);
  c.n = 300;
  c.seeds = {0, 1};
  c.epochs = epochs;
  return c;
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("stochem_bench_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STOCHEM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsMirrorPresets) {
  const auto f = default_config(kGmmFixedN);
  EXPECT_EQ(f.n, 10000u);
  EXPECT_EQ(f.seeds.size(), 5u);
  EXPECT_DOUBLE_EQ(gmm_vr_step(f, 10000), 0.003);
  EXPECT_DOUBLE_EQ(preset_schedule(f, VariantKind::SEM, 10000).step(0), 0.3);
  const auto p = default_config(kPlsaElbo);
  EXPECT_EQ(p.plsa.topics, 10u);
  EXPECT_DOUBLE_EQ(preset_schedule(p, VariantKind::SEM, 10000).step(0), 0.1);
  EXPECT_NEAR(preset_schedule(p, VariantKind::FIEM, 10000).step(5), std::pow(1e4, -2.0 / 3.0),
              1e-15);
  EXPECT_THROW(default_config("nope"), ValidationError);
}

TEST(Config, ParsesKeyValueText) {
  const auto c = apply_config_text(default_config(kGmmScaling),
                                   "# comment\nexperiment = gmm-scaling\n"
                                   "n_grid = 100, 200\nseeds=3,4,5 # trailing\n"
                                   "variants = iem,fiem\ncap_factor = 20\n");
  EXPECT_EQ(c.n_grid, (std::vector<std::size_t>{100, 200}));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4, 5}));
  EXPECT_EQ(c.variants, (std::vector<VariantKind>{VariantKind::IEM, VariantKind::FIEM}));
  EXPECT_DOUBLE_EQ(c.cap_factor, 20.0);
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    apply_config_text(default_config(kGmmFixedN), "n = 10\nbogus = 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(apply_config_text(default_config(kGmmFixedN), "epochs = ten\n"), ParseError);
  EXPECT_THROW(apply_config_text(default_config(kGmmFixedN), "variants = saga\n"), ParseError);
  EXPECT_THROW(apply_config_text(default_config(kGmmFixedN), "experiment = plsa-elbo\n"),
               ValidationError);
  EXPECT_THROW(apply_config_text(default_config(kGmmFixedN), "just words\n"), ParseError);
}

TEST(Config, HashIgnoresOutputDirectory) {
  auto a = default_config(kGmmFixedN);
  auto b = a;
  b.out_dir = "/elsewhere";
  EXPECT_EQ(a.config_hash(), b.config_hash());
  b.epochs = 7;
  EXPECT_NE(a.config_hash(), b.config_hash());
}

TEST(FixedN, ZeroEpochsGivesOnlyInitialRows) {
  const auto r = run_gmm_fixed_n(small_fixed_n(0.0));
  std::set<std::string> variants;
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.k, 0u);
    EXPECT_EQ(row.epoch, 1.0);
    variants.insert(row.variant);
  }
  EXPECT_EQ(variants.size(), 5u);
  EXPECT_EQ(r.rows.size(), 5u * 2u * 2u);
}

TEST(FixedN, EpochBudgetRespected) {
  const auto r = run_gmm_fixed_n(small_fixed_n(4.0));
  for (const auto& row : r.rows) {
    EXPECT_LE(row.epoch, 4.0);
  }
  EXPECT_TRUE(r.warnings.empty());
}

TEST(FixedN, CsvIsDeterministic) {
  const auto cfg = small_fixed_n(3.0);
  const std::string a = render_csv(cfg, run_gmm_fixed_n(cfg).rows);
  const std::string b = render_csv(cfg, run_gmm_fixed_n(cfg).rows);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind("# experiment=gmm-fixed-n config_hash=", 0), 0u);
  const auto second = a.find('\n') + 1;
  EXPECT_EQ(a.substr(second, a.find('\n', second) - second),
            "experiment,variant,n,seed,k,epoch,metric,value");
}

TEST(Scaling, SlopeFit) {
  const auto s = least_squares_slope({0, 1, 2}, {1, 3, 5});
  ASSERT_TRUE(s);
  EXPECT_DOUBLE_EQ(*s, 2.0);
  EXPECT_FALSE(least_squares_slope({1}, {1}));
  EXPECT_FALSE(least_squares_slope({1, 1}, {1, 2}));
}

TEST(Scaling, SinglePointGridOmitsSlope) {
  auto cfg = default_config(kGmmScaling);
  cfg.n_grid = {200};
  cfg.seeds = {0, 1, 2};
  const auto r = run_gmm_scaling(cfg);
  EXPECT_TRUE(r.slopes.empty());
  std::size_t counted = 0;
  for (const auto& row : r.rows) {
    if (row.metric == kMetricIterations || row.metric == kMetricCensored) ++counted;
  }
  EXPECT_EQ(counted, 3u * 3u);
}

TEST(Scaling, CensoredRunsAreFlagged) {
  auto cfg = default_config(kGmmScaling);
  cfg.n_grid = {200, 400};
  cfg.seeds = {0};
  cfg.variants = {VariantKind::IEM};
  cfg.cap_factor = 0.01;
  cfg.target_precision = 1e-12;
  const auto r = run_gmm_scaling(cfg);
  EXPECT_TRUE(r.slopes.empty());
  EXPECT_EQ(r.warnings.size(), 2u);
  for (const auto& row : r.rows) EXPECT_NE(row.metric, kMetricIterations);
}

TEST(Plsa, ZeroEpochsAndCorpusErrors) {
  auto cfg = default_config(kPlsaElbo);
  cfg.n = 200;
  cfg.corpus.docs = 5;
  cfg.corpus.vocab = 12;
  cfg.plsa.topics = 3;
  cfg.seeds = {0};
  cfg.epochs = 0.0;
  const auto r = run_plsa_elbo(cfg);
  EXPECT_EQ(r.rows.size(), 5u * 2u);
  for (const auto& row : r.rows) EXPECT_EQ(row.k, 0u);

  const auto bad = scratch("bad_corpus.txt");
  std::ofstream(bad) << "2 2 1\n5 1\n";
  cfg.corpus_path = bad;
  EXPECT_THROW(run_plsa_elbo(cfg), ValidationError);
}

TEST(Cli, ExitCodes) {
  const auto out = scratch("cli");
  EXPECT_EQ(run_cli("verify --out " + out.string()), 0);
  EXPECT_TRUE(std::filesystem::exists(out / "verify.jsonl"));
  EXPECT_EQ(run_cli("gmm-fixed-n --n 100 --epochs 0 --out " + out.string()), 0);
  EXPECT_NE(slurp(out / "gmm_fixed_n.csv").find("epoch,metric,value"), std::string::npos);

  const auto cfg = out / "bad.cfg";
  std::ofstream(cfg) << "n = 100\nnot_a_key = 3\n";
  EXPECT_EQ(run_cli("gmm-fixed-n --config " + cfg.string()), 2);
  EXPECT_EQ(run_cli("gmm-fixed-n --config " + (out / "missing.cfg").string()), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
}
