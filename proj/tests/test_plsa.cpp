#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "stochem/errors.hpp"
#include "stochem/plsa.hpp"

using namespace stochem;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / ("stochem_test_" + name);
  std::ofstream(p) << text;
  return p;
}

PlsaModel tiny_model(std::uint64_t seed = 1) {
  SyntheticCorpusSpec spec;
  spec.docs = 3;
  spec.vocab = 5;
  spec.topics = 2;
  spec.tokens = 30;
  spec.seed = seed;
  PlsaConfig cfg;
  cfg.topics = 2;
  return PlsaModel(generate_synthetic_corpus(spec).corpus, cfg);
}

}  // namespace

TEST(Plsa, IngestRoundTrip) {
  const auto p = temp_file("ok.txt", "2 3 3\n1 1\n2 3\n1 2\n");
  const Corpus c = ingest_corpus(p);
  EXPECT_EQ(c.docs, 2u);
  EXPECT_EQ(c.vocab, 3u);
  ASSERT_EQ(c.tokens.size(), 3u);
  EXPECT_EQ(c.tokens[1], (Token{1, 2}));
  const auto q = std::filesystem::temp_directory_path() / "stochem_test_rt.txt";
  write_corpus(q, c);
  EXPECT_EQ(ingest_corpus(q), c);
}

TEST(Plsa, IngestReportsLine) {
  try {
    ingest_corpus(temp_file("bad.txt", "2 3 2\n1 1\n1 x\n"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(ingest_corpus(temp_file("range.txt", "2 3 1\n3 1\n")), ValidationError);
  EXPECT_THROW(ingest_corpus(temp_file("count.txt", "2 3 2\n1 1\n")), ValidationError);
}

TEST(Plsa, MStepSmoothedRows) {
  PlsaConfig cfg;
  cfg.topics = 2;
  cfg.alpha = 0.5;
  cfg.beta = 0.25;
  const std::vector<double> dk = {3, 1};
  const std::vector<double> kv = {2, 0, 0, 1};
  const Parameter theta = plsa_m_step_from_aggregates(dk, kv, 1, 2, cfg);
  EXPECT_NEAR(doc_row(theta, 0)[0], 3.5 / 5.0, 1e-15);
  EXPECT_NEAR(topic_row(theta, 1, 0)[0], 2.25 / 2.5, 1e-15);
  EXPECT_NEAR(topic_row(theta, 1, 1)[1], 1.25 / 1.5, 1e-15);
}

TEST(Plsa, MStepNegativityThreshold) {
  PlsaConfig cfg;
  cfg.topics = 2;
  const std::vector<double> kv = {1, 1, 1, 1};
  // Small negative excursions are tolerated, below -alpha/2 is a domain error.
  EXPECT_NO_THROW(plsa_m_step_from_aggregates(std::vector<double>{-0.04, 2}, kv, 1, 2, cfg));
  EXPECT_THROW(plsa_m_step_from_aggregates(std::vector<double>{-0.06, 2}, kv, 1, 2, cfg),
               DomainError);
}

TEST(Plsa, ElboIsLogLikelihoodPlusPrior) {
  const PlsaModel model = tiny_model();
  Rng r(4);
  const Parameter theta = model.initial_parameter(r);
  double ll = 0.0;
  for (const Token& t : model.corpus().tokens) {
    double p = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
      p += doc_row(theta, t.doc)[k] * topic_row(theta, 3, k)[t.word];
    }
    ll += std::log(p);
  }
  const Elbo e = elbo(model.corpus(), theta, model.config());
  EXPECT_NEAR(e.data_only, ll, 1e-10);
  const double n = static_cast<double>(model.num_samples());
  EXPECT_NEAR(penalized_objective(model, theta), -e.with_prior / n, 1e-12);
}

TEST(Plsa, MStepMinimizesSurrogateObjective) {
  // With exact posteriors, one batch step never increases the objective.
  const PlsaModel model = tiny_model(2);
  Rng r(5);
  Parameter theta = model.initial_parameter(r);
  double prev = penalized_objective(model, theta);
  for (int k = 0; k < 30; ++k) {
    theta = model.m_step(full_estep(model, theta));
    const double cur = penalized_objective(model, theta);
    EXPECT_LE(cur, prev + 1e-12);
    prev = cur;
  }
}

TEST(Plsa, PosteriorSumsToOne) {
  const PlsaModel model = tiny_model();
  Rng r(6);
  const Parameter theta = model.initial_parameter(r);
  const auto p = token_posterior(theta, 3, model.corpus().tokens[0]);
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(Plsa, SyntheticCorpusDeterministic) {
  SyntheticCorpusSpec spec;
  spec.docs = 10;
  spec.vocab = 20;
  spec.tokens = 200;
  spec.seed = 3;
  EXPECT_EQ(generate_synthetic_corpus(spec).corpus, generate_synthetic_corpus(spec).corpus);
  spec.seed = 4;
  const auto other = generate_synthetic_corpus(spec).corpus;
  spec.seed = 3;
  EXPECT_NE(other, generate_synthetic_corpus(spec).corpus);
}
