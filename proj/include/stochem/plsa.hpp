#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "stochem/model.hpp"

namespace stochem {

/// Zero-based (document, word) pair.
struct Token {
  std::uint32_t doc = 0;
  std::uint32_t word = 0;

  bool operator==(const Token&) const = default;
};

struct Corpus {
  std::size_t docs = 0;
  std::size_t vocab = 0;
  std::vector<Token> tokens;

  /// Throws ValidationError on empty corpus or out-of-range indices.
  void validate() const;
  bool operator==(const Corpus&) const = default;
};

struct PlsaConfig {
  std::size_t topics = 10;
  /// Document-topic smoothing alpha'.
  double alpha = 0.1;
  /// Topic-word smoothing beta'.
  double beta = 0.1;
  /// Symmetric Dirichlet concentration of the random initial rows.
  double init_concentration = 1.0;

  void validate() const;
};

// Statistics layout: doc_topic (D x K, row-major) and topic_word (K x V,
// row-major). A SuffStats holds per-token *averages*; multiply by n to get the
// aggregated counts the M-step formulas are written in.
inline constexpr const char* kPlsaDocTopic = "doc_topic";
inline constexpr const char* kPlsaTopicWord = "topic_word";

LayoutPtr plsa_layout(std::size_t docs, std::size_t vocab, std::size_t topics);

/// Parameter with D simplex blocks of dimension K (document rows) followed by
/// K simplex blocks of dimension V (topic rows).
Parameter make_plsa_params(const std::vector<std::vector<double>>& doc_topic,
                           const std::vector<std::vector<double>>& topic_word);
std::span<const double> doc_row(const Parameter& theta, std::size_t d);
std::span<const double> topic_row(const Parameter& theta, std::size_t docs,
                                  std::size_t k);

/// p_k proportional to doc_topic[d][k] * topic_word[k][w].
std::vector<double> token_posterior(const Parameter& theta, std::size_t docs,
                                    Token token);

/// Smoothed M-step on aggregated counts (agg_dk: D x K, agg_kv: K x V).
/// Entries below -alpha'/2 (resp. -beta'/2) raise DomainError.
Parameter plsa_m_step_from_aggregates(std::span<const double> agg_dk,
                                      std::span<const double> agg_kv,
                                      std::size_t docs, std::size_t vocab,
                                      const PlsaConfig& cfg);

struct Elbo {
  /// Data log-likelihood plus Dirichlet log-prior terms (constants dropped).
  double with_prior = 0.0;
  /// Data log-likelihood only.
  double data_only = 0.0;
};

/// With exact posteriors the ELBO equals the incomplete-data log-likelihood.
Elbo elbo(const Corpus& corpus, const Parameter& theta, const PlsaConfig& cfg);

class PlsaModel final : public LatentModel {
 public:
  PlsaModel(Corpus corpus, PlsaConfig cfg);

  std::size_t num_samples() const override { return corpus_.tokens.size(); }
  const LayoutPtr& stat_layout() const override { return layout_; }
  std::size_t support_size() const override { return 2 * cfg_.topics; }
  void sample_support(std::size_t i,
                      std::span<std::size_t> out) const override;
  void sample_stat_values(std::size_t i, const Parameter& theta,
                          std::span<double> out) const override;
  /// Aggregates are n * s.
  Parameter m_step(const SuffStats& s) const override;
  /// -(alpha' sum log doc_topic + beta' sum log topic_word) / n, so that the
  /// M-step on averaged statistics is the exact minimizer.
  double penalty(const Parameter& theta) const override;
  double sample_loss(std::size_t i, const Parameter& theta) const override;
  /// Symmetric Dirichlet(init_concentration) rows.
  Parameter initial_parameter(Rng& rng) const override;
  void validate(const Parameter& theta) const override;

  const Corpus& corpus() const { return corpus_; }
  const PlsaConfig& config() const { return cfg_; }

 private:
  Corpus corpus_;
  PlsaConfig cfg_;
  LayoutPtr layout_;
};

/// Line 1 "D V n", then n lines "d w" with 1-based indices.
Corpus ingest_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);

struct SyntheticCorpusSpec {
  std::size_t docs = 100;
  std::size_t vocab = 300;
  std::size_t topics = 10;
  std::size_t tokens = 10000;
  double doc_concentration = 0.1;
  double word_concentration = 0.1;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  Corpus corpus;
  std::vector<std::vector<double>> doc_topic;
  std::vector<std::vector<double>> topic_word;
};

/// theta* from symmetric Dirichlets, then d ~ uniform, z ~ doc_topic[d],
/// w ~ topic_word[z].
SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusSpec& spec);

/// Sidecar `<path>.meta.json` describing a generated corpus.
void write_corpus_metadata(const std::filesystem::path& corpus_path,
                           const SyntheticCorpusSpec& spec);

}  // namespace stochem
