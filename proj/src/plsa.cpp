#include "stochem/plsa.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "stochem/errors.hpp"
#include "stochem/io.hpp"

namespace stochem {

namespace {

std::string row_name(const char* prefix, std::size_t r) {
  return std::string(prefix) + "[" + std::to_string(r) + "]";
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    if (end > pos) out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

}  // namespace

void Corpus::validate() const {
  if (docs < 1 || vocab < 1) {
    throw ValidationError("corpus needs D >= 1 and V >= 1");
  }
  if (tokens.empty()) throw ValidationError("corpus has no tokens");
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].doc >= docs || tokens[i].word >= vocab) {
      throw ValidationError("token " + std::to_string(i) +
                            " has an out-of-range index");
    }
  }
}

void PlsaConfig::validate() const {
  if (topics < 1) throw ContractError("pLSA needs at least one topic");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw ContractError("pLSA smoothing constants must be nonnegative");
  }
  if (!(init_concentration > 0.0)) {
    throw ContractError("init_concentration must be positive");
  }
}

LayoutPtr plsa_layout(std::size_t docs, std::size_t vocab, std::size_t topics) {
  return std::make_shared<const StatLayout>(
      std::vector<std::pair<std::string, std::size_t>>{
          {kPlsaDocTopic, docs * topics}, {kPlsaTopicWord, topics * vocab}});
}

Parameter make_plsa_params(const std::vector<std::vector<double>>& doc_topic,
                           const std::vector<std::vector<double>>& topic_word) {
  std::vector<ParamBlock> blocks;
  blocks.reserve(doc_topic.size() + topic_word.size());
  for (std::size_t d = 0; d < doc_topic.size(); ++d) {
    blocks.push_back(Parameter::simplex_from_full(row_name("doc", d), doc_topic[d]));
  }
  for (std::size_t k = 0; k < topic_word.size(); ++k) {
    blocks.push_back(Parameter::simplex_from_full(row_name("topic", k), topic_word[k]));
  }
  return Parameter(std::move(blocks));
}

std::span<const double> doc_row(const Parameter& theta, std::size_t d) {
  return theta.block(d).values;
}

std::span<const double> topic_row(const Parameter& theta, std::size_t docs,
                                  std::size_t k) {
  return theta.block(docs + k).values;
}

std::vector<double> token_posterior(const Parameter& theta, std::size_t docs,
                                    Token token) {
  theta.require_interior();
  const auto row = doc_row(theta, token.doc);
  const std::size_t topics = row.size();
  std::vector<double> p(topics);
  double total = 0.0;
  for (std::size_t k = 0; k < topics; ++k) {
    p[k] = row[k] * topic_row(theta, docs, k)[token.word];
    total += p[k];
  }
  for (auto& v : p) v /= total;
  return p;
}

Parameter plsa_m_step_from_aggregates(std::span<const double> agg_dk,
                                      std::span<const double> agg_kv,
                                      std::size_t docs, std::size_t vocab,
                                      const PlsaConfig& cfg) {
  const std::size_t topics = cfg.topics;
  if (agg_dk.size() != docs * topics || agg_kv.size() != topics * vocab) {
    throw ContractError("pLSA M-step: aggregate sizes do not match D, V, K");
  }
  std::vector<ParamBlock> blocks;
  blocks.reserve(docs + topics);

  auto smooth_rows = [&](std::span<const double> agg, std::size_t rows,
                         std::size_t width, double prior, const char* what,
                         const char* prefix) {
    for (std::size_t r = 0; r < rows; ++r) {
      const auto a = agg.subspan(r * width, width);
      double total = 0.0;
      for (std::size_t c = 0; c < width; ++c) {
        if (a[c] < -0.5 * prior || !std::isfinite(a[c])) {
          throw DomainError(std::string("pLSA M-step: ") + what + "[" +
                            std::to_string(r) + "," + std::to_string(c) +
                            "] = " + format_double(a[c]) +
                            " is below -smoothing/2");
        }
        total += a[c];
      }
      const double denom = total + prior * static_cast<double>(width);
      if (!(denom > 0.0)) {
        throw DomainError(std::string("pLSA M-step: ") + what + " row " +
                          std::to_string(r) + " has a nonpositive normalizer");
      }
      std::vector<double> row(width);
      for (std::size_t c = 0; c < width; ++c) row[c] = (a[c] + prior) / denom;
      blocks.push_back(
          Parameter::simplex_from_full(row_name(prefix, r), std::move(row)));
    }
  };
  smooth_rows(agg_dk, docs, topics, cfg.alpha, "agg_dk", "doc");
  smooth_rows(agg_kv, topics, vocab, cfg.beta, "agg_kv", "topic");

  Parameter theta(std::move(blocks));
  theta.require_interior();
  return theta;
}

Elbo elbo(const Corpus& corpus, const Parameter& theta, const PlsaConfig& cfg) {
  theta.require_interior();
  const std::size_t topics = cfg.topics;
  Elbo out;
  double data = 0.0;
  for (const auto& t : corpus.tokens) {
    const auto row = doc_row(theta, t.doc);
    double p = 0.0;
    for (std::size_t k = 0; k < topics; ++k) {
      p += row[k] * topic_row(theta, corpus.docs, k)[t.word];
    }
    data += std::log(p);
  }
  double prior = 0.0;
  for (const auto& b : theta.blocks()) {
    const bool is_doc = &b - &theta.blocks()[0] < static_cast<std::ptrdiff_t>(corpus.docs);
    const double c = is_doc ? cfg.alpha : cfg.beta;
    if (c == 0.0) continue;
    double s = 0.0;
    for (double v : b.values) s += std::log(v);
    prior += c * s;
  }
  out.data_only = data;
  out.with_prior = data + prior;
  return out;
}

PlsaModel::PlsaModel(Corpus corpus, PlsaConfig cfg)
    : corpus_(std::move(corpus)),
      cfg_(cfg),
      layout_(plsa_layout(corpus_.docs, corpus_.vocab, cfg.topics)) {
  cfg_.validate();
  corpus_.validate();
}

void PlsaModel::sample_support(std::size_t i, std::span<std::size_t> out) const {
  const Token t = corpus_.tokens[i];
  const std::size_t topics = cfg_.topics;
  const std::size_t base = corpus_.docs * topics;
  for (std::size_t k = 0; k < topics; ++k) {
    out[k] = t.doc * topics + k;
    out[topics + k] = base + k * corpus_.vocab + t.word;
  }
}

void PlsaModel::sample_stat_values(std::size_t i, const Parameter& theta,
                                   std::span<double> out) const {
  const Token t = corpus_.tokens[i];
  const std::size_t topics = cfg_.topics;
  const auto& blocks = theta.blocks();
  const auto& row = blocks[t.doc].values;
  double total = 0.0;
  for (std::size_t k = 0; k < topics; ++k) {
    out[k] = row[k] * blocks[corpus_.docs + k].values[t.word];
    total += out[k];
  }
  for (std::size_t k = 0; k < topics; ++k) {
    out[k] /= total;
    out[topics + k] = out[k];
  }
}

Parameter PlsaModel::m_step(const SuffStats& s) const {
  if (s.layout() != layout_ && *s.layout() != *layout_) {
    throw ContractError("pLSA M-step: statistics layout mismatch");
  }
  const double n = static_cast<double>(num_samples());
  std::vector<double> agg(s.values().begin(), s.values().end());
  for (auto& v : agg) v *= n;
  const auto all = std::span<const double>(agg);
  const std::size_t dk = corpus_.docs * cfg_.topics;
  return plsa_m_step_from_aggregates(all.first(dk), all.subspan(dk),
                                     corpus_.docs, corpus_.vocab, cfg_);
}

double PlsaModel::penalty(const Parameter& theta) const {
  validate(theta);
  double prior = 0.0;
  for (std::size_t b = 0; b < theta.block_count(); ++b) {
    const double c = b < corpus_.docs ? cfg_.alpha : cfg_.beta;
    if (c == 0.0) continue;
    double s = 0.0;
    for (double v : theta.block(b).values) s += std::log(v);
    prior += c * s;
  }
  return -prior / static_cast<double>(num_samples());
}

double PlsaModel::sample_loss(std::size_t i, const Parameter& theta) const {
  const Token t = corpus_.tokens[i];
  const auto& blocks = theta.blocks();
  const auto& row = blocks[t.doc].values;
  double p = 0.0;
  for (std::size_t k = 0; k < cfg_.topics; ++k) {
    p += row[k] * blocks[corpus_.docs + k].values[t.word];
  }
  return -std::log(p);
}

Parameter PlsaModel::initial_parameter(Rng& rng) const {
  std::vector<std::vector<double>> dt(corpus_.docs), tw(cfg_.topics);
  for (auto& r : dt) r = rng.dirichlet(cfg_.topics, cfg_.init_concentration);
  for (auto& r : tw) r = rng.dirichlet(corpus_.vocab, cfg_.init_concentration);
  Parameter theta = make_plsa_params(dt, tw);
  theta.require_interior();
  return theta;
}

void PlsaModel::validate(const Parameter& theta) const {
  if (theta.block_count() != corpus_.docs + cfg_.topics) {
    throw ContractError("parameter does not have D + K blocks");
  }
  for (std::size_t b = 0; b < theta.block_count(); ++b) {
    const auto& blk = theta.block(b);
    const std::size_t want = b < corpus_.docs ? cfg_.topics : corpus_.vocab;
    if (blk.kind != BlockKind::ReducedSimplex || blk.dimension() != want) {
      throw ContractError("parameter block " + std::to_string(b) +
                          " has the wrong shape");
    }
  }
  theta.require_interior();
}

Corpus ingest_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;

  auto next_content_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_content_line()) throw ParseError("missing header line", 1);
  const auto header = split_ws(line);
  if (header.size() != 3) {
    throw ParseError("header must be 'D V n'", line_no);
  }
  const long long d = parse_integer(header[0], line_no);
  const long long v = parse_integer(header[1], line_no);
  const long long n = parse_integer(header[2], line_no);
  if (d < 1 || v < 1 || n < 1) {
    throw ValidationError("header values must be positive", line_no);
  }

  Corpus corpus;
  corpus.docs = static_cast<std::size_t>(d);
  corpus.vocab = static_cast<std::size_t>(v);
  corpus.tokens.reserve(static_cast<std::size_t>(n));
  while (next_content_line()) {
    const auto fields = split_ws(line);
    if (fields.size() != 2) {
      throw ParseError("token line must be 'd w'", line_no);
    }
    const long long doc = parse_integer(fields[0], line_no);
    const long long word = parse_integer(fields[1], line_no);
    if (doc < 1 || doc > d) {
      throw ValidationError("line " + std::to_string(line_no) + ": document " +
                                std::to_string(doc) + " outside [1, " +
                                std::to_string(d) + "]",
                            line_no);
    }
    if (word < 1 || word > v) {
      throw ValidationError("line " + std::to_string(line_no) + ": word " +
                                std::to_string(word) + " outside [1, " +
                                std::to_string(v) + "]",
                            line_no);
    }
    corpus.tokens.push_back(Token{static_cast<std::uint32_t>(doc - 1),
                                  static_cast<std::uint32_t>(word - 1)});
  }
  if (corpus.tokens.size() != static_cast<std::size_t>(n)) {
    throw ValidationError("header declares " + std::to_string(n) +
                              " tokens, file has " +
                              std::to_string(corpus.tokens.size()),
                          line_no);
  }
  return corpus;
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::string body = std::to_string(corpus.docs) + " " +
                     std::to_string(corpus.vocab) + " " +
                     std::to_string(corpus.tokens.size()) + "\n";
  for (const auto& t : corpus.tokens) {
    body += std::to_string(t.doc + 1);
    body += ' ';
    body += std::to_string(t.word + 1);
    body += '\n';
  }
  write_text_file(path, body);
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusSpec& spec) {
  if (spec.docs < 1 || spec.vocab < 1 || spec.topics < 1 || spec.tokens < 1) {
    throw ContractError("synthetic corpus sizes must be >= 1");
  }
  Rng rng(spec.seed);
  SyntheticCorpus out;
  out.doc_topic.resize(spec.docs);
  out.topic_word.resize(spec.topics);
  for (auto& r : out.doc_topic) r = rng.dirichlet(spec.topics, spec.doc_concentration);
  for (auto& r : out.topic_word) r = rng.dirichlet(spec.vocab, spec.word_concentration);
  out.corpus.docs = spec.docs;
  out.corpus.vocab = spec.vocab;
  out.corpus.tokens.resize(spec.tokens);
  for (auto& t : out.corpus.tokens) {
    const auto d = static_cast<std::size_t>(rng.uniform_index(spec.docs));
    const std::size_t z = rng.categorical(out.doc_topic[d]);
    const std::size_t w = rng.categorical(out.topic_word[z]);
    t = Token{static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(w)};
  }
  return out;
}

void write_corpus_metadata(const std::filesystem::path& corpus_path,
                           const SyntheticCorpusSpec& spec) {
  nlohmann::ordered_json j;
  j["docs"] = spec.docs;
  j["vocab"] = spec.vocab;
  j["topics"] = spec.topics;
  j["tokens"] = spec.tokens;
  j["doc_concentration"] = spec.doc_concentration;
  j["word_concentration"] = spec.word_concentration;
  j["seed"] = spec.seed;
  write_text_file(corpus_path.string() + ".meta.json", j.dump(2) + "\n");
}

}  // namespace stochem
