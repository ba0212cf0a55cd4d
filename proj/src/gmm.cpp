#include "stochem/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "stochem/errors.hpp"
#include "stochem/io.hpp"

namespace stochem {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

void require_components(const Parameter& theta, std::size_t m) {
  if (theta.block_count() != 2 || theta.block(0).name != kGmmOmega ||
      theta.block(1).name != kGmmMu ||
      theta.block(0).kind != BlockKind::ReducedSimplex ||
      theta.block(0).dimension() != m || theta.block(1).dimension() != m) {
    throw ContractError("parameter is not a GMM parameter with " +
                        std::to_string(m) + " components");
  }
}

double log_sum_exp(std::span<const double> a) {
  const double mx = *std::max_element(a.begin(), a.end());
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : a) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

}  // namespace

void GmmConfig::validate() const {
  if (components < 1) throw ContractError("GMM needs at least one component");
  if (!(epsilon >= 0.0) || !(delta >= 0.0)) {
    throw ContractError("GMM penalty constants must be nonnegative");
  }
  if (!(init_jitter >= 0.0)) throw ContractError("init_jitter must be >= 0");
}

LayoutPtr gmm_layout(std::size_t components) {
  return std::make_shared<const StatLayout>(
      std::vector<std::pair<std::string, std::size_t>>{
          {kGmmWeightMass, components - 1},
          {kGmmWeightedObs, components - 1},
          {kGmmObsMean, 1}});
}

Parameter make_gmm_params(std::span<const double> reduced_weights,
                          std::span<const double> means) {
  if (means.size() != reduced_weights.size() + 1) {
    throw ContractError("GMM parameter needs M-1 weights and M means");
  }
  return Parameter({Parameter::simplex_from_reduced(kGmmOmega, reduced_weights),
                    Parameter::real_vector(kGmmMu, {means.begin(), means.end()})});
}

std::span<const double> gmm_weights(const Parameter& theta) {
  return theta.block(0).values;
}

std::span<const double> gmm_means(const Parameter& theta) {
  return theta.block(1).values;
}

void responsibilities(double y, std::span<const double> weights,
                      std::span<const double> means, std::span<double> out) {
  const std::size_t m = weights.size();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    const double r = y - means[j];
    out[j] = std::log(weights[j]) - 0.5 * r * r;
    mx = std::max(mx, out[j]);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    out[j] = std::exp(out[j] - mx);
    total += out[j];
  }
  for (std::size_t j = 0; j < m; ++j) out[j] /= total;
}

std::vector<double> responsibilities(double y, const Parameter& theta) {
  theta.require_interior();
  const auto w = gmm_weights(theta);
  std::vector<double> out(w.size());
  responsibilities(y, w, gmm_means(theta), out);
  return out;
}

Parameter gmm_m_step(const SuffStats& s, const GmmConfig& cfg) {
  const std::size_t m = cfg.components;
  if (s.size() != 2 * m - 1) {
    throw ContractError("GMM statistics have the wrong length for M=" +
                        std::to_string(m));
  }
  const auto mass = s.values().first(m - 1);
  const auto obs = s.values().subspan(m - 1, m - 1);
  const double mean_obs = s[2 * m - 2];

  double mass_total = 0.0;
  double obs_total = 0.0;
  for (std::size_t j = 0; j + 1 < m; ++j) {
    mass_total += mass[j];
    obs_total += obs[j];
  }
  const double norm = 1.0 + cfg.epsilon * static_cast<double>(m);

  std::vector<double> weights(m);
  std::vector<double> means(m);
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double denom = mass[j] + cfg.delta;
    if (!(denom > 0.0)) {
      throw DomainError("GMM M-step: s1[" + std::to_string(j) +
                        "] + delta = " + format_double(denom) +
                        " is not positive");
    }
    weights[j] = (mass[j] + cfg.epsilon) / norm;
    means[j] = obs[j] / denom;
  }
  const double last_denom = 1.0 - mass_total + cfg.delta;
  if (!(last_denom > 0.0)) {
    throw DomainError("GMM M-step: 1 - sum(s1) + delta = " +
                      format_double(last_denom) + " is not positive");
  }
  weights[m - 1] = (1.0 - mass_total + cfg.epsilon) / norm;
  means[m - 1] = (mean_obs - obs_total) / last_denom;

  Parameter theta({Parameter::simplex_from_full(kGmmOmega, std::move(weights)),
                   Parameter::real_vector(kGmmMu, std::move(means))});
  theta.require_interior();
  return theta;
}

double gmm_penalty(const Parameter& theta, const GmmConfig& cfg) {
  require_components(theta, cfg.components);
  theta.require_interior();
  const auto w = gmm_weights(theta);
  const auto mu = gmm_means(theta);
  double ridge = 0.0;
  for (double v : mu) ridge += v * v;
  double log_prior = 0.0;
  if (cfg.epsilon != 0.0) {
    for (double v : w) log_prior += std::log(v);
  }
  return 0.5 * cfg.delta * ridge - cfg.epsilon * log_prior;
}

double gmm_sample_loss(double y, const Parameter& theta) {
  const auto w = gmm_weights(theta);
  const auto mu = gmm_means(theta);
  double terms[16];
  std::vector<double> heap;
  std::span<double> t;
  if (w.size() <= 16) {
    t = std::span<double>(terms, w.size());
  } else {
    heap.resize(w.size());
    t = heap;
  }
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double r = y - mu[j];
    t[j] = std::log(w[j]) - 0.5 * r * r;
  }
  return kHalfLog2Pi - log_sum_exp(t);
}

double gmm_surrogate_objective(const SuffStats& s, const Parameter& theta,
                               const GmmConfig& cfg) {
  const std::size_t m = cfg.components;
  require_components(theta, m);
  const auto w = gmm_weights(theta);
  const auto mu = gmm_means(theta);
  const auto mass = s.block(kGmmWeightMass);
  const auto obs = s.block(kGmmWeightedObs);
  const double mean_obs = s.block(kGmmObsMean)[0];

  double value = gmm_penalty(theta, cfg);
  double rest_mass = 1.0;
  double rest_obs = mean_obs;
  for (std::size_t j = 0; j + 1 < m; ++j) {
    value -= mass[j] * (std::log(w[j]) - 0.5 * mu[j] * mu[j]);
    value -= obs[j] * mu[j];
    rest_mass -= mass[j];
    rest_obs -= obs[j];
  }
  value -= rest_mass * (std::log(w[m - 1]) - 0.5 * mu[m - 1] * mu[m - 1]);
  value -= rest_obs * mu[m - 1];
  return value;
}

double precision_metric(const Parameter& theta, const Parameter& reference) {
  const auto mu = gmm_means(theta);
  const auto ref = gmm_means(reference);
  if (mu.size() != ref.size()) {
    throw ContractError("precision_metric: component counts differ");
  }
  std::vector<std::size_t> perm(mu.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double d = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      const double r = mu[j] - ref[perm[j]];
      d += r * r;
    }
    best = std::min(best, d);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<double> generate_gmm_data(std::size_t n, const Parameter& truth,
                                      std::uint64_t seed) {
  truth.require_feasible();
  const auto w = gmm_weights(truth);
  const auto mu = gmm_means(truth);
  Rng rng(seed);
  std::vector<double> data(n);
  for (auto& y : data) {
    const std::size_t c = rng.categorical(w);
    y = mu[c] + rng.normal();
  }
  return data;
}

GmmModel::GmmModel(std::vector<double> data, GmmConfig cfg)
    : data_(std::move(data)), cfg_(cfg), layout_(gmm_layout(cfg.components)) {
  cfg_.validate();
  if (data_.empty()) throw ContractError("GMM needs at least one observation");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw ValidationError("observation " + std::to_string(i) +
                            " is not finite");
    }
  }
}

void GmmModel::sample_support(std::size_t,
                              std::span<std::size_t> out) const {
  std::iota(out.begin(), out.end(), std::size_t{0});
}

void GmmModel::sample_stat_values(std::size_t i, const Parameter& theta,
                                  std::span<double> out) const {
  const std::size_t m = cfg_.components;
  const double y = data_[i];
  double buf[16];
  std::vector<double> heap;
  std::span<double> r;
  if (m <= 16) {
    r = std::span<double>(buf, m);
  } else {
    heap.resize(m);
    r = heap;
  }
  responsibilities(y, gmm_weights(theta), gmm_means(theta), r);
  for (std::size_t j = 0; j + 1 < m; ++j) {
    out[j] = r[j];
    out[m - 1 + j] = y * r[j];
  }
  out[2 * m - 2] = y;
}

Parameter GmmModel::m_step(const SuffStats& s) const {
  if (s.layout() != layout_ && *s.layout() != *layout_) {
    throw ContractError("GMM M-step: statistics layout mismatch");
  }
  return gmm_m_step(s, cfg_);
}

double GmmModel::penalty(const Parameter& theta) const {
  return gmm_penalty(theta, cfg_);
}

double GmmModel::sample_loss(std::size_t i, const Parameter& theta) const {
  return gmm_sample_loss(data_[i], theta);
}

Parameter GmmModel::initial_parameter(Rng& rng) const {
  const std::size_t m = cfg_.components;
  std::vector<double> sorted = data_;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> reduced(m - 1, 1.0 / static_cast<double>(m));
  std::vector<double> means(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double q = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
    const auto idx = static_cast<std::size_t>(
        q * static_cast<double>(sorted.size() - 1));
    means[j] = sorted[idx] + cfg_.init_jitter * rng.normal();
  }
  return make_gmm_params(reduced, means);
}

void GmmModel::validate(const Parameter& theta) const {
  require_components(theta, cfg_.components);
  theta.require_interior();
}

void write_gmm_dataset(const std::filesystem::path& path,
                       std::span<const double> data,
                       const GmmDatasetMeta& meta) {
  std::string body;
  body.reserve(data.size() * 24);
  for (double y : data) {
    body += format_double(y);
    body += '\n';
  }
  write_text_file(path, body);

  nlohmann::ordered_json j;
  j["n"] = meta.n;
  j["seed"] = meta.seed;
  j["weights"] = meta.weights;
  j["means"] = meta.means;
  write_text_file(path.string() + ".meta.json", j.dump(2) + "\n");
}

std::vector<double> read_gmm_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<double> data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    data.push_back(parse_double(
        std::string_view(line).substr(first, last - first + 1), line_no));
  }
  return data;
}

}  // namespace stochem
