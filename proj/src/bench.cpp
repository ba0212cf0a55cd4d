#include "stochem/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <utility>

#include "stochem/errors.hpp"
#include "stochem/io.hpp"
#include "stochem/verify.hpp"

namespace stochem {

namespace {

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max() / 4;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

std::size_t parse_count(std::string_view v, std::size_t line) {
  const long long x = parse_integer(v, line);
  if (x < 0) throw ParseError("expected a nonnegative integer, got '" + std::string(v) + "'", line);
  return static_cast<std::size_t>(x);
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F&& fmt, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += fmt(xs[i]);
  }
  return out;
}

std::string seed_list(const std::vector<std::uint64_t>& seeds, char sep) {
  return join(seeds, [](std::uint64_t s) { return std::to_string(s); }, sep);
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::vector<VariantKind> all_variants() {
  return {VariantKind::Batch, VariantKind::SEM, VariantKind::IEM,
          VariantKind::SEMVR, VariantKind::FIEM};
}

/// Every key with its current value, as text.
std::map<std::string, std::string> to_map(const ExperimentConfig& c) {
  const auto d = [](double v) { return format_double(v); };
  const auto z = [](std::size_t v) { return std::to_string(v); };
  return {
      {"experiment", c.experiment},
      {"seeds", seed_list(c.seeds, ',')},
      {"variants", join(c.variants, [](VariantKind k) { return std::string(variant_name(k)); })},
      {"n", z(c.n)},
      {"n_grid", join(c.n_grid, z)},
      {"epochs", d(c.epochs)},
      {"components", z(c.gmm.components)},
      {"epsilon", d(c.gmm.epsilon)},
      {"delta", d(c.gmm.delta)},
      {"init_jitter", d(c.gmm.init_jitter)},
      {"true_mean", d(c.true_mean)},
      {"sem_a", d(c.sem_a)},
      {"sem_b", d(c.sem_b)},
      {"vr_step_at_1e4", d(c.vr_step_at_1e4)},
      {"reference_tol", d(c.reference_tol)},
      {"reference_max_iterations", z(c.reference_max_iterations)},
      {"target_precision", d(c.target_precision)},
      {"cap_factor", d(c.cap_factor)},
      {"init_weight_spread", d(c.init_weight_spread)},
      {"init_mean_spread", d(c.init_mean_spread)},
      {"topics", z(c.plsa.topics)},
      {"alpha", d(c.plsa.alpha)},
      {"beta", d(c.plsa.beta)},
      {"init_concentration", d(c.plsa.init_concentration)},
      {"docs", z(c.corpus.docs)},
      {"vocab", z(c.corpus.vocab)},
      {"corpus_topics", z(c.corpus.topics)},
      {"doc_concentration", d(c.corpus.doc_concentration)},
      {"word_concentration", d(c.corpus.word_concentration)},
      {"corpus_path", c.corpus_path.string()},
  };
}

void set_key(ExperimentConfig& c, std::string_view key, std::string_view v,
             std::size_t line) {
  const auto real = [&] { return parse_double(v, line); };
  const auto count = [&] { return parse_count(v, line); };
  if (key == "experiment") {
    if (v != c.experiment) {
      throw ValidationError("config is for experiment '" + std::string(v) +
                                "', not '" + c.experiment + "'",
                            line);
    }
  } else if (key == "seeds") {
    c.seeds.clear();
    for (auto item : split_list(v)) c.seeds.push_back(parse_count(item, line));
  } else if (key == "variants") {
    c.variants.clear();
    for (auto item : split_list(v)) {
      try {
        c.variants.push_back(parse_variant(item));
      } catch (const std::exception& e) {
        throw ParseError(e.what(), line);
      }
    }
  } else if (key == "n") {
    c.n = count();
    c.corpus.tokens = c.n;
  } else if (key == "n_grid") {
    c.n_grid.clear();
    for (auto item : split_list(v)) c.n_grid.push_back(parse_count(item, line));
  } else if (key == "epochs") {
    c.epochs = real();
  } else if (key == "out_dir") {
    c.out_dir = std::string(v);
  } else if (key == "components") {
    c.gmm.components = count();
  } else if (key == "epsilon") {
    c.gmm.epsilon = real();
  } else if (key == "delta") {
    c.gmm.delta = real();
  } else if (key == "init_jitter") {
    c.gmm.init_jitter = real();
  } else if (key == "true_mean") {
    c.true_mean = real();
  } else if (key == "sem_a") {
    c.sem_a = real();
  } else if (key == "sem_b") {
    c.sem_b = real();
  } else if (key == "vr_step_at_1e4") {
    c.vr_step_at_1e4 = real();
  } else if (key == "reference_tol") {
    c.reference_tol = real();
  } else if (key == "reference_max_iterations") {
    c.reference_max_iterations = count();
  } else if (key == "target_precision") {
    c.target_precision = real();
  } else if (key == "cap_factor") {
    c.cap_factor = real();
  } else if (key == "init_weight_spread") {
    c.init_weight_spread = real();
  } else if (key == "init_mean_spread") {
    c.init_mean_spread = real();
  } else if (key == "topics") {
    c.plsa.topics = count();
  } else if (key == "alpha") {
    c.plsa.alpha = real();
  } else if (key == "beta") {
    c.plsa.beta = real();
  } else if (key == "init_concentration") {
    c.plsa.init_concentration = real();
  } else if (key == "docs") {
    c.corpus.docs = count();
  } else if (key == "vocab") {
    c.corpus.vocab = count();
  } else if (key == "corpus_topics") {
    c.corpus.topics = count();
  } else if (key == "doc_concentration") {
    c.corpus.doc_concentration = real();
  } else if (key == "word_concentration") {
    c.corpus.word_concentration = real();
  } else if (key == "corpus_path") {
    c.corpus_path = std::string(v);
  } else {
    throw ParseError("unknown config key '" + std::string(key) + "'", line);
  }
}

double squared_diff(const SuffStats& a, const SuffStats& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    acc += d * d;
  }
  return acc;
}

using MetricFn = std::function<std::vector<std::pair<std::string_view, double>>(
    const Parameter&)>;

struct Cell {
  std::string_view variant;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

void push_metrics(std::vector<ResultRow>& rows, const Cell& cell, std::size_t k,
                  double epoch, const MetricFn& metrics, const Parameter& theta) {
  for (const auto& [name, value] : metrics(theta)) {
    rows.push_back({std::string(cell.variant), cell.n, cell.seed, k, epoch,
                    std::string(name), value});
  }
}

/// One (variant, seed) run recorded at every integer epoch; a model domain
/// error ends the run with an abort row and a warning.
void run_recorded(const LatentModel& model, const Cell& cell, RunConfig rc,
                  const Parameter& theta0, const MetricFn& metrics,
                  ExperimentResult& out) {
  const std::size_t n = model.num_samples();
  const double dn = static_cast<double>(n);
  rc.max_iterations = kUnbounded;
  rc.record_every = std::numeric_limits<std::size_t>::max();
  rc.record_objective = false;
  rc.record_residual = false;

  // The initialization pass costs one epoch for every variant.
  push_metrics(out.rows, cell, 0, 1.0, metrics, theta0);
  std::size_t last_k = 0;
  std::size_t next_mark = 2;
  std::size_t evaluations = n;
  rc.observer = [&](const VariantState& st) {
    evaluations = st.evaluations;
    if (st.evaluations >= next_mark * n) {
      push_metrics(out.rows, cell, st.k, static_cast<double>(st.evaluations) / dn,
                   metrics, st.theta);
      last_k = st.k;
      next_mark = st.evaluations / n + 1;
    }
    return true;
  };
  try {
    const RunTrace trace = run(model, rc, theta0);
    if (trace.iterations != last_k) {
      push_metrics(out.rows, cell, trace.iterations,
                   static_cast<double>(trace.evaluations) / dn, metrics,
                   trace.final_theta);
    }
  } catch (const SolverAbort& e) {
    out.rows.push_back({std::string(cell.variant), cell.n, cell.seed, e.iteration(),
                        static_cast<double>(evaluations) / dn, std::string(kMetricAbort),
                        static_cast<double>(e.iteration())});
    out.warnings.push_back(std::string(cell.variant) + " seed " +
                           std::to_string(cell.seed) + ": " + e.what());
  }
}

Parameter two_component_truth(double mean) {
  const double w[] = {0.5};
  const double mu[] = {mean, -mean};
  return make_gmm_params(w, mu);
}

/// Truth with equal weights and means spread symmetrically over
/// [-true_mean, true_mean].
Parameter gmm_truth(const ExperimentConfig& cfg) {
  const std::size_t m = cfg.gmm.components;
  if (m == 2) return two_component_truth(cfg.true_mean);
  std::vector<double> w(m - 1, 1.0 / static_cast<double>(m));
  std::vector<double> mu(m);
  for (std::size_t c = 0; c < m; ++c) {
    mu[c] = cfg.true_mean * (1.0 - 2.0 * static_cast<double>(c) /
                                       static_cast<double>(m - 1));
  }
  return make_gmm_params(w, mu);
}

/// Reference plus (weight, mean) offsets drawn from `rng`.
Parameter perturbed_start(const Parameter& ref, const ExperimentConfig& cfg,
                          Rng& rng) {
  const auto w = gmm_weights(ref);
  const auto mu = gmm_means(ref);
  const std::size_t m = mu.size();
  std::vector<double> reduced(m - 1);
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < m; ++c) {
    reduced[c] = std::clamp(w[c] + cfg.init_weight_spread * rng.normal(), 0.05, 0.95);
    total += reduced[c];
  }
  if (total > 0.95) {
    for (double& x : reduced) x *= 0.95 / total;
  }
  std::vector<double> means(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = mu[c] + cfg.init_mean_spread * rng.normal();
  }
  return make_gmm_params(reduced, means);
}

void report_warnings(const ExperimentResult& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& what) { throw ValidationError(what); };
  if (experiment != kGmmFixedN && experiment != kGmmScaling &&
      experiment != kPlsaElbo && experiment != kVerify) {
    fail("unknown experiment '" + experiment + "'");
  }
  if (seeds.empty()) fail("seeds must not be empty");
  if (experiment == kVerify) return;
  if (variants.empty()) fail("variants must not be empty");
  if (!(epochs >= 0.0)) fail("epochs must be >= 0");
  gmm.validate();
  plsa.validate();
  if (experiment == kGmmScaling) {
    if (n_grid.empty()) fail("n_grid must not be empty");
    for (std::size_t x : n_grid) {
      if (x == 0) fail("n_grid entries must be positive");
    }
    if (!(target_precision > 0.0)) fail("target_precision must be positive");
    if (!(cap_factor > 0.0)) fail("cap_factor must be positive");
  } else if (n == 0) {
    fail("n must be positive");
  }
  if (!(sem_b > 0.0) || !(sem_a > 0.0) || sem_a > sem_b) fail("need 0 < sem_a <= sem_b");
  if (!(vr_step_at_1e4 > 0.0) || vr_step_at_1e4 > 1.0) fail("vr_step_at_1e4 must be in (0, 1]");
  if (!(reference_tol > 0.0)) fail("reference_tol must be positive");
  if (experiment == kPlsaElbo && corpus_path.empty()) {
    if (corpus.docs == 0 || corpus.vocab == 0 || corpus.topics == 0) {
      fail("synthetic corpus sizes must be positive");
    }
    if (!(corpus.doc_concentration > 0.0) || !(corpus.word_concentration > 0.0)) {
      fail("corpus concentrations must be positive");
    }
  }
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : to_map(*this)) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t ExperimentConfig::config_hash() const {
  return fnv1a64(canonical());
}

ExperimentConfig default_config(std::string_view experiment) {
  ExperimentConfig c;
  c.experiment = std::string(experiment);
  c.seeds = {0, 1, 2, 3, 4};
  c.variants = all_variants();
  if (experiment == kGmmFixedN) {
    c.n = 10000;
    c.epochs = 30.0;
  } else if (experiment == kGmmScaling) {
    c.variants = {VariantKind::IEM, VariantKind::SEMVR, VariantKind::FIEM};
    c.n_grid = {1000, 3000, 10000, 30000};
  } else if (experiment == kPlsaElbo) {
    c.seeds = {0, 1, 2};
    c.n = 10000;
    c.corpus.tokens = c.n;
    c.epochs = 15.0;
    c.sem_a = 1.0;
    c.sem_b = 10.0;
  } else if (experiment == kVerify) {
    c.seeds = {0};
  } else {
    throw ValidationError("unknown experiment '" + std::string(experiment) + "'");
  }
  return c;
}

ExperimentConfig apply_config_text(ExperimentConfig base, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("expected key = value", line_no);
    }
    set_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no);
  }
  return base;
}

ExperimentConfig load_config(std::string_view experiment,
                             const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return apply_config_text(default_config(experiment), text.str());
}

double gmm_vr_step(const ExperimentConfig& cfg, std::size_t n) {
  return cfg.vr_step_at_1e4 * std::pow(1e4 / static_cast<double>(n), 2.0 / 3.0);
}

StepSchedule preset_schedule(const ExperimentConfig& cfg, VariantKind kind,
                             std::size_t n) {
  switch (kind) {
    case VariantKind::Batch:
    case VariantKind::IEM:
      return StepSchedule::constant(1.0);
    case VariantKind::SEM:
      return StepSchedule::harmonic(cfg.sem_a, cfg.sem_b);
    case VariantKind::SEMVR:
    case VariantKind::FIEM:
      if (cfg.experiment == kPlsaElbo) {
        return StepSchedule::constant(std::pow(static_cast<double>(n), -2.0 / 3.0));
      }
      return StepSchedule::constant(std::min(1.0, gmm_vr_step(cfg, n)));
  }
  throw ContractError("preset_schedule: unknown variant");
}

std::uint64_t cell_seed(std::uint64_t seed, std::string_view key) {
  return Rng(seed).split(key).seed();
}

Parameter gmm_reference(const GmmModel& model, const Parameter& theta_init,
                        double tol, std::size_t max_iterations) {
  SuffStats s = full_estep(model, theta_init);
  const double tol2 = tol * tol;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    SuffStats next = full_estep(model, model.m_step(s));
    const double r2 = squared_diff(s, next);
    s = std::move(next);
    if (r2 <= tol2) break;
  }
  return model.m_step(s);
}

ExperimentResult run_gmm_fixed_n(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  const Parameter truth = gmm_truth(cfg);
  for (std::uint64_t seed : cfg.seeds) {
    GmmModel model(generate_gmm_data(cfg.n, truth, cell_seed(seed, "data")), cfg.gmm);
    Rng init(cell_seed(seed, "init"));
    const Parameter theta0 = model.initial_parameter(init);
    const Parameter ref =
        gmm_reference(model, theta0, cfg.reference_tol, cfg.reference_max_iterations);
    const MetricFn metrics = [&](const Parameter& theta) {
      return std::vector<std::pair<std::string_view, double>>{
          {kMetricPrecision, precision_metric(theta, ref)},
          {kMetricObjective, penalized_objective(model, theta)}};
    };
    for (VariantKind kind : cfg.variants) {
      const std::string name(variant_name(kind));
      RunConfig rc;
      rc.variant.kind = kind;
      rc.schedule = preset_schedule(cfg, kind, cfg.n);
      rc.max_epochs = cfg.epochs;
      rc.seed = cell_seed(seed, "run/" + name);
      run_recorded(model, Cell{name, cfg.n, seed}, rc, theta0, metrics, out);
    }
  }
  return out;
}

std::optional<double> least_squares_slope(const std::vector<double>& x,
                                          const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx <= 0.0) return std::nullopt;
  return sxy / sxx;
}

ExperimentResult run_gmm_scaling(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult out;
  const Parameter truth = gmm_truth(cfg);
  GmmConfig ref_cfg = cfg.gmm;
  ref_cfg.init_jitter = 0.0;

  // sums[v][g]: total uncensored iterations and count at grid point g.
  std::vector<std::vector<std::pair<double, std::size_t>>> sums(
      cfg.variants.size(), std::vector<std::pair<double, std::size_t>>(cfg.n_grid.size()));
  std::vector<std::size_t> censored(cfg.variants.size(), 0);

  for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) {
    const std::size_t n = cfg.n_grid[g];
    const auto cap = static_cast<std::size_t>(std::ceil(cfg.cap_factor * static_cast<double>(n)));
    for (std::uint64_t seed : cfg.seeds) {
      // Same data stream for every n, so smaller samples are prefixes.
      GmmModel model(generate_gmm_data(n, truth, cell_seed(seed, "data")), ref_cfg);
      Rng quantiles;
      const Parameter ref = gmm_reference(model, model.initial_parameter(quantiles),
                                          cfg.reference_tol, cfg.reference_max_iterations);
      // The offset from the reference depends on the seed only, so the initial
      // gap is the same at every n.
      Rng offset(cell_seed(seed, "scaling-init"));
      const Parameter theta0 = perturbed_start(ref, cfg, offset);
      const std::string ns = std::to_string(n);
      for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
        const VariantKind kind = cfg.variants[v];
        const std::string name(variant_name(kind));
        out.rows.push_back({name, n, seed, 0, 1.0, std::string(kMetricInitPrecision),
                            precision_metric(theta0, ref)});
        RunConfig rc;
        rc.variant.kind = kind;
        rc.schedule = preset_schedule(cfg, kind, n);
        rc.max_iterations = cap;
        rc.seed = cell_seed(seed, "run/" + name + "/" + ns);
        rc.record_every = std::numeric_limits<std::size_t>::max();
        rc.record_objective = false;
        rc.record_residual = false;
        std::size_t hit = 0;
        std::size_t hit_evaluations = 0;
        const bool already = precision_metric(theta0, ref) <= cfg.target_precision;
        rc.observer = [&](const VariantState& st) {
          if (precision_metric(st.theta, ref) <= cfg.target_precision) {
            hit = st.k;
            hit_evaluations = st.evaluations;
            return false;
          }
          return true;
        };
        try {
          if (!already) run(model, rc, theta0);
        } catch (const SolverAbort& e) {
          out.rows.push_back({name, n, seed, e.iteration(), 0.0, std::string(kMetricAbort),
                              static_cast<double>(e.iteration())});
          out.warnings.push_back(name + " n=" + ns + " seed " + std::to_string(seed) +
                                 ": " + e.what());
          ++censored[v];
          continue;
        }
        if (already || hit > 0) {
          out.rows.push_back({name, n, seed, hit,
                              static_cast<double>(already ? n : hit_evaluations) /
                                  static_cast<double>(n),
                              std::string(kMetricIterations), static_cast<double>(hit)});
          sums[v][g].first += static_cast<double>(hit);
          sums[v][g].second += 1;
        } else {
          out.rows.push_back({name, n, seed, cap, 0.0, std::string(kMetricCensored),
                              static_cast<double>(cap)});
          out.warnings.push_back(name + " n=" + ns + " seed " + std::to_string(seed) +
                                 ": precision target not reached within " +
                                 std::to_string(cap) + " iterations (censored, excluded "
                                 "from the slope)");
          ++censored[v];
        }
      }
    }
  }

  for (std::size_t v = 0; v < cfg.variants.size(); ++v) {
    std::vector<double> x, y;
    for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) {
      const auto [total, count] = sums[v][g];
      if (count == 0 || total <= 0.0) continue;
      x.push_back(std::log(static_cast<double>(cfg.n_grid[g])));
      y.push_back(std::log(total / static_cast<double>(count)));
    }
    if (const auto slope = least_squares_slope(x, y)) {
      out.slopes.push_back({std::string(variant_name(cfg.variants[v])), *slope, x.size(),
                            censored[v]});
    }
  }
  return out;
}

ExperimentResult run_plsa_elbo(const ExperimentConfig& cfg) {
  cfg.validate();
  std::optional<Corpus> shared;
  if (!cfg.corpus_path.empty()) {
    shared = ingest_corpus(cfg.corpus_path);
    shared->validate();
  }
  ExperimentResult out;
  for (std::uint64_t seed : cfg.seeds) {
    Corpus corpus;
    if (shared) {
      corpus = *shared;
    } else {
      SyntheticCorpusSpec spec = cfg.corpus;
      spec.tokens = cfg.n;
      spec.seed = cell_seed(seed, "corpus");
      corpus = generate_synthetic_corpus(spec).corpus;
    }
    PlsaModel model(std::move(corpus), cfg.plsa);
    const std::size_t n = model.num_samples();
    Rng init(cell_seed(seed, "init"));
    const Parameter theta0 = model.initial_parameter(init);
    const MetricFn metrics = [&](const Parameter& theta) {
      const Elbo e = elbo(model.corpus(), theta, cfg.plsa);
      return std::vector<std::pair<std::string_view, double>>{
          {kMetricElboWithPrior, e.with_prior}, {kMetricElboDataOnly, e.data_only}};
    };
    for (VariantKind kind : cfg.variants) {
      const std::string name(variant_name(kind));
      RunConfig rc;
      rc.variant.kind = kind;
      rc.schedule = preset_schedule(cfg, kind, n);
      rc.max_epochs = cfg.epochs;
      rc.seed = cell_seed(seed, "run/" + name);
      run_recorded(model, Cell{name, n, seed}, rc, theta0, metrics, out);
    }
  }
  return out;
}

std::string render_csv(const ExperimentConfig& cfg,
                       const std::vector<ResultRow>& rows) {
  std::string out = "# experiment=" + cfg.experiment +
                    " config_hash=" + hex64(cfg.config_hash()) +
                    " seeds=" + seed_list(cfg.seeds, ';') +
                    " code_version=" + std::string(kCodeVersion) +
                    " rng=" + std::string(Rng::kName) + "\n";
  out += "experiment,variant,n,seed,k,epoch,metric,value\n";
  for (const auto& r : rows) {
    out += cfg.experiment;
    out += ',' + r.variant + ',' + std::to_string(r.n) + ',' + std::to_string(r.seed) +
           ',' + std::to_string(r.k) + ',' + format_double(r.epoch) + ',' + r.metric +
           ',' + format_double(r.value) + '\n';
  }
  return out;
}

std::string render_slopes_csv(const ExperimentConfig& cfg,
                              const std::vector<SlopeRow>& slopes) {
  std::string out = "# experiment=" + cfg.experiment +
                    " config_hash=" + hex64(cfg.config_hash()) +
                    " seeds=" + seed_list(cfg.seeds, ';') +
                    " code_version=" + std::string(kCodeVersion) + "\n";
  out += "experiment,variant,slope,points,censored\n";
  for (const auto& s : slopes) {
    out += cfg.experiment + ',' + s.variant + ',' + format_double(s.slope) + ',' +
           std::to_string(s.points) + ',' + std::to_string(s.censored) + '\n';
  }
  return out;
}

std::filesystem::path results_path(const ExperimentConfig& cfg) {
  std::string stem = cfg.experiment;
  std::replace(stem.begin(), stem.end(), '-', '_');
  return cfg.out_dir / (stem + (cfg.experiment == kVerify ? ".jsonl" : ".csv"));
}

std::filesystem::path slopes_path(const ExperimentConfig& cfg) {
  return cfg.out_dir / "gmm_scaling_slopes.csv";
}

int cmd_gmm_fixed_n(const ExperimentConfig& cfg) {
  const ExperimentResult r = run_gmm_fixed_n(cfg);
  report_warnings(r);
  write_text_file(results_path(cfg), render_csv(cfg, r.rows));
  return 0;
}

int cmd_gmm_scaling(const ExperimentConfig& cfg) {
  const ExperimentResult r = run_gmm_scaling(cfg);
  report_warnings(r);
  write_text_file(results_path(cfg), render_csv(cfg, r.rows));
  if (cfg.n_grid.size() < 2) {
    std::cerr << "warning: single-point n grid, slope summary omitted\n";
    return 0;
  }
  write_text_file(slopes_path(cfg), render_slopes_csv(cfg, r.slopes));
  for (const auto& s : r.slopes) {
    std::cout << s.variant << " slope " << format_double(s.slope) << " (" << s.points
              << " points, " << s.censored << " censored)\n";
  }
  return 0;
}

int cmd_plsa_elbo(const ExperimentConfig& cfg) {
  const ExperimentResult r = run_plsa_elbo(cfg);
  report_warnings(r);
  write_text_file(results_path(cfg), render_csv(cfg, r.rows));
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto reports = run_suite(default_suite(cfg.seeds.front()));
  for (const auto& r : reports) {
    std::cout << status_name(r.status) << ' ' << r.name << " measured="
              << format_double(r.measured) << ' ' << polarity_name(r.polarity) << ' '
              << format_double(r.threshold);
    if (!r.detail.empty()) std::cout << " (" << r.detail << ')';
    std::cout << '\n';
  }
  write_reports(results_path(cfg), reports);
  return suite_exit_code(reports);
}

}  // namespace stochem
