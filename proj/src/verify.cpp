#include "stochem/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "stochem/errors.hpp"
#include "stochem/io.hpp"
#include "stochem/plsa.hpp"

namespace stochem {

namespace {

using Context = std::vector<std::pair<std::string, std::string>>;

CheckReport make_report(std::string name, double measured, double threshold,
                        Polarity polarity, Context context = {}) {
  CheckReport r;
  r.name = std::move(name);
  r.measured = measured;
  r.threshold = threshold;
  r.polarity = polarity;
  r.status = judge(measured, threshold, polarity);
  r.context = std::move(context);
  return r;
}

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

/// Solves A x = b in place by Gaussian elimination with partial pivoting.
/// Returns false when A is numerically singular.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t d) {
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < d; ++r) {
      if (std::abs(a[r * d + c]) > std::abs(a[piv * d + c])) piv = r;
    }
    if (!(std::abs(a[piv * d + c]) > 1e-300)) return false;
    if (piv != c) {
      for (std::size_t k = 0; k < d; ++k) std::swap(a[c * d + k], a[piv * d + k]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < d; ++r) {
      const double f = a[r * d + c] / a[c * d + c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < d; ++k) a[r * d + k] -= f * a[c * d + k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = d; c-- > 0;) {
    double acc = b[c];
    for (std::size_t k = c + 1; k < d; ++k) acc -= a[c * d + k] * b[k];
    b[c] = acc / a[c * d + c];
  }
  return true;
}

std::vector<double> fd_hessian(const ScalarFn& f, std::span<const double> x,
                               double h) {
  const std::size_t d = x.size();
  std::vector<double> hess(d * d);
  std::vector<double> p(x.begin(), x.end());
  const double f0 = f(p);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double v;
      if (i == j) {
        p[i] = x[i] + h;
        const double fp = f(p);
        p[i] = x[i] - h;
        const double fm = f(p);
        p[i] = x[i];
        v = (fp - 2.0 * f0 + fm) / (h * h);
      } else {
        auto eval = [&](double si, double sj) {
          p[i] = x[i] + si * h;
          p[j] = x[j] + sj * h;
          const double r = f(p);
          p[i] = x[i];
          p[j] = x[j];
          return r;
        };
        v = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * h * h);
      }
      hess[i * d + j] = v;
      hess[j * d + i] = v;
    }
  }
  return hess;
}

/// Random interior parameter with the block structure of `like`.
Parameter random_parameter_like(const Parameter& like, Rng& rng) {
  std::vector<ParamBlock> blocks;
  blocks.reserve(like.block_count());
  for (const auto& b : like.blocks()) {
    if (b.kind == BlockKind::ReducedSimplex) {
      auto w = rng.dirichlet(b.dimension(), 2.0);
      blocks.push_back(Parameter::simplex_from_full(b.name, std::move(w)));
    } else {
      std::vector<double> v(b.dimension());
      for (auto& e : v) e = 1.5 * rng.normal();
      blocks.push_back(Parameter::real_vector(b.name, std::move(v)));
    }
  }
  return Parameter(std::move(blocks));
}

}  // namespace

std::string_view status_name(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Inconclusive: return "inconclusive";
    case CheckStatus::NotApplicable: return "not_applicable";
  }
  return "unknown";
}

std::string_view polarity_name(Polarity polarity) {
  switch (polarity) {
    case Polarity::AtMost: return "<=";
    case Polarity::AtLeast: return ">=";
    case Polarity::GreaterThan: return ">";
  }
  return "?";
}

CheckStatus judge(double measured, double threshold, Polarity polarity) {
  bool ok = false;
  switch (polarity) {
    case Polarity::AtMost: ok = measured <= threshold; break;
    case Polarity::AtLeast: ok = measured >= threshold; break;
    case Polarity::GreaterThan: ok = measured > threshold; break;
  }
  return ok ? CheckStatus::Pass : CheckStatus::Fail;
}

std::string to_json_line(const CheckReport& report) {
  nlohmann::ordered_json j;
  j["name"] = report.name;
  j["status"] = status_name(report.status);
  j["measured"] = report.measured;
  j["threshold"] = report.threshold;
  j["polarity"] = polarity_name(report.polarity);
  if (!report.detail.empty()) j["detail"] = report.detail;
  auto ctx = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.context) ctx[k] = v;
  j["context"] = ctx;
  return j.dump();
}

void write_reports(const std::filesystem::path& path,
                   const std::vector<CheckReport>& reports) {
  std::string body;
  for (const auto& r : reports) {
    body += to_json_line(r);
    body += '\n';
  }
  write_text_file(path, body);
}

NonFiniteEvaluation::NonFiniteEvaluation(std::size_t coordinate, double value)
    : std::runtime_error("finite difference: f is " + format_double(value) +
                         " when probing coordinate " + std::to_string(coordinate)),
      coordinate_(coordinate) {}

std::vector<double> finite_diff_grad(const ScalarFn& f,
                                     std::span<const double> x, double h,
                                     int order) {
  if (order != 2 && order != 4) {
    throw ContractError("finite_diff_grad: order must be 2 or 4");
  }
  if (!(h > 0.0)) h = 1e-5 * std::max(1.0, norm2(x));
  std::vector<double> p(x.begin(), x.end());
  std::vector<double> g(x.size());
  auto at = [&](std::size_t j, double offset) {
    p[j] = x[j] + offset;
    const double v = f(p);
    p[j] = x[j];
    if (!std::isfinite(v)) throw NonFiniteEvaluation(j, v);
    return v;
  };
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (order == 2) {
      g[j] = (at(j, h) - at(j, -h)) / (2.0 * h);
    } else {
      g[j] = (-at(j, 2 * h) + 8 * at(j, h) - 8 * at(j, -h) + at(j, -2 * h)) /
             (12.0 * h);
    }
  }
  return g;
}

MinimizeResult minimize_newton(const ScalarFn& f, std::vector<double> x0,
                               const std::function<bool(std::span<const double>)>& feasible,
                               double grad_tol, std::size_t max_iterations) {
  if (!feasible(x0)) throw ContractError("minimize_newton: infeasible start");
  const std::size_t d = x0.size();
  MinimizeResult out;
  out.x = std::move(x0);
  out.value = f(out.x);
  std::vector<double> trial(d);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const double h = 1e-4 * std::max(1.0, norm2(out.x));
    const auto g = finite_diff_grad(f, out.x, h, 4);
    out.grad_norm = norm2(g);
    out.iterations = it;
    if (out.grad_norm <= grad_tol) {
      out.converged = true;
      return out;
    }
    auto hess = fd_hessian(f, out.x, 1e-4 * std::max(1.0, norm2(out.x)));
    std::vector<double> p(d);
    for (std::size_t k = 0; k < d; ++k) p[k] = -g[k];
    std::vector<double> rhs = p;
    if (solve_dense(hess, rhs, d) && dot(rhs, g) < 0.0) p = rhs;
    const double slope = dot(p, g);

    double t = 1.0;
    bool moved = false;
    for (int halvings = 0; halvings < 80; ++halvings, t *= 0.5) {
      for (std::size_t k = 0; k < d; ++k) trial[k] = out.x[k] + t * p[k];
      if (!feasible(trial)) continue;
      const double ft = f(trial);
      if (!std::isfinite(ft)) continue;
      // Near the optimum the decrease drops below round-off; accept the
      // Newton step if it does not measurably increase f.
      const bool armijo = ft <= out.value + 1e-4 * t * slope;
      const bool flat = out.grad_norm < 1e-6 &&
                        ft <= out.value + 1e-13 * (1.0 + std::abs(out.value));
      if (armijo || flat) {
        out.x = trial;
        out.value = ft;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  const auto g = finite_diff_grad(f, out.x, 1e-4 * std::max(1.0, norm2(out.x)), 4);
  out.grad_norm = norm2(g);
  out.converged = out.grad_norm <= grad_tol;
  return out;
}

CheckReport check_unbiasedness(const LatentModel& model,
                               const VariantState& state,
                               const SurrogateFn& surrogate, double tolerance) {
  const std::size_t n = model.num_samples();
  const auto kind = state.variant.kind;
  Context ctx{{"variant", std::string(variant_name(kind))},
              {"n", num(n)},
              {"k", num(state.k)}};
  if (kind == VariantKind::IEM || kind == VariantKind::Batch) {
    CheckReport r;
    r.name = "unbiasedness";
    r.status = CheckStatus::NotApplicable;
    r.threshold = tolerance;
    r.detail = "surrogate of this variant is not an unbiased estimate";
    r.context = std::move(ctx);
    return r;
  }
  if (n > 6) throw ContractError("check_unbiasedness: enumeration needs n <= 6");
  const SurrogateFn& fn = surrogate ? surrogate : SurrogateFn(surrogate_for_indices);

  SuffStats avg(model.stat_layout());
  std::size_t draws = 0;
  const std::size_t inner = kind == VariantKind::FIEM ? n : 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < inner; ++j) {
      VariantState copy = state;
      avg.axpy(1.0, fn(model, copy, i, j));
      ++draws;
    }
  }
  avg.scale(1.0 / static_cast<double>(draws));
  const SuffStats expected = full_estep(model, state.theta);
  ctx.emplace_back("draws", num(draws));
  return make_report("unbiasedness", max_abs_diff(avg, expected), tolerance,
                     Polarity::AtMost, std::move(ctx));
}

CheckReport check_memory_identity(const LatentModel& model, VariantKind kind,
                                  const StepSchedule& schedule,
                                  std::size_t iterations, std::uint64_t seed,
                                  double tolerance) {
  if (kind != VariantKind::IEM && kind != VariantKind::FIEM) {
    throw ContractError("check_memory_identity: only iEM and FIEM keep memories");
  }
  Rng master(seed);
  Rng init_rng = master.split("init");
  const Parameter theta0 = model.initial_parameter(init_rng);
  VariantState state =
      initialize_state(model, Variant{kind, 0}, theta0, master.split("indices"));
  for (std::size_t k = 0; k < iterations; ++k) advance(model, state, schedule);
  const SuffStats mean = memory_mean(model, *state.memory);
  const SuffStats& tracked =
      kind == VariantKind::IEM ? state.s_hat : *state.running_avg;
  return make_report("memory_identity", max_abs_diff(tracked, mean), tolerance,
                     Polarity::AtMost,
                     {{"variant", std::string(variant_name(kind))},
                      {"n", num(model.num_samples())},
                      {"iterations", num(iterations)},
                      {"seed", num(static_cast<std::size_t>(seed))}});
}

double penalized_gradient_norm(const LatentModel& model, const Parameter& theta) {
  model.validate(theta);
  const auto x = theta.reduced_coordinates();
  const ScalarFn f = [&](std::span<const double> z) {
    return penalized_objective(model, theta.with_reduced_coordinates(z));
  };
  return norm2(finite_diff_grad(f, x));
}

CheckReport check_stationarity(const LatentModel& model, const Parameter& theta,
                               double tolerance, double residual_gate) {
  const SuffStats s = full_estep(model, theta);
  const double residual = fixed_point_residual(model, s);
  Context ctx{{"n", num(model.num_samples())}, {"residual", num(residual)}};
  if (!(residual <= residual_gate)) {
    CheckReport r;
    r.name = "stationarity";
    r.status = CheckStatus::Inconclusive;
    r.measured = std::numeric_limits<double>::quiet_NaN();
    r.threshold = tolerance;
    r.detail = "fixed-point residual " + num(residual) + " exceeds " +
               num(residual_gate);
    r.context = std::move(ctx);
    return r;
  }
  return make_report("stationarity", penalized_gradient_norm(model, theta),
                     tolerance, Polarity::AtMost, std::move(ctx));
}

ScaledGradient scaled_gradient(const LatentModel& model, const SuffStats& s) {
  const SuffStats image = full_estep(model, model.m_step(s));
  std::vector<double> drift(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) drift[k] = s[k] - image[k];
  const ScalarFn v = [&](std::span<const double> z) {
    return v_of_s(model, SuffStats(s.layout(), std::vector<double>(z.begin(), z.end())));
  };
  const auto g = finite_diff_grad(v, s.values());
  ScaledGradient out;
  out.inner = dot(g, drift);
  out.drift_norm2 = dot(drift, drift);
  out.ratio = out.drift_norm2 > 0.0 ? out.inner / out.drift_norm2 : 0.0;
  return out;
}

CheckReport check_scaled_gradient(const LatentModel& model, const SuffStats& s,
                                  double fixed_point_gate) {
  const double residual = fixed_point_residual(model, s);
  Context ctx{{"n", num(model.num_samples())}, {"residual", num(residual)}};
  if (!(residual > fixed_point_gate)) {
    CheckReport r;
    r.name = "scaled_gradient";
    r.status = CheckStatus::Inconclusive;
    r.measured = std::numeric_limits<double>::quiet_NaN();
    r.threshold = 0.0;
    r.polarity = Polarity::GreaterThan;
    r.detail = "statistic is a fixed point; drift direction is degenerate";
    r.context = std::move(ctx);
    return r;
  }
  const ScaledGradient sg = scaled_gradient(model, s);
  ctx.emplace_back("ratio", num(sg.ratio));
  return make_report("scaled_gradient", sg.inner, 0.0, Polarity::GreaterThan,
                     std::move(ctx));
}

CheckReport check_monotone_bem(const LatentModel& model,
                               const Parameter& theta_init,
                               std::size_t iterations, double slack) {
  model.validate(theta_init);
  Context ctx{{"n", num(model.num_samples())}, {"iterations", num(iterations)}};
  Parameter theta = theta_init;
  double prev = penalized_objective(model, theta);
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t worst_at = 0;
  for (std::size_t t = 0; t < iterations; ++t) {
    try {
      theta = model.m_step(full_estep(model, theta));
    } catch (const DomainError& e) {
      auto r = make_report("monotone_bem", std::numeric_limits<double>::infinity(),
                           slack, Polarity::AtMost, std::move(ctx));
      r.detail = "domain error at iteration " + std::to_string(t) + ": " + e.what();
      return r;
    }
    const double cur = penalized_objective(model, theta);
    if (cur - prev > worst) {
      worst = cur - prev;
      worst_at = t;
    }
    prev = cur;
  }
  if (iterations == 0) worst = 0.0;
  auto r = make_report("monotone_bem", worst, slack, Polarity::AtMost, std::move(ctx));
  if (r.failed()) r.detail = "objective increased at iteration " + std::to_string(worst_at);
  return r;
}

MStepOptimality gmm_m_step_optimality(const SuffStats& s, const GmmConfig& cfg) {
  const Parameter closed = gmm_m_step(s, cfg);
  const ScalarFn objective = [&](std::span<const double> z) {
    return gmm_surrogate_objective(s, closed.with_reduced_coordinates(z), cfg);
  };
  const auto feasible = [&](std::span<const double> z) {
    return closed.with_reduced_coordinates(z).interior();
  };
  // Start from uniform weights and zero means, independent of the closed form.
  std::vector<double> start(closed.reduced_size(), 0.0);
  for (std::size_t m = 0; m + 1 < cfg.components; ++m) {
    start[m] = 1.0 / static_cast<double>(cfg.components);
  }
  const MinimizeResult numeric = minimize_newton(objective, start, feasible);

  const auto x = closed.reduced_coordinates();
  std::vector<double> diff(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) diff[k] = x[k] - numeric.x[k];
  MStepOptimality out;
  out.parameter_distance = norm2(diff);
  out.gradient_norm = norm2(finite_diff_grad(objective, x, 0.0, 4));
  out.minimizer_converged = numeric.converged;
  return out;
}

CheckReport check_gmm_m_step(const SuffStats& s, const GmmConfig& cfg,
                             double distance_tol, double gradient_tol) {
  const auto opt = gmm_m_step_optimality(s, cfg);
  Context ctx{{"components", num(cfg.components)},
              {"gradient_norm", num(opt.gradient_norm)},
              {"minimizer_converged", opt.minimizer_converged ? "true" : "false"}};
  auto r = make_report("m_step_optimality", opt.parameter_distance, distance_tol,
                       Polarity::AtMost, std::move(ctx));
  if (r.passed() && !(opt.gradient_norm <= gradient_tol)) {
    r.status = CheckStatus::Fail;
    r.detail = "gradient norm " + num(opt.gradient_norm) + " exceeds " +
               num(gradient_tol);
  }
  return r;
}

SuffStats random_admissible_stats(const LatentModel& model, Rng& rng) {
  Rng init = rng.split("like");
  const Parameter like = model.initial_parameter(init);
  const Parameter a = random_parameter_like(like, rng);
  const Parameter b = random_parameter_like(like, rng);
  const double t = rng.uniform01();
  return SuffStats::combine(t, full_estep(model, a), 1.0 - t, full_estep(model, b));
}

BatchFit fit_batch(const LatentModel& model, const Parameter& theta_init,
                   double tol, std::size_t max_iterations) {
  SuffStats s = full_estep(model, theta_init);
  BatchFit fit{model.m_step(s), s, std::numeric_limits<double>::infinity(), 0};
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const Parameter theta = model.m_step(s);
    SuffStats next = full_estep(model, theta);
    std::vector<double> d(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) d[k] = s[k] - next[k];
    fit.residual = norm2(d);
    fit.iterations = it;
    if (fit.residual <= tol) break;
    s = std::move(next);
  }
  fit.s_hat = s;
  fit.theta = model.m_step(s);
  return fit;
}

std::vector<CheckReport> run_suite(const std::vector<NamedCheck>& checks) {
  std::vector<CheckReport> out;
  out.reserve(checks.size());
  for (const auto& c : checks) {
    CheckReport r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = CheckReport{};
      r.status = CheckStatus::Fail;
      r.measured = std::numeric_limits<double>::quiet_NaN();
      r.detail = std::string("exception: ") + e.what();
    }
    r.name = c.name;
    out.push_back(std::move(r));
  }
  return out;
}

int suite_exit_code(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports) {
    if (r.failed()) return 1;
  }
  return 0;
}

namespace {

std::shared_ptr<GmmModel> small_gmm(std::size_t n, std::size_t components,
                                    std::uint64_t seed) {
  std::vector<double> w(components - 1, 1.0 / static_cast<double>(components));
  std::vector<double> mu(components);
  for (std::size_t m = 0; m < components; ++m) {
    mu[m] = static_cast<double>(m) - 0.5 * static_cast<double>(components - 1);
  }
  auto data = generate_gmm_data(n, make_gmm_params(w, mu), seed);
  GmmConfig cfg;
  cfg.components = components;
  return std::make_shared<GmmModel>(std::move(data), cfg);
}

std::shared_ptr<PlsaModel> small_plsa(std::size_t docs, std::size_t vocab,
                                      std::size_t topics, std::size_t tokens,
                                      std::uint64_t seed) {
  SyntheticCorpusSpec spec;
  spec.docs = docs;
  spec.vocab = vocab;
  spec.topics = topics;
  spec.tokens = tokens;
  spec.doc_concentration = 1.0;
  spec.word_concentration = 1.0;
  spec.seed = seed;
  PlsaConfig cfg;
  cfg.topics = topics;
  return std::make_shared<PlsaModel>(generate_synthetic_corpus(spec).corpus, cfg);
}

/// First non-passing report, else the one with the largest (or smallest)
/// measured value.
CheckReport worst_of(std::vector<CheckReport> reports, bool larger_is_worse) {
  std::size_t pick = 0;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    if (!reports[k].passed()) return std::move(reports[k]);
    const bool worse = larger_is_worse ? reports[k].measured > reports[pick].measured
                                       : reports[k].measured < reports[pick].measured;
    if (worse) pick = k;
  }
  return std::move(reports[pick]);
}

/// gamma = 1 for iEM, n^(-2/3) otherwise.
StepSchedule preset_step(VariantKind kind, std::size_t n) {
  if (kind == VariantKind::IEM) return StepSchedule::constant(1.0);
  return StepSchedule::constant(std::pow(static_cast<double>(n), -2.0 / 3.0));
}

/// The memory identity is pure bookkeeping, so the pLSA check keeps gamma * n
/// small: larger FIEM kicks push sparse topic-word counts out of the domain.
StepSchedule memory_check_step(VariantKind kind, std::size_t n) {
  if (kind == VariantKind::IEM) return StepSchedule::constant(1.0);
  return StepSchedule::constant(0.1 / static_cast<double>(n));
}

StepSchedule schedule_for(VariantKind kind) {
  return kind == VariantKind::SEM ? StepSchedule::harmonic(1.0, 2.0)
                                  : StepSchedule::constant(0.2);
}

/// State after a few iterations so memories and anchors are stale.
VariantState warmed_state(const LatentModel& model, VariantKind kind,
                          std::size_t steps, std::uint64_t seed) {
  Rng master(seed);
  Rng init = master.split("init");
  const Parameter theta0 = model.initial_parameter(init);
  VariantState state =
      initialize_state(model, Variant{kind, 0}, theta0, master.split("indices"));
  const StepSchedule schedule = schedule_for(kind);
  for (std::size_t k = 0; k < steps; ++k) advance(model, state, schedule);
  return state;
}

}  // namespace

std::vector<NamedCheck> default_suite(std::uint64_t seed) {
  std::vector<NamedCheck> checks;
  Rng master(seed);
  auto key = [&](std::string_view name) { return master.split(name).seed(); };

  const auto gmm5 = small_gmm(5, 2, key("gmm5"));
  const auto plsa4 = small_plsa(2, 3, 2, 4, key("plsa4"));
  const VariantKind unbiased[] = {VariantKind::SEM, VariantKind::SEMVR,
                                  VariantKind::FIEM};
  for (VariantKind kind : unbiased) {
    const std::string v(variant_name(kind));
    const std::uint64_t s = key("unbiased/" + v);
    checks.push_back({"unbiasedness/gmm/" + v, [=] {
                        return check_unbiasedness(*gmm5, warmed_state(*gmm5, kind, 3, s));
                      }});
    checks.push_back({"unbiasedness/plsa/" + v, [=] {
                        return check_unbiasedness(*plsa4, warmed_state(*plsa4, kind, 3, s));
                      }});
  }

  const auto gmm50 = small_gmm(50, 2, key("gmm50"));
  const auto plsa40 = small_plsa(5, 20, 3, 40, key("plsa40"));
  for (VariantKind kind : {VariantKind::IEM, VariantKind::FIEM}) {
    const std::string v(variant_name(kind));
    const std::uint64_t s = key("memory/" + v);
    checks.push_back({"memory_identity/gmm/" + v, [=] {
                        return check_memory_identity(*gmm50, kind, preset_step(kind, 50), 200, s);
                      }});
    checks.push_back({"memory_identity/plsa/" + v, [=] {
                        return check_memory_identity(*plsa40, kind, memory_check_step(kind, 40), 200, s);
                      }});
  }

  for (std::size_t r = 0; r < 5; ++r) {
    const std::uint64_t s = key("monotone/" + std::to_string(r));
    checks.push_back({"monotone_bem/gmm/seed" + std::to_string(r), [=] {
                        const auto model = small_gmm(100, 2, s);
                        Rng init(s);
                        return check_monotone_bem(*model, model->initial_parameter(init), 200);
                      }});
    checks.push_back({"monotone_bem/plsa/seed" + std::to_string(r), [=] {
                        const auto model = small_plsa(5, 20, 3, 200, s);
                        Rng init(s);
                        return check_monotone_bem(*model, model->initial_parameter(init), 100);
                      }});
  }

  for (std::size_t components : {2u, 3u}) {
    const std::uint64_t s = key("mstep/" + std::to_string(components));
    checks.push_back({"m_step_optimality/gmm/M" + std::to_string(components), [=] {
                        const auto model = small_gmm(30, components, s);
                        Rng rng(s);
                        std::vector<CheckReport> reports;
                        for (int t = 0; t < 20; ++t) {
                          reports.push_back(check_gmm_m_step(
                              random_admissible_stats(*model, rng), model->config()));
                        }
                        CheckReport worst = worst_of(std::move(reports), true);
                        worst.context.emplace_back("draws", "20");
                        return worst;
                      }});
  }

  {
    const std::uint64_t s = key("stationarity");
    const auto gmm100 = small_gmm(100, 2, s);
    checks.push_back({"stationarity/gmm/converged", [=] {
                        Rng init(s);
                        const auto fit = fit_batch(*gmm100, gmm100->initial_parameter(init),
                                                   1e-11, 100000);
                        return check_stationarity(*gmm100, fit.theta);
                      }});
    checks.push_back({"stationarity/gmm/random_control", [=] {
                        Rng rng(s + 1);
                        Rng init(s);
                        const Parameter theta =
                            random_parameter_like(gmm100->initial_parameter(init), rng);
                        return make_report("stationarity_control",
                                           penalized_gradient_norm(*gmm100, theta), 1e-2,
                                           Polarity::GreaterThan);
                      }});
  }

  {
    const std::uint64_t s = key("scaled_gradient");
    checks.push_back({"scaled_gradient/gmm", [=] {
                        Rng rng(s);
                        std::vector<CheckReport> reports;
                        double min_ratio = std::numeric_limits<double>::infinity();
                        for (int t = 0; t < 50; ++t) {
                          const SuffStats s = random_admissible_stats(*gmm50, rng);
                          reports.push_back(check_scaled_gradient(*gmm50, s));
                          if (reports.back().passed()) {
                            min_ratio = std::min(min_ratio, scaled_gradient(*gmm50, s).ratio);
                          }
                        }
                        CheckReport worst = worst_of(std::move(reports), false);
                        worst.context.emplace_back("draws", "50");
                        worst.context.emplace_back("min_ratio", num(min_ratio));
                        return worst;
                      }});
  }
  return checks;
}

}  // namespace stochem
