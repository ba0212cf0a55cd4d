#include "stochem/solvers.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "stochem/errors.hpp"

namespace stochem {

namespace {

constexpr std::uint64_t kIndexStream = 1;
constexpr std::uint64_t kTerminationStream = 2;

SampleStats evaluate(const LatentModel& model, VariantState& state,
                     std::size_t i, const Parameter& theta) {
  SampleStats s;
  s.support.resize(model.support_size());
  s.values.resize(model.support_size());
  model.sample_support(i, s.support);
  model.sample_stat_values(i, theta, s.values);
  ++state.evaluations;
  return s;
}

void require_memory(const VariantState& state, std::string_view who) {
  if (!state.memory || !state.running_avg) {
    throw ContractError(std::string(who) +
                        ": per-sample memory is not initialized");
  }
}

void require_row(const MemoryTable& memory, std::size_t i,
                 const SampleStats& fresh) {
  if (i >= memory.rows()) {
    throw ContractError("sample index " + std::to_string(i) +
                        " outside memory table");
  }
  if (fresh.values.size() != memory.width()) {
    throw ContractError("fresh statistics width does not match memory table");
  }
}

}  // namespace

std::string_view variant_name(VariantKind kind) {
  switch (kind) {
    case VariantKind::Batch: return "bem";
    case VariantKind::IEM: return "iem";
    case VariantKind::SEM: return "sem";
    case VariantKind::SEMVR: return "semvr";
    case VariantKind::FIEM: return "fiem";
  }
  return "?";
}

VariantKind parse_variant(std::string_view name) {
  for (auto k : {VariantKind::Batch, VariantKind::IEM, VariantKind::SEM,
                 VariantKind::SEMVR, VariantKind::FIEM}) {
    if (variant_name(k) == name) return k;
  }
  throw ContractError("unknown variant '" + std::string(name) + "'");
}

StepSchedule StepSchedule::constant(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ContractError("constant step must lie in [0, 1]");
  }
  return StepSchedule(Kind::Constant, gamma, 0.0);
}

StepSchedule StepSchedule::harmonic(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || a > b) {
    throw ContractError("harmonic schedule a/(k+b) needs 0 < a <= b");
  }
  return StepSchedule(Kind::Harmonic, a, b);
}

VariantState initialize_state(const LatentModel& model, const Variant& variant,
                              const Parameter& theta0, Rng rng) {
  const std::size_t n = model.num_samples();
  if (variant.kind == VariantKind::SEMVR && variant.resolved_epoch_length(n) < 1) {
    throw ContractError("sEM-VR epoch length must be >= 1");
  }
  const bool keeps_memory =
      variant.kind == VariantKind::IEM || variant.kind == VariantKind::FIEM;
  std::optional<MemoryTable> memory;
  if (keeps_memory) memory.emplace(n, model.support_size());

  SuffStats s0 = full_estep_with(
      model, theta0, [&](std::size_t i, std::span<const double> values) {
        if (memory) std::copy(values.begin(), values.end(), memory->row(i).begin());
      });

  VariantState state{variant, 0, theta0, s0, std::move(memory), std::nullopt,
                     std::nullopt, n, std::move(rng)};
  if (keeps_memory) state.running_avg = s0;
  if (variant.kind == VariantKind::SEMVR) state.anchor = Anchor{s0, theta0, 0};
  return state;
}

SuffStats se_step(const SuffStats& s_hat, const SuffStats& surrogate,
                  double gamma) {
  require_same_layout(s_hat, surrogate, "se_step");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ContractError("se_step: step size must lie in [0, 1]");
  }
  if (gamma == 1.0) return surrogate;
  SuffStats out = s_hat;
  auto dst = out.values();
  const auto src = surrogate.values();
  for (std::size_t j = 0; j < dst.size(); ++j) {
    dst[j] += gamma * (src[j] - dst[j]);
  }
  return out;
}

SuffStats surrogate_iem(VariantState& state, std::size_t i,
                        const SampleStats& fresh) {
  require_memory(state, "surrogate_iem");
  auto& memory = *state.memory;
  require_row(memory, i, fresh);
  const double n = static_cast<double>(memory.rows());
  SuffStats next = *state.running_avg;
  auto dst = next.values();
  auto row = memory.row(i);
  for (std::size_t j = 0; j < row.size(); ++j) {
    dst[fresh.support[j]] += (fresh.values[j] - row[j]) / n;
    row[j] = fresh.values[j];
  }
  state.running_avg = next;
  return next;
}

SuffStats surrogate_sem(const SampleStats& fresh, const LayoutPtr& layout) {
  return densify(fresh, layout);
}

void refresh_anchor(const LatentModel& model, VariantState& state) {
  const std::size_t n = model.num_samples();
  SuffStats mean = full_estep(model, state.theta);
  state.evaluations += n;
  state.anchor = Anchor{std::move(mean), state.theta, state.k};
}

SuffStats surrogate_semvr(const LatentModel& model, VariantState& state,
                          std::size_t i, const SampleStats& fresh) {
  const std::size_t m = state.variant.resolved_epoch_length(model.num_samples());
  const std::size_t epoch_start = m * (state.k / m);
  if (!state.anchor || state.anchor->epoch_start != epoch_start) {
    throw ContractError("surrogate_semvr: anchor is stale for iteration " +
                        std::to_string(state.k));
  }
  const SampleStats old = evaluate(model, state, i, state.anchor->theta);
  SuffStats next = state.anchor->mean;
  auto dst = next.values();
  for (std::size_t j = 0; j < fresh.values.size(); ++j) {
    dst[fresh.support[j]] += fresh.values[j] - old.values[j];
  }
  return next;
}

SuffStats surrogate_fiem(VariantState& state, std::size_t i, std::size_t j,
                         const SampleStats& fresh_i,
                         const SampleStats& fresh_j) {
  require_memory(state, "surrogate_fiem");
  auto& memory = *state.memory;
  require_row(memory, i, fresh_i);
  require_row(memory, j, fresh_j);
  const double n = static_cast<double>(memory.rows());

  SuffStats next = *state.running_avg;
  auto dst = next.values();
  const auto row_i = memory.row(i);
  for (std::size_t c = 0; c < row_i.size(); ++c) {
    dst[fresh_i.support[c]] += fresh_i.values[c] - row_i[c];
  }

  auto avg = state.running_avg->values();
  auto row_j = memory.row(j);
  for (std::size_t c = 0; c < row_j.size(); ++c) {
    avg[fresh_j.support[c]] += (fresh_j.values[c] - row_j[c]) / n;
    row_j[c] = fresh_j.values[c];
  }
  return next;
}

SuffStats surrogate_for_indices(const LatentModel& model, VariantState& state,
                                std::size_t i, std::size_t j) {
  const std::size_t n = model.num_samples();
  switch (state.variant.kind) {
    case VariantKind::Batch: {
      if (state.k == 0) return state.s_hat;
      state.evaluations += n;
      return full_estep(model, state.theta);
    }
    case VariantKind::SEM: {
      const SampleStats fresh = evaluate(model, state, i, state.theta);
      return surrogate_sem(fresh, model.stat_layout());
    }
    case VariantKind::IEM: {
      const SampleStats fresh = evaluate(model, state, i, state.theta);
      return surrogate_iem(state, i, fresh);
    }
    case VariantKind::SEMVR: {
      const std::size_t m = state.variant.resolved_epoch_length(n);
      if (state.k % m == 0 &&
          (!state.anchor || state.anchor->epoch_start != state.k)) {
        refresh_anchor(model, state);
      }
      const SampleStats fresh = evaluate(model, state, i, state.theta);
      return surrogate_semvr(model, state, i, fresh);
    }
    case VariantKind::FIEM: {
      const SampleStats fresh_i = evaluate(model, state, i, state.theta);
      const SampleStats fresh_j = evaluate(model, state, j, state.theta);
      return surrogate_fiem(state, i, j, fresh_i, fresh_j);
    }
  }
  throw ContractError("unknown variant");
}

void advance(const LatentModel& model, VariantState& state,
             const StepSchedule& schedule) {
  const std::size_t n = model.num_samples();
  std::size_t i = 0;
  std::size_t j = 0;
  switch (state.variant.kind) {
    case VariantKind::Batch:
      break;
    case VariantKind::FIEM:
      i = state.rng.uniform_index(n);
      j = state.rng.uniform_index(n);
      break;
    default:
      i = state.rng.uniform_index(n);
      break;
  }
  const SuffStats surrogate = surrogate_for_indices(model, state, i, j);
  state.s_hat = se_step(state.s_hat, surrogate, schedule.step(state.k));
  state.theta = model.m_step(state.s_hat);
  ++state.k;
}

SuffStats memory_mean(const LatentModel& model, const MemoryTable& memory) {
  SuffStats acc(model.stat_layout());
  std::vector<std::size_t> support(model.support_size());
  for (std::size_t i = 0; i < memory.rows(); ++i) {
    model.sample_support(i, support);
    scatter_add(acc, support, memory.row(i));
  }
  acc.scale(1.0 / static_cast<double>(memory.rows()));
  return acc;
}

std::size_t next_iteration_cost(const VariantState& state, std::size_t n) {
  switch (state.variant.kind) {
    case VariantKind::Batch: return state.k == 0 ? 0 : n;
    case VariantKind::SEM:
    case VariantKind::IEM: return 1;
    case VariantKind::FIEM: return 2;
    case VariantKind::SEMVR: {
      const std::size_t m = state.variant.resolved_epoch_length(n);
      const bool refresh = state.k % m == 0 &&
                           (!state.anchor || state.anchor->epoch_start != state.k);
      return 2 + (refresh ? n : 0);
    }
  }
  return 0;
}

std::size_t draw_termination(const StepSchedule& schedule, std::size_t k_max,
                             Rng& rng) {
  if (k_max < 1) throw ContractError("draw_termination: K_max must be >= 1");
  std::vector<double> weights(k_max);
  for (std::size_t k = 0; k < k_max; ++k) weights[k] = schedule.step(k);
  return rng.categorical(weights);
}

namespace {

// Iterations an evaluation budget affords, replaying the deterministic cost
// sequence of the variant.
std::size_t affordable_iterations(const Variant& variant, std::size_t n,
                                  std::size_t k_max, double budget) {
  if (!std::isfinite(budget)) return k_max;
  double spent = static_cast<double>(n);
  const std::size_t m = variant.resolved_epoch_length(n);
  std::size_t k = 0;
  for (; k < k_max; ++k) {
    double cost = 0.0;
    switch (variant.kind) {
      case VariantKind::Batch: cost = k == 0 ? 0.0 : static_cast<double>(n); break;
      case VariantKind::SEM:
      case VariantKind::IEM: cost = 1.0; break;
      case VariantKind::FIEM: cost = 2.0; break;
      case VariantKind::SEMVR:
        cost = 2.0 + ((k % m == 0 && k != 0) ? static_cast<double>(n) : 0.0);
        break;
    }
    if (spent + cost > budget) break;
    spent += cost;
  }
  return k;
}

}  // namespace

RunTrace run(const LatentModel& model, const RunConfig& config,
             const Parameter& theta_init) {
  if (config.max_iterations < 1) throw ContractError("run: K_max must be >= 1");
  model.validate(theta_init);
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = model.num_samples();
  const double dn = static_cast<double>(n);
  const std::size_t record_every = config.record_every == 0 ? n : config.record_every;
  const double budget = config.max_epochs * dn;

  Rng master(config.seed);
  VariantState state = initialize_state(model, config.variant, theta_init,
                                        master.split(kIndexStream));

  RunTrace trace;
  const std::size_t planned =
      affordable_iterations(config.variant, n, config.max_iterations, budget);
  {
    Rng term = master.split(kTerminationStream);
    trace.termination_index =
        draw_termination(config.schedule, std::max<std::size_t>(planned, 1), term);
  }

  auto record = [&](const VariantState& s) {
    TraceRecord r;
    r.k = s.k;
    r.epoch = static_cast<double>(s.evaluations) / dn;
    if (config.record_objective) {
      r.data_term = data_term(model, s.theta);
      r.objective = model.penalty(s.theta) + r.data_term;
    }
    if (config.record_residual) r.residual = fixed_point_residual(model, s.s_hat);
    if (config.precision) r.precision = config.precision(s.theta);
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    trace.records.push_back(r);
  };

  record(state);
  if (trace.termination_index == 0) trace.theta_at_termination = state.theta;

  while (state.k < config.max_iterations) {
    const std::size_t cost = next_iteration_cost(state, n);
    if (static_cast<double>(state.evaluations + cost) > budget) break;
    try {
      advance(model, state, config.schedule);
    } catch (const DomainError& e) {
      throw SolverAbort(state.k, e.what());
    }
    if (state.k == trace.termination_index) trace.theta_at_termination = state.theta;
    const bool keep_going = !config.observer || config.observer(state);
    if (state.k % record_every == 0) record(state);
    if (!keep_going) {
      trace.stopped_by_observer = true;
      break;
    }
  }
  if (trace.records.back().k != state.k) record(state);

  trace.iterations = state.k;
  trace.evaluations = state.evaluations;
  trace.final_theta = state.theta;
  trace.final_s_hat.assign(state.s_hat.values().begin(), state.s_hat.values().end());
  return trace;
}

}  // namespace stochem
