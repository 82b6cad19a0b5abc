#include "dsm/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dsm {

namespace {

constexpr double kInitTolerance = 1e-9;
constexpr double kWeightTolerance = 1e-9;

void check_init(const Scenario& scenario, std::span<const Profile> init) {
  if (init.size() != scenario.size()) {
    throw std::invalid_argument("expected " + std::to_string(scenario.size()) +
                                " initial profiles, got " + std::to_string(init.size()));
  }
  for (std::size_t n = 0; n < init.size(); ++n) {
    if (!is_feasible(init[n], scenario.consumer(n), kInitTolerance)) {
      throw std::invalid_argument("initial profile of consumer " + std::to_string(n) +
                                  " is not feasible");
    }
  }
}

void check_options(const SolverOptions& options) {
  if (!(options.tol >= 0.0)) throw std::invalid_argument("tolerance must be nonnegative");
  if (!(options.probe_step > 0.0)) throw std::invalid_argument("probe step must be positive");
  if (options.max_iterations == 0) throw std::invalid_argument("iteration cap must be positive");
}

bool on_stride(std::size_t t, std::size_t stride) { return stride != 0 && t % stride == 0; }

// Tracks the per-iterate diagnostics stored on the trace.
void audit(const Scenario& scenario, std::span<const Profile> q, RunTrace& trace) {
  for (std::size_t n = 0; n < q.size(); ++n) {
    const auto& spec = scenario.consumer(n);
    double sum = 0.0;
    for (std::size_t h = 0; h < q[n].size(); ++h) {
      sum += q[n][h];
      const double below = spec.q_min[h] - q[n][h];
      const double above = q[n][h] - spec.q_max[h];
      trace.max_bound_violation = std::max({trace.max_bound_violation, below, above});
    }
    trace.max_budget_error = std::max(trace.max_budget_error, std::abs(sum - spec.budget));
  }
}

void audit_estimates(std::span<const Profile> q, std::span<const Profile> estimates,
                     RunTrace& trace) {
  const std::size_t horizon = q.front().size();
  for (std::size_t h = 0; h < horizon; ++h) {
    double gap = 0.0;
    for (std::size_t n = 0; n < q.size(); ++n) gap += estimates[n][h] - q[n][h];
    trace.max_conservation_error = std::max(trace.max_conservation_error, std::abs(gap));
  }
}

void record(const Scenario& scenario, std::size_t t, std::span<const Profile> q,
            std::span<const Profile> estimates, double residual, RunTrace& trace) {
  TraceRecord rec;
  rec.t = t;
  rec.profiles.assign(q.begin(), q.end());
  rec.estimates.assign(estimates.begin(), estimates.end());
  rec.aggregate = aggregate(q);
  rec.bills.reserve(q.size());
  for (const auto& qn : q) {
    rec.bills.push_back(bill_instantaneous(qn, rec.aggregate, scenario.curve()));
  }
  rec.residual = residual;
  trace.records.push_back(std::move(rec));
}

// q_n <- P_n(q_n - step * F_n(q_n, N * estimate_n)); the estimated aggregate is
// floored at zero since the price is only defined for nonnegative load.
void estimate_driven_update(const Scenario& scenario, std::size_t n, double step,
                            std::span<const double> q_n, std::span<const double> estimate,
                            Profile& aggregate_guess, Profile& direction,
                            std::span<double> out) {
  const double count = static_cast<double>(scenario.size());
  for (std::size_t h = 0; h < estimate.size(); ++h) {
    aggregate_guess[h] = std::max(0.0, count * estimate[h]);
  }
  mapping_component(q_n, aggregate_guess, scenario.curve(), direction);
  for (std::size_t h = 0; h < direction.size(); ++h) direction[h] = q_n[h] - step * direction[h];
  project(direction, scenario.consumer(n), out);
}

}  // namespace

StepSchedule StepSchedule::power_decay(double exponent) {
  if (!(exponent > 0.0)) throw std::invalid_argument("step exponent must be positive");
  return StepSchedule(StepKind::PowerDecay, exponent, 0.0);
}

StepSchedule StepSchedule::constant(double value) {
  if (!(value > 0.0)) throw std::invalid_argument("constant step must be positive");
  return StepSchedule(StepKind::Constant, 0.0, value);
}

StepSchedule StepSchedule::frequency_based() {
  return StepSchedule(StepKind::FrequencyBased, 1.0, 0.0);
}

double StepSchedule::at(std::size_t t) const {
  if (t == 0) throw std::invalid_argument("step index starts at 1");
  switch (kind_) {
    case StepKind::PowerDecay:
      return std::pow(static_cast<double>(t), -exponent_);
    case StepKind::Constant:
      return value_;
    case StepKind::FrequencyBased:
      return 1.0 / static_cast<double>(t);
  }
  return 0.0;
}

bool StepSchedule::square_summable_divergent() const noexcept {
  switch (kind_) {
    case StepKind::PowerDecay:
      return exponent_ > 0.5 && exponent_ <= 1.0;
    case StepKind::FrequencyBased:
      return true;
    case StepKind::Constant:
      return false;
  }
  return false;
}

bool StepSchedule::decreasing() const noexcept { return kind_ != StepKind::Constant; }

double fixed_point_residual(std::span<const Profile> profiles, const Scenario& scenario,
                            double probe_step) {
  if (profiles.size() != scenario.size()) {
    throw std::invalid_argument("profile count does not match the scenario");
  }
  const Profile q_sigma = aggregate(profiles);
  const std::size_t horizon = scenario.horizon();
  Profile f(horizon);
  Profile p(horizon);
  double worst = 0.0;
  for (std::size_t n = 0; n < profiles.size(); ++n) {
    mapping_component(profiles[n], q_sigma, scenario.curve(), f);
    for (std::size_t h = 0; h < horizon; ++h) f[h] = profiles[n][h] - probe_step * f[h];
    project(f, scenario.consumer(n), p);
    for (std::size_t h = 0; h < horizon; ++h) {
      worst = std::max(worst, std::abs(profiles[n][h] - p[h]));
    }
  }
  return worst;
}

std::vector<Profile> project_all(std::span<const Profile> profiles, const Scenario& scenario) {
  if (profiles.size() != scenario.size()) {
    throw std::invalid_argument("profile count does not match the scenario");
  }
  std::vector<Profile> out;
  out.reserve(profiles.size());
  for (std::size_t n = 0; n < profiles.size(); ++n) {
    out.push_back(project(profiles[n], scenario.consumer(n)));
  }
  return out;
}

Run solve_central(const Scenario& scenario, double theta, const StepSchedule& schedule,
                  std::vector<Profile> init, const SolverOptions& options) {
  if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
  check_options(options);
  check_init(scenario, init);

  const std::size_t consumers = scenario.size();
  const std::size_t horizon = scenario.horizon();
  std::vector<Profile> q = std::move(init);
  // q(0) := q(1), so the first proximal term vanishes.
  std::vector<Profile> prev = q;
  std::vector<Profile> next(consumers, Profile(horizon));
  Profile q_sigma = aggregate(q);
  Profile f(horizon);
  Profile v(horizon);

  Run run;
  run.result.uniqueness_verified = scenario.uniqueness_verified();
  audit(scenario, q, run.trace);
  for (std::size_t t = 1;; ++t) {
    const double residual = fixed_point_residual(q, scenario, options.probe_step);
    const bool done = residual <= options.tol;
    const bool last = done || t >= options.max_iterations;
    if (t == 1 || last || on_stride(t, options.record_stride)) {
      record(scenario, t, q, {}, residual, run.trace);
    }
    if (last) {
      run.result.iterations = t;
      run.result.converged = done;
      run.result.residual = residual;
      break;
    }

    const double gamma = schedule.at(t);
    for (std::size_t n = 0; n < consumers; ++n) {
      mapping_component(q[n], q_sigma, scenario.curve(), f);
      for (std::size_t h = 0; h < horizon; ++h) {
        v[h] = q[n][h] - gamma * (f[h] + theta * (q[n][h] - prev[n][h]));
      }
      project(v, scenario.consumer(n), next[n]);
    }
    prev.swap(q);
    q.swap(next);
    q_sigma = aggregate(q);
    audit(scenario, q, run.trace);
  }
  run.result.profiles = std::move(q);
  return run;
}

Run solve_consensus(const Scenario& scenario, const CommGraph& graph,
                    const WeightMatrix& weights, const StepSchedule& schedule,
                    std::vector<Profile> init, const SolverOptions& options) {
  const std::size_t consumers = scenario.size();
  if (graph.size() != consumers || weights.size() != consumers) {
    throw std::invalid_argument("graph and weights must have one node per consumer");
  }
  if (!graph.connected()) throw std::invalid_argument("communication graph is disconnected");
  if (!weights.is_doubly_stochastic(kWeightTolerance)) {
    throw std::invalid_argument("mixing weights are not doubly stochastic");
  }
  if (!weights.respects(graph)) {
    throw std::invalid_argument("mixing weights put mass on non-neighbours");
  }
  check_options(options);
  check_init(scenario, init);

  const std::size_t horizon = scenario.horizon();
  std::vector<Profile> q = std::move(init);
  std::vector<Profile> estimates = q;
  std::vector<Profile> mixed(consumers, Profile(horizon));
  std::vector<Profile> next(consumers, Profile(horizon));
  Profile guess(horizon);
  Profile direction(horizon);

  Run run;
  run.result.uniqueness_verified = scenario.uniqueness_verified();
  audit(scenario, q, run.trace);
  audit_estimates(q, estimates, run.trace);
  for (std::size_t t = 1;; ++t) {
    const double residual = fixed_point_residual(q, scenario, options.probe_step);
    const bool done = residual <= options.tol;
    const bool last = done || t >= options.max_iterations;
    if (t == 1 || last || on_stride(t, options.record_stride)) {
      record(scenario, t, q, estimates, residual, run.trace);
    }
    if (last) {
      run.result.iterations = t;
      run.result.converged = done;
      run.result.residual = residual;
      break;
    }

    for (std::size_t n = 0; n < consumers; ++n) {
      std::fill(mixed[n].begin(), mixed[n].end(), 0.0);
      for (std::size_t k = 0; k < consumers; ++k) {
        const double w = weights(n, k);
        if (w == 0.0) continue;
        for (std::size_t h = 0; h < horizon; ++h) mixed[n][h] += w * estimates[k][h];
      }
    }
    const double alpha = schedule.at(t);
    for (std::size_t n = 0; n < consumers; ++n) {
      estimate_driven_update(scenario, n, alpha, q[n], mixed[n], guess, direction, next[n]);
      for (std::size_t h = 0; h < horizon; ++h) {
        estimates[n][h] = mixed[n][h] + next[n][h] - q[n][h];
      }
    }
    q.swap(next);
    audit(scenario, q, run.trace);
    audit_estimates(q, estimates, run.trace);
  }
  run.result.profiles = std::move(q);
  return run;
}

Run solve_gossip(const Scenario& scenario, const CommGraph& graph,
                 std::span<const GossipEvent> events, std::vector<Profile> init,
                 const SolverOptions& options) {
  const std::size_t consumers = scenario.size();
  if (graph.size() != consumers) {
    throw std::invalid_argument("graph must have one node per consumer");
  }
  if (!graph.connected()) throw std::invalid_argument("communication graph is disconnected");
  check_options(options);
  check_init(scenario, init);

  const std::size_t horizon = scenario.horizon();
  std::vector<Profile> q = std::move(init);
  std::vector<Profile> estimates = q;
  std::vector<std::size_t> updates(consumers, 0);
  Profile guess(horizon);
  Profile direction(horizon);
  Profile updated(horizon);

  Run run;
  run.result.uniqueness_verified = scenario.uniqueness_verified();
  audit(scenario, q, run.trace);
  audit_estimates(q, estimates, run.trace);

  std::size_t streak = 0;
  const auto reading = [&]() {
    const double r = fixed_point_residual(q, scenario, options.probe_step);
    streak = r <= options.tol ? streak + 1 : 0;
    return r;
  };
  double residual = reading();
  record(scenario, 0, q, estimates, residual, run.trace);
  std::size_t last_reading = 0;

  const std::size_t budget = std::min(options.max_iterations, events.size());
  std::size_t t = 0;
  while (t < budget && streak < options.convergence_window) {
    const GossipEvent& ev = events[t];
    ++t;
    const std::size_t i = ev.initiator;
    const std::size_t j = ev.contact;
    if (i >= consumers || j >= consumers || !graph.has_edge(i, j)) {
      throw std::invalid_argument("gossip event " + std::to_string(t) +
                                  " is not an edge of the graph");
    }
    for (std::size_t h = 0; h < horizon; ++h) {
      const double avg = 0.5 * (estimates[i][h] + estimates[j][h]);
      estimates[i][h] = avg;
      estimates[j][h] = avg;
    }
    for (const std::size_t n : {i, j}) {
      const double alpha = 1.0 / static_cast<double>(++updates[n]);
      estimate_driven_update(scenario, n, alpha, q[n], estimates[n], guess, direction, updated);
      for (std::size_t h = 0; h < horizon; ++h) {
        estimates[n][h] += updated[h] - q[n][h];
        q[n][h] = updated[h];
      }
    }
    run.trace.events.push_back(ev);
    audit(scenario, q, run.trace);
    audit_estimates(q, estimates, run.trace);

    if (t % consumers == 0) {
      residual = reading();
      last_reading = t;
    }
    const bool last = t == budget || streak >= options.convergence_window;
    if (on_stride(t, options.record_stride) || last) {
      if (last_reading != t) {
        residual = fixed_point_residual(q, scenario, options.probe_step);
        last_reading = t;
      }
      record(scenario, t, q, estimates, residual, run.trace);
    }
  }
  if (last_reading != t) residual = fixed_point_residual(q, scenario, options.probe_step);

  run.result.iterations = t;
  run.result.converged = streak >= options.convergence_window;
  run.trace.update_counts = updates;
  run.result.residual = residual;
  run.result.profiles = std::move(q);
  return run;
}

}  // namespace dsm
