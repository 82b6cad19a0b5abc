#include "dsm/oracle.hpp"

#include "dsm/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace dsm {

namespace {

constexpr double kMinStep = 1e-14;
constexpr double kMaxStep = 1e8;

double sup_distance(std::span<const double> x, std::span<const double> y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(d);
}

Profile even_start(const ConsumerSpec& spec) {
  const Profile flat(spec.horizon(), spec.budget / static_cast<double>(spec.horizon()));
  return project(flat, spec);
}

// Gradient of q -> sum_h p_h(q^h + others^h) q^h.
void own_bill_gradient(std::span<const double> q, std::span<const double> others,
                       const PriceCurve& curve, std::span<double> g) {
  for (std::size_t h = 0; h < q.size(); ++h) {
    const double load = q[h] + others[h];
    g[h] = price(curve, h, load) + price_derivative(curve, h, load) * q[h];
  }
}

// Projected gradient over a product of consumer sets. `gradient` fills one
// flat vector (consumer-major) from the current iterate. The step is
// accepted once the local gradient Lipschitz estimate stays below 1/step,
// which avoids comparing nearly equal objective values near the optimum.
struct PgResult {
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

PgResult projected_gradient(
    std::vector<Profile>& q, std::span<const ConsumerSpec> specs,
    const std::function<void(const std::vector<Profile>&, std::vector<double>&)>& gradient,
    double tol, std::size_t max_iterations) {
  const std::size_t blocks = q.size();
  const std::size_t horizon = q.front().size();
  std::vector<double> g(blocks * horizon);
  std::vector<double> g_new(blocks * horizon);
  std::vector<Profile> cand = q;
  Profile v(horizon);
  double step = 1.0;

  gradient(q, g);
  PgResult out;
  for (std::size_t it = 0;; ++it) {
    // stationarity measure with unit probe step
    double residual = 0.0;
    for (std::size_t n = 0; n < blocks; ++n) {
      for (std::size_t h = 0; h < horizon; ++h) v[h] = q[n][h] - g[n * horizon + h];
      project(v, specs[n], cand[n]);
      residual = std::max(residual, sup_distance(q[n], cand[n]));
    }
    out.iterations = it;
    out.residual = residual;
    if (residual <= tol) {
      out.converged = true;
      return out;
    }
    if (it >= max_iterations) return out;

    step = std::min(step * 2.0, kMaxStep);
    for (;;) {
      double moved = 0.0;
      for (std::size_t n = 0; n < blocks; ++n) {
        for (std::size_t h = 0; h < horizon; ++h) v[h] = q[n][h] - step * g[n * horizon + h];
        project(v, specs[n], cand[n]);
        const double d = euclidean_distance(q[n], cand[n]);
        moved += d * d;
      }
      moved = std::sqrt(moved);
      gradient(cand, g_new);
      double dg = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dg += (g_new[i] - g[i]) * (g_new[i] - g[i]);
      dg = std::sqrt(dg);
      if (moved == 0.0 || dg * step <= moved) break;
      step *= 0.5;
      if (step < kMinStep) throw OracleFailure("projected gradient step collapsed");
    }
    q.swap(cand);
    g.swap(g_new);
  }
}

Profile best_response_from(Profile start, std::span<const double> others,
                           const ConsumerSpec& spec, const PriceCurve& curve, double tol,
                           std::size_t max_iterations) {
  std::vector<Profile> q{std::move(start)};
  const auto grad = [&](const std::vector<Profile>& x, std::vector<double>& g) {
    own_bill_gradient(x[0], others, curve, g);
  };
  const PgResult r = projected_gradient(q, std::span(&spec, 1), grad, tol, max_iterations);
  if (!r.converged) {
    throw OracleFailure("best response did not reach tolerance; residual " +
                        std::to_string(r.residual));
  }
  return std::move(q[0]);
}

}  // namespace

Profile best_response(std::span<const double> others, const ConsumerSpec& spec,
                      const PriceCurve& curve, double tol, std::size_t max_iterations) {
  if (const auto check = validate(spec); !check) {
    throw std::invalid_argument("invalid consumer spec: " + check.message);
  }
  if (others.size() != spec.horizon() || curve.horizon() != spec.horizon()) {
    throw std::invalid_argument("horizon mismatch in best response");
  }
  for (double o : others) {
    if (!(o >= 0.0)) throw std::invalid_argument("others' aggregate must be nonnegative");
  }
  return best_response_from(even_start(spec), others, spec, curve, tol, max_iterations);
}

std::vector<Profile> nash_best_response_iteration(const Scenario& scenario, double tol,
                                                  std::size_t max_sweeps,
                                                  std::optional<std::vector<Profile>> start) {
  if (scenario.size() > kNashOracleMaxConsumers || scenario.horizon() > kNashOracleMaxHorizon) {
    throw std::invalid_argument("best-response oracle is limited to N <= " +
                                std::to_string(kNashOracleMaxConsumers) + ", H <= " +
                                std::to_string(kNashOracleMaxHorizon) + "; got N = " +
                                std::to_string(scenario.size()) + ", H = " +
                                std::to_string(scenario.horizon()));
  }
  std::vector<Profile> q;
  if (start) {
    q = project_all(*start, scenario);
  } else {
    for (const auto& spec : scenario.consumers()) q.push_back(even_start(spec));
  }
  const double inner_tol = std::max(1e-14, 0.01 * tol);
  Profile others(scenario.horizon());
  for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
    double change = 0.0;
    for (std::size_t n = 0; n < q.size(); ++n) {
      std::fill(others.begin(), others.end(), 0.0);
      for (std::size_t m = 0; m < q.size(); ++m) {
        if (m == n) continue;
        for (std::size_t h = 0; h < others.size(); ++h) others[h] += q[m][h];
      }
      Profile next = best_response_from(q[n], others, scenario.consumer(n), scenario.curve(),
                                        inner_tol, 200000);
      change = std::max(change, sup_distance(next, q[n]));
      q[n] = std::move(next);
    }
    if (change <= tol) return q;
  }
  throw OracleFailure("best-response iteration did not settle within " +
                      std::to_string(max_sweeps) + " sweeps");
}

WelfareOptimum social_welfare_optimum(const Scenario& scenario, double tol,
                                      std::size_t max_iterations) {
  std::vector<Profile> q;
  for (const auto& spec : scenario.consumers()) q.push_back(even_start(spec));
  const std::size_t horizon = scenario.horizon();
  const auto grad = [&](const std::vector<Profile>& x, std::vector<double>& g) {
    const Profile load = aggregate(x);
    Profile slot(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
      slot[h] = price(scenario.curve(), h, load[h]) +
                price_derivative(scenario.curve(), h, load[h]) * load[h];
    }
    for (std::size_t n = 0; n < x.size(); ++n)
      std::copy(slot.begin(), slot.end(), g.begin() + static_cast<std::ptrdiff_t>(n * horizon));
  };
  const PgResult r = projected_gradient(q, scenario.consumers(), grad, tol, max_iterations);
  WelfareOptimum out;
  out.total_cost = total_cost(q, scenario.curve());
  out.profiles = std::move(q);
  out.iterations = r.iterations;
  out.residual = r.residual;
  out.converged = r.converged;
  return out;
}

std::vector<FairnessRow> fairness_comparison(std::span<const Profile> profiles,
                                             const Scenario& scenario) {
  if (profiles.size() != scenario.size()) {
    throw std::invalid_argument("profile count does not match the scenario");
  }
  const Profile q_sigma = aggregate(profiles);
  const std::vector<double> budgets = scenario.budgets();
  std::vector<FairnessRow> rows;
  rows.reserve(profiles.size());
  for (std::size_t n = 0; n < profiles.size(); ++n) {
    FairnessRow row;
    row.budget = budgets[n];
    row.instantaneous_bill = bill_instantaneous(profiles[n], q_sigma, scenario.curve());
    row.total_load_bill = bill_total_load(n, profiles, budgets, scenario.curve());
    row.par = par(profiles[n]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dsm
