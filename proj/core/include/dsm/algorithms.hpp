#pragma once

// Equilibrium-seeking solvers:
//  * solve_central    - proximal-point projected updates against the exact
//                       aggregate broadcast by a central unit;
//  * solve_consensus  - synchronous rounds where each consumer tracks the
//                       network-average profile by mixing with neighbours;
//  * solve_gossip     - asynchronous pairwise exchanges driven by a gossip
//                       event stream with per-consumer step sizes 1/count.
//
// All three record a RunTrace; every iterate stays inside the feasible sets.

#include <cstddef>
#include <span>
#include <vector>

#include "dsm/game.hpp"
#include "dsm/network.hpp"

namespace dsm {

enum class StepKind { PowerDecay, Constant, FrequencyBased };

class StepSchedule {
 public:
  /// gamma(t) = t^-exponent, exponent > 0.
  static StepSchedule power_decay(double exponent);
  static StepSchedule constant(double value);
  /// gamma(count) = 1 / count, where count is the caller's own update count.
  static StepSchedule frequency_based();

  StepKind kind() const noexcept { return kind_; }
  double exponent() const noexcept { return exponent_; }
  double value() const noexcept { return value_; }

  /// Step for iteration (or update count) t >= 1.
  double at(std::size_t t) const;
  /// sum gamma = inf and sum gamma^2 < inf.
  bool square_summable_divergent() const noexcept;
  bool decreasing() const noexcept;

 private:
  StepSchedule(StepKind kind, double exponent, double value)
      : kind_(kind), exponent_(exponent), value_(value) {}

  StepKind kind_;
  double exponent_;
  double value_;
};

struct SolverOptions {
  double tol = 1e-6;
  /// Iteration cap for the synchronous solvers, event cap for gossip.
  std::size_t max_iterations = 1000;
  double probe_step = 1.0;
  /// Snapshot every k-th iteration (gossip: every k-th event); 0 keeps only
  /// the first and last states. The final state is always recorded.
  std::size_t record_stride = 1;
  /// Gossip only: consecutive sub-tolerance residual readings (taken every
  /// N events) required to declare convergence.
  std::size_t convergence_window = 5;
};

struct TraceRecord {
  std::size_t t = 0;
  std::vector<Profile> profiles;
  std::vector<Profile> estimates;  ///< network-average estimates; empty for solve_central
  std::vector<double> bills;       ///< instantaneous bill per consumer
  Profile aggregate;
  double residual = 0.0;
};

struct RunTrace {
  std::vector<TraceRecord> records;
  std::vector<GossipEvent> events;  ///< events actually processed (gossip only)
  /// per-consumer update counts at the end of the run (gossip only)
  std::vector<std::size_t> update_counts;
  /// max over iterations and slots of |sum_n estimate_n - sum_n q_n|
  double max_conservation_error = 0.0;
  /// max over iterations and consumers of |sum_h q_n^h - E_n|
  double max_budget_error = 0.0;
  /// max over iterations of the largest box-bound violation
  double max_bound_violation = 0.0;
};

struct SolveResult {
  std::vector<Profile> profiles;
  std::size_t iterations = 0;  ///< index of the returned iterate (events for gossip)
  bool converged = false;
  double residual = 0.0;
  bool uniqueness_verified = false;
};

struct Run {
  SolveResult result;
  RunTrace trace;
};

Run solve_central(const Scenario& scenario, double theta, const StepSchedule& schedule,
                  std::vector<Profile> init, const SolverOptions& options = {});

Run solve_consensus(const Scenario& scenario, const CommGraph& graph,
                    const WeightMatrix& weights, const StepSchedule& schedule,
                    std::vector<Profile> init, const SolverOptions& options = {});

Run solve_gossip(const Scenario& scenario, const CommGraph& graph,
                 std::span<const GossipEvent> events, std::vector<Profile> init,
                 const SolverOptions& options = {});

/// max_n || q_n - P_n(q_n - probe_step * F_n(q_n, q_sigma)) ||_inf; zero exactly
/// at the equilibrium.
double fixed_point_residual(std::span<const Profile> profiles, const Scenario& scenario,
                            double probe_step = 1.0);

/// Projection of each given profile onto its consumer's feasible set.
std::vector<Profile> project_all(std::span<const Profile> profiles, const Scenario& scenario);

}  // namespace dsm
