#pragma once

// Reference solvers used to check the distributed algorithms. They share
// only the model primitives and the projection with the solvers in
// algorithms.hpp, never their update loops.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dsm/game.hpp"

namespace dsm {

class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The best-response oracle is reserved for small games.
inline constexpr std::size_t kNashOracleMaxConsumers = 6;
inline constexpr std::size_t kNashOracleMaxHorizon = 6;

/// argmin over the consumer's feasible set of its instantaneous bill when the
/// rest of the network consumes `others`. Projected gradient with
/// backtracking; stops once ||q - P(q - grad)||_inf <= tol.
Profile best_response(std::span<const double> others, const ConsumerSpec& spec,
                      const PriceCurve& curve, double tol = 1e-8,
                      std::size_t max_iterations = 200000);

/// Cyclic best-response sweeps until the sweep-to-sweep change is <= tol.
/// Throws OracleFailure when max_sweeps is exhausted and std::invalid_argument
/// for games larger than the oracle limits.
std::vector<Profile> nash_best_response_iteration(
    const Scenario& scenario, double tol = 1e-10, std::size_t max_sweeps = 10000,
    std::optional<std::vector<Profile>> start = std::nullopt);

struct WelfareOptimum {
  std::vector<Profile> profiles;
  double total_cost = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Minimises the grid cost sum_h p_h(q_sigma^h) q_sigma^h jointly over all
/// feasible sets.
WelfareOptimum social_welfare_optimum(const Scenario& scenario, double tol = 1e-9,
                                      std::size_t max_iterations = 100000);

struct FairnessRow {
  double budget = 0.0;
  double instantaneous_bill = 0.0;
  double total_load_bill = 0.0;
  double par = 0.0;  ///< the consumer's own peak-to-average ratio
};

std::vector<FairnessRow> fairness_comparison(std::span<const Profile> profiles,
                                             const Scenario& scenario);

}  // namespace dsm
