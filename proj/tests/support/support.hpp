#pragma once

// Shared generators and independent reference computations for the tests.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dsm/game.hpp"
#include "dsm/scenario.hpp"

namespace dsm::testing {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi);  ///< inclusive

/// Bounds with q_min in [0, 1], width in [0.2, 1.5] and a budget strictly
/// inside [sum q_min, sum q_max].
ConsumerSpec random_spec(Rng& rng, std::size_t horizon);
PriceCurve random_curve(Rng& rng, std::size_t horizon, double max_exponent);

struct Game {
  Scenario scenario;
  std::vector<Profile> init;
};

/// The seeded toy-game family: N = 2 + k % 3, H = 2 + (k / 3) % 2.
Game toy_game(std::size_t k);
inline constexpr std::size_t kToyGames = 20;

/// Two consumers: A has the larger budget but little on-peak room.
Scenario fairness_pair();

/// The generated 50-household, 24-slot scenario for a seed.
ScenarioData canonical_scenario(std::uint64_t seed);

double sup_distance(std::span<const double> x, std::span<const double> y);
double sup_distance(std::span<const Profile> x, std::span<const Profile> y);
double euclidean_distance(std::span<const double> x, std::span<const double> y);
double relative_sup_distance(std::span<const double> x, std::span<const double> ref);

/// Projection onto {q_min <= x <= q_max, sum x = E} by enumerating every
/// assignment of slots to lower bound, upper bound or free and solving each
/// equality-constrained subproblem in closed form. Exponential in H.
Profile qp_projection_oracle(std::span<const double> v, const ConsumerSpec& spec);

/// Instantaneous bill of consumer n as a function of its own profile only.
double own_bill(std::span<const Profile> profiles, std::size_t n, const PriceCurve& curve);

}  // namespace dsm::testing
