#pragma once

// A consumer's feasible set: per-slot box bounds intersected with the
// hyperplane sum_h q^h = E.

#include <cstddef>
#include <random>
#include <span>
#include <string>

#include "dsm/model.hpp"

namespace dsm {

struct ConsumerSpec {
  Profile q_min;
  Profile q_max;
  double budget = 0.0;  ///< E, total energy over the horizon

  std::size_t horizon() const noexcept { return q_min.size(); }

  friend bool operator==(const ConsumerSpec&, const ConsumerSpec&) = default;
};

struct Validation {
  bool ok = true;
  std::string message;  ///< first violation found, empty when ok

  explicit operator bool() const noexcept { return ok; }
};

Validation validate(const ConsumerSpec& spec);

bool is_feasible(std::span<const double> q, const ConsumerSpec& spec, double tol);

/// Euclidean projection onto the feasible set. Throws std::invalid_argument
/// for an invalid spec or a length mismatch.
Profile project(std::span<const double> v, const ConsumerSpec& spec);
void project(std::span<const double> v, const ConsumerSpec& spec, std::span<double> out);

/// Uniform draw inside the box, projected onto the budget face.
Profile sample_feasible(const ConsumerSpec& spec, std::mt19937_64& rng);

}  // namespace dsm
