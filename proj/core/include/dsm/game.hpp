#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dsm/feasible.hpp"
#include "dsm/model.hpp"

namespace dsm {

/// N consumers sharing one price curve over a common horizon.
class Scenario {
 public:
  /// Throws std::invalid_argument when a spec is invalid or the horizons
  /// disagree. The uniqueness certificate is evaluated here; a failing
  /// certificate does not reject the scenario.
  Scenario(PriceCurve curve, std::vector<ConsumerSpec> consumers);

  const PriceCurve& curve() const noexcept { return curve_; }
  std::span<const ConsumerSpec> consumers() const noexcept { return consumers_; }
  const ConsumerSpec& consumer(std::size_t n) const { return consumers_.at(n); }
  std::size_t size() const noexcept { return consumers_.size(); }
  std::size_t horizon() const noexcept { return curve_.horizon(); }
  std::vector<double> budgets() const;

  const Certificate& certificate() const noexcept { return certificate_; }
  /// False when the exponent bound fails: solvers still run, but the
  /// equilibrium may not be unique and convergence is not guaranteed.
  bool uniqueness_verified() const noexcept { return certificate_.holds; }

  friend bool operator==(const Scenario& x, const Scenario& y) {
    return x.curve_ == y.curve_ && x.consumers_ == y.consumers_;
  }

 private:
  PriceCurve curve_;
  std::vector<ConsumerSpec> consumers_;
  Certificate certificate_;
};

/// Total instantaneous bill, sum over consumers (equals the grid cost).
double total_cost(std::span<const Profile> profiles, const PriceCurve& curve);

}  // namespace dsm
