#include "dsm/game.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace dsm {

Scenario::Scenario(PriceCurve curve, std::vector<ConsumerSpec> consumers)
    : curve_(std::move(curve)), consumers_(std::move(consumers)) {
  if (consumers_.empty()) throw std::invalid_argument("scenario has no consumers");
  for (std::size_t n = 0; n < consumers_.size(); ++n) {
    if (consumers_[n].horizon() != curve_.horizon()) {
      throw std::invalid_argument("consumer " + std::to_string(n) + " has horizon " +
                                  std::to_string(consumers_[n].horizon()) + ", price curve has " +
                                  std::to_string(curve_.horizon()));
    }
    if (const auto check = validate(consumers_[n]); !check) {
      throw std::invalid_argument("consumer " + std::to_string(n) + ": " + check.message);
    }
  }
  if (consumers_.size() >= 2) {
    certificate_ = uniqueness_certificate(consumers_.size(), curve_);
  } else {
    // A single consumer minimises a strictly convex bill: always unique.
    certificate_.uniqueness_bound = std::numeric_limits<double>::infinity();
    certificate_.kappa.assign(curve_.horizon(), 2.0);
    certificate_.holds = true;
  }
}

std::vector<double> Scenario::budgets() const {
  std::vector<double> e;
  e.reserve(consumers_.size());
  for (const auto& c : consumers_) e.push_back(c.budget);
  return e;
}

double total_cost(std::span<const Profile> profiles, const PriceCurve& curve) {
  return grid_cost(aggregate(profiles), curve);
}

}  // namespace dsm
