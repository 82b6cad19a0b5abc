#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsm::testing {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

ConsumerSpec random_spec(Rng& rng, std::size_t horizon) {
  ConsumerSpec spec;
  double lo_sum = 0.0;
  double hi_sum = 0.0;
  for (std::size_t h = 0; h < horizon; ++h) {
    const double lo = uniform(rng, 0.0, 1.0);
    const double hi = lo + uniform(rng, 0.2, 1.5);
    spec.q_min.push_back(lo);
    spec.q_max.push_back(hi);
    lo_sum += lo;
    hi_sum += hi;
  }
  spec.budget = lo_sum + uniform(rng, 0.05, 0.95) * (hi_sum - lo_sum);
  return spec;
}

PriceCurve random_curve(Rng& rng, std::size_t horizon, double max_exponent) {
  std::vector<SlotPrice> slots;
  for (std::size_t h = 0; h < horizon; ++h) {
    slots.push_back({uniform(rng, 0.2, 2.0), uniform(rng, 1.0, max_exponent),
                     uniform(rng, 0.0, 0.5)});
  }
  return PriceCurve(std::move(slots));
}

Game toy_game(std::size_t k) {
  Rng rng(1000 + k);
  const std::size_t consumers = 2 + k % 3;
  const std::size_t horizon = 2 + (k / 3) % 2;
  std::vector<SlotPrice> slots;
  for (std::size_t h = 0; h < horizon; ++h) {
    slots.push_back({uniform(rng, 1.0, 2.0), uniform(rng, 1.0, 1.5), uniform(rng, 0.0, 0.5)});
  }
  std::vector<ConsumerSpec> specs;
  std::vector<Profile> init;
  for (std::size_t n = 0; n < consumers; ++n) {
    ConsumerSpec spec;
    Profile q0;
    for (std::size_t h = 0; h < horizon; ++h) {
      const double lo = uniform(rng, 0.2, 0.6);
      spec.q_min.push_back(lo);
      spec.q_max.push_back(lo + uniform(rng, 0.6, 1.2));
      q0.push_back(uniform(rng, lo, spec.q_max.back()));
    }
    for (double v : q0) spec.budget += v;
    specs.push_back(std::move(spec));
    init.push_back(std::move(q0));
  }
  return Game{Scenario(PriceCurve(std::move(slots)), std::move(specs)), std::move(init)};
}

Scenario fairness_pair() {
  // slot 0 on-peak, slot 1 off-peak
  PriceCurve curve({{1.0, 1.2, 0.0}, {0.2, 1.2, 0.0}});
  ConsumerSpec a{{0.2, 0.0}, {0.3, 2.0}, 2.0};
  ConsumerSpec b{{1.0, 0.0}, {1.5, 0.5}, 1.5};
  return Scenario(std::move(curve), {a, b});
}

ScenarioData canonical_scenario(std::uint64_t seed) {
  GenerationRecipe recipe;
  recipe.seed = seed;
  return generate(recipe, default_base_interval());
}

double sup_distance(std::span<const double> x, std::span<const double> y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

double sup_distance(std::span<const Profile> x, std::span<const Profile> y) {
  double d = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) d = std::max(d, sup_distance(x[n], y[n]));
  return d;
}

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(d);
}

double relative_sup_distance(std::span<const double> x, std::span<const double> ref) {
  double scale = 0.0;
  for (double v : ref) scale = std::max(scale, std::abs(v));
  return sup_distance(x, ref) / scale;
}

Profile qp_projection_oracle(std::span<const double> v, const ConsumerSpec& spec) {
  const std::size_t horizon = v.size();
  std::size_t combos = 1;
  for (std::size_t h = 0; h < horizon; ++h) combos *= 3;

  Profile best;
  double best_dist = std::numeric_limits<double>::infinity();
  Profile x(horizon);
  for (std::size_t code = 0; code < combos; ++code) {
    // status per slot: 0 lower, 1 upper, 2 free
    std::vector<int> status(horizon);
    std::size_t c = code;
    for (std::size_t h = 0; h < horizon; ++h) {
      status[h] = static_cast<int>(c % 3);
      c /= 3;
    }
    double fixed = 0.0;
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t h = 0; h < horizon; ++h) {
      if (status[h] == 0) fixed += spec.q_min[h];
      if (status[h] == 1) fixed += spec.q_max[h];
      if (status[h] == 2) {
        free_sum += v[h];
        ++free_count;
      }
    }
    if (free_count == 0) {
      if (std::abs(fixed - spec.budget) > 1e-12) continue;
    }
    const double shift =
        free_count == 0 ? 0.0 : (free_sum + fixed - spec.budget) / static_cast<double>(free_count);
    bool ok = true;
    for (std::size_t h = 0; h < horizon && ok; ++h) {
      if (status[h] == 0) x[h] = spec.q_min[h];
      if (status[h] == 1) x[h] = spec.q_max[h];
      if (status[h] == 2) {
        x[h] = v[h] - shift;
        ok = x[h] >= spec.q_min[h] - 1e-13 && x[h] <= spec.q_max[h] + 1e-13;
      }
    }
    if (!ok) continue;
    const double dist = euclidean_distance(x, v);
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

double own_bill(std::span<const Profile> profiles, std::size_t n, const PriceCurve& curve) {
  const Profile load = aggregate(profiles);
  return bill_instantaneous(profiles[n], load, curve);
}

}  // namespace dsm::testing
