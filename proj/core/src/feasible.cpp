#include "dsm/feasible.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dsm {

namespace {

constexpr double kLambdaTolerance = 1e-12;
constexpr int kMaxBisections = 200;

double clip_sum(std::span<const double> v, const ConsumerSpec& spec, double lambda) {
  double sum = 0.0;
  for (std::size_t h = 0; h < v.size(); ++h) {
    sum += std::clamp(v[h] - lambda, spec.q_min[h], spec.q_max[h]);
  }
  return sum;
}

}  // namespace

Validation validate(const ConsumerSpec& spec) {
  const std::size_t horizon = spec.q_min.size();
  if (horizon == 0) return {false, "empty horizon"};
  if (spec.q_max.size() != horizon) {
    return {false, "q_min and q_max differ in length"};
  }
  for (std::size_t h = 0; h < horizon; ++h) {
    if (!std::isfinite(spec.q_min[h]) || !std::isfinite(spec.q_max[h])) {
      return {false, "slot " + std::to_string(h) + ": non-finite bound"};
    }
    if (spec.q_min[h] < 0.0) {
      return {false, "slot " + std::to_string(h) + ": negative q_min"};
    }
    if (spec.q_min[h] > spec.q_max[h]) {
      return {false, "slot " + std::to_string(h) + ": q_min exceeds q_max"};
    }
  }
  if (!std::isfinite(spec.budget) || !(spec.budget > 0.0)) {
    return {false, "budget must be positive"};
  }
  const double lo = std::accumulate(spec.q_min.begin(), spec.q_min.end(), 0.0);
  const double hi = std::accumulate(spec.q_max.begin(), spec.q_max.end(), 0.0);
  if (spec.budget < lo) return {false, "budget below sum of q_min"};
  if (spec.budget > hi) return {false, "budget exceeds sum of q_max"};
  return {};
}

bool is_feasible(std::span<const double> q, const ConsumerSpec& spec, double tol) {
  if (q.size() != spec.horizon() || spec.q_max.size() != spec.horizon()) return false;
  double sum = 0.0;
  for (std::size_t h = 0; h < q.size(); ++h) {
    if (!(q[h] >= spec.q_min[h] - tol) || !(q[h] <= spec.q_max[h] + tol)) return false;
    sum += q[h];
  }
  return std::abs(sum - spec.budget) <= tol;
}

void project(std::span<const double> v, const ConsumerSpec& spec, std::span<double> out) {
  if (const auto check = validate(spec); !check) {
    throw std::invalid_argument("cannot project onto invalid set: " + check.message);
  }
  const std::size_t horizon = spec.horizon();
  if (v.size() != horizon || out.size() != horizon) {
    throw std::invalid_argument("projection input length does not match horizon");
  }
  if (horizon == 1) {
    out[0] = spec.budget;
    return;
  }

  // The projection is clip(v - lambda) for the multiplier lambda solving
  // sum_h clip(v^h - lambda) = E; the left side is nonincreasing in lambda.
  double lo = v[0] - spec.q_max[0];
  double hi = v[0] - spec.q_min[0];
  for (std::size_t h = 1; h < horizon; ++h) {
    lo = std::min(lo, v[h] - spec.q_max[h]);
    hi = std::max(hi, v[h] - spec.q_min[h]);
  }
  for (int it = 0; it < kMaxBisections && hi - lo > kLambdaTolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (clip_sum(v, spec, mid) > spec.budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double lambda = 0.5 * (lo + hi);

  // Polish: with the active set fixed, the multiplier has a closed form.
  double fixed = 0.0;
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t h = 0; h < horizon; ++h) {
    const double x = v[h] - lambda;
    if (x <= spec.q_min[h]) {
      fixed += spec.q_min[h];
    } else if (x >= spec.q_max[h]) {
      fixed += spec.q_max[h];
    } else {
      free_sum += v[h];
      ++free_count;
    }
  }
  if (free_count > 0) {
    const double exact = (free_sum - (spec.budget - fixed)) / static_cast<double>(free_count);
    if (std::abs(clip_sum(v, spec, exact) - spec.budget) <=
        std::abs(clip_sum(v, spec, lambda) - spec.budget)) {
      lambda = exact;
    }
  }
  for (std::size_t h = 0; h < horizon; ++h) {
    out[h] = std::clamp(v[h] - lambda, spec.q_min[h], spec.q_max[h]);
  }
}

Profile project(std::span<const double> v, const ConsumerSpec& spec) {
  Profile q(v.size());
  project(v, spec, q);
  return q;
}

Profile sample_feasible(const ConsumerSpec& spec, std::mt19937_64& rng) {
  if (const auto check = validate(spec); !check) {
    throw std::invalid_argument("cannot sample from invalid set: " + check.message);
  }
  Profile v(spec.horizon());
  for (std::size_t h = 0; h < v.size(); ++h) {
    std::uniform_real_distribution<double> draw(spec.q_min[h], spec.q_max[h]);
    v[h] = spec.q_min[h] == spec.q_max[h] ? spec.q_min[h] : draw(rng);
  }
  return project(v, spec);
}

}  // namespace dsm
