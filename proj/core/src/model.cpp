#include "dsm/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace dsm {

namespace {

void require_same_length(std::span<const double> x, std::span<const double> y,
                         std::size_t horizon) {
  if (x.size() != horizon || y.size() != horizon) {
    throw std::invalid_argument("profile length " + std::to_string(x.size()) + "/" +
                                std::to_string(y.size()) + " does not match horizon " +
                                std::to_string(horizon));
  }
}

void require_load(double load) {
  if (!(load >= 0.0)) {
    throw std::invalid_argument("load must be a nonnegative number, got " +
                                std::to_string(load));
  }
}

}  // namespace

PriceCurve::PriceCurve(std::vector<SlotPrice> slots) : slots_(std::move(slots)) {
  for (std::size_t h = 0; h < slots_.size(); ++h) {
    const auto& s = slots_[h];
    if (!(s.a > 0.0) || !std::isfinite(s.a) || !(s.b >= 1.0) || !std::isfinite(s.b) ||
        !(s.c >= 0.0) || !std::isfinite(s.c)) {
      throw std::invalid_argument("slot " + std::to_string(h) +
                                  ": price parameters need a > 0, b >= 1, c >= 0");
    }
  }
}

const SlotPrice& PriceCurve::slot(std::size_t h) const {
  if (h >= slots_.size()) {
    throw std::invalid_argument("slot index " + std::to_string(h) + " outside horizon " +
                                std::to_string(slots_.size()));
  }
  return slots_[h];
}

double PriceCurve::max_exponent() const noexcept {
  double m = 1.0;
  for (const auto& s : slots_) m = std::max(m, s.b);
  return m;
}

double price(const PriceCurve& curve, std::size_t h, double load) {
  require_load(load);
  const auto& s = curve.slot(h);
  return s.a * std::pow(load, s.b) + s.c;
}

double price_derivative(const PriceCurve& curve, std::size_t h, double load) {
  require_load(load);
  const auto& s = curve.slot(h);
  if (s.b == 1.0) return s.a;
  return s.a * s.b * std::pow(load, s.b - 1.0);
}

double price_second_derivative(const PriceCurve& curve, std::size_t h, double load) {
  require_load(load);
  const auto& s = curve.slot(h);
  if (s.b == 1.0) return 0.0;
  if (s.b == 2.0) return 2.0 * s.a;
  if (load == 0.0) {
    if (s.b < 2.0) {
      throw SingularEvaluation("p'' diverges at zero load in slot " + std::to_string(h) +
                               " (b = " + std::to_string(s.b) + ")");
    }
    return 0.0;
  }
  return s.a * s.b * (s.b - 1.0) * std::pow(load, s.b - 2.0);
}

Profile aggregate(std::span<const Profile> profiles) {
  if (profiles.empty()) return {};
  Profile sum(profiles.front().size(), 0.0);
  for (const auto& q : profiles) {
    if (q.size() != sum.size()) throw std::invalid_argument("profiles differ in length");
    for (std::size_t h = 0; h < q.size(); ++h) sum[h] += q[h];
  }
  return sum;
}

double bill_instantaneous(std::span<const double> q_n, std::span<const double> q_sigma,
                          const PriceCurve& curve) {
  require_same_length(q_n, q_sigma, curve.horizon());
  double bill = 0.0;
  for (std::size_t h = 0; h < q_n.size(); ++h) bill += price(curve, h, q_sigma[h]) * q_n[h];
  return bill;
}

double grid_cost(std::span<const double> q_sigma, const PriceCurve& curve) {
  return bill_instantaneous(q_sigma, q_sigma, curve);
}

double bill_total_load(std::size_t n, std::span<const Profile> profiles,
                       std::span<const double> budgets, const PriceCurve& curve) {
  if (profiles.size() != budgets.size() || n >= profiles.size()) {
    throw std::invalid_argument("consumer index or budget count out of range");
  }
  const double total_budget = std::accumulate(budgets.begin(), budgets.end(), 0.0);
  if (!(total_budget > 0.0)) throw std::invalid_argument("total budget must be positive");
  const Profile q_sigma = aggregate(profiles);
  return budgets[n] / total_budget * grid_cost(q_sigma, curve);
}

void mapping_component(std::span<const double> q_n, std::span<const double> q_sigma,
                       const PriceCurve& curve, std::span<double> out) {
  require_same_length(q_n, q_sigma, curve.horizon());
  if (out.size() != q_n.size()) throw std::invalid_argument("output length mismatch");
  for (std::size_t h = 0; h < q_n.size(); ++h) {
    out[h] = price_derivative(curve, h, q_sigma[h]) * q_n[h] + price(curve, h, q_sigma[h]);
  }
}

Profile mapping_component(std::span<const double> q_n, std::span<const double> q_sigma,
                          const PriceCurve& curve) {
  Profile f(q_n.size());
  mapping_component(q_n, q_sigma, curve, f);
  return f;
}

Profile hessian_diagonal(std::span<const double> q_n, std::span<const double> q_sigma,
                         const PriceCurve& curve) {
  require_same_length(q_n, q_sigma, curve.horizon());
  Profile d(q_n.size());
  for (std::size_t h = 0; h < q_n.size(); ++h) {
    d[h] = q_n[h] * price_second_derivative(curve, h, q_sigma[h]) +
           2.0 * price_derivative(curve, h, q_sigma[h]);
  }
  return d;
}

double slot_kappa(std::size_t consumers, double exponent) {
  const double n = static_cast<double>(consumers);
  return (n + 1.0 + exponent) - std::sqrt(n * (n - 1.0 + exponent * exponent));
}

Certificate uniqueness_certificate(std::size_t consumers, const PriceCurve& curve) {
  if (consumers < 2) {
    throw std::invalid_argument("uniqueness bound needs at least two consumers");
  }
  Certificate cert;
  cert.uniqueness_bound = 3.0 + 4.0 / static_cast<double>(consumers - 1);
  cert.kappa.reserve(curve.horizon());
  for (const auto& s : curve.slots()) cert.kappa.push_back(slot_kappa(consumers, s.b));
  cert.holds = curve.max_exponent() < cert.uniqueness_bound;
  return cert;
}

Certificate uniqueness_certificate(const PriceCurve& curve, std::span<const Profile> profiles) {
  Certificate cert = uniqueness_certificate(profiles.size(), curve);
  std::vector<double> loads(profiles.size());
  for (std::size_t h = 0; h < curve.horizon(); ++h) {
    for (std::size_t n = 0; n < profiles.size(); ++n) loads[n] = profiles[n].at(h);
    cert.min_eigenvalue.push_back(monotonicity_certificate(loads, h, curve).min_eigenvalue);
  }
  return cert;
}

std::vector<double> slot_jacobian(std::span<const double> slot_loads, std::size_t h,
                                  const PriceCurve& curve) {
  const std::size_t n_count = slot_loads.size();
  const auto& s = curve.slot(h);
  const double total = std::accumulate(slot_loads.begin(), slot_loads.end(), 0.0);
  if (!(total > 0.0)) {
    throw SingularEvaluation("slot Jacobian needs a positive aggregate load");
  }
  const double sigma = s.a * s.b * std::pow(total, s.b - 2.0);
  std::vector<double> g(n_count * n_count);
  for (std::size_t n = 0; n < n_count; ++n) {
    const double off = sigma * (total + (s.b - 1.0) * slot_loads[n]);
    for (std::size_t m = 0; m < n_count; ++m) {
      g[n * n_count + m] = off + (n == m ? sigma * total : 0.0);
    }
  }
  return g;
}

std::pair<double, double> rank_two_eigenvalues(std::span<const double> slot_loads,
                                               double exponent) {
  const double n = static_cast<double>(slot_loads.size());
  const double total = std::accumulate(slot_loads.begin(), slot_loads.end(), 0.0);
  double z_dot_z = 0.0;
  for (double l : slot_loads) {
    const double z = total + (exponent - 1.0) * l;
    z_dot_z += z * z;
  }
  // 1^T z = (N + b - 1) q_sigma
  const double centre = (n + exponent - 1.0) * total;
  const double spread = std::sqrt(n * z_dot_z);
  return {centre + spread, centre - spread};
}

SlotMonotonicity monotonicity_certificate(std::span<const double> slot_loads, std::size_t h,
                                          const PriceCurve& curve) {
  if (slot_loads.empty()) throw std::invalid_argument("no consumers");
  for (std::size_t n = 0; n < slot_loads.size(); ++n) {
    if (!(slot_loads[n] > 0.0)) {
      throw SingularEvaluation("monotonicity certificate needs positive loads; consumer " +
                               std::to_string(n) + " has " + std::to_string(slot_loads[n]));
    }
  }
  const auto n_count = static_cast<Eigen::Index>(slot_loads.size());
  const std::vector<double> g = slot_jacobian(slot_loads, h, curve);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      jac(g.data(), n_count, n_count);
  const Eigen::MatrixXd sym = jac + jac.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalue computation failed");
  }
  return {slot_kappa(slot_loads.size(), curve.slot(h).b), solver.eigenvalues().minCoeff()};
}

double par(std::span<const double> q_sigma) {
  if (q_sigma.empty()) throw std::invalid_argument("empty profile");
  const double total = std::accumulate(q_sigma.begin(), q_sigma.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("PAR needs a positive total load");
  const double peak = *std::max_element(q_sigma.begin(), q_sigma.end());
  return static_cast<double>(q_sigma.size()) * peak / total;
}

}  // namespace dsm
