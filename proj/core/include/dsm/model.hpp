#pragma once

// Economic primitives of the demand-side-management game: the per-slot
// polynomial price p_h(L) = a_h * L^b_h + c_h, the two billing schemes, the
// game mapping F_n and the analytical monotonicity certificates.
//
// Slot and consumer indices are zero-based throughout the library.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dsm {

/// Energy per slot over the scheduling horizon (one consumer or an aggregate).
using Profile = std::vector<double>;

/// Raised when a curvature quantity is requested at a point where it
/// diverges (zero load with 1 < b < 2).
class SingularEvaluation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct SlotPrice {
  double a = 0.0;  ///< scale, > 0
  double b = 1.0;  ///< exponent, >= 1
  double c = 0.0;  ///< additive term, >= 0

  friend bool operator==(const SlotPrice&, const SlotPrice&) = default;
};

class PriceCurve {
 public:
  /// Throws std::invalid_argument unless every slot has a > 0, b >= 1, c >= 0.
  explicit PriceCurve(std::vector<SlotPrice> slots);

  std::size_t horizon() const noexcept { return slots_.size(); }
  const SlotPrice& slot(std::size_t h) const;
  std::span<const SlotPrice> slots() const noexcept { return slots_; }
  double max_exponent() const noexcept;

  friend bool operator==(const PriceCurve&, const PriceCurve&) = default;

 private:
  std::vector<SlotPrice> slots_;
};

double price(const PriceCurve& curve, std::size_t h, double load);
double price_derivative(const PriceCurve& curve, std::size_t h, double load);
/// p_h''(L); throws SingularEvaluation at L = 0 when 1 < b_h < 2.
double price_second_derivative(const PriceCurve& curve, std::size_t h, double load);

/// Elementwise sum of equally sized profiles.
Profile aggregate(std::span<const Profile> profiles);

/// sum_h p_h(q_sigma^h) * q_n^h
double bill_instantaneous(std::span<const double> q_n, std::span<const double> q_sigma,
                          const PriceCurve& curve);

/// sum_h p_h(q_sigma^h) * q_sigma^h, the cost of the whole grid.
double grid_cost(std::span<const double> q_sigma, const PriceCurve& curve);

/// Grid cost split in proportion to each consumer's budget share E_n / sum E.
double bill_total_load(std::size_t n, std::span<const Profile> profiles,
                       std::span<const double> budgets, const PriceCurve& curve);

/// Gradient of the instantaneous bill with respect to the consumer's own
/// profile, with the aggregate moving along: f^h = p'(q_sigma^h) q_n^h + p(q_sigma^h).
Profile mapping_component(std::span<const double> q_n, std::span<const double> q_sigma,
                          const PriceCurve& curve);
void mapping_component(std::span<const double> q_n, std::span<const double> q_sigma,
                       const PriceCurve& curve, std::span<double> out);

/// Diagonal of the Hessian of the instantaneous bill in the consumer's own
/// profile: q_n^h p''(q_sigma^h) + 2 p'(q_sigma^h).
Profile hessian_diagonal(std::span<const double> q_n, std::span<const double> q_sigma,
                         const PriceCurve& curve);

struct Certificate {
  double uniqueness_bound = 0.0;       ///< 3 + 4/(N-1)
  std::vector<double> kappa;           ///< per slot
  std::vector<double> min_eigenvalue;  ///< per slot, empty unless evaluated at a point
  bool holds = false;                  ///< max_h b_h < uniqueness_bound
};

/// Exponent bound guaranteeing a unique equilibrium. Requires consumers >= 2.
Certificate uniqueness_certificate(std::size_t consumers, const PriceCurve& curve);

/// Same as above, and additionally evaluates the smallest eigenvalue of the
/// symmetrised slot Jacobian at the given profiles (all slot loads must be > 0).
Certificate uniqueness_certificate(const PriceCurve& curve, std::span<const Profile> profiles);

/// kappa_h = (N + 1 + b_h) - sqrt(N (N - 1 + b_h^2))
double slot_kappa(std::size_t consumers, double exponent);

/// Jacobian of the stacked slot mapping (f_1^h, ..., f_N^h) with respect to
/// (q_1^h, ..., q_N^h), row-major N x N. Entry (n, m) is
/// sigma [q_sigma + (b - 1) q_n] + sigma q_sigma [n == m], sigma = a b q_sigma^(b-2).
std::vector<double> slot_jacobian(std::span<const double> slot_loads, std::size_t h,
                                  const PriceCurve& curve);

/// The two non-zero eigenvalues (larger first) of z 1^T + 1 z^T where
/// z = q_sigma 1 + (b - 1) loads.
std::pair<double, double> rank_two_eigenvalues(std::span<const double> slot_loads,
                                               double exponent);

struct SlotMonotonicity {
  double kappa = 0.0;
  double min_eigenvalue = 0.0;  ///< of G_h + G_h^T, computed numerically
};

SlotMonotonicity monotonicity_certificate(std::span<const double> slot_loads, std::size_t h,
                                          const PriceCurve& curve);

/// Peak-to-average ratio H * max_h q^h / sum_h q^h.
double par(std::span<const double> q_sigma);

}  // namespace dsm
