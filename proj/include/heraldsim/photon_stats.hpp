#pragma once

// Truncated Fock-space photon-number statistics.
//
// Distributions are plain Eigen column vectors indexed by photon number
// n = 0..n_max; joint distributions are matrices indexed (n_idler, n_signal).
// Every operation here is a pure function templated on the scalar type.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace heraldsim {

template <typename Scalar>
using NumberDistribution = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using JointNumberDistribution = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kDefaultTruncationTolerance = 1e-12;
inline constexpr Eigen::Index kDefaultMaxPhotons = 8;

struct SourceParams {
  double alpha = 0;       // pairs per mW
  double pump_power = 0;  // mW
};

namespace detail {

template <typename Scalar>
void require_probability(Scalar p, const char* what) {
  if (!(p >= Scalar(0) && p <= Scalar(1)))
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

template <typename Scalar>
void require_pair_parameter(Scalar lambda) {
  if (!(lambda >= Scalar(0) && lambda < Scalar(1)))
    throw std::domain_error("pair parameter lambda must lie in [0, 1)");
}

inline void require_truncation(Eigen::Index n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
}

}  // namespace detail

/// Small-squeezing identification of the pair parameter, lambda = alpha * P.
template <typename Scalar>
Scalar lambda_from_pump(Scalar alpha, Scalar pump) {
  if (!(alpha > Scalar(0))) throw std::invalid_argument("alpha must be positive");
  if (!(pump >= Scalar(0))) throw std::invalid_argument("pump power must be non-negative");
  const Scalar lambda = alpha * pump;
  if (!(lambda < Scalar(1)))
    throw std::domain_error("alpha * pump >= 1 is not a physical pair parameter");
  return lambda;
}

inline double lambda_of(const SourceParams& source) {
  return lambda_from_pump(source.alpha, source.pump_power);
}

/// Geometric (thermal) law P(n) = (1 - lambda) lambda^n, truncated at n_max.
template <typename Scalar>
NumberDistribution<Scalar> thermal(Scalar lambda, Eigen::Index n_max) {
  detail::require_pair_parameter(lambda);
  detail::require_truncation(n_max);
  NumberDistribution<Scalar> p(n_max + 1);
  Scalar term = Scalar(1) - lambda;
  for (Eigen::Index n = 0; n <= n_max; ++n) {
    p(n) = term;
    term *= lambda;
  }
  return p;
}

template <typename Scalar>
NumberDistribution<Scalar> poissonian(Scalar mean, Eigen::Index n_max) {
  if (!(mean >= Scalar(0))) throw std::invalid_argument("Poisson mean must be non-negative");
  detail::require_truncation(n_max);
  NumberDistribution<Scalar> p(n_max + 1);
  Scalar term = std::exp(-mean);
  for (Eigen::Index n = 0; n <= n_max; ++n) {
    p(n) = term;
    term *= mean / Scalar(n + 1);
  }
  return p;
}

/// Diagonal two-mode squeezed vacuum, P(n, n) = (1 - lambda) lambda^n.
template <typename Scalar>
JointNumberDistribution<Scalar> tmss_joint(Scalar lambda, Eigen::Index n_max) {
  JointNumberDistribution<Scalar> joint =
      JointNumberDistribution<Scalar>::Zero(n_max + 1, n_max + 1);
  joint.diagonal() = thermal(lambda, n_max);
  return joint;
}

/// Binomial loss channel as a lower-triangular transfer matrix,
/// B(k, n) = C(n, k) eta^k (1 - eta)^(n - k).
///
/// Built column by column with the Pascal recurrence so eta = 0 and eta = 1
/// come out exact. Composition is a matrix product:
/// thinning_matrix(a) * thinning_matrix(b) == thinning_matrix(a * b).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> thinning_matrix(Scalar eta,
                                                                      Eigen::Index n_max) {
  detail::require_probability(eta, "transmission eta");
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix b = Matrix::Zero(n_max + 1, n_max + 1);
  b(0, 0) = Scalar(1);
  const Scalar loss = Scalar(1) - eta;
  for (Eigen::Index n = 1; n <= n_max; ++n) {
    b(0, n) = loss * b(0, n - 1);
    for (Eigen::Index k = 1; k <= n; ++k) b(k, n) = eta * b(k - 1, n - 1) + loss * b(k, n - 1);
  }
  return b;
}

template <typename Derived>
NumberDistribution<typename Derived::Scalar> thin(const Eigen::MatrixBase<Derived>& dist,
                                                  typename Derived::Scalar eta) {
  return thinning_matrix(eta, dist.size() - 1) * dist;
}

template <typename Derived>
typename Derived::Scalar mean_photon_number(const Eigen::MatrixBase<Derived>& dist) {
  using Scalar = typename Derived::Scalar;
  Scalar mean = 0;
  for (Eigen::Index n = 0; n < dist.size(); ++n) mean += Scalar(n) * dist(n);
  return mean;
}

/// Zero-delay autocorrelation <n(n-1)> / <n>^2 over the truncated support.
template <typename Derived>
typename Derived::Scalar g2_zero(const Eigen::MatrixBase<Derived>& dist) {
  using Scalar = typename Derived::Scalar;
  Scalar mean = 0;
  Scalar factorial_moment = 0;
  for (Eigen::Index n = 0; n < dist.size(); ++n) {
    mean += Scalar(n) * dist(n);
    factorial_moment += Scalar(n) * Scalar(n - 1) * dist(n);
  }
  if (!(mean > Scalar(0))) throw std::domain_error("g2 is undefined for the vacuum");
  return factorial_moment / (mean * mean);
}

template <typename Scalar>
struct HeraldedDistribution {
  NumberDistribution<Scalar> signal;  // normalized, conditioned on a herald
  Scalar herald_probability = 0;
};

/// Threshold-detector click probability for n photons: 1 - (1 - dark)(1 - eta)^n.
template <typename Scalar>
NumberDistribution<Scalar> click_probabilities(Scalar eta, Scalar dark, Eigen::Index n_max) {
  detail::require_probability(eta, "detector efficiency");
  detail::require_probability(dark, "dark-count probability");
  NumberDistribution<Scalar> click(n_max + 1);
  Scalar miss = Scalar(1) - dark;
  for (Eigen::Index n = 0; n <= n_max; ++n) {
    click(n) = Scalar(1) - miss;
    miss *= Scalar(1) - eta;
  }
  return click;
}

/// Signal statistics conditioned on a threshold click of the idler detector.
template <typename Derived>
HeraldedDistribution<typename Derived::Scalar> heralded_signal(
    const Eigen::MatrixBase<Derived>& joint, typename Derived::Scalar eta_idler,
    typename Derived::Scalar dark_idler) {
  using Scalar = typename Derived::Scalar;
  if (!(dark_idler >= Scalar(0) && dark_idler < Scalar(1)))
    throw std::invalid_argument("idler dark-count probability must lie in [0, 1)");
  const NumberDistribution<Scalar> click =
      click_probabilities(eta_idler, dark_idler, joint.rows() - 1);
  HeraldedDistribution<Scalar> out;
  out.signal = joint.transpose() * click;
  out.herald_probability = out.signal.sum();
  if (!(out.herald_probability > Scalar(0)))
    throw std::domain_error("herald probability is zero");
  out.signal /= out.herald_probability;
  return out;
}

/// Splits every photon independently into arm A (p_a), arm B (p_b) or loss.
/// Returns the joint law over (m in A, k in B).
template <typename Derived>
JointNumberDistribution<typename Derived::Scalar> split(const Eigen::MatrixBase<Derived>& dist,
                                                        typename Derived::Scalar p_a,
                                                        typename Derived::Scalar p_b) {
  using Scalar = typename Derived::Scalar;
  detail::require_probability(p_a, "split probability p_a");
  detail::require_probability(p_b, "split probability p_b");
  const Scalar kept = p_a + p_b;
  if (kept > Scalar(1)) throw std::invalid_argument("split probabilities exceed one");
  const Eigen::Index n_max = dist.size() - 1;
  JointNumberDistribution<Scalar> out = JointNumberDistribution<Scalar>::Zero(n_max + 1, n_max + 1);
  if (kept == Scalar(0)) {
    out(0, 0) = dist.sum();
    return out;
  }
  const NumberDistribution<Scalar> survivors = thin(dist, kept);
  const auto to_a = thinning_matrix(p_a / kept, n_max);
  for (Eigen::Index s = 0; s <= n_max; ++s)
    for (Eigen::Index m = 0; m <= s; ++m) out(m, s - m) += survivors(s) * to_a(m, s);
  return out;
}

/// Throws unless every entry is a probability and the total mass lies in
/// [1 - tolerance, 1 + tolerance].
template <typename Derived>
void check_normalized(const Eigen::MatrixBase<Derived>& dist,
                      double tolerance = kDefaultTruncationTolerance) {
  if ((dist.array() < 0).any() || (dist.array() > 1).any())
    throw std::domain_error("distribution entries must lie in [0, 1]");
  const double mass = static_cast<double>(dist.sum());
  if (std::abs(1.0 - mass) > tolerance)
    throw std::domain_error("distribution mass " + std::to_string(mass) +
                            " outside truncation tolerance; raise n_max");
}

/// Smallest n_max (at least `floor`) whose geometric tail lambda^(n_max+1)
/// stays below `tolerance`.
inline Eigen::Index truncation_for(double lambda, double tolerance,
                                   Eigen::Index floor = kDefaultMaxPhotons) {
  detail::require_pair_parameter(lambda);
  Eigen::Index n_max = std::max<Eigen::Index>(floor, 1);
  double tail = std::pow(lambda, static_cast<double>(n_max + 1));
  while (tail > tolerance && n_max < 200) {
    ++n_max;
    tail *= lambda;
  }
  return n_max;
}

}  // namespace heraldsim
