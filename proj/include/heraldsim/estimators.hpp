#pragma once

// Statistical estimators: heralded probability tables, cross-correlation,
// the two threefold-probability estimators, visibility fits and the
// concurrence lower bound with its uncertainty.

#include "heraldsim/montecarlo.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace heraldsim {

struct Measured {
  double value = 0;
  double sigma = 0;
};

/// Heralded click probabilities p_mn (m from arm A, n from arm B).
struct ProbabilityTable {
  Measured p00, p01, p10, p11;
};

/// p00 by normalization; its sigma combines the other three in quadrature.
ProbabilityTable make_probability_table(Measured p10, Measured p01, Measured p11);

/// Blocked-arm protocol: p10 from the record taken with arm B blocked, p01
/// with arm A blocked. A heralded window counts once if either detector
/// clicks. Sigmas are sqrt(N) / N_H.
ProbabilityTable probabilities_from_counts(const CountRecord& arm_b_blocked,
                                           const CountRecord& arm_a_blocked, Measured p11);

/// Single open-interferometer record, attributing detector 1 to p10 and
/// detector 2 to p01.
ProbabilityTable probabilities_from_counts(const CountRecord& open, Measured p11);

/// (c / w) / ((s_i / w)(s_s / w)) with Poisson errors. Zero coincidences
/// give 0 with the sigma of a single count.
Measured gsi_from_counts(double coincidences, double singles_i, double singles_s, double windows);

/// Idler = herald clicks, signal = detector-1 plus detector-2 clicks.
Measured gsi_from_record(const CountRecord& rec);

/// 4 p10 p01 / (g - 1), first-order error propagation.
Measured p11_xcorr(Measured p10, Measured p01, Measured gsi);

enum class ConcurrenceMethod { xcorr, threefold_mle, threefold_ce };

std::string_view to_string(ConcurrenceMethod method);

struct ConcurrenceEstimate {
  double value = 0;
  double sigma = 0;
  ConcurrenceMethod method = ConcurrenceMethod::xcorr;
};

/// max(0, V (p01 + p10) - 2 sqrt(p00 p11)), delta-method sigma with p00
/// tied to the others by normalization. When p11 is below its own sigma
/// the p11 term uses a one-sigma finite difference instead.
ConcurrenceEstimate concurrence_bound(Measured visibility, const ProbabilityTable& table,
                                      ConcurrenceMethod method = ConcurrenceMethod::xcorr);

/// Parametric bootstrap of the same bound: every input with nonzero sigma
/// is redrawn as a scaled Poisson count with (value / sigma)^2 expected
/// events; V is redrawn from a normal law.
double bootstrap_concurrence_sigma(Measured visibility, const ProbabilityTable& table,
                                   std::uint64_t resamples, std::uint64_t seed);

enum class ThreefoldMethod { mle, ce };

std::string_view to_string(ThreefoldMethod method);

inline constexpr double kDefaultThreefoldCorrection = 2.27;

struct ThreefoldEstimate {
  Measured p11;
  ThreefoldMethod method = ThreefoldMethod::mle;
  std::uint64_t n = 0;
  double heralds = 0;
  double correction = kDefaultThreefoldCorrection;
};

/// mle: c n / N_H +- c sqrt(n) / N_H.  ce: c (n + 1) / N_H +- c sqrt(n + 1) / N_H.
ThreefoldEstimate threefold_estimate(std::uint64_t n, double heralds, ThreefoldMethod method,
                                     double correction = kDefaultThreefoldCorrection);

/// Flat-prior posterior of the threefold probability after n events in N_H
/// trials, N_H exp(-N_H p) (N_H p)^n / n!.
class PosteriorDensity {
 public:
  PosteriorDensity(std::uint64_t n, double heralds);

  double operator()(double p) const;
  double log_density(double p) const;
  double mean() const;           // (n + 1) / N_H
  double second_moment() const;  // (n + 1)(n + 2) / N_H^2
  double stddev() const;         // sqrt(n + 1) / N_H

  std::uint64_t n() const { return n_; }
  double heralds() const { return heralds_; }

 private:
  std::uint64_t n_;
  double heralds_;
};

struct FringePoint {
  double phase = 0;      // rad
  double detector1 = 0;  // counts
  double detector2 = 0;
};

struct FringeFit {
  Measured visibility;
  double amplitude = 0;  // A in A (1 + V cos(phase - phase0))
  double phase0 = 0;
};

struct FringeFits {
  FringeFit detector1;
  FringeFit detector2;
};

/// Poisson-weighted linear least squares of c0 + c1 cos + c2 sin per
/// detector. Needs four distinct phases and some counts on each detector.
FringeFits fit_visibility(const std::vector<FringePoint>& scan);

/// eta (V - 2 / sqrt(g - 1)), clamped at zero.
double simple_concurrence(double eta, double visibility, double gsi);

}  // namespace heraldsim
