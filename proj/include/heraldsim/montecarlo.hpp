#pragma once

// Trial-level model of the heralded interferometer.
//
// One trial is one coincidence window. Early and late pair numbers are drawn
// independently from the thermal law; the early idler heralds, early signal
// photons are stored (eta_echo) and late ones leak through (eta_trans) into
// the same output mode. Signal photons first split into arm A with R and arm
// B with T, meet again at the beamsplitter, and are counted by threshold
// detectors.
//
// run_trials samples this model; expected_counts evaluates it exactly on a
// truncated Fock space. The two share parameters only.

#include "heraldsim/optics.hpp"
#include "heraldsim/photon_stats.hpp"

#include <array>
#include <cstdint>
#include <optional>

namespace heraldsim {

enum class ArmBlock { none, a, b };

struct TrialConfig {
  SourceParams source;
  double herald_efficiency = 1.0;    // idler photon -> herald click
  double idler_dark = 0.0;           // per window
  double signal_transmission = 1.0;  // source to first beamsplitter pass
  std::array<MemoryParams, 2> memories{};  // arm A, arm B
  BeamSplitterCoeffs bs;
  std::array<DetectorParams, 2> detectors{};  // beamsplitter outputs to detectors 1, 2
  ArmBlock block = ArmBlock::none;
  std::optional<double> fixed_phase;  // randomized phase when empty
  double visibility = 1.0;            // single-photon coherence in fixed-phase mode
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  double window_s = 10e-9;
  Eigen::Index n_max = kDefaultMaxPhotons;  // floor for the analytic truncation
  double truncation_tolerance = kDefaultTruncationTolerance;
};

void validate(const TrialConfig& cfg);

/// Heralds and conditional detections of one campaign. `Count` is an
/// integer for sampled records and a real for expectations.
template <typename Count>
struct BasicCountRecord {
  Count heralds{};          // N_H
  Count n1_given_h{};       // N_{1|H}
  Count n2_given_h{};       // N_{2|H}
  Count n12_given_h{};      // N_{12|H}
  Count signal_singles{};   // detector-1 plus detector-2 clicks
  Count idler_singles{};
  double trials = 0;
  double duration_s = 0;    // trials * window, informational

  friend bool operator==(const BasicCountRecord&, const BasicCountRecord&) = default;
};

using CountRecord = BasicCountRecord<std::uint64_t>;
using ExpectedCountRecord = BasicCountRecord<double>;

/// Worker count from hardware concurrency, capped by HERALDSIM_THREADS.
unsigned default_workers();

/// Samples cfg.trials windows. Output depends only on (cfg, seed).
CountRecord run_trials(const TrialConfig& cfg, unsigned workers = 0);

/// Exact expectation of run_trials over cfg.trials windows.
ExpectedCountRecord expected_counts(const TrialConfig& cfg);

/// Per-herald probabilities of (1,1), (2,0) and (0,2) photons reaching the
/// recombining beamsplitter from arms (A, B).
TwoPhotonDiagonal retrieved_two_photon(const TrialConfig& cfg);

struct SampledMoment {
  double value = 0;
  double sigma = 0;
};

/// g2(0) of sampled thermal photon numbers, with a delta-method standard error.
SampledMoment sampled_thermal_g2(double lambda, std::uint64_t samples, std::uint64_t seed,
                                 unsigned workers = 0);

}  // namespace heraldsim
