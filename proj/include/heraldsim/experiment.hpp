#pragma once

// Campaign orchestration: the pump-power sweep, the threefold-coincidence
// campaign, the fringe scan and the transmission budget.

#include "heraldsim/estimators.hpp"
#include "heraldsim/montecarlo.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace heraldsim {

enum class RunMode { analytic, montecarlo };

std::string_view to_string(RunMode mode);

/// Per-heralding-signal transmissions of the signal path.
struct StageTransmissions {
  double fiber = 0.20;            // signal photon in the fiber
  double interferometer = 0.024;  // both passes, beamsplitter included
  double detector = 0.30;         // informational; detectors carry eta1, eta2
};

struct ExperimentConfig {
  double alpha = 2.71e-3;  // pairs per mW
  double alpha_sigma = 0.08e-3;
  double eta_echo = 0.15;
  double ratio = 2.936;  // eta_trans / eta_echo
  double ratio_sigma = 0.069;
  BeamSplitterCoeffs bs{0.479, 0.422, 0.482, 0.409};
  double eta1 = 0.2;
  double eta2 = 0.4;
  double eta_dark = 2e-6;  // per window, summed over both signal detectors
  double idler_dark = 0.0;
  double herald_efficiency = 1.2e-3;
  StageTransmissions stages;
  double visibility = 0.965;
  double visibility_sigma = 0.012;
  double window_s = 10e-9;
  double storage_time_s = 33e-9;  // informational
  std::vector<double> pump_powers{1, 2, 3, 4, 8, 13, 16};
  bool use_reference_pc = true;   // p_c from the measured series when a row matches
  std::optional<double> threefold_correction = 2.27;  // else derived from bs and detectors
  double campaign_power = 16.0;
  double campaign_heralds = 1.566e9;
  std::optional<double> campaign_p_sum = 1.7777e-4;  // calibrates the interferometer stage
  RunMode mode = RunMode::analytic;
  std::uint64_t seed = 0;
  std::uint64_t trials = 10'000'000;  // per run in montecarlo mode
  double sweep_heralds = 4e8;         // heralds per sweep run in analytic mode (error scale)
  Eigen::Index n_max = kDefaultMaxPhotons;
  double fringe_heralds = 1e6;  // heralds per phase point
};

ExperimentConfig paper_preset();

/// Boosted efficiencies for Monte Carlo checks at 10^7 trials.
ExperimentConfig desk_preset();

/// Throws std::invalid_argument naming the offending field.
void validate(const ExperimentConfig& cfg);

/// Transmission between the memories and the detectors beyond the
/// beamsplitter intensities, so that T sA + R sB times it equals the
/// interferometer stage.
double extra_interferometer_transmission(const ExperimentConfig& cfg);

TrialConfig trial_config(const ExperimentConfig& cfg, double power_mw, ArmBlock block,
                         std::optional<double> phase = std::nullopt);

struct SweepRow {
  double power_mw = 0;
  double lambda = 0;
  double gsi_model = 0;
  double gsi_model_low = 0;  // band from alpha and ratio uncertainties
  double gsi_model_high = 0;
  Measured gsi_est;
  Measured p10, p01;
  Measured p11_xcorr;
  double p11_theory = 0;
  ConcurrenceEstimate c_bound;
};

std::vector<SweepRow> pump_sweep(const ExperimentConfig& cfg);

struct ThreefoldCampaign {
  double power_mw = 0;
  double heralds = 0;
  double interferometer = 0;   // stage after calibration
  double expected_threefolds = 0;
  std::uint64_t n = 0;
  ProbabilityTable singles;    // p10 + p01 from the open interferometer
  double correction = 0;       // applied
  double correction_rounded = 0;
  double correction_model = 0;
  ThreefoldEstimate mle, ce;
  ConcurrenceEstimate c_mle, c_ce;
};

ThreefoldCampaign threefold_campaign(const ExperimentConfig& cfg,
                                     std::optional<std::uint64_t> n_observed = std::nullopt);

struct TransmissionBudget {
  double eta_total = 0;
  double c_detected = 0;
  double c_after_crystals = 0;
};

/// Needs "interferometer" and "detector" stages; all stages in (0, 1].
TransmissionBudget transmission_budget(const std::map<std::string, double>& stages,
                                       double visibility, double gsi);

std::map<std::string, double> stage_map(const StageTransmissions& stages, double memory);

struct FringeScan {
  double power_mw = 0;
  std::vector<FringePoint> points;  // counts per detector
  FringeFits fits;
};

/// Analytic mode: single-photon fringes with the open-interferometer click
/// probability and detector amplitudes; with `poisson_noise` counts are
/// drawn around them. Montecarlo mode samples the fixed-phase trial model.
FringeScan fringe_scan(const ExperimentConfig& cfg, const std::vector<double>& phases,
                       double power_mw, bool poisson_noise);

}  // namespace heraldsim
