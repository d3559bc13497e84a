#include "heraldsim/experiment.hpp"

#include "heraldsim/measured_data.hpp"
#include "heraldsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace heraldsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_field(bool ok, const std::string& field, const std::string& rule) {
  if (!ok) throw std::invalid_argument(field + ": " + rule);
}

void require_unit(double p, const std::string& field) {
  require_field(p >= 0.0 && p <= 1.0, field, "must lie in [0, 1]");
}

ExpectedCountRecord as_real(const CountRecord& r) {
  ExpectedCountRecord out;
  out.heralds = static_cast<double>(r.heralds);
  out.n1_given_h = static_cast<double>(r.n1_given_h);
  out.n2_given_h = static_cast<double>(r.n2_given_h);
  out.n12_given_h = static_cast<double>(r.n12_given_h);
  out.signal_singles = static_cast<double>(r.signal_singles);
  out.idler_singles = static_cast<double>(r.idler_singles);
  out.trials = r.trials;
  out.duration_s = r.duration_s;
  return out;
}

// Runs one configuration in the configured mode.
ExpectedCountRecord counts_for(const ExperimentConfig& cfg, TrialConfig trial) {
  if (cfg.mode == RunMode::montecarlo) return as_real(run_trials(trial));
  trial.trials = 1;
  ExpectedCountRecord r = expected_counts(trial);
  if (!(r.heralds > 0.0)) return r;
  const double scale = cfg.sweep_heralds / r.heralds;
  for (double* c : {&r.heralds, &r.n1_given_h, &r.n2_given_h, &r.n12_given_h, &r.signal_singles,
                    &r.idler_singles, &r.trials, &r.duration_s})
    *c *= scale;
  return r;
}

Measured per_herald(double count, double heralds) {
  return {count / heralds, std::sqrt(count) / heralds};
}

// Either-detector clicks per herald, as recorded with one arm blocked.
Measured blocked_probability(const ExpectedCountRecord& r) {
  return per_herald(r.n1_given_h + r.n2_given_h - r.n12_given_h, r.heralds);
}

Measured record_gsi(const ExpectedCountRecord& r) {
  return gsi_from_counts(r.n1_given_h + r.n2_given_h, r.idler_singles, r.signal_singles, r.trials);
}

double model_gsi(double lambda, double ratio, double eta_dark, double p_c) {
  if (eta_dark > 0.0 && !(p_c > 0.0)) return kNaN;
  return gsi_model(lambda, ratio, eta_dark, p_c);
}

std::uint64_t poisson_draw(double mean, std::uint64_t seed, std::uint64_t stream) {
  if (!(mean > 0.0)) return 0;
  CounterRng rng(seed, stream);
  std::poisson_distribution<std::uint64_t> poisson(mean);
  return poisson(rng);
}

// Click probabilities per herald with the interferometer open.
ExpectedCountRecord open_per_trial(const ExperimentConfig& cfg, double power_mw) {
  TrialConfig trial = trial_config(cfg, power_mw, ArmBlock::none);
  trial.trials = 1;
  return expected_counts(trial);
}

}  // namespace

std::string_view to_string(RunMode mode) {
  return mode == RunMode::analytic ? "analytic" : "montecarlo";
}

ExperimentConfig paper_preset() { return ExperimentConfig{}; }

ExperimentConfig desk_preset() {
  ExperimentConfig cfg;
  cfg.eta_echo = 0.2;
  cfg.ratio = 3.0;
  cfg.eta1 = 0.5;
  cfg.eta2 = 0.5;
  cfg.eta_dark = 0.0;
  cfg.herald_efficiency = 0.1;
  cfg.stages.fiber = 1.0;
  cfg.stages.interferometer = cfg.bs.throughput();
  cfg.stages.detector = 0.5;
  cfg.pump_powers = {4, 8, 13, 16};
  cfg.use_reference_pc = false;
  cfg.threefold_correction.reset();
  cfg.campaign_heralds = 5e3;  // about two expected threefolds at 16 mW
  cfg.campaign_p_sum.reset();
  cfg.mode = RunMode::montecarlo;
  cfg.trials = 10'000'000;
  cfg.sweep_heralds = 4e4;
  cfg.fringe_heralds = 1e5;
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  require_field(cfg.alpha > 0.0, "alpha", "must be positive");
  require_field(cfg.alpha_sigma >= 0.0, "alpha_sigma", "must be non-negative");
  require_field(cfg.eta_echo > 0.0 && cfg.eta_echo <= 1.0, "eta_echo", "must lie in (0, 1]");
  require_field(cfg.ratio >= 0.0, "ratio", "must be non-negative");
  require_field(cfg.ratio_sigma >= 0.0, "ratio_sigma", "must be non-negative");
  require_field(cfg.eta_echo * (1.0 + cfg.ratio) <= 1.0 + 1e-12, "ratio",
                "eta_echo * (1 + ratio) must not exceed 1");
  try {
    heraldsim::validate(cfg.bs);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("beamsplitter: ") + e.what());
  }
  require_field(cfg.eta1 > 0.0 && cfg.eta1 <= 1.0, "eta1", "must lie in (0, 1]");
  require_field(cfg.eta2 > 0.0 && cfg.eta2 <= 1.0, "eta2", "must lie in (0, 1]");
  require_field(cfg.eta_dark >= 0.0 && cfg.eta_dark < 2.0, "eta_dark", "must lie in [0, 2)");
  require_field(cfg.idler_dark >= 0.0 && cfg.idler_dark < 1.0, "idler_dark", "must lie in [0, 1)");
  require_unit(cfg.herald_efficiency, "herald_efficiency");
  require_field(cfg.stages.fiber > 0.0 && cfg.stages.fiber <= 1.0, "stages.fiber", "must lie in (0, 1]");
  require_field(cfg.stages.interferometer > 0.0 && cfg.stages.interferometer <= 1.0,
                "stages.interferometer", "must lie in (0, 1]");
  require_field(cfg.stages.detector > 0.0 && cfg.stages.detector <= 1.0, "stages.detector",
                "must lie in (0, 1]");
  const double passive = cfg.bs.throughput();
  require_field(cfg.stages.interferometer <= passive + 1e-12, "stages.interferometer",
                "exceeds the beamsplitter throughput " + std::to_string(passive));
  require_unit(cfg.visibility, "visibility");
  require_field(cfg.visibility_sigma >= 0.0, "visibility_sigma", "must be non-negative");
  require_field(cfg.window_s > 0.0, "window_s", "must be positive");
  require_field(cfg.storage_time_s >= 0.0, "storage_time_s", "must be non-negative");
  require_field(!cfg.pump_powers.empty(), "pump_powers", "must not be empty");
  for (std::size_t i = 0; i < cfg.pump_powers.size(); ++i) {
    const double p = cfg.pump_powers[i];
    const std::string field = "pump_powers[" + std::to_string(i) + "]";
    require_field(p >= 0.0, field, "must be non-negative");
    require_field(cfg.alpha * p < 1.0, field, "alpha * power must stay below 1 (pair parameter)");
  }
  if (cfg.threefold_correction)
    require_field(*cfg.threefold_correction > 0.0, "threefold_correction", "must be positive");
  require_field(cfg.campaign_power >= 0.0 && cfg.alpha * cfg.campaign_power < 1.0, "campaign_power",
                "alpha * power must lie in [0, 1)");
  require_field(cfg.campaign_heralds >= 1.0, "campaign_heralds", "must be at least 1");
  if (cfg.campaign_p_sum)
    require_field(*cfg.campaign_p_sum > 0.0 && *cfg.campaign_p_sum < 1.0, "campaign_p_sum",
                  "must lie in (0, 1)");
  require_field(cfg.trials >= 1, "trials", "must be at least 1");
  require_field(cfg.n_max >= 1, "n_max", "must be at least 1");
  require_field(cfg.sweep_heralds > 0.0, "sweep_heralds", "must be positive");
  require_field(cfg.fringe_heralds > 0.0, "fringe_heralds", "must be positive");
}

double extra_interferometer_transmission(const ExperimentConfig& cfg) {
  const double passive = cfg.bs.throughput();
  return std::min(1.0, cfg.stages.interferometer / passive);
}

TrialConfig trial_config(const ExperimentConfig& cfg, double power_mw, ArmBlock block,
                         std::optional<double> phase) {
  validate(cfg);
  TrialConfig t;
  t.source = {cfg.alpha, power_mw};
  t.herald_efficiency = cfg.herald_efficiency;
  t.idler_dark = cfg.idler_dark;
  t.signal_transmission = cfg.stages.fiber * extra_interferometer_transmission(cfg);
  const MemoryParams memory{cfg.eta_echo, cfg.eta_echo * cfg.ratio};
  t.memories = {memory, memory};
  t.bs = cfg.bs;
  t.detectors = {DetectorParams{cfg.eta1, 0.5 * cfg.eta_dark}, DetectorParams{cfg.eta2, 0.5 * cfg.eta_dark}};
  t.block = block;
  t.fixed_phase = phase;
  t.visibility = cfg.visibility;
  t.trials = cfg.trials;
  t.seed = cfg.seed;
  t.window_s = cfg.window_s;
  t.n_max = cfg.n_max;
  validate(t);
  return t;
}

std::vector<SweepRow> pump_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<SweepRow> rows;
  rows.reserve(cfg.pump_powers.size());
  const Measured visibility{cfg.visibility, cfg.visibility_sigma};

  for (std::size_t i = 0; i < cfg.pump_powers.size(); ++i) {
    const double power = cfg.pump_powers[i];
    SweepRow row;
    row.power_mw = power;
    row.lambda = lambda_from_pump(cfg.alpha, power);

    TrialConfig arm_a_only = trial_config(cfg, power, ArmBlock::b);
    TrialConfig arm_b_only = trial_config(cfg, power, ArmBlock::a);
    arm_a_only.seed = derive_seed(cfg.seed, 2 * i);
    arm_b_only.seed = derive_seed(cfg.seed, 2 * i + 1);
    const ExpectedCountRecord rec_a = counts_for(cfg, arm_a_only);
    const ExpectedCountRecord rec_b = counts_for(cfg, arm_b_only);

    const measured::PumpRow* ref = cfg.use_reference_pc ? measured::find_row(power) : nullptr;

    if (!(rec_a.heralds > 0.0 && rec_b.heralds > 0.0)) {
      // No heralds: nothing to condition on.
      row.gsi_est = {kNaN, kNaN};
      row.p11_xcorr = {0.0, 0.0};
      const double p_c = ref ? 0.5 * (ref->p10 + ref->p01) : 0.0;
      row.gsi_model = model_gsi(row.lambda, cfg.ratio, cfg.eta_dark, p_c);
      row.gsi_model_low = row.gsi_model_high = row.gsi_model;
      row.c_bound = concurrence_bound(visibility, make_probability_table({}, {}, {}));
      rows.push_back(row);
      continue;
    }

    row.p10 = blocked_probability(rec_a);
    row.p01 = blocked_probability(rec_b);
    const Measured g_a = record_gsi(rec_a);
    const Measured g_b = record_gsi(rec_b);
    row.gsi_est = {0.5 * (g_a.value + g_b.value), 0.5 * std::hypot(g_a.sigma, g_b.sigma)};

    const double p_c = ref ? 0.5 * (ref->p10 + ref->p01) : 0.5 * (row.p10.value + row.p01.value);
    row.gsi_model = model_gsi(row.lambda, cfg.ratio, cfg.eta_dark, p_c);
    row.gsi_model_low = row.gsi_model_high = row.gsi_model;
    for (double da : {-1.0, 1.0})
      for (double dr : {-1.0, 1.0}) {
        const double lambda = std::clamp((cfg.alpha + da * cfg.alpha_sigma) * power, 0.0, 1.0 - 1e-12);
        const double g = model_gsi(lambda, std::max(0.0, cfg.ratio + dr * cfg.ratio_sigma), cfg.eta_dark, p_c);
        row.gsi_model_low = std::min(row.gsi_model_low, g);
        row.gsi_model_high = std::max(row.gsi_model_high, g);
      }

    if (row.gsi_est.value > 1.0) {
      row.p11_xcorr = p11_xcorr(row.p10, row.p01, row.gsi_est);
    } else {
      row.p11_xcorr = {kNaN, kNaN};
    }
    if (p_c > 0.0)
      row.p11_theory = p11_theory(row.p10.value, row.p01.value, cfg.alpha, power, cfg.ratio,
                                  std::min(cfg.eta_dark, 1.0), p_c);
    else
      row.p11_theory = kNaN;

    if (std::isfinite(row.p11_xcorr.value))
      row.c_bound = concurrence_bound(visibility, make_probability_table(row.p10, row.p01, row.p11_xcorr));
    else
      row.c_bound = {kNaN, kNaN, ConcurrenceMethod::xcorr};
    rows.push_back(row);
  }
  return rows;
}

ThreefoldCampaign threefold_campaign(const ExperimentConfig& cfg, std::optional<std::uint64_t> n_observed) {
  validate(cfg);
  ExperimentConfig work = cfg;
  const double power = cfg.campaign_power;
  const auto p_sum = [&](const ExperimentConfig& c) {
    const ExpectedCountRecord r = open_per_trial(c, power);
    if (!(r.heralds > 0.0)) throw std::domain_error("campaign has no heralds");
    return (r.n1_given_h + r.n2_given_h) / r.heralds;
  };

  if (cfg.campaign_p_sum) {
    double lo = 0.0;
    double hi = cfg.bs.throughput();
    work.stages.interferometer = hi;
    if (p_sum(work) < *cfg.campaign_p_sum)
      throw std::domain_error("campaign_p_sum is out of reach even without interferometer loss");
    for (int iter = 0; iter < 80; ++iter) {
      work.stages.interferometer = 0.5 * (lo + hi);
      (p_sum(work) < *cfg.campaign_p_sum ? lo : hi) = work.stages.interferometer;
    }
    work.stages.interferometer = 0.5 * (lo + hi);
  }

  ThreefoldCampaign out;
  out.power_mw = power;
  out.interferometer = work.stages.interferometer;
  double heralds = cfg.campaign_heralds;
  double n1 = 0, n2 = 0;

  if (cfg.mode == RunMode::analytic) {
    const ExpectedCountRecord r = open_per_trial(work, power);
    if (!(r.heralds > 0.0)) throw std::domain_error("campaign has no heralds");
    out.expected_threefolds = heralds * r.n12_given_h / r.heralds;
    n1 = heralds * r.n1_given_h / r.heralds;
    n2 = heralds * r.n2_given_h / r.heralds;
    out.n = n_observed ? *n_observed : poisson_draw(out.expected_threefolds, derive_seed(cfg.seed, 0x3F), 0);
  } else {
    // Enough trials for the requested number of heralds on average.
    const ExpectedCountRecord r = open_per_trial(work, power);
    if (!(r.heralds > 0.0)) throw std::domain_error("campaign has no heralds");
    TrialConfig trial = trial_config(work, power, ArmBlock::none);
    trial.trials = static_cast<std::uint64_t>(std::ceil(heralds / r.heralds));
    trial.seed = derive_seed(cfg.seed, 0x3F);
    const CountRecord rec = run_trials(trial);
    if (rec.heralds == 0) throw std::domain_error("campaign has no heralds");
    heralds = static_cast<double>(rec.heralds);
    out.expected_threefolds = heralds * r.n12_given_h / r.heralds;
    n1 = static_cast<double>(rec.n1_given_h);
    n2 = static_cast<double>(rec.n2_given_h);
    out.n = n_observed ? *n_observed : rec.n12_given_h;
  }
  out.heralds = heralds;

  const EffectiveEfficiencies eff =
      effective_efficiencies(cfg.bs, DetectorParams{cfg.eta1, 0.0}, DetectorParams{cfg.eta2, 0.0});
  out.correction_rounded = eff.correction;
  out.correction_model = eff.correction_model;
  out.correction = cfg.threefold_correction.value_or(eff.correction_model);

  out.mle = threefold_estimate(out.n, heralds, ThreefoldMethod::mle, out.correction);
  out.ce = threefold_estimate(out.n, heralds, ThreefoldMethod::ce, out.correction);
  const Measured p10 = per_herald(n1, heralds);
  const Measured p01 = per_herald(n2, heralds);
  out.singles = make_probability_table(p10, p01, {});
  const Measured visibility{cfg.visibility, cfg.visibility_sigma};
  out.c_mle = concurrence_bound(visibility, make_probability_table(p10, p01, out.mle.p11),
                                ConcurrenceMethod::threefold_mle);
  out.c_ce = concurrence_bound(visibility, make_probability_table(p10, p01, out.ce.p11),
                               ConcurrenceMethod::threefold_ce);
  return out;
}

TransmissionBudget transmission_budget(const std::map<std::string, double>& stages, double visibility,
                                       double gsi) {
  for (const char* key : {"interferometer", "detector"})
    if (!stages.count(key)) throw std::invalid_argument(std::string("missing stage ") + key);
  TransmissionBudget out;
  out.eta_total = 1.0;
  for (const auto& [name, t] : stages) {
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("stage " + name + " must lie in (0, 1]");
    out.eta_total *= t;
  }
  out.c_detected = simple_concurrence(out.eta_total, visibility, gsi);
  out.c_after_crystals = out.c_detected / (stages.at("interferometer") * stages.at("detector"));
  return out;
}

std::map<std::string, double> stage_map(const StageTransmissions& stages, double memory) {
  return {{"fiber", stages.fiber},
          {"memory", memory},
          {"interferometer", stages.interferometer},
          {"detector", stages.detector}};
}

FringeScan fringe_scan(const ExperimentConfig& cfg, const std::vector<double>& phases, double power_mw,
                       bool poisson_noise) {
  validate(cfg);
  FringeScan scan;
  scan.power_mw = power_mw;
  const std::uint64_t noise_seed = derive_seed(cfg.seed, 0xF1);

  if (cfg.mode == RunMode::analytic) {
    const ExpectedCountRecord r = open_per_trial(cfg, power_mw);
    if (!(r.heralds > 0.0)) throw std::domain_error("fringe scan has no heralds");
    const double p1 = r.n1_given_h / r.heralds;
    const double p2 = r.n2_given_h / r.heralds;
    const double p_det = p1 + p2;
    if (!(p_det > 0.0)) throw std::domain_error("fringe scan has no detections");
    for (std::size_t i = 0; i < phases.size(); ++i) {
      const FringeProbabilities f =
          fringe_probabilities(phases[i], cfg.visibility, p_det, 2.0 * p1 / p_det, 2.0 * p2 / p_det);
      FringePoint pt{phases[i], cfg.fringe_heralds * f.detector1, cfg.fringe_heralds * f.detector2};
      if (poisson_noise) {
        pt.detector1 = static_cast<double>(poisson_draw(pt.detector1, noise_seed, 2 * i));
        pt.detector2 = static_cast<double>(poisson_draw(pt.detector2, noise_seed, 2 * i + 1));
      }
      scan.points.push_back(pt);
    }
  } else {
    for (std::size_t i = 0; i < phases.size(); ++i) {
      TrialConfig trial = trial_config(cfg, power_mw, ArmBlock::none, phases[i]);
      trial.seed = derive_seed(noise_seed, i);
      const CountRecord rec = run_trials(trial);
      scan.points.push_back({phases[i], static_cast<double>(rec.n1_given_h),
                             static_cast<double>(rec.n2_given_h)});
    }
  }
  scan.fits = fit_visibility(scan.points);
  return scan;
}

}  // namespace heraldsim
