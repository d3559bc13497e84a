#include "heraldsim/cli.hpp"

#include "heraldsim/io.hpp"
#include "heraldsim/measured_data.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>

namespace heraldsim {

using nlohmann::json;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string preset;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::optional<std::uint64_t> trials;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_out = true) {
  cmd->add_option("--config", o.config_path, "JSON configuration file");
  cmd->add_option("--preset", o.preset, "paper or desk")->check(CLI::IsMember({"paper", "desk"}));
  cmd->add_option("--set", o.overrides, "Override a config key, key=value (repeatable)");
  cmd->add_option("--seed", o.seed, "64-bit seed");
  cmd->add_option("--mode", o.mode, "analytic or mc")->check(CLI::IsMember({"analytic", "mc", "montecarlo"}));
  cmd->add_option("--trials", o.trials, "Trials per Monte Carlo run");
  if (with_out) cmd->add_option("--out", o.out, "Output path");
}

ExperimentConfig resolve_config(const CommonOptions& o) {
  json j = json::object();
  if (!o.config_path.empty()) {
    const std::string text = read_text(o.config_path);
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(o.config_path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(o.config_path + ": expected a JSON object");
  }
  std::string preset = "paper";
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw ConfigError("preset: expected a string");
    preset = j["preset"].get<std::string>();
  }
  if (!o.preset.empty()) preset = o.preset;
  for (const auto& assignment : o.overrides) apply_override(j, assignment);
  if (o.seed) j["seed"] = *o.seed;
  if (o.trials) j["trials"] = *o.trials;
  if (!o.mode.empty()) j["mode"] = o.mode == "analytic" ? "analytic" : "montecarlo";
  return config_from_json(j, preset_by_name(preset));
}

std::string joined(const std::vector<std::string>& args) {
  std::string s = "heraldsim";
  for (const auto& a : args) s += " " + a;
  return s;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_text(path, text);
}

ArmBlock parse_block(const std::string& s) {
  if (s == "none") return ArmBlock::none;
  if (s == "a") return ArmBlock::a;
  if (s == "b") return ArmBlock::b;
  throw ConfigError("--block: expected none, a or b");
}

std::string sci(double x, int digits = 4) {
  if (!std::isfinite(x)) return format_number(x);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*e", digits, x);
  return buf;
}

int cmd_simulate(const CommonOptions& o, double power, const std::string& block,
                 std::optional<double> phase, const std::string& command_line, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(o);
  TrialConfig trial;
  try {
    trial = trial_config(cfg, power, parse_block(block), phase);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  json doc;
  doc["manifest"] = to_json(make_manifest(cfg, command_line));
  doc["mode"] = std::string(to_string(cfg.mode));
  doc["power_mW"] = power;
  doc["block"] = block;
  doc["phase_rad"] = phase ? json(*phase) : json(nullptr);
  doc["counts"] = cfg.mode == RunMode::analytic ? to_json(expected_counts(trial)) : to_json(run_trials(trial));
  emit(o.out, doc.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_sweep(const CommonOptions& o, const std::string& command_line, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(o);
  const std::string csv = sweep_csv(pump_sweep(cfg));
  emit(o.out, csv, out);
  if (!o.out.empty() && o.out != "-")
    write_text(o.out + ".manifest.json", to_json(make_manifest(cfg, command_line)).dump(2) + "\n");
  return kExitOk;
}

struct EstimateOptions {
  std::string counts_path;
  std::string method = "both";
  double visibility = measured::kVisibility;
  double visibility_sigma = measured::kVisibilitySigma;
  double correction = measured::kThreefoldCorrection;
  std::string out;
};

int cmd_estimate(const EstimateOptions& o, std::ostream& out) {
  json j;
  const std::string text = read_text(o.counts_path);
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(o.counts_path + ": " + e.what());
  }
  if (j.is_object() && j.contains("counts")) j = j["counts"];
  const CountRecord rec = count_record_from_json(j);
  if (rec.heralds == 0) throw ConfigError("counts.heralds: must be positive");

  std::vector<ThreefoldMethod> methods;
  if (o.method == "mle" || o.method == "both") methods.push_back(ThreefoldMethod::mle);
  if (o.method == "ce" || o.method == "both") methods.push_back(ThreefoldMethod::ce);

  json result = json::array();
  const double heralds = static_cast<double>(rec.heralds);
  for (const ThreefoldMethod m : methods) {
    const ThreefoldEstimate est = threefold_estimate(rec.n12_given_h, heralds, m, o.correction);
    const ProbabilityTable table = probabilities_from_counts(rec, est.p11);
    const ConcurrenceEstimate c =
        concurrence_bound({o.visibility, o.visibility_sigma}, table,
                          m == ThreefoldMethod::mle ? ConcurrenceMethod::threefold_mle
                                                    : ConcurrenceMethod::threefold_ce);
    out << to_string(m) << ": p11 = " << sci(est.p11.value) << " +- " << sci(est.p11.sigma)
        << "  p10+p01 = " << sci(table.p10.value + table.p01.value) << "  C = " << sci(c.value)
        << " +- " << sci(c.sigma) << "\n";
    result.push_back({{"method", std::string(to_string(m))},
                      {"n", est.n},
                      {"heralds", est.heralds},
                      {"correction", est.correction},
                      {"p11", est.p11.value},
                      {"p11_sigma", est.p11.sigma},
                      {"p00", table.p00.value},
                      {"p10", table.p10.value},
                      {"p01", table.p01.value},
                      {"C", c.value},
                      {"C_sigma", c.sigma}});
  }
  if (!o.out.empty()) write_text(o.out, json{{"estimates", result}}.dump(2) + "\n");
  return kExitOk;
}

int cmd_fringe(const CommonOptions& o, std::optional<double> power, int points, bool noise,
               std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(o);
  if (points < 4) throw ConfigError("--points: need at least 4 phases");
  std::vector<double> phases;
  for (int i = 0; i < points; ++i) phases.push_back(2.0 * std::numbers::pi * i / points);
  const FringeScan scan = fringe_scan(cfg, phases, power.value_or(cfg.campaign_power), noise);
  emit(o.out, fringe_csv(scan), out);
  std::ostream& log = (o.out.empty() || o.out == "-") ? std::cerr : out;
  log << "detector 1: V = " << format_number(scan.fits.detector1.visibility.value) << " +- "
      << format_number(scan.fits.detector1.visibility.sigma) << "\n"
      << "detector 2: V = " << format_number(scan.fits.detector2.visibility.value) << " +- "
      << format_number(scan.fits.detector2.visibility.sigma) << "\n";
  return kExitOk;
}

int cmd_report(const CommonOptions& o, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(o);
  std::string text;
  const auto line = [&](const std::string& s) { text += s + "\n"; };

  line("heraldsim " + std::string(kToolkitVersion) + " report, mode " + std::string(to_string(cfg.mode)) +
       ", config " + config_digest(cfg));
  line("");
  line("pump sweep");
  line("  P/mW   lambda     g_model  [band]            g_est     p11_xcorr   p11_theory  C_bound");
  const auto rows = pump_sweep(cfg);
  for (const auto& r : rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "  %5.1f  %.5f  %8.3f  [%7.3f, %7.3f]  %8.3f  %.3e   %.3e   %.3e +- %.2e",
                  r.power_mw, r.lambda, r.gsi_model, r.gsi_model_low, r.gsi_model_high, r.gsi_est.value,
                  r.p11_xcorr.value, r.p11_theory, r.c_bound.value, r.c_bound.sigma);
    line(buf);
  }

  line("");
  const ThreefoldCampaign tc = threefold_campaign(cfg);
  line("threefold campaign at " + format_number(tc.power_mw) + " mW");
  line("  heralds " + sci(tc.heralds, 4) + ", threefolds " + std::to_string(tc.n) + " (expected " +
       format_number(tc.expected_threefolds) + "), interferometer stage " + format_number(tc.interferometer));
  line("  correction applied " + format_number(tc.correction) + ", rounded-weight " +
       format_number(tc.correction_rounded) + ", full-weight " + format_number(tc.correction_model));
  line("  mle: p11 = " + sci(tc.mle.p11.value) + " +- " + sci(tc.mle.p11.sigma) + ", C = " + sci(tc.c_mle.value) +
       " +- " + sci(tc.c_mle.sigma));
  line("  ce:  p11 = " + sci(tc.ce.p11.value) + " +- " + sci(tc.ce.p11.sigma) + ", C = " + sci(tc.c_ce.value) +
       " +- " + sci(tc.c_ce.sigma));

  line("");
  const BunchingCoefficients a = bunching_coefficients(cfg.bs);
  const TwoPhotonDiagonal q = q_from_q11(1.0, cfg.bs.reflection(), cfg.bs.transmission());
  line("beamsplitter");
  line("  a11 = " + format_number(a.a11) + ", a20 = " + format_number(a.a20) + ", a02 = " + format_number(a.a02));
  line("  (q20 + q02) / q11 = " + format_number(q.q20 + q.q02));
  if (cfg.bs.at2 == measured::kAt2 && cfg.bs.ar2 == measured::kAr2 && cfg.bs.bt2 == measured::kBt2 &&
      cfg.bs.br2 == measured::kBr2)
    line("  reference values: a11 = " + format_number(measured::kQuotedA11) + ", q sum = " +
         format_number(measured::kQuotedQSum));

  line("");
  const double gsi_8 = measured::kGsiAt8mW;
  const TransmissionBudget b =
      transmission_budget(stage_map(cfg.stages, cfg.eta_echo), cfg.visibility, gsi_8);
  line("transmission budget (g_si = " + format_number(gsi_8) + ")");
  line("  eta = " + sci(b.eta_total) + ", C_detected = " + sci(b.c_detected) +
       ", C_after_crystals = " + sci(b.c_after_crystals));
  line("  reading with eta = p10 + p01 = " + sci(measured::kQuotedEta, 2) + ": C_detected = " +
       sci(simple_concurrence(measured::kQuotedEta, cfg.visibility, gsi_8)));

  emit(o.out, text, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heralded single-photon entanglement simulator and estimators", "heraldsim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolkitVersion));

  CommonOptions sim_o, sweep_o, fringe_o, report_o;
  double sim_power = measured::kCampaignPowerMw;
  std::string sim_block = "none";
  std::optional<double> sim_phase;
  auto* simulate = app.add_subcommand("simulate", "Simulate or evaluate one configuration, write counts JSON");
  add_common(simulate, sim_o);
  simulate->add_option("--power", sim_power, "Pump power in mW");
  simulate->add_option("--block", sim_block, "Blocked arm: none, a or b")->check(CLI::IsMember({"none", "a", "b"}));
  simulate->add_option("--phase", sim_phase, "Fixed interferometer phase in rad (default randomized)");

  auto* sweep = app.add_subcommand("sweep", "Pump-power sweep as CSV");
  add_common(sweep, sweep_o);

  EstimateOptions est_o;
  auto* estimate = app.add_subcommand("estimate", "Threefold estimators and concurrence from a counts file");
  estimate->add_option("counts", est_o.counts_path, "Counts JSON")->required();
  estimate->add_option("--method", est_o.method, "mle, ce or both")->check(CLI::IsMember({"mle", "ce", "both"}));
  estimate->add_option("--visibility", est_o.visibility, "Interference visibility");
  estimate->add_option("--visibility-sigma", est_o.visibility_sigma, "Visibility uncertainty");
  estimate->add_option("--correction", est_o.correction, "Threefold correction factor");
  estimate->add_option("--out", est_o.out, "Write estimates as JSON");

  std::optional<double> fringe_power;
  int fringe_points = 16;
  bool fringe_noise = false;
  auto* fringe = app.add_subcommand("fringe", "Fringe scan CSV and fitted visibilities");
  add_common(fringe, fringe_o);
  fringe->add_option("--power", fringe_power, "Pump power in mW");
  fringe->add_option("--points", fringe_points, "Number of phases over one period");
  fringe->add_flag("--noise", fringe_noise, "Poisson noise on analytic counts");

  auto* report = app.add_subcommand("report", "Text summary of all campaigns");
  add_common(report, report_o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  const std::string command_line = joined(args);
  try {
    if (*simulate) return cmd_simulate(sim_o, sim_power, sim_block, sim_phase, command_line, out);
    if (*sweep) return cmd_sweep(sweep_o, command_line, out);
    if (*estimate) return cmd_estimate(est_o, out);
    if (*fringe) return cmd_fringe(fringe_o, fringe_power, fringe_points, fringe_noise, out);
    if (*report) return cmd_report(report_o, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace heraldsim
