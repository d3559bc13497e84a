#include "heraldsim/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace heraldsim {

using nlohmann::json;

namespace {

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field + ": expected a number");
  return v.get<double>();
}

std::uint64_t whole(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0.0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
  }
  throw ConfigError(field + ": expected a non-negative integer");
}

std::optional<double> optional_number(const json& v, const std::string& field) {
  if (v.is_null()) return std::nullopt;
  return number(v, field);
}

using Setter = std::function<void(const json&, ExperimentConfig&, const std::string&)>;

template <typename Apply>
void apply_object(const json& j, const std::string& prefix, const std::map<std::string, Apply>& setters,
                  ExperimentConfig& cfg) {
  if (!j.is_object()) throw ConfigError((prefix.empty() ? std::string("config") : prefix) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string field = prefix.empty() ? key : prefix + "." + key;
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(field + ": unknown key");
    it->second(value, cfg, field);
  }
}

#define HS_NUMBER(name, member) \
  {name, [](const json& v, ExperimentConfig& c, const std::string& f) { c.member = number(v, f); }}

const std::map<std::string, Setter>& beamsplitter_setters() {
  static const std::map<std::string, Setter> setters{
      HS_NUMBER("at2", bs.at2), HS_NUMBER("ar2", bs.ar2), HS_NUMBER("bt2", bs.bt2),
      HS_NUMBER("br2", bs.br2)};
  return setters;
}

const std::map<std::string, Setter>& stage_setters() {
  static const std::map<std::string, Setter> setters{
      HS_NUMBER("fiber", stages.fiber), HS_NUMBER("interferometer", stages.interferometer),
      HS_NUMBER("detector", stages.detector)};
  return setters;
}

const std::map<std::string, Setter>& top_setters() {
  static const std::map<std::string, Setter> setters{
      HS_NUMBER("alpha", alpha),
      HS_NUMBER("alpha_sigma", alpha_sigma),
      HS_NUMBER("eta_echo", eta_echo),
      HS_NUMBER("ratio", ratio),
      HS_NUMBER("ratio_sigma", ratio_sigma),
      HS_NUMBER("eta1", eta1),
      HS_NUMBER("eta2", eta2),
      HS_NUMBER("eta_dark", eta_dark),
      HS_NUMBER("idler_dark", idler_dark),
      HS_NUMBER("herald_efficiency", herald_efficiency),
      HS_NUMBER("visibility", visibility),
      HS_NUMBER("visibility_sigma", visibility_sigma),
      HS_NUMBER("window_s", window_s),
      HS_NUMBER("storage_time_s", storage_time_s),
      HS_NUMBER("campaign_power", campaign_power),
      HS_NUMBER("campaign_heralds", campaign_heralds),
      HS_NUMBER("sweep_heralds", sweep_heralds),
      HS_NUMBER("fringe_heralds", fringe_heralds),
      {"beamsplitter",
       [](const json& v, ExperimentConfig& c, const std::string& f) {
         apply_object(v, f, beamsplitter_setters(), c);
       }},
      {"stages",
       [](const json& v, ExperimentConfig& c, const std::string& f) { apply_object(v, f, stage_setters(), c); }},
      {"pump_powers",
       [](const json& v, ExperimentConfig& c, const std::string& f) {
         if (!v.is_array()) throw ConfigError(f + ": expected an array of numbers");
         c.pump_powers.clear();
         for (std::size_t i = 0; i < v.size(); ++i)
           c.pump_powers.push_back(number(v[i], f + "[" + std::to_string(i) + "]"));
       }},
      {"use_reference_pc",
       [](const json& v, ExperimentConfig& c, const std::string& f) {
         if (!v.is_boolean()) throw ConfigError(f + ": expected true or false");
         c.use_reference_pc = v.get<bool>();
       }},
      {"threefold_correction",
       [](const json& v, ExperimentConfig& c, const std::string& f) {
         c.threefold_correction = optional_number(v, f);
       }},
      {"campaign_p_sum",
       [](const json& v, ExperimentConfig& c, const std::string& f) { c.campaign_p_sum = optional_number(v, f); }},
      {"mode",
       [](const json& v, ExperimentConfig& c, const std::string& f) {
         const std::string m = v.is_string() ? v.get<std::string>() : "";
         if (m == "analytic")
           c.mode = RunMode::analytic;
         else if (m == "montecarlo" || m == "mc")
           c.mode = RunMode::montecarlo;
         else
           throw ConfigError(f + ": expected \"analytic\" or \"montecarlo\"");
       }},
      {"seed", [](const json& v, ExperimentConfig& c, const std::string& f) { c.seed = whole(v, f); }},
      {"trials", [](const json& v, ExperimentConfig& c, const std::string& f) { c.trials = whole(v, f); }},
      {"n_max",
       [](const json& v, ExperimentConfig& c, const std::string& f) {
         c.n_max = static_cast<Eigen::Index>(whole(v, f));
       }},
  };
  return setters;
}

#undef HS_NUMBER

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::string& where) {
  double x = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last) throw ConfigError(where + ": not a number: '" + text + "'");
  return x;
}

}  // namespace

json to_json(const ExperimentConfig& cfg) {
  return {{"alpha", cfg.alpha},
          {"alpha_sigma", cfg.alpha_sigma},
          {"eta_echo", cfg.eta_echo},
          {"ratio", cfg.ratio},
          {"ratio_sigma", cfg.ratio_sigma},
          {"beamsplitter", {{"at2", cfg.bs.at2}, {"ar2", cfg.bs.ar2}, {"bt2", cfg.bs.bt2}, {"br2", cfg.bs.br2}}},
          {"eta1", cfg.eta1},
          {"eta2", cfg.eta2},
          {"eta_dark", cfg.eta_dark},
          {"idler_dark", cfg.idler_dark},
          {"herald_efficiency", cfg.herald_efficiency},
          {"stages",
           {{"fiber", cfg.stages.fiber},
            {"interferometer", cfg.stages.interferometer},
            {"detector", cfg.stages.detector}}},
          {"visibility", cfg.visibility},
          {"visibility_sigma", cfg.visibility_sigma},
          {"window_s", cfg.window_s},
          {"storage_time_s", cfg.storage_time_s},
          {"pump_powers", cfg.pump_powers},
          {"use_reference_pc", cfg.use_reference_pc},
          {"threefold_correction", optional_json(cfg.threefold_correction)},
          {"campaign_power", cfg.campaign_power},
          {"campaign_heralds", cfg.campaign_heralds},
          {"campaign_p_sum", optional_json(cfg.campaign_p_sum)},
          {"mode", std::string(to_string(cfg.mode))},
          {"seed", cfg.seed},
          {"trials", cfg.trials},
          {"sweep_heralds", cfg.sweep_heralds},
          {"n_max", static_cast<std::int64_t>(cfg.n_max)},
          {"fringe_heralds", cfg.fringe_heralds}};
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig base) {
  json body = j;
  if (body.is_object()) body.erase("preset");
  apply_object(body, "", top_setters(), base);
  try {
    validate(base);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return base;
}

ExperimentConfig preset_by_name(const std::string& name) {
  if (name == "paper") return paper_preset();
  if (name == "desk") return desk_preset();
  throw ConfigError("preset: expected \"paper\" or \"desk\", got \"" + name + "\"");
}

ExperimentConfig load_config(const std::filesystem::path& path, const ExperimentConfig& base) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  ExperimentConfig start = base;
  if (j.is_object() && j.contains("preset")) {
    if (!j["preset"].is_string()) throw ConfigError("preset: expected a string");
    start = preset_by_name(j["preset"].get<std::string>());
  }
  return config_from_json(j, start);
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "': expected key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &j;
  std::size_t start = 0;
  for (std::size_t dot = key.find('.'); dot != std::string::npos; dot = key.find('.', start)) {
    node = &(*node)[key.substr(start, dot - start)];
    start = dot + 1;
  }
  (*node)[key.substr(start)] = value;
}

namespace {

template <typename Record, typename Read>
Record record_from_json(const json& j, Read read) {
  if (!j.is_object()) throw ConfigError("counts: expected an object");
  for (const auto& [key, value] : j.items()) {
    static const char* known[] = {"heralds", "n1_given_h", "n2_given_h", "n12_given_h", "signal_singles",
                                  "idler_singles", "trials", "duration_s"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw ConfigError("counts." + key + ": unknown key");
  }
  for (const char* required : {"heralds", "n1_given_h", "n2_given_h", "n12_given_h"})
    if (!j.contains(required)) throw ConfigError(std::string("counts.") + required + ": missing");
  Record r;
  r.heralds = read(j["heralds"], "counts.heralds");
  r.n1_given_h = read(j["n1_given_h"], "counts.n1_given_h");
  r.n2_given_h = read(j["n2_given_h"], "counts.n2_given_h");
  r.n12_given_h = read(j["n12_given_h"], "counts.n12_given_h");
  r.signal_singles = j.contains("signal_singles") ? read(j["signal_singles"], "counts.signal_singles")
                                                  : r.n1_given_h + r.n2_given_h;
  r.idler_singles = j.contains("idler_singles") ? read(j["idler_singles"], "counts.idler_singles") : r.heralds;
  r.trials = j.contains("trials") ? number(j["trials"], "counts.trials") : static_cast<double>(r.heralds);
  r.duration_s = j.contains("duration_s") ? number(j["duration_s"], "counts.duration_s") : 0.0;
  if (r.n12_given_h > std::min(r.n1_given_h, r.n2_given_h))
    throw ConfigError("counts.n12_given_h: exceeds a twofold count");
  if (std::max(r.n1_given_h, r.n2_given_h) > r.heralds)
    throw ConfigError("counts: a twofold count exceeds heralds");
  if (static_cast<double>(r.heralds) > r.trials) throw ConfigError("counts.trials: fewer than heralds");
  return r;
}

}  // namespace

CountRecord count_record_from_json(const json& j) {
  return record_from_json<CountRecord>(j, [](const json& v, const std::string& f) { return whole(v, f); });
}

ExpectedCountRecord expected_record_from_json(const json& j) {
  return record_from_json<ExpectedCountRecord>(j, [](const json& v, const std::string& f) {
    const double x = number(v, f);
    if (x < 0.0) throw ConfigError(f + ": must be non-negative");
    return x;
  });
}

std::string config_digest(const ExperimentConfig& cfg) {
  const std::string canonical = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunManifest make_manifest(const ExperimentConfig& cfg, const std::string& command_line) {
  RunManifest m;
  m.config_digest = config_digest(cfg);
  m.seed = cfg.seed;
  m.timestamp = utc_now();
  m.command_line = command_line;
  return m;
}

json to_json(const RunManifest& m) {
  return {{"config_digest", m.config_digest},
          {"seed", m.seed},
          {"version", m.version},
          {"timestamp", m.timestamp},
          {"command_line", m.command_line}};
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 9);
  (void)ec;
  return std::string(buf, ptr);
}

const std::vector<std::string> kSweepColumns{"power_mW", "lambda",  "gsi_model", "gsi_est",  "gsi_sigma",
                                             "p10",      "p10_sigma", "p01",     "p01_sigma", "p11_xcorr",
                                             "p11_theory", "C_bound", "C_sigma"};

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out;
  for (std::size_t i = 0; i < kSweepColumns.size(); ++i) out += (i ? "," : "") + kSweepColumns[i];
  out += '\n';
  for (const SweepRow& r : rows) {
    const double values[] = {r.power_mw,        r.lambda,       r.gsi_model,   r.gsi_est.value,
                             r.gsi_est.sigma,   r.p10.value,    r.p10.sigma,   r.p01.value,
                             r.p01.sigma,       r.p11_xcorr.value, r.p11_theory, r.c_bound.value,
                             r.c_bound.sigma};
    for (std::size_t i = 0; i < std::size(values); ++i) out += (i ? "," : "") + format_number(values[i]);
    out += '\n';
  }
  return out;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split(line, ',') != kSweepColumns)
    throw ConfigError("sweep CSV: unexpected header");
  std::vector<SweepRow> rows;
  for (int line_no = 2; std::getline(in, line); ++line_no) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    const std::string where = "sweep CSV line " + std::to_string(line_no);
    if (fields.size() != kSweepColumns.size()) throw ConfigError(where + ": wrong number of fields");
    double v[13];
    for (std::size_t i = 0; i < fields.size(); ++i) v[i] = parse_number(fields[i], where);
    SweepRow r;
    r.power_mw = v[0];
    r.lambda = v[1];
    r.gsi_model = v[2];
    r.gsi_est = {v[3], v[4]};
    r.p10 = {v[5], v[6]};
    r.p01 = {v[7], v[8]};
    r.p11_xcorr.value = v[9];
    r.p11_theory = v[10];
    r.c_bound.value = v[11];
    r.c_bound.sigma = v[12];
    rows.push_back(r);
  }
  return rows;
}

std::string fringe_csv(const FringeScan& scan) {
  std::string out = "phase_rad,detector1,detector2\n";
  for (const FringePoint& p : scan.points)
    out += format_number(p.phase) + "," + format_number(p.detector1) + "," + format_number(p.detector2) + "\n";
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path.string());
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("error while writing " + path.string());
}

}  // namespace heraldsim
