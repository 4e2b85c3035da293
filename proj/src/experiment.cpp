#include "dlcz/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dlcz/angular_momentum.hpp"
#include "dlcz/errors.hpp"

namespace dlcz {

namespace {

using Field = double ExperimentConfig::*;

const std::array<std::pair<const char*, Field>, 18>& fields() {
  static const std::array<std::pair<const char*, Field>, 18> table{{
      {"eta", &ExperimentConfig::eta},
      {"excitation_prob", &ExperimentConfig::excitation_prob},
      {"retrieval_eff", &ExperimentConfig::retrieval_eff},
      {"det_eff_s", &ExperimentConfig::det_eff_s},
      {"det_eff_i", &ExperimentConfig::det_eff_i},
      {"bg_prob_s", &ExperimentConfig::bg_prob_s},
      {"bg_prob_i", &ExperimentConfig::bg_prob_i},
      {"visibility", &ExperimentConfig::visibility},
      {"delta_t_ns", &ExperimentConfig::delta_t_ns},
      {"memory_tau_ns", &ExperimentConfig::memory_tau_ns},
      {"retrieval_tau_ns", &ExperimentConfig::retrieval_tau_ns},
      {"cycle_ns", &ExperimentConfig::cycle_ns},
      {"dark_ns", &ExperimentConfig::dark_ns},
      {"write_len_ns", &ExperimentConfig::write_len_ns},
      {"read_len_ns", &ExperimentConfig::read_len_ns},
      {"gate_d1_ns", &ExperimentConfig::gate_d1_ns},
      {"gate_d2_ns", &ExperimentConfig::gate_d2_ns},
      {"tia_resolution_ns", &ExperimentConfig::tia_resolution_ns},
  }};
  return table;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view strip_comment(std::string_view s) {
  const auto hash = s.find('#');
  return hash == std::string_view::npos ? s : s.substr(0, hash);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  return in;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.eta = mixing_angle(kRubidium85Scheme);
  c.excitation_prob = 0.02;
  c.retrieval_eff = 0.5;
  c.det_eff_s = 0.041;
  c.det_eff_i = 0.086;
  c.bg_prob_s = 5e-6;
  c.bg_prob_i = 5e-6;
  c.visibility = 0.88;
  return c;
}

void ExperimentConfig::validate() const {
  require(eta >= 0.0 && eta <= kHalfPi, "eta must lie in [0, pi/2]");
  for (const auto& [name, value] :
       {std::pair{"excitation_prob", excitation_prob}, {"retrieval_eff", retrieval_eff},
        {"det_eff_s", det_eff_s}, {"det_eff_i", det_eff_i}, {"bg_prob_s", bg_prob_s},
        {"bg_prob_i", bg_prob_i}, {"visibility", visibility}}) {
    require(is_probability(value), std::string(name) + " must lie in [0, 1]");
  }
  require(delta_t_ns >= 0.0 && std::isfinite(delta_t_ns), "delta_t_ns must be >= 0");
  for (const auto& [name, value] :
       {std::pair{"memory_tau_ns", memory_tau_ns}, {"retrieval_tau_ns", retrieval_tau_ns},
        {"cycle_ns", cycle_ns}, {"dark_ns", dark_ns}, {"write_len_ns", write_len_ns},
        {"read_len_ns", read_len_ns}, {"gate_d1_ns", gate_d1_ns}, {"gate_d2_ns", gate_d2_ns},
        {"tia_resolution_ns", tia_resolution_ns}}) {
    require(value > 0.0 && std::isfinite(value), std::string(name) + " must be > 0");
  }
  require(tia_resolution_ns == std::floor(tia_resolution_ns),
          "tia_resolution_ns must be a whole number of ns");
  require(dark_ns <= cycle_ns, "dark_ns must not exceed cycle_ns");
  const GateConfig g = GateConfig::from(*this);
  require(g.d2_center_ns + 0.5 * g.d2_width_ns < cycle_ns,
          "D2 gate ends after the cycle; lengthen cycle_ns or shorten delta_t_ns");
}

std::vector<std::string> ExperimentConfig::warnings() const {
  std::vector<std::string> out;
  const GateConfig g = GateConfig::from(*this);
  if (g.d2_center_ns + 0.5 * g.d2_width_ns > dark_ns) {
    out.push_back("D2 gate extends past the dark period (" + format_double(dark_ns) +
                  " ns); trapping light would be on during the read");
  }
  if (gate_d1_ns < write_len_ns) out.push_back("D1 gate is shorter than the write pulse");
  if (gate_d2_ns < read_len_ns) out.push_back("D2 gate is shorter than the read pulse");
  return out;
}

double ExperimentConfig::write_start_ns() const {
  return std::max(0.0, 0.5 * (gate_d1_ns - write_len_ns));
}

double ExperimentConfig::write_center_ns() const { return write_start_ns() + 0.5 * write_len_ns; }

double ExperimentConfig::read_center_ns() const {
  return write_start_ns() + delta_t_ns + 0.5 * read_len_ns;
}

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& f : fields()) v.emplace_back(f.first);
    return v;
  }();
  return names;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::to_key_values() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, member] : fields()) out.emplace_back(name, format_double(this->*member));
  return out;
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  for (const auto& [name, member] : fields()) {
    if (key == name) {
      this->*member = parse_double(value);
      return;
    }
  }
  throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

GateConfig GateConfig::from(const ExperimentConfig& c) {
  return {c.write_center_ns(), c.gate_d1_ns, c.read_center_ns(), c.gate_d2_ns};
}

void GateConfig::validate() const {
  require(d1_width_ns > 0.0 && d2_width_ns > 0.0, "gate widths must be > 0");
  require(std::isfinite(d1_center_ns) && std::isfinite(d2_center_ns), "gate centres must be finite");
}

std::vector<SettingEntry> chsh_settings(const ChshAngles& angles) {
  std::vector<SettingEntry> out;
  int id = 0;
  for (const auto& s : angles.settings()) {
    for (const auto& m : {s, s.both_perp(), s.signal_perp(), s.idler_perp()}) {
      out.push_back({id++, rad_to_deg(m.theta_s), rad_to_deg(m.theta_i)});
    }
  }
  return out;
}

ExperimentConfig read_config(std::istream& in) {
  ExperimentConfig config = ExperimentConfig::defaults();
  std::set<std::string, std::less<>> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (!seen.emplace(key).second) {
      throw ParseError(line_no, "duplicate key '" + std::string(key) + "'");
    }
    try {
      config.set(key, value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, std::string("invalid config: ") + e.what());
  }
  return config;
}

ExperimentConfig read_config_file(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_config(in);
}

std::vector<SettingEntry> read_settings(std::istream& in) {
  std::vector<SettingEntry> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    std::istringstream fields_in{std::string(line)};
    std::string word, id, ts, ti, extra;
    if (!(fields_in >> word >> id >> ts >> ti) || word != "setting" || (fields_in >> extra)) {
      throw ParseError(line_no, "expected 'setting <id> <theta_s_deg> <theta_i_deg>'");
    }
    try {
      const double id_value = parse_double(id);
      if (id_value != std::floor(id_value) || id_value < 0 || id_value > 1e6) {
        throw std::invalid_argument("setting id must be a non-negative integer");
      }
      out.push_back({static_cast<int>(id_value), parse_double(ts), parse_double(ti)});
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  try {
    validate_settings(out);
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, e.what());
  }
  return out;
}

std::vector<SettingEntry> read_settings_file(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_settings(in);
}

void validate_settings(const std::vector<SettingEntry>& settings) {
  require(!settings.empty(), "settings table is empty");
  std::set<int> ids;
  for (const auto& s : settings) {
    require(s.id >= 0, "setting ids must be non-negative");
    require(ids.insert(s.id).second, "duplicate setting id " + std::to_string(s.id));
    require(std::isfinite(s.theta_s_deg) && std::isfinite(s.theta_i_deg),
            "setting angles must be finite");
  }
}

}  // namespace dlcz
