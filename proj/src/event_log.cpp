#include "dlcz/event_log.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "dlcz/errors.hpp"

namespace dlcz {

namespace {

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto sp = line.find(' ', start);
    parts.push_back(line.substr(start, sp - start));
    if (sp == std::string_view::npos) break;
    start = sp + 1;
  }
  return parts;
}

}  // namespace

const SettingEntry& EventLogHeader::setting_for_trial(std::uint64_t trial) const {
  return settings.at(trial / trials_per_setting);
}

bool EventLogHeader::operator==(const EventLogHeader& o) const {
  return config.to_key_values() == o.config.to_key_values() && settings == o.settings &&
         seed == o.seed && trials_per_setting == o.trials_per_setting;
}

EventLogWriter::EventLogWriter(std::ostream& out, const EventLogHeader& header) : out_(out) {
  out_ << "# version=" << EventLogHeader::kVersion << '\n';
  out_ << "# seed=" << header.seed << '\n';
  out_ << "# trials_per_setting=" << header.trials_per_setting << '\n';
  for (const auto& [key, value] : header.config.to_key_values()) {
    out_ << "# " << key << '=' << value << '\n';
  }
  for (const auto& s : header.settings) {
    out_ << "# setting " << s.id << ' ' << format_double(s.theta_s_deg) << ' '
         << format_double(s.theta_i_deg) << '\n';
  }
}

void EventLogWriter::write(const DetectionEvent& e) {
  out_ << e.trial << (e.channel == Channel::D1 ? " D1 " : " D2 ") << e.t_ns << ' ' << e.setting_id
       << '\n';
}

void write_event_log(std::ostream& out, const EventLog& log) {
  EventLogWriter writer(out, log.header);
  for (const auto& e : log.events) writer.write(e);
}

void write_event_log_file(const std::filesystem::path& path, const EventLog& log) {
  std::ofstream out(path);
  if (!out) throw ParseError(0, "cannot write " + path.string());
  write_event_log(out, log);
  if (!out) throw ParseError(0, "error while writing " + path.string());
}

EventLog parse_event_log(std::istream& in) {
  EventLog log;
  EventLogHeader& h = log.header;
  std::set<std::string, std::less<>> config_keys;
  bool have_version = false, have_seed = false, have_trials = false;
  bool in_body = false;
  std::map<int, std::size_t> setting_index;
  std::int64_t resolution = 0;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (line.front() == '#') {
      if (in_body) throw ParseError(line_no, "header line after the first event");
      std::string_view body = line.substr(1);
      if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      if (!have_version) {
        if (body != "version=1") {
          throw ParseError(line_no, "expected 'version=1' as the first header line, got '" +
                                        std::string(body) + "'");
        }
        have_version = true;
        continue;
      }
      if (body.starts_with("setting ")) {
        const auto parts = split_spaces(body);
        SettingEntry s;
        if (parts.size() != 4 || !parse_number(parts[1], s.id) || s.id < 0 ||
            !parse_number(parts[2], s.theta_s_deg) || !parse_number(parts[3], s.theta_i_deg)) {
          throw ParseError(line_no, "malformed setting line");
        }
        if (!setting_index.emplace(s.id, h.settings.size()).second) {
          throw ParseError(line_no, "duplicate setting id " + std::to_string(s.id));
        }
        h.settings.push_back(s);
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ParseError(line_no, "malformed header line");
      const std::string_view key = body.substr(0, eq);
      const std::string_view value = body.substr(eq + 1);
      if (key == "version") throw ParseError(line_no, "repeated version line");
      if (key == "seed") {
        if (have_seed || !parse_number(value, h.seed)) throw ParseError(line_no, "bad seed");
        have_seed = true;
      } else if (key == "trials_per_setting") {
        if (have_trials || !parse_number(value, h.trials_per_setting)) {
          throw ParseError(line_no, "bad trials_per_setting");
        }
        have_trials = true;
      } else {
        if (!config_keys.emplace(key).second) {
          throw ParseError(line_no, "duplicate key '" + std::string(key) + "'");
        }
        try {
          h.config.set(key, value);
        } catch (const std::invalid_argument& e) {
          throw ParseError(line_no, e.what());
        }
      }
      continue;
    }

    if (!in_body) {
      if (!have_version) throw ParseError(line_no, "missing version header");
      if (!have_seed) throw ParseError(line_no, "missing seed header");
      if (!have_trials) throw ParseError(line_no, "missing trials_per_setting header");
      if (h.settings.empty()) throw ParseError(line_no, "missing setting table");
      in_body = true;
    }
    const auto parts = split_spaces(line);
    DetectionEvent e;
    if (parts.size() != 4 || !parse_number(parts[0], e.trial) || !parse_number(parts[2], e.t_ns) ||
        !parse_number(parts[3], e.setting_id)) {
      throw ParseError(line_no, "expected '<trial> <D1|D2> <t_ns> <setting_id>'");
    }
    if (parts[1] == "D1") {
      e.channel = Channel::D1;
    } else if (parts[1] == "D2") {
      e.channel = Channel::D2;
    } else {
      throw ParseError(line_no, "unknown channel '" + std::string(parts[1]) + "'");
    }
    if (resolution == 0) resolution = static_cast<std::int64_t>(h.config.tia_resolution_ns);
    if (e.trial >= h.total_trials()) throw ParseError(line_no, "trial index beyond the run");
    if (h.setting_for_trial(e.trial).id != e.setting_id) {
      throw ParseError(line_no, "setting id does not match the trial layout");
    }
    if (e.t_ns < 0 || static_cast<double>(e.t_ns) >= h.config.cycle_ns) {
      throw ParseError(line_no, "timestamp outside the cycle");
    }
    if (resolution <= 0 || e.t_ns % resolution != 0) {
      throw ParseError(line_no, "timestamp is not a multiple of the TIA resolution");
    }
    if (!log.events.empty()) {
      const auto& prev = log.events.back();
      if (e.trial < prev.trial || (e.trial == prev.trial && e.t_ns < prev.t_ns)) {
        throw ParseError(line_no, "events are not sorted by (trial, t_ns)");
      }
    }
    log.events.push_back(e);
  }
  if (in.bad()) throw ParseError(line_no, "read error");
  if (!have_version) throw ParseError(0, "empty file or missing version header");
  if (!have_seed || !have_trials || h.settings.empty()) {
    throw ParseError(0, "incomplete header (seed, trials_per_setting and settings are required)");
  }
  for (const auto& key : ExperimentConfig::keys()) {
    if (!config_keys.contains(key)) throw ParseError(0, "header is missing config key '" + key + "'");
  }
  try {
    h.config.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, std::string("invalid config in header: ") + e.what());
  }
  return log;
}

EventLog parse_event_log_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  return parse_event_log(in);
}

}  // namespace dlcz
