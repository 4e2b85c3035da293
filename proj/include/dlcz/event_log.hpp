#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "dlcz/experiment.hpp"

namespace dlcz {

enum class Channel : std::uint8_t { D1, D2 };

/// One detector click as recorded by the time-interval analyzer. t_ns is
/// measured from the start of the trial's cycle.
struct DetectionEvent {
  std::uint64_t trial = 0;
  Channel channel = Channel::D1;
  std::int64_t t_ns = 0;
  int setting_id = 0;

  bool operator==(const DetectionEvent&) const = default;
};

/// Trials are laid out setting by setting: trial t uses
/// settings[t / trials_per_setting].
struct EventLogHeader {
  static constexpr int kVersion = 1;

  ExperimentConfig config;
  std::vector<SettingEntry> settings;
  std::uint64_t seed = 0;
  std::uint64_t trials_per_setting = 0;

  std::uint64_t total_trials() const { return trials_per_setting * settings.size(); }
  const SettingEntry& setting_for_trial(std::uint64_t trial) const;

  bool operator==(const EventLogHeader& o) const;
};

struct EventLog {
  EventLogHeader header;
  std::vector<DetectionEvent> events;  // sorted by (trial, t_ns)
};

/// Streams the text format: '#' header lines, then one event per line as
/// "<trial> <D1|D2> <t_ns> <setting_id>".
class EventLogWriter {
 public:
  EventLogWriter(std::ostream& out, const EventLogHeader& header);
  void write(const DetectionEvent& event);

 private:
  std::ostream& out_;
};

void write_event_log(std::ostream& out, const EventLog& log);
void write_event_log_file(const std::filesystem::path& path, const EventLog& log);

/// Reads and validates a whole log. Throws ParseError (with the offending
/// line number) on any malformed line, version mismatch, missing or unknown
/// header key, unsorted events, off-grid or out-of-cycle timestamps, or an
/// event whose setting id disagrees with the trial layout.
EventLog parse_event_log(std::istream& in);
EventLog parse_event_log_file(const std::filesystem::path& path);

}  // namespace dlcz
