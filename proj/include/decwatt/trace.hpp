#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "decwatt/session.hpp"

namespace decwatt::trace {

/// Battery/decoder trace captured from a real device, replayed behind the
/// session interfaces. The file is line-delimited JSON: one profile line,
/// decoder lines carrying per-asset frame durations, and time-ordered battery
/// lines (t seconds, level percent, charging flag).
struct BatteryEvent {
  double t_s = 0;
  double level_pct = 0;
  bool charging = false;
};

struct TraceData {
  DeviceProfile profile;
  std::vector<DecoderDescriptor> decoders;
  // (decoder name, asset name) -> seconds to decode one frame
  std::map<std::pair<std::string, std::string>, double> frame_seconds;
  std::vector<BatteryEvent> battery; // sorted by t_s
};

TraceData load_trace(const std::filesystem::path& path);

class TraceDevice : public session::DeviceProbe, public session::DecoderHarness {
public:
  explicit TraceDevice(TraceData data);

  double battery_level() override;
  bool charging() override;
  DeviceProfile profile() override;
  double now() override { return time_s_; }
  void sleep_for(double seconds) override { time_s_ += seconds; }
  bool alive() override { return battery_level() > 0; }

  std::vector<DecoderDescriptor> decoders() override { return data_.decoders; }
  bool open(const DecoderDescriptor& decoder, const VideoAsset& asset) override;
  int64_t decode_next_frame() override;
  void reset() override { frame_pos_ = 0; }
  void close() override { open_ = false; }

private:
  const BatteryEvent* event_at(double t) const;

  TraceData data_;
  double time_s_ = 0;
  bool open_ = false;
  double frame_s_ = 0;
  int64_t n_seq_ = 0;
  int64_t frame_pos_ = 0;
};

} // namespace decwatt::trace
