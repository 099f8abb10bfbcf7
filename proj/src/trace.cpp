#include "decwatt/trace.hpp"

#include <algorithm>
#include <stdexcept>

#include "decwatt/json_io.hpp"

namespace decwatt::trace {

TraceData load_trace(const std::filesystem::path& path) {
  TraceData data;
  bool have_profile = false;
  for (const json& l : jsonl::read_file(path)) {
    const std::string type = l.at("type").get<std::string>();
    if (type == "profile") {
      l.at("profile").get_to(data.profile);
      have_profile = true;
    } else if (type == "decoder") {
      DecoderDescriptor d = l.at("decoder").get<DecoderDescriptor>();
      for (const auto& [asset_name, secs] : l.at("frame_seconds").items())
        data.frame_seconds[{d.name, asset_name}] = secs.get<double>();
      data.decoders.push_back(std::move(d));
    } else if (type == "battery") {
      data.battery.push_back({l.at("t").get<double>(), l.at("level").get<double>(),
                              l.value("charging", false)});
    } else {
      throw std::runtime_error("unknown trace record type: " + type);
    }
  }
  if (!have_profile) throw std::runtime_error("trace has no profile: " + path.string());
  if (data.battery.empty())
    throw std::runtime_error("trace has no battery events: " + path.string());
  std::sort(data.battery.begin(), data.battery.end(),
            [](const BatteryEvent& a, const BatteryEvent& b) { return a.t_s < b.t_s; });
  return data;
}

TraceDevice::TraceDevice(TraceData data) : data_(std::move(data)) {}

const BatteryEvent* TraceDevice::event_at(double t) const {
  const BatteryEvent* last = &data_.battery.front();
  for (const auto& e : data_.battery) {
    if (e.t_s > t) break;
    last = &e;
  }
  return last;
}

double TraceDevice::battery_level() { return event_at(time_s_)->level_pct; }

bool TraceDevice::charging() { return event_at(time_s_)->charging; }

DeviceProfile TraceDevice::profile() {
  DeviceProfile p = data_.profile;
  p.battery_level_pct = battery_level();
  p.charging = charging();
  return p;
}

bool TraceDevice::open(const DecoderDescriptor& decoder, const VideoAsset& asset) {
  const auto it = data_.frame_seconds.find({decoder.name, asset.name});
  if (it == data_.frame_seconds.end() || asset.standard != decoder.standard) {
    open_ = false;
    return false;
  }
  frame_s_ = it->second;
  n_seq_ = asset.n_seq;
  frame_pos_ = 0;
  open_ = true;
  return true;
}

int64_t TraceDevice::decode_next_frame() {
  if (!open_) return -1;
  const int64_t index = frame_pos_;
  time_s_ += frame_s_;
  frame_pos_ = (index + 1) % n_seq_;
  return index;
}

} // namespace decwatt::trace
