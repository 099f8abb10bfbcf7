#include "decwatt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "decwatt/json_io.hpp"

namespace decwatt::sim {

void SimConfig::validate() const {
  if (!(profile.battery_capacity_mah > 0))
    throw std::invalid_argument("sim: capacity must be positive");
  if (!(initial_charge_mah > 0) || initial_charge_mah > profile.battery_capacity_mah)
    throw std::invalid_argument("sim: initial charge must be in (0, capacity]");
  if (screen_current_ma < 0)
    throw std::invalid_argument("sim: screen current must be nonnegative");
  if (!(time_step_s > 0))
    throw std::invalid_argument("sim: time step must be positive");
  if (noise_amp_ma < 0)
    throw std::invalid_argument("sim: noise amplitude must be nonnegative");
  for (const auto& d : decoders) {
    if (!(d.true_speed_fps > 0))
      throw std::invalid_argument("sim: decoder true speed must be positive (" +
                                  d.decoder.name + ")");
    if (d.decode_current_ma < 0)
      throw std::invalid_argument("sim: decode current must be nonnegative (" +
                                  d.decoder.name + ")");
  }
}

static void to_json(json& j, const SimDecoderEntry& e) {
  j = json{{"decoder", e.decoder},
           {"decode_current_ma", e.decode_current_ma},
           {"true_speed_fps", e.true_speed_fps}};
}

static void from_json(const json& j, SimDecoderEntry& e) {
  j.at("decoder").get_to(e.decoder);
  j.at("decode_current_ma").get_to(e.decode_current_ma);
  j.at("true_speed_fps").get_to(e.true_speed_fps);
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sim config " + path.string());
  json j = json::parse(in);
  SimConfig cfg;
  j.at("profile").get_to(cfg.profile);
  j.at("initial_charge_mah").get_to(cfg.initial_charge_mah);
  j.at("screen_current_ma").get_to(cfg.screen_current_ma);
  cfg.decoders = j.at("decoders").get<std::vector<SimDecoderEntry>>();
  cfg.noise_amp_ma = j.value("noise_amp_ma", 0.0);
  cfg.noise_seed = j.value("noise_seed", uint64_t{0});
  cfg.time_step_s = j.value("time_step_s", 0.1);
  cfg.charger_attach_s = j.value("charger_attach_s", -1.0);
  cfg.validate();
  return cfg;
}

void save_sim_config(const std::filesystem::path& path, const SimConfig& cfg) {
  json j{{"profile", cfg.profile},
         {"initial_charge_mah", cfg.initial_charge_mah},
         {"screen_current_ma", cfg.screen_current_ma},
         {"decoders", cfg.decoders},
         {"noise_amp_ma", cfg.noise_amp_ma},
         {"noise_seed", cfg.noise_seed},
         {"time_step_s", cfg.time_step_s},
         {"charger_attach_s", cfg.charger_attach_s}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write sim config " + path.string());
  out << j.dump(2) << '\n';
}

PowerMetrics ground_truth(const SimConfig& cfg, const std::string& decoder_name,
                          const VideoAsset& asset) {
  const SimDecoderEntry* entry = nullptr;
  for (const auto& d : cfg.decoders)
    if (d.decoder.name == decoder_name) entry = &d;
  if (!entry) throw std::invalid_argument("sim: unknown decoder " + decoder_name);
  const double cap = cfg.profile.battery_capacity_mah;
  const double is = cfg.screen_current_ma;
  const double id = entry->decode_current_ma;
  const double v = entry->true_speed_fps;

  PowerMetrics m;
  m.speed_fps = v;
  m.delta_decode_ma = id;
  m.delta_screen_pct_h = is / cap * 100.0;
  m.delta_seq_pct =
      100.0 * (is + id) * static_cast<double>(asset.n_seq) / (v * 3600.0 * cap);
  if (v >= asset.fps) {
    m.delta_play_pct_h = (is + id * asset.fps / v) / cap * 100.0;
  } else {
    // decode-limited: the display is only on for the fps/v-scaled decode time
    m.delta_play_pct_h = (is + id) * asset.fps / (v * cap) * 100.0;
  }
  return m;
}

SimDevice::SimDevice(SimConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.noise_seed) {
  cfg_.validate();
  charge_mah_ = cfg_.initial_charge_mah;
}

double SimDevice::battery_level() {
  const double cap = cfg_.profile.battery_capacity_mah;
  double level = std::floor(100.0 * charge_mah_ / cap);
  return std::clamp(level, 0.0, 100.0);
}

bool SimDevice::charging() {
  if (charging_override_) return *charging_override_;
  return cfg_.charger_attach_s >= 0 && time_s_ >= cfg_.charger_attach_s;
}

DeviceProfile SimDevice::profile() {
  DeviceProfile p = cfg_.profile;
  p.battery_level_pct = battery_level();
  p.charging = charging();
  return p;
}

void SimDevice::sleep_for(double seconds) { advance(seconds, 0.0); }

std::vector<DecoderDescriptor> SimDevice::decoders() {
  std::vector<DecoderDescriptor> out;
  out.reserve(cfg_.decoders.size());
  for (const auto& d : cfg_.decoders) out.push_back(d.decoder);
  return out;
}

bool SimDevice::open(const DecoderDescriptor& decoder, const VideoAsset& asset) {
  open_entry_ = nullptr;
  for (const auto& d : cfg_.decoders) {
    if (d.decoder.name == decoder.name && d.decoder.standard == asset.standard) {
      open_entry_ = &d;
      break;
    }
  }
  if (!open_entry_) return false;
  open_asset_ = asset;
  frame_pos_ = 0;
  return true;
}

int64_t SimDevice::decode_next_frame() {
  if (!open_entry_ || !alive_) return -1;
  const int64_t index = frame_pos_;
  advance(1.0 / open_entry_->true_speed_fps, open_entry_->decode_current_ma);
  frame_pos_ = (index + 1) % open_asset_.n_seq;
  return index;
}

double SimDevice::draw_jitter() {
  // explicit mapping of raw engine output to [-amp, amp), bit-stable everywhere
  const uint64_t x = rng_();
  const double u = static_cast<double>(x >> 11) * 0x1.0p-53; // [0, 1)
  return cfg_.noise_amp_ma * (2.0 * u - 1.0);
}

void SimDevice::advance(double dt_s, double extra_current_ma) {
  if (!(dt_s > 0)) throw std::invalid_argument("sim: advance needs dt > 0");
  if (!alive_) return;
  const double nominal = cfg_.screen_current_ma + extra_current_ma;

  auto drain = [&](double current_ma, double seconds) {
    const double delta = current_ma * seconds / 3600.0;
    // Kahan-compensated tally of everything drawn, for conservation checks.
    const double y = delta - drawn_comp_;
    const double t = drawn_mah_ + y;
    drawn_comp_ = (t - drawn_mah_) - y;
    drawn_mah_ = t;
    charge_mah_ -= delta;
    if (charge_mah_ <= 0) {
      charge_mah_ = 0;
      alive_ = false;
    }
  };

  if (cfg_.noise_amp_ma == 0) {
    drain(nominal, dt_s);
    time_s_ += dt_s;
    return;
  }

  // One jitter value per time_step_s grid cell, drawn in cell order; partial
  // cells integrate exactly, so charge at any query time is interpolated
  // rather than rounded to whole steps.
  const double step = cfg_.time_step_s;
  double t = time_s_;
  const double t_end = time_s_ + dt_s;
  while (t < t_end && alive_) {
    const int64_t cell = static_cast<int64_t>(std::floor(t / step));
    if (cell != noise_cell_) {
      cell_jitter_ma_ = draw_jitter();
      noise_cell_ = cell;
    }
    const double cell_end = (static_cast<double>(cell) + 1.0) * step;
    const double seg_end = std::min(cell_end, t_end);
    if (seg_end <= t) { // guard against FP stall at a cell boundary
      t = std::nextafter(t, t_end);
      continue;
    }
    drain(std::max(0.0, nominal + cell_jitter_ma_), seg_end - t);
    t = seg_end;
  }
  time_s_ = t_end;
}

void SimDevice::recharge_to_level(double level_pct) {
  if (level_pct <= 0 || level_pct > 100)
    throw std::invalid_argument("sim: recharge level must be in (0, 100]");
  charge_mah_ = cfg_.profile.battery_capacity_mah * level_pct / 100.0;
  alive_ = true;
}

} // namespace decwatt::sim
