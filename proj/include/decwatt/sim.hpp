#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "decwatt/session.hpp"
#include "decwatt/types.hpp"

namespace decwatt::sim {

struct SimDecoderEntry {
  DecoderDescriptor decoder;
  double decode_current_ma = 0; // I_d, added to the screen draw while decoding
  double true_speed_fps = 0;    // frames decoded per second of device time
};

/// Constant-current discharge model: the screen draws screen_current_ma
/// whenever the device is on; an open decoder adds its decode_current_ma for
/// the duration of each decoded frame. Reported level is floor-quantized to
/// integer percent. Optional zero-mean current jitter is drawn once per
/// time_step_s grid cell from the seeded generator, so identical seeds
/// reproduce identical trajectories.
struct SimConfig {
  DeviceProfile profile;      // battery_capacity_mah is the model capacity
  double initial_charge_mah = 0;
  double screen_current_ma = 0;
  std::vector<SimDecoderEntry> decoders;
  double noise_amp_ma = 0;
  uint64_t noise_seed = 0;
  double time_step_s = 0.1;
  double charger_attach_s = -1; // simulated charger event; -1 = never

  void validate() const; // throws std::invalid_argument
};

SimConfig load_sim_config(const std::filesystem::path& path);
void save_sim_config(const std::filesystem::path& path, const SimConfig& cfg);

/// Closed-form metrics the estimator should recover for one decoder/asset:
/// speed = true_speed; delta_decode = decode current; delta_screen =
/// screen/capacity*100; delta_play = (I_s + I_d*fps/speed)/capacity*100 at
/// real-time speed, (I_s + I_d)*fps/(speed*capacity)*100 when decoding is
/// slower than playback.
PowerMetrics ground_truth(const SimConfig& cfg, const std::string& decoder_name,
                          const VideoAsset& asset);

/// Deterministic simulated device; implements both sides of the session
/// interfaces. Single-owner, single-threaded.
class SimDevice : public session::DeviceProbe, public session::DecoderHarness {
public:
  explicit SimDevice(SimConfig cfg);

  // DeviceProbe
  double battery_level() override;
  bool charging() override;
  DeviceProfile profile() override;
  double now() override { return time_s_; }
  void sleep_for(double seconds) override; // idle, screen on
  bool alive() override { return alive_; }

  // DecoderHarness
  std::vector<DecoderDescriptor> decoders() override;
  bool open(const DecoderDescriptor& decoder, const VideoAsset& asset) override;
  int64_t decode_next_frame() override;
  void reset() override { frame_pos_ = 0; }
  void close() override { open_entry_ = nullptr; }

  /// Advances simulated time with the given extra draw on top of the screen.
  /// Charge exhaustion powers the device off mid-advance.
  void advance(double dt_s, double extra_current_ma);

  double charge_mah() const { return charge_mah_; }
  double total_drawn_mah() const { return drawn_mah_ + drawn_comp_; }
  const SimConfig& config() const { return cfg_; }

  // Test/operator hooks: recharge between measurement cycles, toggle charger.
  void recharge_to_level(double level_pct);
  void set_charging(bool on) { charging_override_ = on; }

private:
  double draw_jitter();

  SimConfig cfg_;
  double time_s_ = 0;
  double charge_mah_ = 0;
  double drawn_mah_ = 0;
  double drawn_comp_ = 0; // Kahan compensation for the drawn accumulator
  bool alive_ = true;
  std::optional<bool> charging_override_;
  const SimDecoderEntry* open_entry_ = nullptr;
  VideoAsset open_asset_;
  int64_t frame_pos_ = 0;
  std::mt19937_64 rng_;
  int64_t noise_cell_ = -1; // grid cell the current jitter value belongs to
  double cell_jitter_ma_ = 0;
};

} // namespace decwatt::sim
