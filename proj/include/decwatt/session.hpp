#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "decwatt/metrics.hpp"
#include "decwatt/types.hpp"

namespace decwatt::session {

/// Battery/clock side of a device. The simulator and the trace replayer both
/// implement it; real hardware would wrap the platform battery API.
/// Battery level is monotonically nonincreasing while discharging; the
/// monotonic clock never decreases. sleep_for is how idle time passes: a
/// thread sleep on hardware, a simulated-time advance on the simulator.
class DeviceProbe {
public:
  virtual ~DeviceProbe() = default;
  virtual double battery_level() = 0; // percent, integer-valued on real devices
  virtual bool charging() = 0;
  virtual DeviceProfile profile() = 0; // battery_level/charging filled live
  virtual double now() = 0;            // monotonic seconds
  virtual void sleep_for(double seconds) = 0;
  virtual bool alive() { return true; } // false once the device powers off
};

/// Decoder side of a device. Frame indices advance 0,1,...,n_seq-1 and wrap;
/// the engine tracks loop iterations from the wrap.
class DecoderHarness {
public:
  virtual ~DecoderHarness() = default;
  virtual std::vector<DecoderDescriptor> decoders() = 0;
  /// Opens a decoder on an asset, positioned at frame 0. False if the decoder
  /// refuses the asset (marks the pair untestable).
  virtual bool open(const DecoderDescriptor& decoder, const VideoAsset& asset) = 0;
  /// Decodes one frame, returns its index within the sequence, or -1 on
  /// decoder failure.
  virtual int64_t decode_next_frame() = 0;
  virtual void reset() = 0; // back to frame 0
  virtual void close() = 0;
};

/// One decoder x asset measurement result. Metrics recompute bit-for-bit from
/// the stored window via the formulas in metrics.hpp.
struct DecoderRecord {
  DecoderDescriptor decoder;
  VideoAsset asset;
  MeasurementWindow window;
  PowerMetrics metrics;
  RecordFlags flags;
};

/// A pair that was attempted and can never be measured on this device.
struct UntestablePair {
  DecoderDescriptor decoder;
  std::string asset_name;
  std::string reason;
};

struct PairKey {
  std::string decoder_name;
  std::string asset_name;
  bool operator==(const PairKey&) const = default;
};

/// Campaign state persisted at every pair boundary. Round-trips losslessly
/// through its line-delimited serialized form; completed pairs are never
/// re-run on resume.
struct SessionCheckpoint {
  int version = 1;
  std::string campaign_id;
  double drop_target_pct = 3.0;
  std::vector<VideoAsset> assets; // the campaign plan
  std::optional<double> delta_screen_pct_h;
  std::vector<DecoderRecord> records;
  std::vector<UntestablePair> untestable;
  std::optional<PairKey> in_progress; // pair interrupted by a suspension
  double suspend_level_pct = -1;

  bool pair_completed(const PairKey& key) const;
};

enum class SubmissionStatus { partial, complete, cancelled };
const char* to_string(SubmissionStatus s);
SubmissionStatus submission_status_from_string(const std::string& s);

/// One device's (possibly partial) result set, as posted to the collector.
struct Submission {
  std::string campaign_id;
  DeviceProfile profile;
  std::vector<DecoderRecord> records;
  std::vector<UntestablePair> untestable;
  double completeness = 0; // completed pairs / available pairs
  SubmissionStatus status = SubmissionStatus::partial;
  double client_time_s = 0; // device monotonic time at submission build
};

struct SessionConfig {
  double drop_target_pct = 3.0;    // per (decoder, resolution) pair
  double baseline_min_drop = 3.0;  // integer transitions for the screen baseline
  double poll_interval_s = 1.0;    // idle-loop probe cadence
  double transition_timeout_s = 4.0 * 3600.0; // give up waiting for a transition
  std::string campaign_id;         // empty: derived from serial and build host
};

struct BaselineOutcome {
  enum class Status {
    ok,               // delta_screen measured across >= min_drop transitions
    no_discharge,     // no transition before timeout; delta_screen = 0
    aborted_charging, // charger attached mid-measurement
    stalled,          // discharge began, then the probe went silent
    battery_window,   // level left the 20-95 window
    invalid,          // validity requirements violated at start
  };
  Status status = Status::invalid;
  double delta_screen_pct_h = 0;
  std::string detail;
  bool usable() const {
    return status == Status::ok || status == Status::no_discharge;
  }
};

/// Tracks battery-level changes with the device idle and the display on.
/// The first observed transition only anchors the measurement (the sub-percent
/// position at start is unknown) and is not counted toward min_drop.
BaselineOutcome measure_screen_baseline(DeviceProbe& probe,
                                        const SessionConfig& cfg);

struct MeasureOutcome {
  enum class Status {
    ok,
    suspended_low_battery, // level reached the 20% floor before the target drop
    suspended_charging,    // charger attached mid-run
    untestable,            // decoder refused or failed, or no discharge at all
    probe_lost,            // device powered off / probe gone
  };
  Status status = Status::untestable;
  std::optional<DecoderRecord> record; // set when status == ok
  std::string detail;
};

/// Loop-decodes one bitstream on one decoder until the battery level has
/// dropped by drop_target percent, anchoring the window at integer-level
/// transitions. delta_screen is the campaign's measured baseline.
MeasureOutcome measure_decoder(DeviceProbe& probe, DecoderHarness& harness,
                               const DecoderDescriptor& decoder,
                               const VideoAsset& asset, double delta_screen_pct_h,
                               const SessionConfig& cfg);

struct CampaignResult {
  enum class Stop {
    complete,      // every available pair measured or untestable
    suspended,     // battery window / charging; resume after recharge
    probe_lost,    // device went away; submission flagged partial
    limit_reached, // per-invocation pair limit hit (operator interruption)
    baseline_failed,
  };
  Stop stop = Stop::complete;
  Submission submission;
  SessionCheckpoint checkpoint;
  std::string detail;
};

/// Runs every (decoder, asset) pair of matching standard that the checkpoint
/// does not already cover, in deterministic order (decoder name, resolution
/// ascending, asset name). Saves the checkpoint through `persist` at every
/// pair boundary. `max_new_pairs` < 0 means unbounded.
CampaignResult run_campaign(DeviceProbe& probe, DecoderHarness& harness,
                            const std::vector<VideoAsset>& assets,
                            const SessionConfig& cfg,
                            std::optional<SessionCheckpoint> checkpoint = {},
                            const std::function<void(const SessionCheckpoint&)>& persist = {},
                            int max_new_pairs = -1);

/// The deterministic pair ordering used by campaigns: decoder name, then
/// resolution (pixel count) ascending, then asset name.
std::vector<std::pair<DecoderDescriptor, VideoAsset>> plan_pairs(
    const std::vector<DecoderDescriptor>& decoders,
    const std::vector<VideoAsset>& assets);

} // namespace decwatt::session
