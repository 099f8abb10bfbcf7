#pragma once

#include <stdexcept>
#include <vector>

#include "decwatt/types.hpp"

namespace decwatt {

/// Raised when a MeasurementWindow violates its invariants (zero denominator,
/// non-advancing clock, no battery drop).
struct InvalidWindow : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Checks the MeasurementWindow invariants; throws InvalidWindow on violation.
void validate_window(const MeasurementWindow& w);

/// Relative battery consumption (%) for decoding the entire bitstream once:
/// (B0-B1) / ((N1-N0)*n_seq + n1-n0) * n_seq.
double compute_delta_seq(const MeasurementWindow& w);

/// Average decoding speed (frames/second):
/// ((N1-N0)*n_seq + n1-n0) / (T1-T0).
double compute_decode_speed(const MeasurementWindow& w);

struct PlayResult {
  double delta_play_pct_h = 0;
  bool non_realtime = false; // speed < asset fps; kept, never discarded
};

/// Battery consumption per hour of real-time playback:
/// delta_seq * fps/n * 3600 + delta_screen * max(0, 1 - fps/speed).
/// The compensation term accounts for the display staying on after decoding
/// finishes ahead of the playback deadline; it is exactly 0 when speed <= fps.
PlayResult compute_delta_play(double delta_seq_pct, double speed_fps,
                              const VideoAsset& asset, double delta_screen_pct_h);

struct DecodeResult {
  double delta_decode_ma = 0;
  bool suspect = false; // result <= 0: screen baseline exceeds measured draw
};

/// Decoder-only current draw (mA):
/// capacity * (delta_seq * speed/n * 3600 - delta_screen) / 100.
/// Percent quantities are converted to fractions before multiplying by the
/// capacity in mAh, so the result carries mA. Non-positive values are
/// preserved and flagged suspect rather than clamped.
DecodeResult compute_delta_decode(double delta_seq_pct, double speed_fps,
                                  const VideoAsset& asset,
                                  double delta_screen_pct_h,
                                  double capacity_mah);

/// The numbered adequacy requirements a measurement must satisfy.
enum class Requirement {
  autonomous_mode = 1,  // no charger attached
  level_window = 2,     // 20% <= level <= 95%
  min_expenditure = 3,  // planned drop >= 3% of capacity
};

const char* describe(Requirement r);

/// Verdict of check_validity: the (possibly empty) list of violated
/// requirements. Multi-cycle measurement (requirement 4) is always permitted.
struct ValidityVerdict {
  std::vector<Requirement> violations;
  bool ok() const { return violations.empty(); }
};

/// Pure function of its inputs; identical inputs yield identical verdicts.
ValidityVerdict check_validity(const DeviceProfile& profile, double planned_drop_pct);

/// Convenience: all four metrics from a window plus campaign context.
PowerMetrics compute_metrics(const MeasurementWindow& w, const VideoAsset& asset,
                             double delta_screen_pct_h, double capacity_mah,
                             RecordFlags* flags = nullptr);

} // namespace decwatt
