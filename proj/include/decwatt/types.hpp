#pragma once

#include <cstdint>
#include <string>

namespace decwatt {

/// Compression standards the harness knows how to pair decoders with assets by.
enum class Standard { av1, hevc, vp9, h264, vp8, mpeg4 };

enum class DecoderKind { hardware, software, hybrid };

const char* to_string(Standard s);
const char* to_string(DecoderKind k);
Standard standard_from_string(const std::string& s);
DecoderKind kind_from_string(const std::string& s);

/// The eight battery-transition observables plus the sequence length.
/// Levels are percent (integer-valued on real devices; fractional values are
/// accepted so sub-percent behavior can be exercised in simulation), times are
/// monotonic seconds, iterations count full passes over the bitstream and
/// frame indices are positions within it.
struct MeasurementWindow {
  double level_start = 0;  // B0, percent
  double level_end = 0;    // B1, percent
  double time_start_s = 0; // T0
  double time_end_s = 0;   // T1
  int64_t iter_start = 0;  // N0
  int64_t iter_end = 0;    // N1
  int64_t frame_start = 0; // n0, 0 <= n0 < seq_frames
  int64_t frame_end = 0;   // n1
  int64_t seq_frames = 0;  // n_seq

  /// Frames decoded between the two anchors: (N1-N0)*n_seq + n1-n0.
  int64_t frames_decoded() const {
    return (iter_end - iter_start) * seq_frames + frame_end - frame_start;
  }
};

/// One encoded bitstream: a source sequence at one resolution for one standard.
struct VideoAsset {
  std::string name;
  int width = 0;
  int height = 0;
  double fps = 0;        // frames/second required for playback
  int64_t n_seq = 0;     // frame count
  Standard standard = Standard::h264;
  double si_mean = 0;    // spatial perceptual information (opaque metadata)
  double ti_mean = 0;    // temporal perceptual information
  double bitrate_kbps = 0;
};

struct DeviceProfile {
  std::string model;
  std::string manufacturer;
  std::string serial_number;
  std::string build_host;
  double battery_capacity_mah = 0; // V in the decode formula
  double voltage_v = 0;
  double battery_level_pct = 0;
  std::string os_version;
  bool charging = false;
};

struct DecoderDescriptor {
  std::string name;
  Standard standard = Standard::h264;
  DecoderKind kind = DecoderKind::hardware;
  std::string vendor;
};

/// The four derived power/speed metrics plus the screen baseline they used.
struct PowerMetrics {
  double delta_seq_pct = 0;     // % of battery per full-sequence decode
  double speed_fps = 0;         // average decoding speed
  double delta_play_pct_h = 0;  // % per hour of real-time playback
  double delta_decode_ma = 0;   // decoder-only draw, display subtracted
  double delta_screen_pct_h = 0;
};

struct RecordFlags {
  bool non_realtime = false; // speed below the asset frame rate
  bool suspect = false;      // delta_decode <= 0 (screen baseline exceeds draw)
  bool partial = false;
};

inline bool operator==(const MeasurementWindow& a, const MeasurementWindow& b) {
  return a.level_start == b.level_start && a.level_end == b.level_end &&
         a.time_start_s == b.time_start_s && a.time_end_s == b.time_end_s &&
         a.iter_start == b.iter_start && a.iter_end == b.iter_end &&
         a.frame_start == b.frame_start && a.frame_end == b.frame_end &&
         a.seq_frames == b.seq_frames;
}

inline bool operator==(const PowerMetrics& a, const PowerMetrics& b) {
  return a.delta_seq_pct == b.delta_seq_pct && a.speed_fps == b.speed_fps &&
         a.delta_play_pct_h == b.delta_play_pct_h &&
         a.delta_decode_ma == b.delta_decode_ma &&
         a.delta_screen_pct_h == b.delta_screen_pct_h;
}

/// Resolution class used by reports; thresholds cover the three shipped
/// sequence resolutions (640x480, 1280x720, 1920x1080).
enum class ResClass { sd, hd, fhd };
const char* to_string(ResClass c);
ResClass res_class_from_string(const std::string& s);
ResClass classify_resolution(int width, int height);

} // namespace decwatt
