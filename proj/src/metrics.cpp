#include "decwatt/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace decwatt {

const char* to_string(Standard s) {
  switch (s) {
    case Standard::av1: return "AV1";
    case Standard::hevc: return "HEVC";
    case Standard::vp9: return "VP9";
    case Standard::h264: return "H.264";
    case Standard::vp8: return "VP8";
    case Standard::mpeg4: return "MPEG-4";
  }
  return "?";
}

const char* to_string(DecoderKind k) {
  switch (k) {
    case DecoderKind::hardware: return "hardware";
    case DecoderKind::software: return "software";
    case DecoderKind::hybrid: return "hybrid";
  }
  return "?";
}

Standard standard_from_string(const std::string& s) {
  if (s == "AV1") return Standard::av1;
  if (s == "HEVC") return Standard::hevc;
  if (s == "VP9") return Standard::vp9;
  if (s == "H.264") return Standard::h264;
  if (s == "VP8") return Standard::vp8;
  if (s == "MPEG-4") return Standard::mpeg4;
  throw std::invalid_argument("unknown compression standard: " + s);
}

DecoderKind kind_from_string(const std::string& s) {
  if (s == "hardware") return DecoderKind::hardware;
  if (s == "software") return DecoderKind::software;
  if (s == "hybrid") return DecoderKind::hybrid;
  throw std::invalid_argument("unknown decoder kind: " + s);
}

const char* to_string(ResClass c) {
  switch (c) {
    case ResClass::sd: return "sd";
    case ResClass::hd: return "hd";
    case ResClass::fhd: return "fhd";
  }
  return "?";
}

ResClass res_class_from_string(const std::string& s) {
  if (s == "sd") return ResClass::sd;
  if (s == "hd") return ResClass::hd;
  if (s == "fhd") return ResClass::fhd;
  throw std::invalid_argument("unknown resolution class: " + s);
}

ResClass classify_resolution(int /*width*/, int height) {
  if (height < 720) return ResClass::sd;
  if (height < 1080) return ResClass::hd;
  return ResClass::fhd;
}

void validate_window(const MeasurementWindow& w) {
  if (w.seq_frames <= 0) throw InvalidWindow("seq_frames must be positive");
  if (w.frame_start < 0 || w.frame_start >= w.seq_frames ||
      w.frame_end < 0 || w.frame_end >= w.seq_frames)
    throw InvalidWindow("frame indices out of [0, seq_frames)");
  if (!(w.level_start > w.level_end))
    throw InvalidWindow("no battery drop across the window (B0 <= B1)");
  if (!(w.time_end_s > w.time_start_s))
    throw InvalidWindow("clock did not advance across the window (T1 <= T0)");
  if (w.frames_decoded() <= 0)
    throw InvalidWindow("no frames decoded across the window (zero denominator)");
}

double compute_delta_seq(const MeasurementWindow& w) {
  validate_window(w);
  const double frames = static_cast<double>(w.frames_decoded());
  return (w.level_start - w.level_end) / frames * static_cast<double>(w.seq_frames);
}

double compute_decode_speed(const MeasurementWindow& w) {
  validate_window(w);
  return static_cast<double>(w.frames_decoded()) / (w.time_end_s - w.time_start_s);
}

PlayResult compute_delta_play(double delta_seq_pct, double speed_fps,
                              const VideoAsset& asset, double delta_screen_pct_h) {
  if (!(speed_fps > 0)) throw std::invalid_argument("speed must be positive");
  if (!(asset.fps > 0)) throw std::invalid_argument("asset fps must be positive");
  const double n = static_cast<double>(asset.n_seq);
  const double compensation = std::max(0.0, 1.0 - asset.fps / speed_fps);
  PlayResult r;
  r.delta_play_pct_h = delta_seq_pct * (asset.fps / n) * 3600.0 +
                       delta_screen_pct_h * compensation;
  r.non_realtime = speed_fps < asset.fps;
  return r;
}

DecodeResult compute_delta_decode(double delta_seq_pct, double speed_fps,
                                  const VideoAsset& asset,
                                  double delta_screen_pct_h, double capacity_mah) {
  if (!(speed_fps > 0)) throw std::invalid_argument("speed must be positive");
  if (!(capacity_mah > 0)) throw std::invalid_argument("capacity must be positive");
  const double n = static_cast<double>(asset.n_seq);
  DecodeResult r;
  r.delta_decode_ma =
      capacity_mah *
      (delta_seq_pct * (speed_fps / n) * 3600.0 - delta_screen_pct_h) / 100.0;
  r.suspect = r.delta_decode_ma <= 0;
  return r;
}

const char* describe(Requirement r) {
  switch (r) {
    case Requirement::autonomous_mode:
      return "device must operate in autonomous mode (charger attached)";
    case Requirement::level_window:
      return "battery level outside the 20-95% window";
    case Requirement::min_expenditure:
      return "planned expenditure below 3% of battery capacity";
  }
  return "?";
}

ValidityVerdict check_validity(const DeviceProfile& profile, double planned_drop_pct) {
  ValidityVerdict v;
  if (profile.charging) v.violations.push_back(Requirement::autonomous_mode);
  if (profile.battery_level_pct < 20.0 || profile.battery_level_pct > 95.0)
    v.violations.push_back(Requirement::level_window);
  if (planned_drop_pct < 3.0)
    v.violations.push_back(Requirement::min_expenditure);
  return v;
}

PowerMetrics compute_metrics(const MeasurementWindow& w, const VideoAsset& asset,
                             double delta_screen_pct_h, double capacity_mah,
                             RecordFlags* flags) {
  PowerMetrics m;
  m.delta_seq_pct = compute_delta_seq(w);
  m.speed_fps = compute_decode_speed(w);
  const PlayResult play =
      compute_delta_play(m.delta_seq_pct, m.speed_fps, asset, delta_screen_pct_h);
  const DecodeResult dec = compute_delta_decode(m.delta_seq_pct, m.speed_fps, asset,
                                                delta_screen_pct_h, capacity_mah);
  m.delta_play_pct_h = play.delta_play_pct_h;
  m.delta_decode_ma = dec.delta_decode_ma;
  m.delta_screen_pct_h = delta_screen_pct_h;
  if (flags) {
    flags->non_realtime = play.non_realtime;
    flags->suspect = dec.suspect;
  }
  return m;
}

} // namespace decwatt
