#include "decwatt/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace decwatt {

void to_json(json& j, const MeasurementWindow& w) {
  j = json{{"level_start", w.level_start},   {"level_end", w.level_end},
           {"time_start_s", w.time_start_s}, {"time_end_s", w.time_end_s},
           {"iter_start", w.iter_start},     {"iter_end", w.iter_end},
           {"frame_start", w.frame_start},   {"frame_end", w.frame_end},
           {"seq_frames", w.seq_frames}};
}

void from_json(const json& j, MeasurementWindow& w) {
  j.at("level_start").get_to(w.level_start);
  j.at("level_end").get_to(w.level_end);
  j.at("time_start_s").get_to(w.time_start_s);
  j.at("time_end_s").get_to(w.time_end_s);
  j.at("iter_start").get_to(w.iter_start);
  j.at("iter_end").get_to(w.iter_end);
  j.at("frame_start").get_to(w.frame_start);
  j.at("frame_end").get_to(w.frame_end);
  j.at("seq_frames").get_to(w.seq_frames);
}

void to_json(json& j, const VideoAsset& a) {
  j = json{{"name", a.name},
           {"width", a.width},
           {"height", a.height},
           {"fps", a.fps},
           {"n_seq", a.n_seq},
           {"standard", to_string(a.standard)},
           {"si_mean", a.si_mean},
           {"ti_mean", a.ti_mean},
           {"bitrate_kbps", a.bitrate_kbps}};
}

void from_json(const json& j, VideoAsset& a) {
  j.at("name").get_to(a.name);
  j.at("width").get_to(a.width);
  j.at("height").get_to(a.height);
  j.at("fps").get_to(a.fps);
  j.at("n_seq").get_to(a.n_seq);
  a.standard = standard_from_string(j.at("standard").get<std::string>());
  j.at("si_mean").get_to(a.si_mean);
  j.at("ti_mean").get_to(a.ti_mean);
  j.at("bitrate_kbps").get_to(a.bitrate_kbps);
}

void to_json(json& j, const DeviceProfile& p) {
  j = json{{"model", p.model},
           {"manufacturer", p.manufacturer},
           {"serial_number", p.serial_number},
           {"build_host", p.build_host},
           {"battery_capacity_mah", p.battery_capacity_mah},
           {"voltage_v", p.voltage_v},
           {"battery_level_pct", p.battery_level_pct},
           {"os_version", p.os_version},
           {"charging", p.charging}};
}

void from_json(const json& j, DeviceProfile& p) {
  j.at("model").get_to(p.model);
  j.at("manufacturer").get_to(p.manufacturer);
  j.at("serial_number").get_to(p.serial_number);
  j.at("build_host").get_to(p.build_host);
  j.at("battery_capacity_mah").get_to(p.battery_capacity_mah);
  j.at("voltage_v").get_to(p.voltage_v);
  j.at("battery_level_pct").get_to(p.battery_level_pct);
  j.at("os_version").get_to(p.os_version);
  j.at("charging").get_to(p.charging);
}

void to_json(json& j, const DecoderDescriptor& d) {
  j = json{{"name", d.name},
           {"standard", to_string(d.standard)},
           {"kind", to_string(d.kind)},
           {"vendor", d.vendor}};
}

void from_json(const json& j, DecoderDescriptor& d) {
  j.at("name").get_to(d.name);
  d.standard = standard_from_string(j.at("standard").get<std::string>());
  d.kind = kind_from_string(j.at("kind").get<std::string>());
  j.at("vendor").get_to(d.vendor);
}

void to_json(json& j, const PowerMetrics& m) {
  j = json{{"delta_seq_pct", m.delta_seq_pct},
           {"speed_fps", m.speed_fps},
           {"delta_play_pct_h", m.delta_play_pct_h},
           {"delta_decode_ma", m.delta_decode_ma},
           {"delta_screen_pct_h", m.delta_screen_pct_h}};
}

void from_json(const json& j, PowerMetrics& m) {
  j.at("delta_seq_pct").get_to(m.delta_seq_pct);
  j.at("speed_fps").get_to(m.speed_fps);
  j.at("delta_play_pct_h").get_to(m.delta_play_pct_h);
  j.at("delta_decode_ma").get_to(m.delta_decode_ma);
  j.at("delta_screen_pct_h").get_to(m.delta_screen_pct_h);
}

void to_json(json& j, const RecordFlags& f) {
  j = json{{"non_realtime", f.non_realtime},
           {"suspect", f.suspect},
           {"partial", f.partial}};
}

void from_json(const json& j, RecordFlags& f) {
  j.at("non_realtime").get_to(f.non_realtime);
  j.at("suspect").get_to(f.suspect);
  j.at("partial").get_to(f.partial);
}

namespace session {

void to_json(json& j, const DecoderRecord& r) {
  j = json{{"decoder", r.decoder},
           {"asset", r.asset},
           {"window", r.window},
           {"metrics", r.metrics},
           {"flags", r.flags}};
}

void from_json(const json& j, DecoderRecord& r) {
  j.at("decoder").get_to(r.decoder);
  j.at("asset").get_to(r.asset);
  j.at("window").get_to(r.window);
  j.at("metrics").get_to(r.metrics);
  j.at("flags").get_to(r.flags);
}

void to_json(json& j, const UntestablePair& u) {
  j = json{{"decoder", u.decoder}, {"asset_name", u.asset_name}, {"reason", u.reason}};
}

void from_json(const json& j, UntestablePair& u) {
  j.at("decoder").get_to(u.decoder);
  j.at("asset_name").get_to(u.asset_name);
  j.at("reason").get_to(u.reason);
}

void to_json(json& j, const PairKey& k) {
  j = json{{"decoder", k.decoder_name}, {"asset", k.asset_name}};
}

void from_json(const json& j, PairKey& k) {
  j.at("decoder").get_to(k.decoder_name);
  j.at("asset").get_to(k.asset_name);
}

const char* to_string(SubmissionStatus s) {
  switch (s) {
    case SubmissionStatus::partial: return "partial";
    case SubmissionStatus::complete: return "complete";
    case SubmissionStatus::cancelled: return "cancelled";
  }
  return "?";
}

SubmissionStatus submission_status_from_string(const std::string& s) {
  if (s == "partial") return SubmissionStatus::partial;
  if (s == "complete") return SubmissionStatus::complete;
  if (s == "cancelled") return SubmissionStatus::cancelled;
  throw std::invalid_argument("unknown submission status: " + s);
}

void to_json(json& j, const Submission& s) {
  j = json{{"campaign_id", s.campaign_id},
           {"profile", s.profile},
           {"records", s.records},
           {"untestable", s.untestable},
           {"completeness", s.completeness},
           {"status", to_string(s.status)},
           {"client_time_s", s.client_time_s}};
}

void from_json(const json& j, Submission& s) {
  j.at("campaign_id").get_to(s.campaign_id);
  j.at("profile").get_to(s.profile);
  j.at("records").get_to(s.records);
  j.at("untestable").get_to(s.untestable);
  j.at("completeness").get_to(s.completeness);
  s.status = submission_status_from_string(j.at("status").get<std::string>());
  j.at("client_time_s").get_to(s.client_time_s);
}

} // namespace session

namespace jsonl {

std::vector<json> read_stream(std::istream& in, bool lenient) {
  std::vector<json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error&) {
      if (lenient && in.eof()) break; // truncated trailing line
      throw;
    }
  }
  return out;
}

std::vector<json> read_file(const std::filesystem::path& path, bool lenient) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_stream(in, lenient);
}

void write_file(const std::filesystem::path& path, const std::vector<json>& lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& l : lines) out << l.dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void append_line(const std::filesystem::path& path, const json& line) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + path.string());
  out << line.dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("append failed for " + path.string());
}

} // namespace jsonl

namespace session {

void save_checkpoint(const std::filesystem::path& path, const SessionCheckpoint& cp) {
  std::vector<json> lines;
  lines.push_back(json{{"type", "header"},
                       {"version", cp.version},
                       {"campaign_id", cp.campaign_id},
                       {"drop_target_pct", cp.drop_target_pct},
                       {"assets", cp.assets}});
  if (cp.delta_screen_pct_h)
    lines.push_back(json{{"type", "baseline"},
                         {"delta_screen_pct_h", *cp.delta_screen_pct_h}});
  for (const auto& r : cp.records)
    lines.push_back(json{{"type", "record"}, {"record", r}});
  for (const auto& u : cp.untestable)
    lines.push_back(json{{"type", "untestable"}, {"pair", u}});
  if (cp.in_progress)
    lines.push_back(json{{"type", "suspend"},
                         {"pair", *cp.in_progress},
                         {"level", cp.suspend_level_pct}});
  jsonl::write_file(path, lines);
}

SessionCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const auto lines = jsonl::read_file(path);
  if (lines.empty() || lines.front().value("type", "") != "header")
    throw std::runtime_error("checkpoint missing header: " + path.string());
  SessionCheckpoint cp;
  const json& h = lines.front();
  h.at("version").get_to(cp.version);
  if (cp.version != 1)
    throw std::runtime_error("unsupported checkpoint version in " + path.string());
  h.at("campaign_id").get_to(cp.campaign_id);
  h.at("drop_target_pct").get_to(cp.drop_target_pct);
  h.at("assets").get_to(cp.assets);
  for (size_t i = 1; i < lines.size(); ++i) {
    const json& l = lines[i];
    const std::string type = l.at("type").get<std::string>();
    if (type == "baseline") {
      cp.delta_screen_pct_h = l.at("delta_screen_pct_h").get<double>();
    } else if (type == "record") {
      cp.records.push_back(l.at("record").get<DecoderRecord>());
    } else if (type == "untestable") {
      cp.untestable.push_back(l.at("pair").get<UntestablePair>());
    } else if (type == "suspend") {
      cp.in_progress = l.at("pair").get<PairKey>();
      cp.suspend_level_pct = l.value("level", -1.0);
    } else {
      throw std::runtime_error("unknown checkpoint record type: " + type);
    }
  }
  return cp;
}

} // namespace session

} // namespace decwatt
