#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "decwatt/session.hpp"
#include "decwatt/types.hpp"

namespace decwatt {

using nlohmann::json;

// ADL serializers. nlohmann::json orders object keys lexicographically and
// prints doubles with shortest round-trip representations, so every dump is
// byte-stable and numerically lossless.
void to_json(json& j, const MeasurementWindow& w);
void from_json(const json& j, MeasurementWindow& w);
void to_json(json& j, const VideoAsset& a);
void from_json(const json& j, VideoAsset& a);
void to_json(json& j, const DeviceProfile& p);
void from_json(const json& j, DeviceProfile& p);
void to_json(json& j, const DecoderDescriptor& d);
void from_json(const json& j, DecoderDescriptor& d);
void to_json(json& j, const PowerMetrics& m);
void from_json(const json& j, PowerMetrics& m);
void to_json(json& j, const RecordFlags& f);
void from_json(const json& j, RecordFlags& f);

namespace session {
void to_json(json& j, const DecoderRecord& r);
void from_json(const json& j, DecoderRecord& r);
void to_json(json& j, const UntestablePair& u);
void from_json(const json& j, UntestablePair& u);
void to_json(json& j, const PairKey& k);
void from_json(const json& j, PairKey& k);
void to_json(json& j, const Submission& s);
void from_json(const json& j, Submission& s);
} // namespace session

namespace jsonl {

/// Reads a line-delimited JSON file; blank lines are skipped. A truncated
/// final line (interrupted append) is dropped with `lenient`.
std::vector<json> read_file(const std::filesystem::path& path, bool lenient = false);
std::vector<json> read_stream(std::istream& in, bool lenient = false);

/// Writes one JSON document per line (compact dump, '\n' terminated).
void write_file(const std::filesystem::path& path, const std::vector<json>& lines);
void append_line(const std::filesystem::path& path, const json& line);

} // namespace jsonl

namespace session {

/// Checkpoint file: versioned line-delimited records (header, baseline,
/// record, untestable, suspend). Round-trips losslessly.
void save_checkpoint(const std::filesystem::path& path, const SessionCheckpoint& cp);
SessionCheckpoint load_checkpoint(const std::filesystem::path& path);

} // namespace session

} // namespace decwatt
