#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "decwatt/session.hpp"

namespace decwatt::pipeline {

/// One measurement from one device, flattened out of a collector export.
struct SampleRow {
  std::string model;
  std::string device; // salted serial hash
  std::string build_host;
  bool charging = false; // profile reported a charger during the campaign
  double capacity_mah = 0;
  session::DecoderRecord record;
};

std::vector<SampleRow> rows_from_export_stream(std::istream& in);
std::vector<SampleRow> load_rows(const std::filesystem::path& path);
void save_rows(const std::filesystem::path& path, const std::vector<SampleRow>& rows);

struct RulesConfig {
  double mad_k = 3.0;            // |x - median| > mad_k * MAD flags, groups >= 3
  double play_cap_pct_h = 200.0; // absolute delta_play cap for groups < 3
  double recompute_rel_tol = 1e-9;
};

enum class Disposition { flagged, reviewed_keep, reviewed_drop };
const char* to_string(Disposition d);
Disposition disposition_from_string(const std::string& s);

/// One anomaly-rule hit on one sample. Rules (a) delta_decode <= 0,
/// (b) charging during run, and integrity (metrics fail recomputation) drop
/// automatically and are born reviewed-drop; rules (c) MAD outlier and
/// (d) absolute cap only flag and wait for an operator disposition.
struct AnomalyFlag {
  std::string device;
  std::string model;
  std::string decoder_name;
  std::string asset_name;
  std::string rule; // "a", "b", "c", "d", "integrity"
  std::string detail;
  Disposition disposition = Disposition::flagged;
  bool auto_rule = false;
};

std::vector<AnomalyFlag> flag_anomalies(const std::vector<SampleRow>& rows,
                                        const RulesConfig& rules);

std::vector<AnomalyFlag> load_flags(const std::filesystem::path& path);
void save_flags(const std::filesystem::path& path, const std::vector<AnomalyFlag>& flags);

/// Carries operator dispositions from `reviewed` onto matching fresh flags
/// (matched by device, decoder, asset, rule).
void apply_review(std::vector<AnomalyFlag>& flags,
                  const std::vector<AnomalyFlag>& reviewed);

struct CleanResult {
  std::vector<SampleRow> kept;
  std::vector<AnomalyFlag> flags;
  size_t dropped = 0;
  size_t total = 0;
  /// False while unreviewed rule (c)/(d) flags exist; the pipeline refuses to
  /// finalize a dataset that still has pending manual review.
  bool finalized = false;
  double anomaly_rate() const {
    return total == 0 ? 0.0 : static_cast<double>(dropped) / static_cast<double>(total);
  }
};

CleanResult clean(const std::vector<SampleRow>& rows, const RulesConfig& rules,
                  const std::vector<AnomalyFlag>& reviewed = {});

struct Stat {
  double mean = 0;
  double stddev = 0; // population
};

/// Per-model, per-decoder, per-resolution means over non-dropped records.
struct ModelAggregate {
  std::string model;
  DecoderDescriptor decoder;
  int width = 0;
  int height = 0;
  double fps = 0;
  int count = 0; // contributing devices
  Stat delta_play;
  Stat delta_decode;
  Stat speed;
  bool non_realtime = false; // union of contributing record flags
  bool suspect = false;

  std::string resolution() const {
    return std::to_string(width) + "x" + std::to_string(height);
  }
  ResClass res_class() const { return classify_resolution(width, height); }
};

/// Groups rows by (model, decoder, resolution). Auto-drop rules and
/// reviewed-drop dispositions are applied internally, so merging unclean rows
/// equals merging the clean() output: aggregates never include dropped
/// records regardless of call order.
std::vector<ModelAggregate> merge_by_model(const std::vector<SampleRow>& rows,
                                           const RulesConfig& rules,
                                           const std::vector<AnomalyFlag>& reviewed = {});

std::vector<ModelAggregate> load_aggregates(const std::filesystem::path& path);
void save_aggregates(const std::filesystem::path& path,
                     const std::vector<ModelAggregate>& aggs);

struct WinRate {
  int num = 0;
  int den = 0;
  double rate() const { return den == 0 ? 0.0 : static_cast<double>(num) / den; }
};

struct ResolutionStats {
  int models = 0;
  WinRate software_best;                   // models whose best decoder is software
  std::map<std::string, WinRate> standard_best; // win rate per compression standard
};

struct SummaryStatistics {
  std::map<std::string, ResolutionStats> per_resolution; // keyed sd/hd/fhd
  std::map<std::string, WinRate> non_realtime_by_standard;
};

/// Per resolution: the fraction of models whose lowest-delta_play decoder is
/// software, and per-standard win rates. Ties break toward higher speed, then
/// lexicographic decoder name, so the per-resolution standard rates sum to 1.
SummaryStatistics summary_statistics(const std::vector<ModelAggregate>& aggs);

void save_statistics(const std::filesystem::path& path, const SummaryStatistics& stats);

/// The deterministic winner among one model's cells at one resolution class:
/// lowest mean delta_play, tie-broken by higher mean speed, then decoder name.
const ModelAggregate* best_cell(const std::vector<const ModelAggregate*>& cells);

void to_json(nlohmann::json& j, const SampleRow& r);
void from_json(const nlohmann::json& j, SampleRow& r);
void to_json(nlohmann::json& j, const AnomalyFlag& f);
void from_json(const nlohmann::json& j, AnomalyFlag& f);
void to_json(nlohmann::json& j, const Stat& s);
void from_json(const nlohmann::json& j, Stat& s);
void to_json(nlohmann::json& j, const ModelAggregate& a);
void from_json(const nlohmann::json& j, ModelAggregate& a);

} // namespace decwatt::pipeline
