#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "decwatt/session.hpp"

namespace decwatt::collect {

enum class Verdict {
  accepted_new,
  superseded_previous,
  rejected_duplicate,
  rejected_invalid,
};
const char* to_string(Verdict v);

/// Device identity used for deduplication. Serial numbers are stored salted
/// and hashed; raw serials never touch disk.
struct DedupKey {
  std::string serial_hash;
  std::string build_host;
  auto operator<=>(const DedupKey&) const = default;
};

struct StoredSample {
  DedupKey key;
  session::Submission submission; // profile.serial_number holds the hash
  int history_count = 1;          // submissions seen for this key
  bool accepted = true;
};

struct IngestResult {
  Verdict verdict = Verdict::rejected_invalid;
  std::vector<std::string> reasons; // field-level, for rejected_invalid
  DedupKey key;
};

struct CompletenessRow {
  std::string model;
  std::string serial_prefix; // redacted: leading hash characters only
  std::string build_host;
  double completeness = 0;
  session::SubmissionStatus status = session::SubmissionStatus::partial;
};

struct ExportFilter {
  std::optional<std::string> model;
  std::optional<Standard> standard;
  std::optional<DecoderKind> kind;
};

/// Deduplicating submission store: an append-only ingest log plus an
/// in-memory current-state index (flushed to index.jsonl on demand, always
/// rebuildable from the log). All mutations are serialized through a single
/// writer lock; reads see a consistent snapshot.
class CollectorStore {
public:
  /// Opens (or creates) a store under `dir`, replaying any existing log.
  CollectorStore(std::filesystem::path dir, std::string salt);

  /// Parses, validates and ingests one submission document. The log line is
  /// appended before memory is updated, so a storage failure leaves no
  /// partial write visible.
  IngestResult ingest_json(const std::string& body);

  /// Ingests an already-parsed submission. `serial_prehashed` marks inputs
  /// whose serial is already the salted hash (log replay, export roundtrip);
  /// hashing twice would break dedup equality.
  IngestResult ingest(const session::Submission& s, bool serial_prehashed = false);

  /// One row per stored sample, sorted by completeness ascending so
  /// incomplete samples surface first.
  std::vector<CompletenessRow> completeness_report() const;

  /// Accepted samples matching the filter, one JSON line each, in
  /// deterministic key order. standard/kind filters prune records inside each
  /// sample; samples left with no matching record are omitted.
  std::string export_raw(const ExportFilter& filter = {}) const;

  /// Re-ingests every entry of an ingest log (written by this class) into
  /// this store. Returns the number of entries applied.
  size_t replay_log(const std::filesystem::path& log_path);

  /// Writes the derived index file (index.jsonl) for the current state.
  void sync_index() const;

  size_t sample_count() const;
  std::filesystem::path log_path() const { return dir_ / "ingest.log"; }
  std::filesystem::path index_path() const { return dir_ / "index.jsonl"; }

  static std::string hash_serial(const std::string& salt, const std::string& serial);

private:
  IngestResult ingest_locked(const session::Submission& s, bool serial_prehashed,
                             const std::string* raw_body);
  static std::vector<std::string> validate(const session::Submission& s);

  std::filesystem::path dir_;
  std::string salt_;
  mutable std::mutex mu_;
  std::map<DedupKey, StoredSample> samples_;
  uint64_t next_seq_ = 1;
};

std::optional<ExportFilter> parse_export_filter(const std::string& model,
                                                const std::string& standard,
                                                const std::string& kind,
                                                std::string* error);

} // namespace decwatt::collect
