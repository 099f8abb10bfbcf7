#include "decwatt/collector.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <fstream>

#include "decwatt/json_io.hpp"

namespace decwatt::collect {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::accepted_new: return "accepted-new";
    case Verdict::superseded_previous: return "superseded-previous";
    case Verdict::rejected_duplicate: return "rejected-duplicate";
    case Verdict::rejected_invalid: return "rejected-invalid";
  }
  return "?";
}

std::string CollectorStore::hash_serial(const std::string& salt,
                                        const std::string& serial) {
  const std::string input = salt + "\x1f" + serial;
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(input.data()), input.size(), digest);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char b : digest) {
    out.push_back(hex[b >> 4]);
    out.push_back(hex[b & 0xf]);
  }
  return out;
}

CollectorStore::CollectorStore(std::filesystem::path dir, std::string salt)
    : dir_(std::move(dir)), salt_(std::move(salt)) {
  std::filesystem::create_directories(dir_);
  if (std::filesystem::exists(log_path())) {
    // the log is the source of truth; the index is derived state
    for (const json& line : jsonl::read_file(log_path(), /*lenient=*/true)) {
      const std::string verdict = line.at("verdict").get<std::string>();
      next_seq_ = line.at("seq").get<uint64_t>() + 1;
      if (verdict == "rejected-invalid") continue;
      session::Submission s = line.at("submission").get<session::Submission>();
      DedupKey key{s.profile.serial_number, s.profile.build_host};
      auto it = samples_.find(key);
      if (verdict == "accepted-new") {
        samples_.emplace(key, StoredSample{key, std::move(s), 1, true});
      } else if (verdict == "superseded-previous") {
        if (it == samples_.end()) throw std::runtime_error("log supersedes unknown key");
        it->second.submission = std::move(s);
        it->second.history_count += 1;
      } else if (verdict == "rejected-duplicate") {
        if (it != samples_.end()) it->second.history_count += 1;
      } else {
        throw std::runtime_error("unknown verdict in log: " + verdict);
      }
    }
  }
}

std::vector<std::string> CollectorStore::validate(const session::Submission& s) {
  std::vector<std::string> reasons;
  if (s.campaign_id.empty()) reasons.push_back("campaign_id: empty");
  if (s.profile.model.empty()) reasons.push_back("profile.model: empty");
  if (s.profile.serial_number.empty()) reasons.push_back("profile.serial_number: empty");
  if (s.profile.build_host.empty()) reasons.push_back("profile.build_host: empty");
  if (!(s.profile.battery_capacity_mah > 0))
    reasons.push_back("profile.battery_capacity_mah: must be positive");
  if (s.completeness < 0 || s.completeness > 1)
    reasons.push_back("completeness: outside [0, 1]");
  if (s.records.empty() && s.status != session::SubmissionStatus::cancelled)
    reasons.push_back("records: empty but status is not cancelled");
  for (size_t i = 0; i < s.records.size(); ++i) {
    const auto& w = s.records[i].window;
    if (w.seq_frames <= 0 || !(w.level_start > w.level_end) ||
        !(w.time_end_s > w.time_start_s) || w.frames_decoded() <= 0)
      reasons.push_back("records[" + std::to_string(i) + "].window: invalid");
  }
  return reasons;
}

IngestResult CollectorStore::ingest_json(const std::string& body) {
  session::Submission s;
  try {
    s = json::parse(body).get<session::Submission>();
  } catch (const std::exception& e) {
    std::lock_guard<std::mutex> lock(mu_);
    IngestResult r;
    r.verdict = Verdict::rejected_invalid;
    r.reasons = {std::string("parse: ") + e.what()};
    jsonl::append_line(log_path(), json{{"seq", next_seq_},
                                        {"verdict", to_string(r.verdict)},
                                        {"reasons", r.reasons},
                                        {"body", body}});
    ++next_seq_;
    return r;
  }
  std::lock_guard<std::mutex> lock(mu_);
  return ingest_locked(s, false, &body);
}

IngestResult CollectorStore::ingest(const session::Submission& s, bool serial_prehashed) {
  std::lock_guard<std::mutex> lock(mu_);
  return ingest_locked(s, serial_prehashed, nullptr);
}

IngestResult CollectorStore::ingest_locked(const session::Submission& s,
                                           bool serial_prehashed,
                                           const std::string* raw_body) {
  IngestResult r;
  r.reasons = validate(s);
  if (!r.reasons.empty()) {
    r.verdict = Verdict::rejected_invalid;
    json body;
    if (raw_body)
      body = *raw_body;
    else
      body = json(s).dump();
    jsonl::append_line(log_path(), json{{"seq", next_seq_},
                                        {"verdict", to_string(r.verdict)},
                                        {"reasons", r.reasons},
                                        {"body", body}});
    ++next_seq_;
    return r;
  }

  session::Submission stored = s;
  if (!serial_prehashed)
    stored.profile.serial_number = hash_serial(salt_, s.profile.serial_number);
  r.key = DedupKey{stored.profile.serial_number, stored.profile.build_host};

  const auto it = samples_.find(r.key);
  json conflict;
  if (it == samples_.end()) {
    r.verdict = Verdict::accepted_new;
  } else if (stored.completeness > it->second.submission.completeness) {
    r.verdict = Verdict::superseded_previous;
  } else {
    r.verdict = Verdict::rejected_duplicate;
    if (stored.status == session::SubmissionStatus::complete &&
        it->second.submission.status == session::SubmissionStatus::complete)
      conflict = "duplicate-complete-submission";
  }

  json line{{"seq", next_seq_},
            {"verdict", to_string(r.verdict)},
            {"key", json{{"serial_hash", r.key.serial_hash},
                         {"build_host", r.key.build_host}}},
            {"submission", stored}};
  if (!conflict.is_null()) line["conflict"] = conflict;

  // append first: if the write throws, memory is untouched and the caller may
  // retry without any partial state becoming visible
  jsonl::append_line(log_path(), line);
  ++next_seq_;

  if (r.verdict == Verdict::accepted_new) {
    samples_.emplace(r.key, StoredSample{r.key, std::move(stored), 1, true});
  } else if (r.verdict == Verdict::superseded_previous) {
    it->second.submission = std::move(stored);
    it->second.history_count += 1;
  } else if (it != samples_.end()) {
    it->second.history_count += 1;
  }
  return r;
}

std::vector<CompletenessRow> CollectorStore::completeness_report() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<CompletenessRow> rows;
  rows.reserve(samples_.size());
  for (const auto& [key, sample] : samples_) {
    CompletenessRow row;
    row.model = sample.submission.profile.model;
    row.serial_prefix = key.serial_hash.substr(0, 12);
    row.build_host = key.build_host;
    row.completeness = sample.submission.completeness;
    row.status = sample.submission.status;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CompletenessRow& a, const CompletenessRow& b) {
                     return a.completeness < b.completeness;
                   });
  return rows;
}

static bool record_matches(const session::DecoderRecord& r, const ExportFilter& f) {
  if (f.standard && r.decoder.standard != *f.standard) return false;
  if (f.kind && r.decoder.kind != *f.kind) return false;
  return true;
}

std::string CollectorStore::export_raw(const ExportFilter& filter) const {
  std::lock_guard<std::mutex> lock(mu_);
  std::string out;
  for (const auto& [key, sample] : samples_) {
    if (filter.model && sample.submission.profile.model != *filter.model) continue;
    session::Submission view = sample.submission;
    if (filter.standard || filter.kind) {
      std::vector<session::DecoderRecord> kept;
      for (const auto& rec : view.records)
        if (record_matches(rec, filter)) kept.push_back(rec);
      std::vector<session::UntestablePair> kept_u;
      for (const auto& u : view.untestable) {
        if (filter.standard && u.decoder.standard != *filter.standard) continue;
        if (filter.kind && u.decoder.kind != *filter.kind) continue;
        kept_u.push_back(u);
      }
      if (kept.empty()) continue;
      view.records = std::move(kept);
      view.untestable = std::move(kept_u);
    }
    json line{{"key", json{{"serial_hash", key.serial_hash},
                           {"build_host", key.build_host}}},
              {"submission", view}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

size_t CollectorStore::replay_log(const std::filesystem::path& log_path_in) {
  size_t applied = 0;
  for (const json& line : jsonl::read_file(log_path_in, /*lenient=*/true)) {
    const std::string verdict = line.at("verdict").get<std::string>();
    if (verdict == "rejected-invalid") {
      ingest_json(line.at("body").get<std::string>());
    } else {
      const auto s = line.at("submission").get<session::Submission>();
      ingest(s, /*serial_prehashed=*/true);
    }
    ++applied;
  }
  return applied;
}

void CollectorStore::sync_index() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<json> lines;
  lines.reserve(samples_.size());
  for (const auto& [key, sample] : samples_) {
    lines.push_back(json{{"key", json{{"serial_hash", key.serial_hash},
                                      {"build_host", key.build_host}}},
                         {"submission", sample.submission},
                         {"history_count", sample.history_count},
                         {"accepted", sample.accepted}});
  }
  jsonl::write_file(index_path(), lines);
}

size_t CollectorStore::sample_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return samples_.size();
}

std::optional<ExportFilter> parse_export_filter(const std::string& model,
                                                const std::string& standard,
                                                const std::string& kind,
                                                std::string* error) {
  ExportFilter f;
  if (!model.empty()) f.model = model;
  try {
    if (!standard.empty()) f.standard = standard_from_string(standard);
    if (!kind.empty()) f.kind = kind_from_string(kind);
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return std::nullopt;
  }
  return f;
}

} // namespace decwatt::collect
