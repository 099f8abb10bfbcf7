#include "decwatt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "decwatt/json_io.hpp"
#include "decwatt/metrics.hpp"

namespace decwatt::pipeline {

const char* to_string(Disposition d) {
  switch (d) {
    case Disposition::flagged: return "flagged";
    case Disposition::reviewed_keep: return "reviewed-keep";
    case Disposition::reviewed_drop: return "reviewed-drop";
  }
  return "?";
}

Disposition disposition_from_string(const std::string& s) {
  if (s == "flagged") return Disposition::flagged;
  if (s == "reviewed-keep") return Disposition::reviewed_keep;
  if (s == "reviewed-drop") return Disposition::reviewed_drop;
  throw std::invalid_argument("unknown disposition: " + s);
}

void to_json(json& j, const SampleRow& r) {
  j = json{{"model", r.model},         {"device", r.device},
           {"build_host", r.build_host}, {"charging", r.charging},
           {"capacity_mah", r.capacity_mah}, {"record", r.record}};
}

void from_json(const json& j, SampleRow& r) {
  j.at("model").get_to(r.model);
  j.at("device").get_to(r.device);
  j.at("build_host").get_to(r.build_host);
  j.at("charging").get_to(r.charging);
  j.at("capacity_mah").get_to(r.capacity_mah);
  j.at("record").get_to(r.record);
}

std::vector<SampleRow> rows_from_export_stream(std::istream& in) {
  std::vector<SampleRow> rows;
  for (const json& line : jsonl::read_stream(in)) {
    const auto sub = line.at("submission").get<session::Submission>();
    for (const auto& rec : sub.records) {
      SampleRow row;
      row.model = sub.profile.model;
      row.device = sub.profile.serial_number; // already hashed by the collector
      row.build_host = sub.profile.build_host;
      row.charging = sub.profile.charging;
      row.capacity_mah = sub.profile.battery_capacity_mah;
      row.record = rec;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<SampleRow> load_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  // accept either a collector export stream or an already-flattened row file
  std::vector<json> lines = jsonl::read_stream(in);
  std::vector<SampleRow> rows;
  for (const json& l : lines) {
    if (l.contains("submission")) {
      std::istringstream one(l.dump());
      auto flat = rows_from_export_stream(one);
      rows.insert(rows.end(), flat.begin(), flat.end());
    } else {
      rows.push_back(l.get<SampleRow>());
    }
  }
  return rows;
}

void save_rows(const std::filesystem::path& path, const std::vector<SampleRow>& rows) {
  std::vector<json> lines;
  lines.reserve(rows.size());
  for (const auto& r : rows) lines.push_back(json(r));
  jsonl::write_file(path, lines);
}

static bool rel_close(double a, double b, double tol) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1e-30});
  return std::fabs(a - b) <= tol * scale;
}

static bool metrics_recompute_ok(const SampleRow& row, double tol) {
  try {
    RecordFlags flags;
    const PowerMetrics m =
        compute_metrics(row.record.window, row.record.asset,
                        row.record.metrics.delta_screen_pct_h, row.capacity_mah, &flags);
    const PowerMetrics& s = row.record.metrics;
    return rel_close(m.delta_seq_pct, s.delta_seq_pct, tol) &&
           rel_close(m.speed_fps, s.speed_fps, tol) &&
           rel_close(m.delta_play_pct_h, s.delta_play_pct_h, tol) &&
           rel_close(m.delta_decode_ma, s.delta_decode_ma, tol);
  } catch (const std::exception&) {
    return false; // window itself is invalid
  }
}

static double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

static std::string group_key(const SampleRow& r) {
  return r.model + "\x1f" + r.record.decoder.name + "\x1f" +
         std::to_string(r.record.asset.width) + "x" +
         std::to_string(r.record.asset.height);
}

std::vector<AnomalyFlag> flag_anomalies(const std::vector<SampleRow>& rows,
                                        const RulesConfig& rules) {
  std::vector<AnomalyFlag> flags;
  auto add = [&](const SampleRow& r, const char* rule, std::string detail, bool is_auto) {
    AnomalyFlag f;
    f.device = r.device;
    f.model = r.model;
    f.decoder_name = r.record.decoder.name;
    f.asset_name = r.record.asset.name;
    f.rule = rule;
    f.detail = std::move(detail);
    f.auto_rule = is_auto;
    f.disposition = is_auto ? Disposition::reviewed_drop : Disposition::flagged;
    flags.push_back(std::move(f));
  };

  std::map<std::string, std::vector<const SampleRow*>> groups;
  for (const auto& r : rows) groups[group_key(r)].push_back(&r);

  for (const auto& r : rows) {
    if (!metrics_recompute_ok(r, rules.recompute_rel_tol)) {
      add(r, "integrity", "stored metrics do not recompute from the window", true);
      continue; // the row's metrics are untrustworthy; skip value rules
    }
    if (r.record.metrics.delta_decode_ma <= 0)
      add(r, "a",
          "delta_decode " + std::to_string(r.record.metrics.delta_decode_ma) +
              " mA is not positive",
          true);
    if (r.charging) add(r, "b", "charger attached during the campaign", true);
  }

  for (const auto& [key, members] : groups) {
    std::vector<double> plays;
    std::vector<const SampleRow*> valid;
    for (const SampleRow* r : members) {
      if (!metrics_recompute_ok(*r, rules.recompute_rel_tol)) continue;
      plays.push_back(r->record.metrics.delta_play_pct_h);
      valid.push_back(r);
    }
    if (valid.size() >= 3) {
      const double med = median_of(plays);
      std::vector<double> dev;
      dev.reserve(plays.size());
      for (double x : plays) dev.push_back(std::fabs(x - med));
      const double mad = median_of(dev);
      for (size_t i = 0; i < valid.size(); ++i) {
        if (std::fabs(plays[i] - med) > rules.mad_k * mad) {
          std::ostringstream os;
          os << "delta_play " << plays[i] << " deviates from group median " << med
             << " by more than " << rules.mad_k << "*MAD (" << mad << ")";
          add(*valid[i], "c", os.str(), false);
        }
      }
    } else {
      for (const SampleRow* r : valid) {
        const double play = r->record.metrics.delta_play_pct_h;
        if (play > rules.play_cap_pct_h) {
          std::ostringstream os;
          os << "delta_play " << play << " exceeds the absolute cap "
             << rules.play_cap_pct_h << " (group too small for MAD)";
          add(*r, "d", os.str(), false);
        }
      }
    }
  }

  std::sort(flags.begin(), flags.end(), [](const AnomalyFlag& a, const AnomalyFlag& b) {
    return std::tie(a.device, a.decoder_name, a.asset_name, a.rule) <
           std::tie(b.device, b.decoder_name, b.asset_name, b.rule);
  });
  return flags;
}

void to_json(json& j, const AnomalyFlag& f) {
  j = json{{"sample", json{{"device", f.device},
                           {"model", f.model},
                           {"decoder", f.decoder_name},
                           {"asset", f.asset_name}}},
           {"rule", f.rule},
           {"detail", f.detail},
           {"disposition", to_string(f.disposition)},
           {"auto", f.auto_rule}};
}

void from_json(const json& j, AnomalyFlag& f) {
  const json& s = j.at("sample");
  s.at("device").get_to(f.device);
  s.at("model").get_to(f.model);
  s.at("decoder").get_to(f.decoder_name);
  s.at("asset").get_to(f.asset_name);
  j.at("rule").get_to(f.rule);
  j.at("detail").get_to(f.detail);
  f.disposition = disposition_from_string(j.at("disposition").get<std::string>());
  j.at("auto").get_to(f.auto_rule);
}

std::vector<AnomalyFlag> load_flags(const std::filesystem::path& path) {
  std::vector<AnomalyFlag> flags;
  for (const json& l : jsonl::read_file(path)) flags.push_back(l.get<AnomalyFlag>());
  return flags;
}

void save_flags(const std::filesystem::path& path, const std::vector<AnomalyFlag>& flags) {
  std::vector<json> lines;
  lines.reserve(flags.size());
  for (const auto& f : flags) lines.push_back(json(f));
  jsonl::write_file(path, lines);
}

void apply_review(std::vector<AnomalyFlag>& flags,
                  const std::vector<AnomalyFlag>& reviewed) {
  for (auto& f : flags) {
    if (f.auto_rule) continue; // auto drops are not reviewable
    for (const auto& r : reviewed) {
      if (r.device == f.device && r.decoder_name == f.decoder_name &&
          r.asset_name == f.asset_name && r.rule == f.rule) {
        f.disposition = r.disposition;
        break;
      }
    }
  }
}

static bool row_dropped(const SampleRow& row, const std::vector<AnomalyFlag>& flags) {
  for (const auto& f : flags) {
    if (f.disposition != Disposition::reviewed_drop) continue;
    if (f.device == row.device && f.model == row.model &&
        f.decoder_name == row.record.decoder.name &&
        f.asset_name == row.record.asset.name)
      return true;
  }
  return false;
}

CleanResult clean(const std::vector<SampleRow>& rows, const RulesConfig& rules,
                  const std::vector<AnomalyFlag>& reviewed) {
  CleanResult result;
  result.total = rows.size();
  result.flags = flag_anomalies(rows, rules);
  apply_review(result.flags, reviewed);
  result.finalized =
      std::none_of(result.flags.begin(), result.flags.end(),
                   [](const AnomalyFlag& f) { return f.disposition == Disposition::flagged; });
  for (const auto& row : rows) {
    if (row_dropped(row, result.flags))
      ++result.dropped;
    else
      result.kept.push_back(row);
  }
  return result;
}

static Stat stat_of(const std::vector<double>& xs) {
  Stat s;
  const double n = static_cast<double>(xs.size());
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / n;
  double ss = 0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(ss / n);
  return s;
}

std::vector<ModelAggregate> merge_by_model(const std::vector<SampleRow>& rows,
                                           const RulesConfig& rules,
                                           const std::vector<AnomalyFlag>& reviewed) {
  // apply the drop rules here too, so merge(raw) == merge(clean(raw).kept)
  auto flags = flag_anomalies(rows, rules);
  apply_review(flags, reviewed);

  std::map<std::string, std::vector<const SampleRow*>> groups;
  for (const auto& row : rows) {
    if (row_dropped(row, flags)) continue;
    groups[group_key(row)].push_back(&row);
  }

  std::vector<ModelAggregate> aggs;
  aggs.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    ModelAggregate a;
    const SampleRow& first = *members.front();
    a.model = first.model;
    a.decoder = first.record.decoder;
    a.width = first.record.asset.width;
    a.height = first.record.asset.height;
    a.fps = first.record.asset.fps;
    a.count = static_cast<int>(members.size());
    std::vector<double> play, dec, speed;
    for (const SampleRow* r : members) {
      play.push_back(r->record.metrics.delta_play_pct_h);
      dec.push_back(r->record.metrics.delta_decode_ma);
      speed.push_back(r->record.metrics.speed_fps);
      a.non_realtime = a.non_realtime || r->record.flags.non_realtime;
      a.suspect = a.suspect || r->record.flags.suspect;
    }
    a.delta_play = stat_of(play);
    a.delta_decode = stat_of(dec);
    a.speed = stat_of(speed);
    aggs.push_back(std::move(a));
  }
  std::sort(aggs.begin(), aggs.end(), [](const ModelAggregate& x, const ModelAggregate& y) {
    if (x.model != y.model) return x.model < y.model;
    if (x.decoder.name != y.decoder.name) return x.decoder.name < y.decoder.name;
    return int64_t{x.width} * x.height < int64_t{y.width} * y.height;
  });
  return aggs;
}

void to_json(json& j, const Stat& s) {
  j = json{{"mean", s.mean}, {"stddev", s.stddev}};
}

void from_json(const json& j, Stat& s) {
  j.at("mean").get_to(s.mean);
  j.at("stddev").get_to(s.stddev);
}

void to_json(json& j, const ModelAggregate& a) {
  j = json{{"model", a.model},
           {"decoder", a.decoder},
           {"width", a.width},
           {"height", a.height},
           {"fps", a.fps},
           {"count", a.count},
           {"delta_play", a.delta_play},
           {"delta_decode", a.delta_decode},
           {"speed", a.speed},
           {"non_realtime", a.non_realtime},
           {"suspect", a.suspect}};
}

void from_json(const json& j, ModelAggregate& a) {
  j.at("model").get_to(a.model);
  j.at("decoder").get_to(a.decoder);
  j.at("width").get_to(a.width);
  j.at("height").get_to(a.height);
  j.at("fps").get_to(a.fps);
  j.at("count").get_to(a.count);
  j.at("delta_play").get_to(a.delta_play);
  j.at("delta_decode").get_to(a.delta_decode);
  j.at("speed").get_to(a.speed);
  j.at("non_realtime").get_to(a.non_realtime);
  j.at("suspect").get_to(a.suspect);
}

std::vector<ModelAggregate> load_aggregates(const std::filesystem::path& path) {
  std::vector<ModelAggregate> aggs;
  for (const json& l : jsonl::read_file(path)) aggs.push_back(l.get<ModelAggregate>());
  return aggs;
}

void save_aggregates(const std::filesystem::path& path,
                     const std::vector<ModelAggregate>& aggs) {
  std::vector<json> lines;
  lines.reserve(aggs.size());
  for (const auto& a : aggs) lines.push_back(json(a));
  jsonl::write_file(path, lines);
}

const ModelAggregate* best_cell(const std::vector<const ModelAggregate*>& cells) {
  const ModelAggregate* best = nullptr;
  for (const ModelAggregate* c : cells) {
    if (!best) {
      best = c;
      continue;
    }
    if (c->delta_play.mean != best->delta_play.mean) {
      if (c->delta_play.mean < best->delta_play.mean) best = c;
    } else if (c->speed.mean != best->speed.mean) {
      if (c->speed.mean > best->speed.mean) best = c;
    } else if (c->decoder.name < best->decoder.name) {
      best = c;
    }
  }
  return best;
}

SummaryStatistics summary_statistics(const std::vector<ModelAggregate>& aggs) {
  if (aggs.empty()) throw std::invalid_argument("summary_statistics: no aggregates");
  SummaryStatistics stats;

  // model -> class -> cells
  std::map<std::string, std::map<ResClass, std::vector<const ModelAggregate*>>> by_model;
  std::set<std::string> standards;
  for (const auto& a : aggs) {
    by_model[a.model][a.res_class()].push_back(&a);
    standards.insert(to_string(a.decoder.standard));
  }

  for (ResClass rc : {ResClass::sd, ResClass::hd, ResClass::fhd}) {
    ResolutionStats rs;
    for (const auto& [model, classes] : by_model) {
      const auto it = classes.find(rc);
      if (it == classes.end()) continue;
      ++rs.models;
      const ModelAggregate* win = best_cell(it->second);
      rs.software_best.den += 1;
      if (win->decoder.kind == DecoderKind::software) rs.software_best.num += 1;
      for (const auto& std_name : standards) {
        WinRate& wr = rs.standard_best[std_name];
        wr.den += 1;
        if (std_name == to_string(win->decoder.standard)) wr.num += 1;
      }
    }
    if (rs.models > 0) stats.per_resolution[to_string(rc)] = std::move(rs);
  }

  for (const auto& a : aggs) {
    WinRate& wr = stats.non_realtime_by_standard[to_string(a.decoder.standard)];
    wr.den += 1;
    if (a.non_realtime) wr.num += 1;
  }
  return stats;
}

static json win_rate_json(const WinRate& wr) {
  return json{{"num", wr.num}, {"den", wr.den}, {"rate", wr.rate()}};
}

void save_statistics(const std::filesystem::path& path, const SummaryStatistics& stats) {
  json per_res = json::object();
  for (const auto& [rc, rs] : stats.per_resolution) {
    json standards = json::object();
    for (const auto& [name, wr] : rs.standard_best) standards[name] = win_rate_json(wr);
    per_res[rc] = json{{"models", rs.models},
                       {"software_best", win_rate_json(rs.software_best)},
                       {"standard_best", standards}};
  }
  json non_rt = json::object();
  for (const auto& [name, wr] : stats.non_realtime_by_standard)
    non_rt[name] = win_rate_json(wr);
  const json out{{"per_resolution", per_res}, {"non_realtime_by_standard", non_rt}};
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << out.dump(2) << '\n';
}

} // namespace decwatt::pipeline
