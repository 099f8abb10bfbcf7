#include "decwatt/session.hpp"
#include <cstdio>

#include <algorithm>
#include <cmath>

namespace decwatt::session {

bool SessionCheckpoint::pair_completed(const PairKey& key) const {
  for (const auto& r : records)
    if (r.decoder.name == key.decoder_name && r.asset.name == key.asset_name)
      return true;
  for (const auto& u : untestable)
    if (u.decoder.name == key.decoder_name && u.asset_name == key.asset_name)
      return true;
  return false;
}

std::vector<std::pair<DecoderDescriptor, VideoAsset>> plan_pairs(
    const std::vector<DecoderDescriptor>& decoders,
    const std::vector<VideoAsset>& assets) {
  std::vector<std::pair<DecoderDescriptor, VideoAsset>> pairs;
  for (const auto& d : decoders)
    for (const auto& a : assets)
      if (a.standard == d.standard) pairs.emplace_back(d, a);
  std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
    if (x.first.name != y.first.name) return x.first.name < y.first.name;
    const int64_t px = int64_t{x.second.width} * x.second.height;
    const int64_t py = int64_t{y.second.width} * y.second.height;
    if (px != py) return px < py;
    return x.second.name < y.second.name;
  });
  return pairs;
}

BaselineOutcome measure_screen_baseline(DeviceProbe& probe, const SessionConfig& cfg) {
  BaselineOutcome out;
  {
    const ValidityVerdict v =
        check_validity(probe.profile(), cfg.baseline_min_drop);
    if (!v.ok()) {
      out.status = BaselineOutcome::Status::invalid;
      out.detail = describe(v.violations.front());
      return out;
    }
  }

  double prev_level = probe.battery_level();
  const double t_start = probe.now();
  bool anchored = false;
  double anchor_level = 0, anchor_time = 0;
  double last_transition_time = t_start;

  while (true) {
    if (!probe.alive()) {
      out.status = BaselineOutcome::Status::stalled;
      out.detail = "device powered off during baseline";
      return out;
    }
    if (probe.charging()) {
      out.status = BaselineOutcome::Status::aborted_charging;
      out.detail = "charger attached during baseline";
      return out;
    }
    probe.sleep_for(cfg.poll_interval_s);
    const double level = probe.battery_level();
    const double t = probe.now();

    if (level < prev_level) {
      if (!anchored) {
        // first transition fixes the measurement origin; the partial percent
        // consumed before it is unknown and discarded
        anchored = true;
        anchor_level = level;
        anchor_time = t;
      } else if (anchor_level - level >= cfg.baseline_min_drop) {
        out.status = BaselineOutcome::Status::ok;
        out.delta_screen_pct_h =
            (anchor_level - level) / ((t - anchor_time) / 3600.0);
        return out;
      }
      if (level < 20.0) {
        out.status = BaselineOutcome::Status::battery_window;
        out.detail = "battery level fell below 20% during baseline";
        return out;
      }
      last_transition_time = t;
      prev_level = level;
    }

    if (t - last_transition_time > cfg.transition_timeout_s) {
      if (!anchored) {
        // no discharge observed at all: the display draw is below resolution
        out.status = BaselineOutcome::Status::no_discharge;
        out.delta_screen_pct_h = 0;
        return out;
      }
      out.status = BaselineOutcome::Status::stalled;
      out.detail = "no battery transition within timeout after discharge began";
      return out;
    }
  }
}

MeasureOutcome measure_decoder(DeviceProbe& probe, DecoderHarness& harness,
                               const DecoderDescriptor& decoder,
                               const VideoAsset& asset, double delta_screen_pct_h,
                               const SessionConfig& cfg) {
  MeasureOutcome out;
  if (!harness.open(decoder, asset)) {
    out.status = MeasureOutcome::Status::untestable;
    out.detail = "decoder refused to open";
    return out;
  }
  harness.reset();

  double prev_level = probe.battery_level();
  bool anchored = false;
  double b0 = 0, t0 = 0;
  int64_t frames_at_anchor = 0;
  int64_t total_frames = 0;
  double last_transition_time = probe.now();

  while (true) {
    if (!probe.alive()) {
      harness.close();
      out.status = MeasureOutcome::Status::probe_lost;
      out.detail = "device powered off mid-measurement";
      return out;
    }
    if (probe.charging()) {
      harness.close();
      out.status = MeasureOutcome::Status::suspended_charging;
      out.detail = "charger attached mid-measurement";
      return out;
    }

    const int64_t index = harness.decode_next_frame();
    if (index < 0) {
      harness.close();
      out.status = MeasureOutcome::Status::untestable;
      out.detail = "decoder failed mid-stream";
      return out;
    }
    ++total_frames;

    const double level = probe.battery_level();
    const double t = probe.now();

    if (level < prev_level) {
      last_transition_time = t;
      if (!anchored) {
        anchored = true;
        b0 = level;
        t0 = t;
        frames_at_anchor = total_frames;
      } else if (b0 - level >= cfg.drop_target_pct && level >= 20.0) {
        harness.close();
        MeasurementWindow w;
        w.level_start = b0;
        w.level_end = level;
        w.time_start_s = t0;
        w.time_end_s = t;
        w.seq_frames = asset.n_seq;
        w.iter_start = frames_at_anchor / asset.n_seq;
        w.frame_start = frames_at_anchor % asset.n_seq;
        w.iter_end = total_frames / asset.n_seq;
        w.frame_end = total_frames % asset.n_seq;

        DecoderRecord rec;
        rec.decoder = decoder;
        rec.asset = asset;
        rec.window = w;
        rec.metrics = compute_metrics(w, asset, delta_screen_pct_h,
                                      probe.profile().battery_capacity_mah,
                                      &rec.flags);
        out.status = MeasureOutcome::Status::ok;
        out.record = std::move(rec);
        return out;
      }
      if (level <= 20.0) {
        // the next transition would leave the valid window; park the pair
        harness.close();
        out.status = MeasureOutcome::Status::suspended_low_battery;
        out.detail = "battery reached the 20% floor before the target drop";
        return out;
      }
      prev_level = level;
    }

    if (t - last_transition_time > cfg.transition_timeout_s) {
      harness.close();
      out.status = MeasureOutcome::Status::untestable;
      out.detail = "no battery transition within timeout";
      return out;
    }
  }
}

static std::string derive_campaign_id(const DeviceProfile& p) {
  // stable per device, but never embeds the raw serial (submissions carry the
  // campaign id verbatim and serials must not reach the collector unhashed)
  uint64_t h = 1469598103934665603ull; // FNV-1a
  for (const std::string* part : {&p.serial_number, &p.build_host}) {
    for (char ch : *part) {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ull;
    }
    h ^= 0x1f;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "c-%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CampaignResult run_campaign(DeviceProbe& probe, DecoderHarness& harness,
                            const std::vector<VideoAsset>& assets,
                            const SessionConfig& cfg,
                            std::optional<SessionCheckpoint> checkpoint,
                            const std::function<void(const SessionCheckpoint&)>& persist,
                            int max_new_pairs) {
  if (assets.empty()) throw std::invalid_argument("campaign needs assets");

  CampaignResult result;
  SessionCheckpoint& cp = result.checkpoint;
  if (checkpoint) {
    cp = std::move(*checkpoint);
  } else {
    cp.campaign_id =
        cfg.campaign_id.empty() ? derive_campaign_id(probe.profile()) : cfg.campaign_id;
    cp.drop_target_pct = cfg.drop_target_pct;
    cp.assets = assets;
  }
  cp.in_progress.reset();
  cp.suspend_level_pct = -1;

  const auto save = [&] {
    if (persist) persist(cp);
  };

  if (!cp.delta_screen_pct_h) {
    const BaselineOutcome b = measure_screen_baseline(probe, cfg);
    if (!b.usable()) {
      result.stop = CampaignResult::Stop::baseline_failed;
      result.detail = b.detail;
      save();
      result.submission = Submission{}; // nothing measured yet
      result.submission.campaign_id = cp.campaign_id;
      result.submission.profile = probe.profile();
      result.submission.status = SubmissionStatus::cancelled;
      result.submission.client_time_s = probe.now();
      return result;
    }
    cp.delta_screen_pct_h = b.delta_screen_pct_h;
    save();
  }

  const auto pairs = plan_pairs(harness.decoders(), cp.assets);
  SessionConfig pair_cfg = cfg;
  pair_cfg.drop_target_pct = cp.drop_target_pct;

  result.stop = CampaignResult::Stop::complete;
  int new_pairs = 0;
  for (const auto& [decoder, asset] : pairs) {
    const PairKey key{decoder.name, asset.name};
    if (cp.pair_completed(key)) continue;
    if (max_new_pairs >= 0 && new_pairs >= max_new_pairs) {
      result.stop = CampaignResult::Stop::limit_reached;
      break;
    }

    // high level: idle-wait down into the window rather than giving up
    bool suspended = false;
    while (probe.alive() && !probe.charging() && probe.battery_level() > 95.0)
      probe.sleep_for(cfg.poll_interval_s);
    if (!probe.alive()) {
      result.stop = CampaignResult::Stop::probe_lost;
      suspended = true;
    } else if (probe.charging()) {
      result.stop = CampaignResult::Stop::suspended;
      result.detail = "charger attached";
      suspended = true;
    } else if (probe.battery_level() < 20.0) {
      result.stop = CampaignResult::Stop::suspended;
      result.detail = "battery below 20%, recharge and resume";
      suspended = true;
    }
    if (suspended) {
      cp.in_progress = key;
      cp.suspend_level_pct = probe.battery_level();
      save();
      break;
    }

    const MeasureOutcome m = measure_decoder(probe, harness, decoder, asset,
                                             *cp.delta_screen_pct_h, pair_cfg);
    ++new_pairs;
    switch (m.status) {
      case MeasureOutcome::Status::ok:
        cp.records.push_back(*m.record);
        save();
        break;
      case MeasureOutcome::Status::untestable:
        cp.untestable.push_back({decoder, asset.name, m.detail});
        save();
        break;
      case MeasureOutcome::Status::suspended_low_battery:
      case MeasureOutcome::Status::suspended_charging:
        result.stop = CampaignResult::Stop::suspended;
        result.detail = m.detail;
        cp.in_progress = key;
        cp.suspend_level_pct = probe.battery_level();
        save();
        break;
      case MeasureOutcome::Status::probe_lost:
        result.stop = CampaignResult::Stop::probe_lost;
        result.detail = m.detail;
        cp.in_progress = key;
        save();
        break;
    }
    if (result.stop != CampaignResult::Stop::complete &&
        result.stop != CampaignResult::Stop::limit_reached)
      break;
  }

  size_t completed = 0;
  for (const auto& [decoder, asset] : pairs)
    if (cp.pair_completed({decoder.name, asset.name})) ++completed;

  Submission& s = result.submission;
  s.campaign_id = cp.campaign_id;
  s.profile = probe.profile();
  s.records = cp.records;
  s.untestable = cp.untestable;
  s.completeness =
      pairs.empty() ? 0.0
                    : static_cast<double>(completed) / static_cast<double>(pairs.size());
  s.status = completed == pairs.size() && !pairs.empty()
                 ? SubmissionStatus::complete
                 : SubmissionStatus::partial;
  s.client_time_s = probe.now();
  return result;
}

} // namespace decwatt::session
