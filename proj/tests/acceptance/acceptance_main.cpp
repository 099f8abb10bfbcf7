// Acceptance suite: one pass/fail line per criterion.
//
//   1. formula unit suite (hand arithmetic to 1e-12, exact clamp boundary)
//   2. estimator vs simulator oracle across a noise-free config sweep
//   3. same-model twin devices: spread, device gap, level independence
//   4. checkpoint-interrupted campaign equals the uninterrupted run, byte for byte
//   5. collector store: replay identity, concurrent ingest, dedup uniqueness
//   6. pipeline win rates / rankings / means against brute-force oracles
//   7. report outputs deterministic; every plotted value present in the CSV

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "decwatt/collector.hpp"
#include "decwatt/json_io.hpp"
#include "decwatt/metrics.hpp"
#include "decwatt/pipeline.hpp"
#include "decwatt/report.hpp"
#include "decwatt/session.hpp"
#include "decwatt/sim.hpp"

using namespace decwatt;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Criterion {
public:
  Criterion(int number, std::string title)
      : number_(number), title_(std::move(title)),
        start_(std::chrono::steady_clock::now()) {}

  void require(bool ok, const std::string& what) {
    if (!ok) problems_.push_back(what);
  }

  void finish() {
    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start_)
                             .count();
    std::ostringstream line;
    line.precision(2);
    line << std::fixed;
    if (problems_.empty()) {
      line << "[PASS] criterion " << number_ << ": " << title_ << " (" << elapsed
           << " s)";
    } else {
      ++g_failures;
      line << "[FAIL] criterion " << number_ << ": " << title_ << " ("
           << problems_.size() << " problem(s), " << elapsed << " s)";
      for (const auto& p : problems_) line << "\n        - " << p;
    }
    std::cout << line.str() << "\n";
  }

private:
  int number_;
  std::string title_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> problems_;
};

bool rel_close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({std::fabs(a), std::fabs(b), 1e-30});
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

fs::path scratch_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("decwatt_acc_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

VideoAsset make_asset(const std::string& name, Standard std, int w, int h) {
  VideoAsset a;
  a.name = name;
  a.width = w;
  a.height = h;
  a.fps = 25;
  a.n_seq = 500;
  a.standard = std;
  return a;
}

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
      for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0;
  return sxy / std::sqrt(sxx * syy);
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

// ---------------------------------------------------------------------------
// criterion 1
// ---------------------------------------------------------------------------

void criterion_1_formulas() {
  Criterion c(1, "formula unit suite matches hand arithmetic at 1e-12");

  MeasurementWindow w;
  w.level_start = 80;
  w.level_end = 77;
  w.time_start_s = 100;
  w.time_end_s = 184;
  w.iter_start = 2;
  w.iter_end = 10;
  w.frame_start = 100;
  w.frame_end = 300;
  w.seq_frames = 500;
  c.require(rel_close(compute_delta_seq(w), 3.0 / 4200.0 * 500.0, 1e-12),
            "delta_seq hand example");
  c.require(rel_close(compute_decode_speed(w), 50.0, 1e-12), "speed hand example");

  MeasurementWindow one = w;
  one.level_start = 80;
  one.level_end = 79;
  one.iter_start = 0;
  one.iter_end = 1;
  one.frame_start = 0;
  one.frame_end = 0;
  c.require(compute_delta_seq(one) == 1.0, "one-sequence identity is exact");

  MeasurementWindow degenerate = w;
  degenerate.iter_end = degenerate.iter_start;
  degenerate.frame_end = degenerate.frame_start;
  bool threw = false;
  try {
    compute_delta_seq(degenerate);
  } catch (const InvalidWindow&) {
    threw = true;
  }
  c.require(threw, "zero denominator raises invalid-window");

  const VideoAsset asset = make_asset("seq", Standard::h264, 640, 480);
  c.require(rel_close(compute_delta_play(0.05, 50.0, asset, 2.0).delta_play_pct_h,
                      10.0, 1e-12),
            "delta_play hand example");
  c.require(compute_delta_play(0.05, 25.0, asset, 2.0).delta_play_pct_h ==
                0.05 * (25.0 / 500.0) * 3600.0,
            "compensation clamp exact at speed == fps");
  const auto below = compute_delta_play(0.05, 20.0, asset, 2.0);
  c.require(below.delta_play_pct_h == 0.05 * (25.0 / 500.0) * 3600.0 &&
                below.non_realtime,
            "clamp at zero below fps, flagged non-realtime");
  c.require(rel_close(compute_delta_decode(0.05, 50.0, asset, 2.0, 4000.0).delta_decode_ma,
                      640.0, 1e-12),
            "delta_decode hand example");

  DeviceProfile p;
  p.battery_capacity_mah = 4000;
  p.battery_level_pct = 96;
  c.require(!check_validity(p, 3.0).ok(), "96% level violates the window");
  p.battery_level_pct = 19;
  c.require(!check_validity(p, 3.0).ok(), "19% level violates the window");
  p.battery_level_pct = 50;
  c.require(check_validity(p, 3.0).ok(), "50%, autonomous, 3% drop is valid");

  c.finish();
}

// ---------------------------------------------------------------------------
// criterion 2
// ---------------------------------------------------------------------------

sim::SimConfig sweep_config(double capacity, double decode_ma, double speed_fps) {
  sim::SimConfig cfg;
  cfg.profile.model = "Sweep Phone";
  cfg.profile.manufacturer = "AcceptWorks";
  cfg.profile.serial_number = "SN-SWEEP";
  cfg.profile.build_host = "accept-host";
  cfg.profile.battery_capacity_mah = capacity;
  cfg.profile.voltage_v = 3.8;
  cfg.profile.os_version = "Android 11";
  cfg.initial_charge_mah = capacity * 0.9;
  cfg.screen_current_ma = 80;
  sim::SimDecoderEntry d;
  d.decoder = {"hw.sweep", Standard::h264, DecoderKind::hardware, "AcceptSilicon"};
  d.decode_current_ma = decode_ma;
  d.true_speed_fps = speed_fps;
  cfg.decoders.push_back(d);
  return cfg;
}

void criterion_2_estimator_vs_oracle() {
  Criterion c(2, "estimator recovers simulator ground truth across the sweep");
  const VideoAsset asset = make_asset("seq_h264_sd", Standard::h264, 640, 480);
  session::SessionConfig scfg;
  scfg.drop_target_pct = 3.0;

  int configs = 0;
  for (double decode_ma : {50.0, 200.0, 400.0, 600.0, 800.0}) {
    for (double speed : {10.0, 60.0, 240.0}) {
      for (double capacity : {2000.0, 6000.0}) {
        ++configs;
        const sim::SimConfig cfg = sweep_config(capacity, decode_ma, speed);
        sim::SimDevice dev(cfg);
        const std::string tag = "I_d=" + fmt(decode_ma) + " v=" + fmt(speed) +
                                " cap=" + fmt(capacity);

        const auto baseline = session::measure_screen_baseline(dev, scfg);
        if (baseline.status != session::BaselineOutcome::Status::ok) {
          c.require(false, tag + ": baseline failed");
          continue;
        }
        const auto m = session::measure_decoder(dev, dev, cfg.decoders[0].decoder,
                                                asset, baseline.delta_screen_pct_h,
                                                scfg);
        if (m.status != session::MeasureOutcome::Status::ok) {
          c.require(false, tag + ": measurement failed (" + m.detail + ")");
          continue;
        }
        const PowerMetrics truth = sim::ground_truth(cfg, "hw.sweep", asset);
        const PowerMetrics& est = m.record->metrics;
        c.require(rel_close(est.delta_decode_ma, truth.delta_decode_ma, 0.01),
                  tag + ": delta_decode " + fmt(est.delta_decode_ma) + " vs " +
                      fmt(truth.delta_decode_ma));
        c.require(std::fabs(est.speed_fps - truth.speed_fps) <= 0.5,
                  tag + ": speed " + fmt(est.speed_fps) + " vs " +
                      fmt(truth.speed_fps));
        c.require(rel_close(est.delta_play_pct_h, truth.delta_play_pct_h, 0.01),
                  tag + ": delta_play " + fmt(est.delta_play_pct_h) + " vs " +
                      fmt(truth.delta_play_pct_h));
      }
    }
  }
  c.require(configs >= 20, "sweep covers at least 20 configs");
  c.finish();
}

// ---------------------------------------------------------------------------
// criterion 3
// ---------------------------------------------------------------------------

void criterion_3_twins(const fs::path& data_dir) {
  Criterion c(3, "same-model twins: spread <= 0.5 %/h, gap <= 0.05 %/h, no level trend");
  const VideoAsset asset = make_asset("shakewalk_h264_sd", Standard::h264, 640, 480);
  session::SessionConfig scfg;
  scfg.drop_target_pct = 3.0;

  std::vector<double> start_levels;
  for (int i = 0; i < 10; ++i) start_levels.push_back(90.0 - 7.0 * i); // 90 .. 27

  std::vector<std::vector<double>> plays(2);
  std::vector<double> means(2, 0.0);
  for (int which = 0; which < 2; ++which) {
    const fs::path cfg_path =
        data_dir / "sim" / (which == 0 ? "twin_a.json" : "twin_b.json");
    const sim::SimConfig cfg = sim::load_sim_config(cfg_path);
    sim::SimDevice dev(cfg);

    const auto baseline = session::measure_screen_baseline(dev, scfg);
    if (baseline.status != session::BaselineOutcome::Status::ok) {
      c.require(false, "twin baseline failed");
      continue;
    }
    for (double level : start_levels) {
      dev.recharge_to_level(level + 0.5);
      const auto m = session::measure_decoder(dev, dev, cfg.decoders[0].decoder, asset,
                                              baseline.delta_screen_pct_h, scfg);
      if (m.status != session::MeasureOutcome::Status::ok) {
        c.require(false, "twin run failed at level " + fmt(level));
        continue;
      }
      plays[which].push_back(m.record->metrics.delta_play_pct_h);
    }
    if (plays[which].size() != start_levels.size()) continue;

    const double spread = stddev_of(plays[which]);
    means[which] = mean_of(plays[which]);
    c.require(spread <= 0.5,
              "per-device delta_play stddev " + fmt(spread) + " exceeds 0.5 %/h");
    const double rho = spearman(start_levels, plays[which]);
    c.require(std::fabs(rho) < 0.3,
              "delta_play trends with battery level (|rho| = " + fmt(std::fabs(rho)) +
                  ")");
  }
  if (plays[0].size() == start_levels.size() &&
      plays[1].size() == start_levels.size()) {
    const double gap = std::fabs(means[0] - means[1]);
    c.require(gap <= 0.05, "inter-device mean gap " + fmt(gap) + " exceeds 0.05 %/h");
  }
  c.finish();
}

// ---------------------------------------------------------------------------
// criterion 4
// ---------------------------------------------------------------------------

void criterion_4_checkpoint(const fs::path& data_dir) {
  Criterion c(4, "interrupted+resumed campaign is byte-identical to uninterrupted");
  const sim::SimConfig cfg = sim::load_sim_config(data_dir / "sim" / "demo.json");

  std::vector<VideoAsset> assets;
  for (const auto& entry : fs::directory_iterator(data_dir / "assets")) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    assets.push_back(json::parse(in).get<VideoAsset>());
  }
  std::sort(assets.begin(), assets.end(),
            [](const VideoAsset& a, const VideoAsset& b) { return a.name < b.name; });

  session::SessionConfig scfg;
  scfg.drop_target_pct = 3.0;

  sim::SimDevice straight(cfg);
  const auto full = session::run_campaign(straight, straight, assets, scfg);
  c.require(full.stop == session::CampaignResult::Stop::complete,
            "uninterrupted campaign completes");

  const fs::path cp_path = scratch_dir("checkpoint") / "campaign.ckpt";
  const auto persist = [&](const session::SessionCheckpoint& cp) {
    session::save_checkpoint(cp_path, cp);
  };

  sim::SimDevice chopped(cfg);
  session::CampaignResult step;
  std::optional<session::SessionCheckpoint> cp;
  int invocations = 0;
  while (true) {
    ++invocations;
    if (invocations > 64) break;
    step = session::run_campaign(chopped, chopped, assets, scfg, cp, persist, 1);
    if (step.stop == session::CampaignResult::Stop::complete) break;
    if (step.stop != session::CampaignResult::Stop::limit_reached) {
      c.require(false, "interrupted campaign stopped unexpectedly: " + step.detail);
      break;
    }
    cp = session::load_checkpoint(cp_path); // resume strictly from the file
  }
  c.require(step.stop == session::CampaignResult::Stop::complete,
            "interrupted campaign completes after resumes");
  c.require(invocations > static_cast<int>(assets.size() / 2),
            "campaign was actually interrupted at pair boundaries");

  const std::string a = json(full.submission).dump();
  const std::string b = json(step.submission).dump();
  c.require(a == b, "submissions are byte-identical");
  c.require(full.submission.completeness == 1.0, "campaign covered every pair");
  c.finish();
}

// ---------------------------------------------------------------------------
// criterion 5
// ---------------------------------------------------------------------------

session::Submission synth_submission(uint64_t key_id, double completeness) {
  session::Submission s;
  s.campaign_id = "campaign-" + std::to_string(key_id);
  s.profile.model = "Model " + std::to_string(key_id % 147);
  s.profile.manufacturer = "AcceptWorks";
  s.profile.serial_number = "SN-" + std::to_string(key_id);
  s.profile.build_host = "host" + std::to_string(key_id % 9);
  s.profile.battery_capacity_mah = 3000 + static_cast<double>(key_id % 5) * 500;
  s.profile.voltage_v = 3.8;
  s.profile.battery_level_pct = 50;
  s.profile.os_version = "Android 11";

  session::DecoderRecord rec;
  rec.decoder = {"hw.h264", Standard::h264, DecoderKind::hardware, "AcceptSilicon"};
  rec.asset = make_asset("seq_h264_sd", Standard::h264, 640, 480);
  rec.window.level_start = 80;
  rec.window.level_end = 77;
  rec.window.time_start_s = 0;
  rec.window.time_end_s = 84;
  rec.window.iter_start = 0;
  rec.window.iter_end = 8;
  rec.window.frame_start = 100;
  rec.window.frame_end = 300;
  rec.window.seq_frames = 500;
  RecordFlags flags;
  rec.metrics = compute_metrics(rec.window, rec.asset, 2.0,
                                s.profile.battery_capacity_mah, &flags);
  rec.flags = flags;
  s.records.push_back(std::move(rec));

  s.completeness = completeness;
  s.status = completeness >= 1.0 ? session::SubmissionStatus::complete
                                 : session::SubmissionStatus::partial;
  s.client_time_s = 1000 + static_cast<double>(key_id);
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void criterion_5_server() {
  Criterion c(5, "collector: replay identity, concurrent ingest, dedup uniqueness");

  // 10k-submission deterministic workload over ~1000 device identities
  const size_t total = 10000;
  std::vector<std::string> workload;
  workload.reserve(total);
  std::mt19937_64 rng(2024);
  for (size_t i = 0; i < total; ++i) {
    if (i % 97 == 0) {
      workload.push_back("{\"broken\":" + std::to_string(i)); // malformed
      continue;
    }
    const uint64_t key = rng() % 1000;
    const double completeness = static_cast<double>(rng() % 101) / 100.0;
    workload.push_back(json(synth_submission(key, completeness)).dump());
  }

  collect::CollectorStore store_a(scratch_dir("store_a"), "acc-salt");
  for (const auto& body : workload) store_a.ingest_json(body);
  store_a.sync_index();

  collect::CollectorStore store_b(scratch_dir("store_b"), "acc-salt");
  store_b.replay_log(store_a.log_path());
  store_b.sync_index();
  c.require(slurp(store_b.log_path()) == slurp(store_a.log_path()),
            "replayed ingest log is byte-identical");
  c.require(slurp(store_b.index_path()) == slurp(store_a.index_path()),
            "replayed index is byte-identical");

  collect::CollectorStore store_c(scratch_dir("store_c"), "acc-salt");
  store_c.replay_log(store_b.log_path());
  store_c.sync_index();
  c.require(slurp(store_c.index_path()) == slurp(store_a.index_path()),
            "re-replay is a fixed point");

  // concurrent ingest: 8 writers, readers checking dedup uniqueness live
  collect::CollectorStore store_d(scratch_dir("store_d"), "acc-salt");
  const size_t writers = 8;
  std::vector<std::thread> threads;
  std::atomic<bool> done{false};
  std::atomic<int> uniqueness_violations{0};
  for (size_t t = 0; t < writers; ++t) {
    threads.emplace_back([&, t] {
      for (size_t i = t; i < total; i += writers) store_d.ingest_json(workload[i]);
    });
  }
  std::vector<std::thread> readers;
  for (int r = 0; r < 2; ++r) {
    readers.emplace_back([&] {
      while (!done.load()) {
        const auto rows = store_d.completeness_report();
        std::set<std::pair<std::string, std::string>> keys;
        for (const auto& row : rows)
          if (!keys.insert({row.serial_prefix, row.build_host}).second)
            uniqueness_violations.fetch_add(1);
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
      }
    });
  }
  for (auto& th : threads) th.join();
  done.store(true);
  for (auto& th : readers) th.join();
  store_d.sync_index();
  c.require(uniqueness_violations.load() == 0,
            "at most one accepted sample per (serial, build host) at all times");

  // the concurrent log is a witness sequential order: replaying it must
  // reproduce the concurrent store's final state exactly
  collect::CollectorStore store_e(scratch_dir("store_e"), "acc-salt");
  store_e.replay_log(store_d.log_path());
  store_e.sync_index();
  c.require(slurp(store_e.index_path()) == slurp(store_d.index_path()),
            "concurrent result matches its sequential witness order");
  c.require(store_d.sample_count() == store_a.sample_count(),
            "concurrent and sequential runs accept the same identity set");
  c.finish();
}

// ---------------------------------------------------------------------------
// criterion 6
// ---------------------------------------------------------------------------

pipeline::SampleRow oracle_row(const std::string& model, const std::string& device,
                               const std::string& decoder, DecoderKind kind,
                               Standard std, int width, int height, double play,
                               double speed) {
  const double drop = 3.0;
  const int64_t n_seq = 500;
  const int64_t frames =
      static_cast<int64_t>(std::llround(drop * n_seq * 180.0 / play));
  pipeline::SampleRow row;
  row.model = model;
  row.device = device;
  row.build_host = "host";
  row.capacity_mah = 4000;
  row.record.decoder = {decoder, std, kind, "AcceptSilicon"};
  row.record.asset = make_asset("seq", std, width, height);
  MeasurementWindow& w = row.record.window;
  w.level_start = 80;
  w.level_end = 80 - drop;
  w.time_start_s = 0;
  w.time_end_s = static_cast<double>(frames) / speed;
  w.iter_start = 0;
  w.iter_end = frames / n_seq;
  w.frame_start = 0;
  w.frame_end = frames % n_seq;
  w.seq_frames = n_seq;
  RecordFlags flags;
  row.record.metrics = compute_metrics(w, row.record.asset, 0.0, 4000, &flags);
  row.record.flags = flags;
  return row;
}

struct Fixture {
  std::vector<pipeline::SampleRow> rows;
  std::set<std::string> planted_outlier_devices;
};

Fixture crafted_fixture() {
  Fixture f;
  // 10 models with H.264 and MPEG-4 hardware decoders at sd and hd; the
  // MPEG-4 decoder wins on exactly 3 models at each resolution
  for (int m = 0; m < 10; ++m) {
    const std::string model = "Model " + std::to_string(m);
    const bool wins = m < 3;
    for (int res = 0; res < 2; ++res) {
      const int width = res == 0 ? 640 : 1280;
      const int height = res == 0 ? 480 : 720;
      for (int dev = 0; dev < 3; ++dev) {
        const std::string device =
            "dev-" + std::to_string(m) + "-" + std::to_string(dev);
        const double jitter = 0.3 * dev;
        f.rows.push_back(oracle_row(model, device, "hw.h264", DecoderKind::hardware,
                                    Standard::h264, width, height,
                                    (wins ? 12.0 : 8.0) + jitter, 90));
        f.rows.push_back(oracle_row(model, device, "hw.mpeg4", DecoderKind::hardware,
                                    Standard::mpeg4, width, height,
                                    (wins ? 8.0 : 12.0) + jitter, 80));
      }
    }
  }
  // planted MAD outliers: two cells blown far out of their triplet
  pipeline::SampleRow out1 = oracle_row("Model 1", "dev-1-2x", "hw.h264",
                                        DecoderKind::hardware, Standard::h264, 640,
                                        480, 95.0, 90);
  pipeline::SampleRow out2 = oracle_row("Model 4", "dev-4-2x", "hw.mpeg4",
                                        DecoderKind::hardware, Standard::mpeg4, 1280,
                                        720, 120.0, 80);
  f.planted_outlier_devices = {out1.device, out2.device};
  f.rows.push_back(std::move(out1));
  f.rows.push_back(std::move(out2));
  return f;
}

void criterion_6_pipeline(std::vector<pipeline::ModelAggregate>& aggs_out) {
  Criterion c(6, "pipeline win rates, rankings and means match brute-force oracles");
  const Fixture fixture = crafted_fixture();
  const pipeline::RulesConfig rules;

  // MAD rule flags exactly the planted outliers
  const auto flags = pipeline::flag_anomalies(fixture.rows, rules);
  std::set<std::string> flagged;
  for (const auto& f : flags) {
    if (f.rule == "c")
      flagged.insert(f.device);
    else
      c.require(false, "unexpected rule " + f.rule + " fired");
  }
  c.require(flagged == fixture.planted_outlier_devices,
            "rule (c) flagged exactly the planted outliers");

  // operator drops the outliers; merge
  auto reviewed = flags;
  for (auto& f : reviewed) f.disposition = pipeline::Disposition::reviewed_drop;
  const auto aggs = pipeline::merge_by_model(fixture.rows, rules, reviewed);

  // brute-force mean recompute
  for (const auto& a : aggs) {
    std::vector<double> plays;
    for (const auto& row : fixture.rows) {
      if (fixture.planted_outlier_devices.count(row.device)) continue;
      if (row.model == a.model && row.record.decoder.name == a.decoder.name &&
          row.record.asset.width == a.width)
        plays.push_back(row.record.metrics.delta_play_pct_h);
    }
    c.require(static_cast<int>(plays.size()) == a.count, "aggregate count matches");
    if (!plays.empty())
      c.require(rel_close(mean_of(plays), a.delta_play.mean, 1e-12),
                "aggregate mean recomputes at 1e-12 for " + a.model + "/" +
                    a.decoder.name);
  }

  // brute-force win counting per resolution class
  const auto stats = pipeline::summary_statistics(aggs);
  for (const char* res : {"sd", "hd"}) {
    std::map<std::string, std::pair<double, std::string>> best;
    for (const auto& a : aggs) {
      if (std::string(to_string(a.res_class())) != res) continue;
      auto it = best.find(a.model);
      if (it == best.end() || a.delta_play.mean < it->second.first)
        best[a.model] = {a.delta_play.mean, to_string(a.decoder.standard)};
    }
    int mpeg4 = 0, h264 = 0;
    for (const auto& [model, win] : best) {
      if (win.second == "MPEG-4") ++mpeg4;
      if (win.second == "H.264") ++h264;
    }
    const auto& rs = stats.per_resolution.at(res);
    c.require(rs.standard_best.at("MPEG-4").num == mpeg4,
              std::string(res) + ": MPEG-4 wins match the counting oracle");
    c.require(rs.standard_best.at("H.264").num == h264,
              std::string(res) + ": H.264 wins match the counting oracle");
    c.require(rs.standard_best.at("MPEG-4").num == 3,
              std::string(res) + ": exactly 3 planted MPEG-4 wins");
    c.require(rs.standard_best.at("MPEG-4").den == 10, "10 models counted");
    c.require(rel_close(rs.standard_best.at("MPEG-4").rate(), 0.30, 1e-12),
              "MPEG-4 win rate 0.30");
    c.require(rs.software_best.num == 0, "no software decoders in this fixture");
  }

  // brute-force top-N: an independent sort over model-best cells
  for (const auto metric : {report::Metric::play, report::Metric::decode}) {
    const auto value_of = [metric](const pipeline::ModelAggregate& a) {
      return metric == report::Metric::play ? a.delta_play.mean : a.delta_decode.mean;
    };
    std::map<std::string, const pipeline::ModelAggregate*> best;
    for (const auto& a : aggs) {
      if (a.res_class() != ResClass::sd) continue;
      auto it = best.find(a.model);
      if (it == best.end()) {
        best[a.model] = &a;
        continue;
      }
      const auto* cur = it->second;
      if (std::make_tuple(value_of(a), -a.speed.mean, a.decoder.name) <
          std::make_tuple(value_of(*cur), -cur->speed.mean, cur->decoder.name))
        it->second = &a;
    }
    std::vector<const pipeline::ModelAggregate*> expected;
    for (const auto& [model, cell] : best) expected.push_back(cell);
    std::stable_sort(expected.begin(), expected.end(),
                     [&](const auto* x, const auto* y) {
                       return std::make_tuple(value_of(*x), -x->speed.mean,
                                              x->decoder.name, x->model) <
                              std::make_tuple(value_of(*y), -y->speed.mean,
                                              y->decoder.name, y->model);
                     });
    const size_t n = 5;
    const auto rows = report::top_ranking(aggs, metric, ResClass::sd, static_cast<int>(n));
    c.require(rows.size() == std::min(n, expected.size()), "top-N row count");
    for (size_t i = 0; i < rows.size(); ++i) {
      c.require(rows[i].model == expected[i]->model &&
                    rows[i].decoder.name == expected[i]->decoder.name,
                "top-N row " + std::to_string(i) + " matches the sorting oracle");
      c.require(rows[i].rank == static_cast<int>(i) + 1, "ranks contiguous from 1");
    }
  }

  aggs_out = aggs;
  c.finish();
}

// ---------------------------------------------------------------------------
// criterion 7
// ---------------------------------------------------------------------------

void criterion_7_reports(const std::vector<pipeline::ModelAggregate>& aggs) {
  Criterion c(7, "reports are byte-deterministic; every plotted value is in the CSV");

  const auto rows = report::top_ranking(aggs, report::Metric::play, ResClass::sd, 30);
  const std::string csv1 = report::ranking_csv(rows, report::Metric::play);
  const std::string svg1 = report::ranking_svg(rows, report::Metric::play, ResClass::sd);
  c.require(csv1 == report::ranking_csv(report::top_ranking(aggs, report::Metric::play,
                                                            ResClass::sd, 30),
                                        report::Metric::play),
            "ranking CSV identical across runs");
  c.require(svg1 == report::ranking_svg(rows, report::Metric::play, ResClass::sd),
            "ranking SVG identical across runs");

  const auto rating = report::model_rating(aggs, "Model 1");
  const std::string rating_csv1 = report::rating_csv(rating);
  const std::string rating_svg1 = report::rating_svg(rating);
  c.require(rating_csv1 == report::rating_csv(report::model_rating(aggs, "Model 1")),
            "rating CSV identical across runs");

  const auto scatter = report::power_speed_scatter(aggs, "Model 1");
  const std::string scatter_csv1 = report::scatter_csv(scatter);
  const std::string scatter_svg1 = report::scatter_svg(scatter);
  c.require(scatter_svg1 ==
                report::scatter_svg(report::power_speed_scatter(aggs, "Model 1")),
            "scatter SVG identical across runs");

  // every numeric value appearing in an SVG data element must be in the CSV
  const auto check_titles = [&](const std::string& svg, const std::string& csv,
                                const std::string& what) {
    const std::regex title_re("<title>([^<]*)</title>");
    const std::regex num_re("-?[0-9]+(\\.[0-9]+)?([eE][-+]?[0-9]+)?");
    size_t values = 0;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), title_re);
         it != std::sregex_iterator(); ++it) {
      const std::string title = (*it)[1].str();
      for (auto nit = std::sregex_iterator(title.begin(), title.end(), num_re);
           nit != std::sregex_iterator(); ++nit) {
        ++values;
        const std::string value = nit->str();
        c.require(csv.find(value) != std::string::npos,
                  what + ": plotted value " + value + " missing from the CSV");
      }
    }
    c.require(values > 0, what + ": chart carries data values");
  };
  check_titles(svg1, csv1, "ranking");
  check_titles(rating_svg1, rating_csv1, "rating");
  check_titles(scatter_svg1, scatter_csv1, "scatter");
  c.finish();
}

} // namespace

int main(int argc, char** argv) {
  const fs::path data_dir = argc > 1 ? fs::path(argv[1]) : fs::path("data");
  std::cout << "decwatt acceptance suite (data: " << data_dir.string() << ")\n";

  criterion_1_formulas();
  criterion_2_estimator_vs_oracle();
  criterion_3_twins(data_dir);
  criterion_4_checkpoint(data_dir);
  criterion_5_server();
  std::vector<pipeline::ModelAggregate> aggs;
  criterion_6_pipeline(aggs);
  criterion_7_reports(aggs);

  if (g_failures == 0) {
    std::cout << "all acceptance criteria passed\n";
    return 0;
  }
  std::cout << g_failures << " criterion(s) failed\n";
  return 1;
}
