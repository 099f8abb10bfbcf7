// decwatt-session: drive a measurement campaign on a (simulated or trace)
// device, checkpointing at every pair boundary and emitting a submission.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>

#include <httplib.h>

#include "decwatt/json_io.hpp"
#include "decwatt/session.hpp"
#include "decwatt/sim.hpp"
#include "decwatt/trace.hpp"

namespace fs = std::filesystem;
using namespace decwatt;

namespace {

struct Device {
  std::unique_ptr<sim::SimDevice> sim_dev;
  std::unique_ptr<trace::TraceDevice> trace_dev;
  session::DeviceProbe* probe = nullptr;
  session::DecoderHarness* harness = nullptr;
};

Device make_device(const std::string& sim_path, const std::string& trace_path) {
  Device d;
  if (!trace_path.empty()) {
    d.trace_dev = std::make_unique<trace::TraceDevice>(trace::load_trace(trace_path));
    d.probe = d.trace_dev.get();
    d.harness = d.trace_dev.get();
  } else {
    d.sim_dev = std::make_unique<sim::SimDevice>(sim::load_sim_config(sim_path));
    d.probe = d.sim_dev.get();
    d.harness = d.sim_dev.get();
  }
  return d;
}

std::vector<VideoAsset> load_assets(const fs::path& dir) {
  std::vector<VideoAsset> assets;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    assets.push_back(json::parse(in).get<VideoAsset>());
  }
  std::sort(assets.begin(), assets.end(),
            [](const VideoAsset& a, const VideoAsset& b) { return a.name < b.name; });
  if (assets.empty())
    throw std::runtime_error("no asset descriptions (*.json) in " + dir.string());
  return assets;
}

int emit_submission(const session::Submission& sub, const std::string& out_path,
                    const std::string& server_url) {
  const std::string body = json(sub).dump();
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::trunc);
    out << body << '\n';
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 1;
    }
    std::cerr << "submission written to " << out_path << "\n";
  } else {
    std::cout << body << "\n";
  }
  if (!server_url.empty()) {
    httplib::Client client(server_url);
    auto res = client.Post("/v1/submissions", body, "application/json");
    if (!res) {
      std::cerr << "error: cannot reach collector at " << server_url << "\n";
      return 1;
    }
    std::cerr << "collector verdict: " << res->body << "\n";
    if (res->status != 200) return 1;
  }
  return 0;
}

int finish(const session::CampaignResult& result, const std::string& out_path,
           const std::string& server_url) {
  using Stop = session::CampaignResult::Stop;
  switch (result.stop) {
    case Stop::complete:
      std::cerr << "campaign complete: " << result.submission.records.size()
                << " records, completeness " << result.submission.completeness << "\n";
      break;
    case Stop::suspended:
      std::cerr << "campaign suspended (" << result.detail
                << "); recharge and run `decwatt-session resume`\n";
      break;
    case Stop::probe_lost:
      std::cerr << "device lost mid-campaign (" << result.detail
                << "); partial submission emitted\n";
      break;
    case Stop::limit_reached:
      std::cerr << "pair limit reached; checkpoint saved\n";
      break;
    case Stop::baseline_failed:
      std::cerr << "screen baseline failed: " << result.detail << "\n";
      return 1;
  }
  return emit_submission(result.submission, out_path, server_url);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"battery-transition power measurement campaigns"};
  app.require_subcommand(1);

  std::string assets_dir, checkpoint_path, sim_path, trace_path;
  std::string out_path, server_url, campaign_id;
  double drop = 3.0;
  double poll_interval = 1.0;
  int limit = -1;

  auto add_device_opts = [&](CLI::App* cmd) {
    cmd->add_option("--sim", sim_path, "simulated device config (JSON)");
    cmd->add_option("--trace", trace_path, "replay device trace (JSONL)");
  };

  CLI::App* run = app.add_subcommand("run", "start a campaign");
  run->add_option("--assets", assets_dir, "directory of asset descriptions")->required();
  run->add_option("--drop", drop, "battery drop target per pair, percent");
  run->add_option("--checkpoint", checkpoint_path, "checkpoint file path");
  run->add_option("--out", out_path, "write the submission here (default stdout)");
  run->add_option("--server", server_url, "POST the submission to this collector");
  run->add_option("--campaign", campaign_id, "campaign id (default serial:host)");
  run->add_option("--limit", limit, "measure at most N new pairs this invocation");
  run->add_option("--poll", poll_interval, "probe poll interval, seconds");
  add_device_opts(run);

  CLI::App* resume = app.add_subcommand("resume", "continue from a checkpoint");
  resume->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  resume->add_option("--out", out_path, "write the submission here (default stdout)");
  resume->add_option("--server", server_url, "POST the submission to this collector");
  resume->add_option("--limit", limit, "measure at most N new pairs this invocation");
  resume->add_option("--poll", poll_interval, "probe poll interval, seconds");
  add_device_opts(resume);

  CLI::App* baseline = app.add_subcommand("baseline", "measure the screen baseline");
  baseline->add_option("--min-drop", drop, "integer transitions to observe");
  baseline->add_option("--poll", poll_interval, "probe poll interval, seconds");
  add_device_opts(baseline);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_path.empty() && trace_path.empty()) {
      std::cerr << "error: need --sim <config> or --trace <file> (this build has no "
                   "hardware probe)\n";
      return 1;
    }
    Device device = make_device(sim_path, trace_path);

    session::SessionConfig cfg;
    cfg.drop_target_pct = drop;
    cfg.baseline_min_drop = 3.0;
    cfg.poll_interval_s = poll_interval;
    cfg.campaign_id = campaign_id;

    if (baseline->parsed()) {
      cfg.baseline_min_drop = drop;
      const auto b = session::measure_screen_baseline(*device.probe, cfg);
      if (!b.usable()) {
        std::cerr << "baseline failed: " << b.detail << "\n";
        return 1;
      }
      std::cout << json{{"delta_screen_pct_h", b.delta_screen_pct_h}}.dump() << "\n";
      return 0;
    }

    std::function<void(const session::SessionCheckpoint&)> persist;
    if (!checkpoint_path.empty())
      persist = [&](const session::SessionCheckpoint& cp) {
        session::save_checkpoint(checkpoint_path, cp);
      };

    if (run->parsed()) {
      const auto assets = load_assets(assets_dir);
      const auto result = session::run_campaign(*device.probe, *device.harness, assets,
                                                cfg, {}, persist, limit);
      return finish(result, out_path, server_url);
    }

    // resume
    auto cp = session::load_checkpoint(checkpoint_path);
    cfg.drop_target_pct = cp.drop_target_pct;
    const auto assets = cp.assets;
    const auto result = session::run_campaign(*device.probe, *device.harness, assets,
                                              cfg, std::move(cp), persist, limit);
    return finish(result, out_path, server_url);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
