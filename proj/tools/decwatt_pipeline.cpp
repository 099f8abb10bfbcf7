// decwatt-pipeline: clean raw samples, merge per model, summarize.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "decwatt/pipeline.hpp"

namespace fs = std::filesystem;
using namespace decwatt;

int main(int argc, char** argv) {
  CLI::App app{"dataset pipeline: clean | merge | stats"};
  app.require_subcommand(1);

  std::string in_path, out_path, review_path;
  pipeline::RulesConfig rules;

  CLI::App* clean = app.add_subcommand(
      "clean", "validate rows, apply anomaly rules and review dispositions");
  clean->add_option("--in", in_path, "collector export or flattened rows")->required();
  clean->add_option("--out", out_path, "cleaned dataset (JSONL rows)")->required();
  clean->add_option("--review", review_path, "review file (operator-edited)")->required();
  clean->add_option("--mad-k", rules.mad_k, "MAD multiplier for rule (c)");
  clean->add_option("--play-cap", rules.play_cap_pct_h,
                    "absolute delta_play cap for rule (d), %/h");

  CLI::App* merge = app.add_subcommand("merge", "aggregate cleaned rows per model");
  merge->add_option("--in", in_path, "cleaned dataset")->required();
  merge->add_option("--out", out_path, "aggregates file (JSONL)")->required();

  CLI::App* stats = app.add_subcommand("stats", "summary statistics from aggregates");
  stats->add_option("--in", in_path, "aggregates file")->required();
  stats->add_option("--out", out_path, "statistics report (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (clean->parsed()) {
      const auto rows = pipeline::load_rows(in_path);
      std::vector<pipeline::AnomalyFlag> reviewed;
      if (fs::exists(review_path)) reviewed = pipeline::load_flags(review_path);
      const auto result = pipeline::clean(rows, rules, reviewed);
      pipeline::save_flags(review_path, result.flags);
      if (!result.finalized) {
        size_t pending = 0;
        for (const auto& f : result.flags)
          if (f.disposition == pipeline::Disposition::flagged) ++pending;
        std::cerr << pending << " flag(s) await manual review in " << review_path
                  << "; set disposition to reviewed-keep or reviewed-drop and rerun\n";
        return 2;
      }
      pipeline::save_rows(out_path, result.kept);
      std::cout << "kept " << result.kept.size() << "/" << result.total
                << " records; observed anomaly rate "
                << 100.0 * result.anomaly_rate() << "% (" << result.dropped << "/"
                << result.total << " dropped)\n";
      return 0;
    }
    if (merge->parsed()) {
      const auto rows = pipeline::load_rows(in_path);
      const auto aggs = pipeline::merge_by_model(rows, rules);
      pipeline::save_aggregates(out_path, aggs);
      std::cout << aggs.size() << " aggregate cells written to " << out_path << "\n";
      return 0;
    }
    const auto aggs = pipeline::load_aggregates(in_path);
    pipeline::save_statistics(out_path, pipeline::summary_statistics(aggs));
    std::cout << "statistics written to " << out_path << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
