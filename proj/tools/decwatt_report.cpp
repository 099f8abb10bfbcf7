// decwatt-report: ranking tables and charts from aggregated measurements.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "decwatt/report.hpp"

namespace fs = std::filesystem;
using namespace decwatt;

namespace {

void write_pair(const fs::path& out_dir, const std::string& stem,
                const std::string& csv, const std::string& svg) {
  fs::create_directories(out_dir);
  report::write_text(out_dir / (stem + ".csv"), csv);
  report::write_text(out_dir / (stem + ".svg"), svg);
  std::cout << (out_dir / (stem + ".csv")).string() << "\n"
            << (out_dir / (stem + ".svg")).string() << "\n";
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"figure-style report slices: top | model | scatter"};
  app.require_subcommand(1);

  std::string in_path, out_dir = ".", metric_s = "play", res_s = "sd", model;
  int n = 30;

  CLI::App* top = app.add_subcommand("top", "top-N ranking at one resolution");
  top->add_option("--in", in_path, "aggregates file")->required();
  top->add_option("--metric", metric_s, "play | decode");
  top->add_option("--res", res_s, "sd | hd | fhd");
  top->add_option("--n", n, "number of rows");
  top->add_option("--out", out_dir, "output directory");

  CLI::App* model_cmd = app.add_subcommand("model", "per-decoder rating for one model");
  model_cmd->add_option("--in", in_path, "aggregates file")->required();
  model_cmd->add_option("--name", model, "device model")->required();
  model_cmd->add_option("--out", out_dir, "output directory");

  CLI::App* scatter = app.add_subcommand("scatter", "power vs speed for one model");
  scatter->add_option("--in", in_path, "aggregates file")->required();
  scatter->add_option("--model", model, "device model")->required();
  scatter->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto aggs = pipeline::load_aggregates(in_path);
    if (top->parsed()) {
      const auto metric = report::metric_from_string(metric_s);
      const auto res = res_class_from_string(res_s);
      const auto rows = report::top_ranking(aggs, metric, res, n);
      write_pair(out_dir, "top_" + metric_s + "_" + res_s,
                 report::ranking_csv(rows, metric),
                 report::ranking_svg(rows, metric, res));
      return 0;
    }
    if (model_cmd->parsed()) {
      const auto rating = report::model_rating(aggs, model);
      write_pair(out_dir, "model_" + sanitize(model), report::rating_csv(rating),
                 report::rating_svg(rating));
      return 0;
    }
    const auto data = report::power_speed_scatter(aggs, model);
    write_pair(out_dir, "scatter_" + sanitize(model), report::scatter_csv(data),
               report::scatter_svg(data));
    return 0;
  } catch (const report::NotFound& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.suggestions.empty()) {
      std::cerr << "did you mean:\n";
      for (const auto& s : e.suggestions) std::cerr << "  " << s << "\n";
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
