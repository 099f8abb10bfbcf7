#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "decwatt/pipeline.hpp"

namespace decwatt::report {

enum class Metric { play, decode };
const char* to_string(Metric m);
Metric metric_from_string(const std::string& s);

/// One line of a top-N ranking. Rows are sorted ascending by metric (lower
/// consumption is better) with contiguous ranks from 1.
struct RankingRow {
  int rank = 0;
  std::string model;
  DecoderDescriptor decoder;
  std::string resolution;
  double value = 0;
  double stddev = 0;
  int count = 0;
};

/// The n lowest-metric (model, decoder) pairs at one resolution class; each
/// model enters only through its best decoder. Fewer than n rows when the
/// population is smaller — never padded.
std::vector<RankingRow> top_ranking(const std::vector<pipeline::ModelAggregate>& aggs,
                                    Metric metric, ResClass res, int n);

struct NotFound : std::runtime_error {
  NotFound(const std::string& what, std::vector<std::string> near)
      : std::runtime_error(what), suggestions(std::move(near)) {}
  std::vector<std::string> suggestions;
};

struct RatingCell {
  bool present = false;
  double delta_play = 0;
  double stddev = 0;
  int count = 0;
  bool non_realtime = false;
};

struct ModelRating {
  std::string model;
  std::vector<DecoderDescriptor> decoders;      // sorted by name
  std::vector<std::array<RatingCell, 3>> cells; // [decoder][sd, hd, fhd]
};

/// All decoders of one model with delta_play per resolution; untested cells
/// stay marked missing. Unknown models raise NotFound with near-miss names.
ModelRating model_rating(const std::vector<pipeline::ModelAggregate>& aggs,
                         const std::string& model);

struct ScatterPoint {
  DecoderDescriptor decoder;
  std::string resolution;
  ResClass res_class = ResClass::sd;
  double speed = 0;
  double delta_play = 0;
  double fps = 0;
  bool below_realtime = false; // mean speed under the asset frame rate
};

struct ScatterData {
  std::string model;
  std::vector<ScatterPoint> points;
  std::vector<double> fps_lines; // distinct asset frame rates, one line each
  // axis ranges: data extent (fps lines included on x) plus a 5% margin
  double x_lo = 0, x_hi = 1;
  double y_lo = 0, y_hi = 1;
};

/// delta_play versus speed, one point per decoder x resolution. An empty
/// aggregate input yields an empty chart (axes only).
ScatterData power_speed_scatter(const std::vector<pipeline::ModelAggregate>& aggs,
                                const std::string& model);

/// Fixed-format value used identically in CSV cells and SVG labels, so every
/// rendered value can be matched verbatim against the table output.
std::string format_value(double v);

/// RFC-4180-style field quoting.
std::string csv_escape(const std::string& field);

std::string ranking_csv(const std::vector<RankingRow>& rows, Metric metric);
std::string ranking_svg(const std::vector<RankingRow>& rows, Metric metric, ResClass res);

std::string rating_csv(const ModelRating& rating);
std::string rating_svg(const ModelRating& rating);

std::string scatter_csv(const ScatterData& data);
std::string scatter_svg(const ScatterData& data);

void write_text(const std::filesystem::path& path, const std::string& content);

} // namespace decwatt::report
