#include "decwatt/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace decwatt::report {

const char* to_string(Metric m) {
  return m == Metric::play ? "play" : "decode";
}

Metric metric_from_string(const std::string& s) {
  if (s == "play") return Metric::play;
  if (s == "decode") return Metric::decode;
  throw std::invalid_argument("unknown metric: " + s);
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

static std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

static const pipeline::Stat& metric_stat(const pipeline::ModelAggregate& a, Metric m) {
  return m == Metric::play ? a.delta_play : a.delta_decode;
}

namespace {

struct AxisRange {
  double lo = 0;
  double hi = 1;
};

// covers [min, max] with a 5% margin on each side
AxisRange padded_range(double min_v, double max_v) {
  AxisRange r;
  double span = max_v - min_v;
  if (span <= 0) span = std::max(1.0, std::fabs(max_v) * 0.1);
  r.lo = min_v - 0.05 * span;
  r.hi = max_v + 0.05 * span;
  return r;
}

} // namespace

std::vector<RankingRow> top_ranking(const std::vector<pipeline::ModelAggregate>& aggs,
                                    Metric metric, ResClass res, int n) {
  if (n < 1) throw std::invalid_argument("top_ranking: n must be >= 1");

  // best decoder per model at this resolution class
  std::map<std::string, std::vector<const pipeline::ModelAggregate*>> cells;
  for (const auto& a : aggs)
    if (a.res_class() == res) cells[a.model].push_back(&a);

  std::vector<const pipeline::ModelAggregate*> candidates;
  for (auto& [model, list] : cells) {
    const pipeline::ModelAggregate* best = nullptr;
    for (const auto* c : list) {
      if (!best) {
        best = c;
        continue;
      }
      const double cv = metric_stat(*c, metric).mean;
      const double bv = metric_stat(*best, metric).mean;
      if (cv != bv) {
        if (cv < bv) best = c;
      } else if (c->speed.mean != best->speed.mean) {
        if (c->speed.mean > best->speed.mean) best = c;
      } else if (c->decoder.name < best->decoder.name) {
        best = c;
      }
    }
    candidates.push_back(best);
  }

  std::sort(candidates.begin(), candidates.end(),
            [&](const pipeline::ModelAggregate* x, const pipeline::ModelAggregate* y) {
              const double xv = metric_stat(*x, metric).mean;
              const double yv = metric_stat(*y, metric).mean;
              if (xv != yv) return xv < yv;
              if (x->speed.mean != y->speed.mean) return x->speed.mean > y->speed.mean;
              if (x->decoder.name != y->decoder.name) return x->decoder.name < y->decoder.name;
              return x->model < y->model;
            });
  if (static_cast<int>(candidates.size()) > n) candidates.resize(n);

  std::vector<RankingRow> rows;
  rows.reserve(candidates.size());
  int rank = 1;
  for (const auto* c : candidates) {
    RankingRow row;
    row.rank = rank++;
    row.model = c->model;
    row.decoder = c->decoder;
    row.resolution = c->resolution();
    row.value = metric_stat(*c, metric).mean;
    row.stddev = metric_stat(*c, metric).stddev;
    row.count = c->count;
    rows.push_back(std::move(row));
  }
  return rows;
}

static std::vector<std::string> near_misses(const std::set<std::string>& names,
                                            const std::string& wanted) {
  // Levenshtein distance, small strings only
  auto distance = [](const std::string& a, const std::string& b) {
    std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (size_t i = 1; i <= a.size(); ++i) {
      cur[0] = i;
      for (size_t j = 1; j <= b.size(); ++j) {
        const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
        cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
      }
      std::swap(prev, cur);
    }
    return prev[b.size()];
  };
  std::vector<std::pair<size_t, std::string>> scored;
  for (const auto& name : names) {
    const size_t d = distance(name, wanted);
    const size_t cutoff = std::max<size_t>(3, wanted.size() / 3);
    if (d <= cutoff || name.find(wanted) != std::string::npos)
      scored.emplace_back(d, name);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::string> out;
  for (const auto& [d, name] : scored) {
    out.push_back(name);
    if (out.size() == 5) break;
  }
  return out;
}

ModelRating model_rating(const std::vector<pipeline::ModelAggregate>& aggs,
                         const std::string& model) {
  std::set<std::string> models;
  for (const auto& a : aggs) models.insert(a.model);
  if (!models.count(model))
    throw NotFound("model not found: " + model, near_misses(models, model));

  ModelRating rating;
  rating.model = model;
  std::map<std::string, DecoderDescriptor> decoders;
  for (const auto& a : aggs)
    if (a.model == model) decoders.emplace(a.decoder.name, a.decoder);
  for (const auto& [name, desc] : decoders) {
    rating.decoders.push_back(desc);
    rating.cells.push_back({});
  }

  for (const auto& a : aggs) {
    if (a.model != model) continue;
    const size_t di = static_cast<size_t>(
        std::distance(decoders.begin(), decoders.find(a.decoder.name)));
    RatingCell& cell = rating.cells[di][static_cast<size_t>(a.res_class())];
    cell.present = true;
    cell.delta_play = a.delta_play.mean;
    cell.stddev = a.delta_play.stddev;
    cell.count = a.count;
    cell.non_realtime = a.non_realtime;
  }
  return rating;
}

ScatterData power_speed_scatter(const std::vector<pipeline::ModelAggregate>& aggs,
                                const std::string& model) {
  ScatterData data;
  data.model = model;
  if (aggs.empty()) return data; // empty chart with axes

  std::set<std::string> models;
  for (const auto& a : aggs) models.insert(a.model);
  if (!models.count(model))
    throw NotFound("model not found: " + model, near_misses(models, model));

  std::set<double> fps_values;
  for (const auto& a : aggs) {
    if (a.model != model) continue;
    ScatterPoint p;
    p.decoder = a.decoder;
    p.resolution = a.resolution();
    p.res_class = a.res_class();
    p.speed = a.speed.mean;
    p.delta_play = a.delta_play.mean;
    p.fps = a.fps;
    p.below_realtime = a.speed.mean < a.fps;
    fps_values.insert(a.fps);
    data.points.push_back(std::move(p));
  }
  data.fps_lines.assign(fps_values.begin(), fps_values.end());

  if (!data.points.empty()) {
    double xmin = data.points.front().speed, xmax = xmin;
    double ymin = data.points.front().delta_play, ymax = ymin;
    for (const auto& p : data.points) {
      xmin = std::min(xmin, p.speed);
      xmax = std::max(xmax, p.speed);
      ymin = std::min(ymin, p.delta_play);
      ymax = std::max(ymax, p.delta_play);
    }
    for (double fps : data.fps_lines) {
      xmin = std::min(xmin, fps);
      xmax = std::max(xmax, fps);
    }
    const AxisRange xr = padded_range(xmin, xmax);
    const AxisRange yr = padded_range(ymin, ymax);
    data.x_lo = xr.lo;
    data.x_hi = xr.hi;
    data.y_lo = yr.lo;
    data.y_hi = yr.hi;
  }
  return data;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::string ranking_csv(const std::vector<RankingRow>& rows, Metric metric) {
  std::ostringstream os;
  os << "rank,model,decoder,standard,kind,resolution," << to_string(metric)
     << "_mean,stddev,count\r\n";
  for (const auto& r : rows) {
    os << r.rank << ',' << csv_escape(r.model) << ',' << csv_escape(r.decoder.name)
       << ',' << to_string(r.decoder.standard) << ',' << to_string(r.decoder.kind)
       << ',' << r.resolution << ',' << format_value(r.value) << ','
       << format_value(r.stddev) << ',' << r.count << "\r\n";
  }
  return os.str();
}

std::string rating_csv(const ModelRating& rating) {
  std::ostringstream os;
  os << "decoder,standard,kind,resolution_class,delta_play_mean,stddev,count,"
        "non_realtime,missing\r\n";
  for (size_t i = 0; i < rating.decoders.size(); ++i) {
    const auto& d = rating.decoders[i];
    for (ResClass rc : {ResClass::sd, ResClass::hd, ResClass::fhd}) {
      const RatingCell& cell = rating.cells[i][static_cast<size_t>(rc)];
      os << csv_escape(d.name) << ',' << to_string(d.standard) << ','
         << to_string(d.kind) << ',' << to_string(rc) << ',';
      if (cell.present)
        os << format_value(cell.delta_play) << ',' << format_value(cell.stddev) << ','
           << cell.count << ',' << (cell.non_realtime ? "true" : "false") << ",false";
      else
        os << ",,0,false,true"; // explicitly missing, not zero
      os << "\r\n";
    }
  }
  return os.str();
}

std::string scatter_csv(const ScatterData& data) {
  std::ostringstream os;
  os << "decoder,standard,kind,vendor,resolution,resolution_class,speed_mean,"
        "delta_play_mean,fps,below_realtime\r\n";
  for (const auto& p : data.points) {
    os << csv_escape(p.decoder.name) << ',' << to_string(p.decoder.standard) << ','
       << to_string(p.decoder.kind) << ',' << csv_escape(p.decoder.vendor) << ','
       << p.resolution << ',' << to_string(p.res_class) << ','
       << format_value(p.speed) << ',' << format_value(p.delta_play) << ','
       << format_value(p.fps) << ',' << (p.below_realtime ? "true" : "false")
       << "\r\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

static std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string ranking_svg(const std::vector<RankingRow>& rows, Metric metric, ResClass res) {
  const double left = 320, right = 60, top = 40, bottom = 30;
  const double bar_h = 18, gap = 8;
  const double plot_w = 520;
  const double height = top + bottom + rows.size() * (bar_h + gap);
  const double width = left + plot_w + right;

  double max_v = 0;
  for (const auto& r : rows) max_v = std::max(max_v, r.value + r.stddev);
  if (max_v <= 0) max_v = 1;

  const std::string metric_label =
      metric == Metric::play ? "delta_play (%/h)" : "delta_decode (mA)";

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
     << "\">\n";
  os << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">top " << rows.size()
     << " by " << metric_label << " at " << to_string(res) << "</text>\n";
  double y = top;
  for (const auto& r : rows) {
    const double w = r.value / max_v * plot_w;
    const std::string label =
        std::to_string(r.rank) + ". " + r.model + " / " + r.decoder.name;
    os << "<text x=\"4\" y=\"" << fmt_coord(y + bar_h - 5)
       << "\" font-size=\"11\">" << xml_escape(label) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << fmt_coord(y) << "\" width=\""
       << fmt_coord(w) << "\" height=\"" << bar_h << "\" fill=\"#4878a8\">"
       << "<title>" << format_value(r.value) << "</title></rect>\n";
    if (r.count > 1 && r.stddev > 0) {
      const double x0 = left + std::max(0.0, r.value - r.stddev) / max_v * plot_w;
      const double x1 = left + (r.value + r.stddev) / max_v * plot_w;
      const double ym = y + bar_h / 2;
      os << "<line x1=\"" << fmt_coord(x0) << "\" y1=\"" << fmt_coord(ym)
         << "\" x2=\"" << fmt_coord(x1) << "\" y2=\"" << fmt_coord(ym)
         << "\" stroke=\"#203040\" stroke-width=\"1.5\"><title>"
         << format_value(r.stddev) << "</title></line>\n";
    }
    os << "<text x=\"" << fmt_coord(left + w + 4) << "\" y=\""
       << fmt_coord(y + bar_h - 5) << "\" font-size=\"10\">"
       << format_value(r.value) << "</text>\n";
    y += bar_h + gap;
  }
  os << "</svg>\n";
  return os.str();
}

std::string rating_svg(const ModelRating& rating) {
  const double left = 300, top = 40, bottom = 20, right = 60;
  const double bar_h = 12, inner_gap = 2, group_gap = 12;
  const double group_h = 3 * (bar_h + inner_gap) + group_gap;
  const double plot_w = 520;
  const double height = top + bottom + rating.decoders.size() * group_h;
  const double width = left + plot_w + right;

  double max_v = 0;
  for (const auto& group : rating.cells)
    for (const auto& cell : group)
      if (cell.present) max_v = std::max(max_v, cell.delta_play + cell.stddev);
  if (max_v <= 0) max_v = 1;

  static const char* fills[3] = {"#76a765", "#4878a8", "#a85858"};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
     << "\">\n";
  os << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">delta_play (%/h) on "
     << xml_escape(rating.model) << " (sd/hd/fhd)</text>\n";
  double y = top;
  for (size_t i = 0; i < rating.decoders.size(); ++i) {
    const auto& d = rating.decoders[i];
    os << "<text x=\"4\" y=\"" << fmt_coord(y + bar_h + 4) << "\" font-size=\"11\">"
       << xml_escape(d.name + " (" + to_string(d.kind) + ")") << "</text>\n";
    for (size_t rc = 0; rc < 3; ++rc) {
      const RatingCell& cell = rating.cells[i][rc];
      const double by = y + rc * (bar_h + inner_gap);
      if (!cell.present) {
        os << "<text x=\"" << left << "\" y=\"" << fmt_coord(by + bar_h - 2)
           << "\" font-size=\"9\" fill=\"#888888\">missing</text>\n";
        continue;
      }
      const double w = cell.delta_play / max_v * plot_w;
      os << "<rect x=\"" << left << "\" y=\"" << fmt_coord(by) << "\" width=\""
         << fmt_coord(w) << "\" height=\"" << bar_h << "\" fill=\"" << fills[rc]
         << (cell.non_realtime ? "\" fill-opacity=\"0.45" : "") << "\"><title>"
         << format_value(cell.delta_play) << "</title></rect>\n";
      if (cell.count > 1 && cell.stddev > 0) {
        const double x0 = left + std::max(0.0, cell.delta_play - cell.stddev) / max_v * plot_w;
        const double x1 = left + (cell.delta_play + cell.stddev) / max_v * plot_w;
        const double ym = by + bar_h / 2;
        os << "<line x1=\"" << fmt_coord(x0) << "\" y1=\"" << fmt_coord(ym)
           << "\" x2=\"" << fmt_coord(x1) << "\" y2=\"" << fmt_coord(ym)
           << "\" stroke=\"#203040\" stroke-width=\"1\"><title>"
           << format_value(cell.stddev) << "</title></line>\n";
      }
      if (cell.non_realtime)
        os << "<text x=\"" << fmt_coord(left + w + 4) << "\" y=\""
           << fmt_coord(by + bar_h - 2) << "\" font-size=\"9\">non-realtime</text>\n";
    }
    y += group_h;
  }
  os << "</svg>\n";
  return os.str();
}

std::string scatter_svg(const ScatterData& data) {
  const double left = 70, right = 30, top = 40, bottom = 50;
  const double plot_w = 560, plot_h = 380;
  const double width = left + plot_w + right;
  const double height = top + plot_h + bottom;

  const AxisRange xr{data.x_lo, data.x_hi};
  const AxisRange yr{data.y_lo, data.y_hi};
  const auto x_px = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  const auto y_px = [&](double v) {
    return top + plot_h - (v - yr.lo) / (yr.hi - yr.lo) * plot_h;
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
     << "\">\n";
  os << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">delta_play (%/h) vs "
        "decoding speed (fps) on "
     << xml_escape(data.model) << "</text>\n";
  // axes
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
     << "\" y2=\"" << top + plot_h << "\" stroke=\"#000000\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
     << left + plot_w << "\" y2=\"" << top + plot_h << "\" stroke=\"#000000\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 5.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 5.0;
    os << "<text x=\"" << fmt_coord(x_px(fx)) << "\" y=\""
       << fmt_coord(top + plot_h + 16) << "\" font-size=\"9\" text-anchor=\"middle\">"
       << format_value(fx) << "</text>\n";
    os << "<text x=\"" << fmt_coord(left - 6) << "\" y=\"" << fmt_coord(y_px(fy) + 3)
       << "\" font-size=\"9\" text-anchor=\"end\">" << format_value(fy)
       << "</text>\n";
  }
  os << "<text x=\"" << fmt_coord(left + plot_w / 2) << "\" y=\""
     << fmt_coord(height - 12) << "\" font-size=\"11\" text-anchor=\"middle\">"
        "speed (fps)</text>\n";
  for (double fps : data.fps_lines)
    os << "<line x1=\"" << fmt_coord(x_px(fps)) << "\" y1=\"" << top << "\" x2=\""
       << fmt_coord(x_px(fps)) << "\" y2=\"" << top + plot_h
       << "\" stroke=\"#b06060\" stroke-dasharray=\"4 3\"><title>fps "
       << format_value(fps) << "</title></line>\n";

  static const double radii[3] = {3.5, 5.5, 7.5}; // sd, hd, fhd marker sizes
  for (const auto& p : data.points) {
    const double cx = x_px(p.speed), cy = y_px(p.delta_play);
    os << "<circle cx=\"" << fmt_coord(cx) << "\" cy=\"" << fmt_coord(cy)
       << "\" r=\"" << radii[static_cast<size_t>(p.res_class)] << "\" fill=\""
       << (p.below_realtime ? "#c04040" : "#4878a8") << "\" fill-opacity=\"0.7\">"
       << "<title>" << xml_escape(p.decoder.name) << " " << p.resolution << ": "
       << format_value(p.speed) << " fps, " << format_value(p.delta_play)
       << " %/h" << (p.below_realtime ? " (below realtime)" : "") << "</title>"
       << "</circle>\n";
    const std::string vendor_letter =
        p.decoder.vendor.empty() ? "?" : p.decoder.vendor.substr(0, 1);
    os << "<text x=\"" << fmt_coord(cx + 8) << "\" y=\"" << fmt_coord(cy + 3)
       << "\" font-size=\"9\">" << xml_escape(vendor_letter) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

} // namespace decwatt::report
