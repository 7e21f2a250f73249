// Copyright 2026 The textasv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "textasv/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "json.hpp"
#include "textasv/error.hpp"
#include "textasv/io.hpp"

namespace textasv {

using nlohmann::json;

size_t HistogramBinCount(double bin_width) {
  if (!(bin_width > 0.0 && bin_width <= 2.0)) throw Error(ErrorKind::kInvalidConfig, "bin width must lie in (0, 2]");
  return static_cast<size_t>(std::ceil(2.0 / bin_width - 1e-9));
}

size_t HistogramBin(double score, double bin_width) {
  const size_t bins = HistogramBinCount(bin_width);
  const double pos = std::floor((std::clamp(score, -1.0, 1.0) + 1.0) / bin_width);
  return std::min(bins - 1, static_cast<size_t>(std::max(0.0, pos)));
}

Histograms BuildHistograms(std::span<const TrialScore> scores, std::span<const SpeakerEER> eers,
                           double bin_width) {
  const size_t bins = HistogramBinCount(bin_width);
  std::map<std::string, SpeakerHistogram> by_speaker;
  for (const auto& s : scores) {
    auto& h = by_speaker[s.enroll_speaker_id];
    if (h.positive.empty()) {
      h.speaker_id = s.enroll_speaker_id;
      h.positive.assign(bins, 0);
      h.negative.assign(bins, 0);
      h.threshold = std::numeric_limits<double>::quiet_NaN();
      h.eer_percent = std::numeric_limits<double>::quiet_NaN();
    }
    ++(s.label == TrialLabel::kPositive ? h.positive : h.negative)[HistogramBin(s.score, bin_width)];
  }
  for (const auto& e : eers) {
    auto it = by_speaker.find(e.speaker_id);
    if (it == by_speaker.end()) continue;
    it->second.threshold = e.threshold;
    it->second.eer_percent = e.eer_percent;
  }
  Histograms hist;
  hist.bin_width = bin_width;
  for (auto& [id, h] : by_speaker) hist.speakers.push_back(std::move(h));
  return hist;
}

namespace {

json NumberOrNull(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string HistogramsJson(const Histograms& hist) {
  const size_t bins = HistogramBinCount(hist.bin_width);
  json edges = json::array();
  for (size_t b = 0; b <= bins; ++b) edges.push_back(std::min(1.0, -1.0 + static_cast<double>(b) * hist.bin_width));
  json speakers = json::array();
  for (const auto& h : hist.speakers) {
    speakers.push_back({{"speaker_id", h.speaker_id},
                        {"threshold", NumberOrNull(h.threshold)},
                        {"eer_percent", NumberOrNull(h.eer_percent)},
                        {"positive", h.positive},
                        {"negative", h.negative}});
  }
  json obj = {{"bin_width", hist.bin_width}, {"range", {-1.0, 1.0}}, {"bin_edges", edges}, {"speakers", speakers}};
  return obj.dump(2) + "\n";
}

RadarData BuildRadar(std::span<const NamedEers> systems) {
  std::set<std::string> ids;
  for (const auto& s : systems) {
    for (const auto& e : s.eers) ids.insert(e.speaker_id);
  }
  RadarData radar;
  radar.spokes.assign(ids.begin(), ids.end());
  for (const auto& s : systems) {
    RadarSeries series{s.name, std::vector<double>(radar.spokes.size(), std::numeric_limits<double>::quiet_NaN())};
    for (const auto& e : s.eers) {
      const auto pos = std::lower_bound(radar.spokes.begin(), radar.spokes.end(), e.speaker_id) - radar.spokes.begin();
      series.eer_percent[static_cast<size_t>(pos)] = e.eer_percent;
    }
    radar.series.push_back(std::move(series));
  }
  return radar;
}

std::string RadarJson(const RadarData& radar) {
  json series = json::array();
  for (const auto& s : radar.series) {
    json values = json::array();
    for (double v : s.eer_percent) values.push_back(NumberOrNull(v));
    series.push_back({{"name", s.name}, {"eer_percent", values}});
  }
  json obj = {{"spokes", radar.spokes}, {"series", series}};
  return obj.dump(2) + "\n";
}

RadarData ParseRadarJson(std::string_view content) {
  json obj = json::parse(content, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) throw Error(ErrorKind::kMalformedRecord, "radar JSON");
  RadarData radar;
  try {
    radar.spokes = obj.at("spokes").get<std::vector<std::string>>();
    for (const auto& s : obj.at("series")) {
      RadarSeries series;
      series.name = s.at("name").get<std::string>();
      for (const auto& v : s.at("eer_percent")) {
        series.eer_percent.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
      }
      if (series.eer_percent.size() != radar.spokes.size()) {
        throw Error(ErrorKind::kMalformedRecord, "radar series '" + series.name + "' length differs from spokes");
      }
      radar.series.push_back(std::move(series));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedRecord, std::string("radar JSON: ") + e.what());
  }
  return radar;
}

namespace {

std::string HtmlEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double MaxAbsImportance(const AttributionReport& r) {
  double m = 0.0;
  for (const auto& t : r.tokens) m = std::max(m, std::abs(t.importance));
  return m;
}

const char* DecisionLabel(Decision d) { return d == Decision::kAccept ? "accept" : "reject"; }

std::string RenderHtml(std::span<const AttributionReport> reports) {
  std::string out =
      "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Word importance</title>\n"
      "<style>\nbody { font-family: sans-serif; }\ntable { border-collapse: collapse; }\n"
      "td, th { border: 1px solid #ccc; padding: 4px 8px; vertical-align: top; }\n"
      "mark { padding: 1px 2px; margin: 0 1px; background: none; }\n</style>\n</head>\n<body>\n";
  for (const auto& r : reports) {
    const double scale = MaxAbsImportance(r);
    out += "<section class=\"report\" data-utt=\"" + HtmlEscape(r.utt_id) + "\">\n";
    out += "<h3>" + HtmlEscape(r.enroll_speaker_id) + " / " + HtmlEscape(r.utt_id) + "</h3>\n";
    out += "<table>\n<tr><th>True label</th><th>Decision</th><th>Raw score</th><th>Threshold</th>"
           "<th>Attr. score</th><th>Word importance</th></tr>\n";
    out += "<tr><td>" + std::to_string(r.true_label) + "</td><td>" + DecisionLabel(r.decision) + "</td><td>" +
           Fixed(r.raw_score, 4) + "</td><td>" + Fixed(r.threshold, 4) + "</td><td>" +
           Fixed(r.attribution_score, 4) + "</td><td>";
    for (const auto& t : r.tokens) {
      const double intensity = scale > 0.0 ? std::abs(t.importance) / scale : 0.0;
      if (intensity > 0.0) {
        const char* rgb = t.importance > 0.0 ? "0, 160, 0" : "200, 0, 0";
        out += "<mark style=\"background-color: rgba(" + std::string(rgb) + ", " + Fixed(intensity, 3) +
               ")\" title=\"" + FormatDouble(t.importance) + "\">";
      } else {
        out += "<mark title=\"" + FormatDouble(t.importance) + "\">";
      }
      out += HtmlEscape(t.token) + "</mark> ";
    }
    out += "</td></tr>\n</table>\n</section>\n";
  }
  out += "</body>\n</html>\n";
  return out;
}

std::string RenderMarkdown(std::span<const AttributionReport> reports) {
  std::string out = "# Word importance\n\n";
  for (const auto& r : reports) {
    const double scale = MaxAbsImportance(r);
    out += "## " + r.enroll_speaker_id + " / " + r.utt_id + "\n\n";
    out += "| True label | Decision | Raw score | Threshold | Attr. score |\n|---|---|---|---|---|\n";
    out += "| " + std::to_string(r.true_label) + " | " + DecisionLabel(r.decision) + " | " + Fixed(r.raw_score, 4) +
           " | " + Fixed(r.threshold, 4) + " | " + Fixed(r.attribution_score, 4) + " |\n\n";
    for (const auto& t : r.tokens) {
      const double intensity = scale > 0.0 ? t.importance / scale : 0.0;
      out += intensity == 0.0 ? t.token : t.token + "(" + (intensity > 0 ? "+" : "") + Fixed(intensity, 2) + ")";
      out += ' ';
    }
    out += "\n\n";
  }
  return out;
}

}  // namespace

std::string RenderWordImportance(std::span<const AttributionReport> reports, DocumentFormat format) {
  return format == DocumentFormat::kHtml ? RenderHtml(reports) : RenderMarkdown(reports);
}

}  // namespace textasv
