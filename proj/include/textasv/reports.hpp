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

#ifndef TEXTASV_REPORTS_HPP_
#define TEXTASV_REPORTS_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textasv/asv.hpp"
#include "textasv/attrib.hpp"

namespace textasv {

// Positive / negative score counts per enrollment speaker over [-1, 1].
struct SpeakerHistogram {
  std::string speaker_id;
  double threshold = 0.0;
  double eer_percent = 0.0;
  std::vector<size_t> positive;
  std::vector<size_t> negative;
};

struct Histograms {
  double bin_width = 0.05;
  std::vector<SpeakerHistogram> speakers;  // sorted by speaker id
};

size_t HistogramBinCount(double bin_width);  // ceil(2 / bin_width)
size_t HistogramBin(double score, double bin_width);

// eers supplies the threshold and EER drawn next to each speaker's bars; it
// may be empty.
Histograms BuildHistograms(std::span<const TrialScore> scores, std::span<const SpeakerEER> eers,
                           double bin_width);
std::string HistogramsJson(const Histograms& hist);

struct RadarSeries {
  std::string name;
  std::vector<double> eer_percent;  // NaN where the system has no value for a spoke

  friend bool operator==(const RadarSeries&, const RadarSeries&) = default;
};

struct RadarData {
  std::vector<std::string> spokes;  // sorted enrollment speaker ids
  std::vector<RadarSeries> series;

  friend bool operator==(const RadarData&, const RadarData&) = default;
};

struct NamedEers {
  std::string name;
  std::vector<SpeakerEER> eers;
};

// Spokes are the sorted union of speaker ids across systems.
RadarData BuildRadar(std::span<const NamedEers> systems);
std::string RadarJson(const RadarData& radar);
RadarData ParseRadarJson(std::string_view content);

enum class DocumentFormat { kHtml, kMarkdown };

// One section per report, in input order. Token highlight intensity is
// |importance| / max |importance| within the report; green for positive,
// red for negative.
std::string RenderWordImportance(std::span<const AttributionReport> reports, DocumentFormat format);

}  // namespace textasv

#endif  // TEXTASV_REPORTS_HPP_
