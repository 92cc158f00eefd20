#pragma once

#include <string>
#include <string_view>

#include "rbood/detection.hpp"
#include "rbood/histogram.hpp"

namespace rbood {

/// Baselines plus the training histograms the operational stage compares against.
struct BaselineBundle {
  Baselines baselines;
  HitMatrix training;
};

/// Structured text (JSON) document. Output is a pure function of the bundle, so
/// identical inputs give byte-identical files.
std::string baselines_to_text(const BaselineBundle& bundle);
BaselineBundle baselines_from_text(std::string_view text);

void save_baselines(const std::string& path, const BaselineBundle& bundle);
BaselineBundle load_baselines(const std::string& path);

/// One JSON document describing a detection: per-metric values, votes, flags and
/// distances, the verdict, and the baseline configuration it ran against.
std::string report_to_text(const DetectionReport& report, const BaselineConfig& config);

}  // namespace rbood
