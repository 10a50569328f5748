#pragma once

// Precision / recall / F1 counting for detection, location, and the
// detect-then-locate pipeline. Every ratio is defined as 0 when its
// denominator is 0.

#include <cstddef>
#include <optional>
#include <vector>

#include "punnet/common.hpp"
#include "punnet/data.hpp"

namespace punnet {

struct MetricsReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const { return tp + fp == 0 ? 0.0 : 100.0 * tp / double(tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : 100.0 * tp / double(tp + fn); }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
};

inline MetricsReport score_detection(const std::vector<int>& preds,
                                     const std::vector<int>& golds) {
  if (preds.size() != golds.size()) {
    throw ArgumentError("score_detection: " + std::to_string(preds.size()) + " predictions for " +
                        std::to_string(golds.size()) + " golds");
  }
  MetricsReport report;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == 1 && golds[i] == 1) ++report.tp;
    if (preds[i] == 1 && golds[i] == 0) ++report.fp;
    if (preds[i] == 0 && golds[i] == 1) ++report.fn;
  }
  return report;
}

// Each inner vector holds the predicted pun indices for one sentence
// (exactly one in argmax mode, any number in threshold mode).
inline MetricsReport score_location(const std::vector<std::vector<std::size_t>>& preds,
                                    const std::vector<std::optional<std::size_t>>& golds) {
  if (preds.size() != golds.size()) {
    throw ArgumentError("score_location: " + std::to_string(preds.size()) + " predictions for " +
                        std::to_string(golds.size()) + " golds");
  }
  MetricsReport report;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    bool hit = false;
    for (std::size_t p : preds[i]) {
      if (golds[i] && p == *golds[i]) {
        ++report.tp;
        hit = true;
      } else {
        ++report.fp;
      }
    }
    if (golds[i] && !hit) ++report.fn;
  }
  return report;
}

// Detect-then-locate. Sentences the detector rejects produce no location
// prediction (their gold pun words count as fn); accepted sentences go to
// the locator, and accepted gold-negative sentences contribute fp through
// their argmax prediction.
template <typename Detector, typename Locator>
MetricsReport pipeline_eval(Detector&& detect, Locator&& locate,
                            const std::vector<Example>& dataset) {
  MetricsReport report;
  for (const auto& ex : dataset) {
    const int detected = detect(ex);
    if (detected != 1) {
      if (ex.pun_index) ++report.fn;
      continue;
    }
    const std::size_t predicted = locate(ex);
    if (ex.pun_index && predicted == *ex.pun_index) {
      ++report.tp;
    } else {
      ++report.fp;
      if (ex.pun_index) ++report.fn;
    }
  }
  return report;
}

}  // namespace punnet
