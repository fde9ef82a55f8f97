#pragma once

#include <vector>

#include "tsr/detection.hpp"

namespace tsr {

struct NmsConfig {
    double iou_threshold = 0.45;
    bool class_agnostic = false;
};

// Greedy non-maximum suppression: repeatedly keep the highest-score
// remaining detection and discard every remaining detection of the same
// class (any class if class_agnostic) whose IoU with it exceeds the
// threshold. The comparison is strict, so boxes at exactly the threshold
// survive; exact duplicates (IoU == 1) are suppressed even at threshold 1.
// Score ties resolve in input order (decode output order). Output sorted
// by descending score. Throws ConfigError on a threshold outside (0,1].
std::vector<Detection> nms(const std::vector<Detection>& dets,
                           const NmsConfig& cfg);

} // namespace tsr
