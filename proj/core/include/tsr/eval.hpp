#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsr/datasets.hpp"
#include "tsr/detection.hpp"

namespace tsr {

// Detection attached to an image, the unit of evaluation input.
struct ImageDetection {
    std::string image_id;
    Detection det;
};

// Outcome of greedy score-ordered matching at one IoU threshold.
// Flags are aligned with the input detection order.
struct MatchResult {
    std::vector<bool> is_true_positive;
    std::vector<std::optional<std::size_t>> matched_truth; // index into truths
    std::vector<bool> truth_matched;
    double iou_threshold = 0.5;

    int tp() const;
    int fp() const;
    int fn() const;
};

struct EvalReport {
    int tp = 0;
    int fp = 0;
    int fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::map<int, double> per_class_ap;
    double map50 = 0.0;
};

// Pascal VOC greedy matching: per image and class, detections in
// descending score order each claim the unmatched same-class ground truth
// with the highest IoU when that IoU >= iou_threshold (TP), otherwise FP.
// Remaining truths are FNs. Throws DomainError on a threshold outside (0,1].
MatchResult match_detections(const std::vector<ImageDetection>& dets,
                             const std::vector<GroundTruthInstance>& truths,
                             double iou_threshold);

struct PrfScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Zero-denominator convention: each score is 0 when its denominator is 0.
PrfScores precision_recall_f1(int tp, int fp, int fn);

// Area under the precision-recall curve with the monotone-decreasing
// precision envelope, integrated over all recall change points. Inputs
// must be a single class. No truths => 0.
double average_precision(const std::vector<ImageDetection>& dets,
                         const std::vector<GroundTruthInstance>& truths,
                         double iou_threshold);

// Full Table-style report: counts and P/R/F1 from matching, per-class AP,
// and map50 as the unweighted mean over classes with ground truth present.
EvalReport evaluate(const std::vector<ImageDetection>& dets,
                    const std::vector<GroundTruthInstance>& truths,
                    double iou_threshold = 0.5);

// JSON-lines detection file: one object per line with image_id, class_id,
// score, cx, cy, w, h (normalized). Throws ParseError with line number.
std::vector<ImageDetection> read_detections_jsonl(std::istream& in);
std::vector<ImageDetection> load_detections_jsonl(
    const std::filesystem::path& file);
void write_detections_jsonl(std::ostream& out,
                            const std::vector<ImageDetection>& dets);

// Machine-readable report mirroring EvalReport (field names: tp, fp, fn,
// precision, recall, f1, per_class_ap, map50).
std::string report_to_json(const EvalReport& report);

// Human-readable table.
void print_report(std::ostream& out, const EvalReport& report);

} // namespace tsr
