#include "tsr/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>

#include <json.hpp>

#include "tsr/errors.hpp"

namespace tsr {

int MatchResult::tp() const {
    return static_cast<int>(
        std::count(is_true_positive.begin(), is_true_positive.end(), true));
}

int MatchResult::fp() const {
    return static_cast<int>(is_true_positive.size()) - tp();
}

int MatchResult::fn() const {
    return static_cast<int>(
        std::count(truth_matched.begin(), truth_matched.end(), false));
}

namespace {

std::vector<std::size_t> score_order(const std::vector<ImageDetection>& dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return dets[a].det.score > dets[b].det.score;
                     });
    return order;
}

} // namespace

MatchResult match_detections(const std::vector<ImageDetection>& dets,
                             const std::vector<GroundTruthInstance>& truths,
                             double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
        throw DomainError("match: iou_threshold outside (0,1]");
    }
    MatchResult result;
    result.iou_threshold = iou_threshold;
    result.is_true_positive.assign(dets.size(), false);
    result.matched_truth.assign(dets.size(), std::nullopt);
    result.truth_matched.assign(truths.size(), false);

    for (std::size_t i : score_order(dets)) {
        const auto& d = dets[i];
        double best_iou = 0.0;
        std::optional<std::size_t> best_truth;
        for (std::size_t t = 0; t < truths.size(); ++t) {
            if (result.truth_matched[t]) continue;
            if (truths[t].image_id != d.image_id ||
                truths[t].class_id != d.det.class_id) {
                continue;
            }
            const double overlap = iou(d.det.box, truths[t].box);
            if (overlap > best_iou) {
                best_iou = overlap;
                best_truth = t;
            }
        }
        if (best_truth && best_iou >= iou_threshold) {
            result.is_true_positive[i] = true;
            result.matched_truth[i] = best_truth;
            result.truth_matched[*best_truth] = true;
        }
    }
    return result;
}

PrfScores precision_recall_f1(int tp, int fp, int fn) {
    PrfScores s;
    if (tp + fp > 0) s.precision = static_cast<double>(tp) / (tp + fp);
    if (tp + fn > 0) s.recall = static_cast<double>(tp) / (tp + fn);
    if (s.precision + s.recall > 0.0) {
        s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    }
    return s;
}

double average_precision(const std::vector<ImageDetection>& dets,
                         const std::vector<GroundTruthInstance>& truths,
                         double iou_threshold) {
    if (truths.empty()) return 0.0;
    const MatchResult match = match_detections(dets, truths, iou_threshold);

    // TP/FP flags in ranked order.
    std::vector<bool> tp_at_rank;
    for (std::size_t i : score_order(dets)) {
        tp_at_rank.push_back(match.is_true_positive[i]);
    }

    const double n_truth = static_cast<double>(truths.size());
    std::vector<double> precision, recall;
    int tp = 0;
    for (std::size_t r = 0; r < tp_at_rank.size(); ++r) {
        if (tp_at_rank[r]) ++tp;
        precision.push_back(static_cast<double>(tp) /
                            static_cast<double>(r + 1));
        recall.push_back(tp / n_truth);
    }

    // Monotone-decreasing precision envelope, then all-point integration
    // over the recall change points.
    for (std::size_t r = precision.size(); r-- > 1;) {
        precision[r - 1] = std::max(precision[r - 1], precision[r]);
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t r = 0; r < recall.size(); ++r) {
        if (recall[r] > prev_recall) {
            ap += (recall[r] - prev_recall) * precision[r];
            prev_recall = recall[r];
        }
    }
    return ap;
}

EvalReport evaluate(const std::vector<ImageDetection>& dets,
                    const std::vector<GroundTruthInstance>& truths,
                    double iou_threshold) {
    const MatchResult match = match_detections(dets, truths, iou_threshold);

    EvalReport report;
    report.tp = match.tp();
    report.fp = match.fp();
    report.fn = match.fn();
    const PrfScores prf = precision_recall_f1(report.tp, report.fp, report.fn);
    report.precision = prf.precision;
    report.recall = prf.recall;
    report.f1 = prf.f1;

    std::set<int> classes_with_truth;
    for (const auto& t : truths) classes_with_truth.insert(t.class_id);

    double ap_sum = 0.0;
    for (int cls : classes_with_truth) {
        std::vector<ImageDetection> class_dets;
        for (const auto& d : dets) {
            if (d.det.class_id == cls) class_dets.push_back(d);
        }
        std::vector<GroundTruthInstance> class_truths;
        for (const auto& t : truths) {
            if (t.class_id == cls) class_truths.push_back(t);
        }
        const double ap =
            average_precision(class_dets, class_truths, iou_threshold);
        report.per_class_ap[cls] = ap;
        ap_sum += ap;
    }
    if (!classes_with_truth.empty()) {
        report.map50 = ap_sum / static_cast<double>(classes_with_truth.size());
    }
    return report;
}

std::vector<ImageDetection> read_detections_jsonl(std::istream& in) {
    std::vector<ImageDetection> dets;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            ImageDetection d;
            d.image_id = j.at("image_id").get<std::string>();
            d.det.class_id = j.at("class_id").get<int>();
            d.det.score = j.at("score").get<double>();
            d.det.box =
                BoundingBox{j.at("cx").get<double>(), j.at("cy").get<double>(),
                            j.at("w").get<double>(), j.at("h").get<double>()};
            dets.push_back(std::move(d));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("detections line " + std::to_string(line_no) +
                             ": " + e.what());
        }
    }
    return dets;
}

std::vector<ImageDetection> load_detections_jsonl(
    const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("detections: cannot open " + file.string());
    }
    return read_detections_jsonl(in);
}

void write_detections_jsonl(std::ostream& out,
                            const std::vector<ImageDetection>& dets) {
    for (const auto& d : dets) {
        nlohmann::json j;
        j["image_id"] = d.image_id;
        j["class_id"] = d.det.class_id;
        j["score"] = d.det.score;
        j["cx"] = d.det.box.cx;
        j["cy"] = d.det.box.cy;
        j["w"] = d.det.box.w;
        j["h"] = d.det.box.h;
        out << j.dump() << '\n';
    }
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["tp"] = report.tp;
    j["fp"] = report.fp;
    j["fn"] = report.fn;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f1"] = report.f1;
    nlohmann::json ap = nlohmann::json::object();
    for (const auto& [cls, value] : report.per_class_ap) {
        ap[std::to_string(cls)] = value;
    }
    j["per_class_ap"] = ap;
    j["map50"] = report.map50;
    return j.dump(2);
}

void print_report(std::ostream& out, const EvalReport& report) {
    char buf[128];
    out << "metric        value\n";
    out << "------------  ---------\n";
    out << "TP            " << report.tp << '\n';
    out << "FP            " << report.fp << '\n';
    out << "FN            " << report.fn << '\n';
    std::snprintf(buf, sizeof(buf), "precision     %.4f\n", report.precision);
    out << buf;
    std::snprintf(buf, sizeof(buf), "recall        %.4f\n", report.recall);
    out << buf;
    std::snprintf(buf, sizeof(buf), "F1            %.4f\n", report.f1);
    out << buf;
    for (const auto& [cls, ap] : report.per_class_ap) {
        std::snprintf(buf, sizeof(buf), "AP[class %d]   %.4f\n", cls, ap);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "mAP@50        %.4f\n", report.map50);
    out << buf;
}

} // namespace tsr
