#include "tsr/nms.hpp"

#include <algorithm>

#include "tsr/errors.hpp"

namespace tsr {

std::vector<Detection> nms(const std::vector<Detection>& dets,
                           const NmsConfig& cfg) {
    if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold <= 1.0)) {
        throw ConfigError("nms: iou_threshold outside (0,1]");
    }

    // Stable sort keeps the decode tie-break order among equal scores.
    std::vector<std::size_t> order(dets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return dets[a].score > dets[b].score;
                     });

    std::vector<bool> suppressed(dets.size(), false);
    std::vector<Detection> kept;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (suppressed[order[i]]) continue;
        const Detection& top = dets[order[i]];
        kept.push_back(top);
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            if (suppressed[order[j]]) continue;
            const Detection& other = dets[order[j]];
            if (!cfg.class_agnostic && other.class_id != top.class_id) {
                continue;
            }
            const double overlap = iou(top.box, other.box);
            // Strict comparison; exact duplicates (IoU == 1) always go.
            if (overlap > cfg.iou_threshold || overlap >= 1.0) {
                suppressed[order[j]] = true;
            }
        }
    }
    return kept;
}

} // namespace tsr
