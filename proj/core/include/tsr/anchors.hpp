#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tsr {

struct AnchorDims {
    double w = 0.0;
    double h = 0.0;

    bool operator==(const AnchorDims&) const = default;
};

// K-means result: exactly k anchors in normalized units, sorted by area
// ascending. final_cost is the mean 1-IoU between each training box and
// its assigned anchor.
struct AnchorSet {
    int k = 0;
    std::vector<AnchorDims> anchors;
    double final_cost = 0.0;
};

// 1 - IoU of two boxes co-centered at the origin; the clustering distance.
double anchor_distance(const AnchorDims& box, const AnchorDims& anchor);

// Lloyd iteration under the 1-IoU distance with k-means++ seeding.
// Deterministic for a fixed seed and insensitive to input order (boxes are
// canonically sorted before the seeded shuffle). Centroid update is the
// member-wise mean; an anchor losing all members is re-seeded to the box
// farthest from its current anchor. An update that would raise the cost is
// rejected, so the per-iteration cost sequence is non-increasing. Stops
// when assignments are unchanged, the cost improves by less than tol, or
// max_iters is reached. When cost_trace is given it receives the cost after
// seeding and after every accepted iteration.
// Throws DomainError on empty input or k exceeding the distinct box count.
AnchorSet kmeans_anchors(const std::vector<AnchorDims>& boxes, int k,
                         std::uint64_t seed, int max_iters = 300,
                         double tol = 1e-6,
                         std::vector<double>* cost_trace = nullptr);

// argmin 1-IoU per box; ties resolve to the lowest anchor index.
std::vector<int> assign_boxes(const std::vector<AnchorDims>& boxes,
                              const AnchorSet& anchors);

// Darknet config line: normalized anchors scaled to pixels at the given
// network resolution and rounded, pairs joined as "w,h, w,h, ...".
std::string format_darknet_anchors(const AnchorSet& anchors, int resolution);

} // namespace tsr
