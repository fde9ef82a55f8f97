#include "tsr/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "tsr/errors.hpp"

namespace tsr {

double anchor_distance(const AnchorDims& box, const AnchorDims& anchor) {
    const double inter =
        std::min(box.w, anchor.w) * std::min(box.h, anchor.h);
    const double uni = box.w * box.h + anchor.w * anchor.h - inter;
    if (uni <= 0.0) return 1.0;
    return 1.0 - inter / uni;
}

namespace {

std::vector<int> assign(const std::vector<AnchorDims>& boxes,
                        const std::vector<AnchorDims>& anchors) {
    std::vector<int> assignment(boxes.size(), 0);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_idx = 0;
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            const double d = anchor_distance(boxes[i], anchors[a]);
            if (d < best) { // ties keep the lowest anchor index
                best = d;
                best_idx = static_cast<int>(a);
            }
        }
        assignment[i] = best_idx;
    }
    return assignment;
}

double mean_cost(const std::vector<AnchorDims>& boxes,
                 const std::vector<AnchorDims>& anchors,
                 const std::vector<int>& assignment) {
    double total = 0.0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        total += anchor_distance(boxes[i],
                                 anchors[static_cast<std::size_t>(assignment[i])]);
    }
    return total / static_cast<double>(boxes.size());
}

// k-means++ seeding under the 1-IoU distance. `boxes` arrive canonically
// sorted then seed-shuffled, so the result is input-order independent.
std::vector<AnchorDims> seed_centroids(const std::vector<AnchorDims>& boxes,
                                       int k, std::mt19937_64& rng) {
    std::vector<AnchorDims> centroids;
    centroids.push_back(boxes[rng() % boxes.size()]);
    std::vector<double> dist(boxes.size(), 0.0);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) {
                best = std::min(best, anchor_distance(boxes[i], c));
            }
            dist[i] = best * best;
            total += dist[i];
        }
        if (total <= 0.0) {
            // All remaining boxes coincide with a centroid; pick any
            // not-yet-used distinct value.
            for (const auto& b : boxes) {
                if (std::find(centroids.begin(), centroids.end(), b) ==
                    centroids.end()) {
                    centroids.push_back(b);
                    break;
                }
            }
            continue;
        }
        // Deterministic weighted draw in [0, total).
        const double u =
            (static_cast<double>(rng()) /
             (static_cast<double>(std::mt19937_64::max()) + 1.0)) *
            total;
        double acc = 0.0;
        std::size_t chosen = boxes.size() - 1;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            acc += dist[i];
            if (u < acc) {
                chosen = i;
                break;
            }
        }
        centroids.push_back(boxes[chosen]);
    }
    return centroids;
}

} // namespace

AnchorSet kmeans_anchors(const std::vector<AnchorDims>& boxes, int k,
                         std::uint64_t seed, int max_iters, double tol,
                         std::vector<double>* cost_trace) {
    if (boxes.empty()) {
        throw DomainError("kmeans_anchors: empty box set");
    }
    if (k <= 0) {
        throw DomainError("kmeans_anchors: k must be positive");
    }
    for (const auto& b : boxes) {
        if (!(b.w > 0.0 && b.h > 0.0)) {
            throw DomainError("kmeans_anchors: box dimensions must be > 0");
        }
    }
    std::set<std::pair<double, double>> distinct;
    for (const auto& b : boxes) distinct.emplace(b.w, b.h);
    if (static_cast<std::size_t>(k) > distinct.size()) {
        throw DomainError("kmeans_anchors: k exceeds distinct box count");
    }

    // Canonical sort before the seeded shuffle makes the run insensitive
    // to the caller's box ordering.
    std::vector<AnchorDims> work = boxes;
    std::sort(work.begin(), work.end(),
              [](const AnchorDims& a, const AnchorDims& b) {
                  return std::pair{a.w, a.h} < std::pair{b.w, b.h};
              });
    std::mt19937_64 rng(seed);
    for (std::size_t i = work.size(); i > 1; --i) {
        std::swap(work[i - 1], work[rng() % i]);
    }

    // Lloyd iterations land in local optima fairly often under 1-IoU, so
    // run several seeded restarts and keep the cheapest solution.
    constexpr int kRestarts = 16;
    std::vector<AnchorDims> anchors;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < kRestarts; ++restart) {
        std::vector<AnchorDims> cur = seed_centroids(work, k, rng);
        std::vector<int> assignment = assign(work, cur);
        double cost = mean_cost(work, cur, assignment);
        std::vector<double> trace{cost};

        for (int iter = 0; iter < max_iters; ++iter) {
            const std::vector<AnchorDims> prev_anchors = cur;
            const std::vector<int> prev_assignment = assignment;
            // Update: member-wise mean per cluster.
            std::vector<double> sum_w(static_cast<std::size_t>(k), 0.0);
            std::vector<double> sum_h(static_cast<std::size_t>(k), 0.0);
            std::vector<int> members(static_cast<std::size_t>(k), 0);
            for (std::size_t i = 0; i < work.size(); ++i) {
                const auto a = static_cast<std::size_t>(assignment[i]);
                sum_w[a] += work[i].w;
                sum_h[a] += work[i].h;
                ++members[a];
            }
            for (int a = 0; a < k; ++a) {
                const auto ai = static_cast<std::size_t>(a);
                if (members[ai] > 0) {
                    cur[ai] = {sum_w[ai] / members[ai],
                               sum_h[ai] / members[ai]};
                } else {
                    // Re-seed an emptied cluster to the worst-fit box.
                    std::size_t worst = 0;
                    double worst_d = -1.0;
                    for (std::size_t i = 0; i < work.size(); ++i) {
                        const double d = anchor_distance(
                            work[i],
                            cur[static_cast<std::size_t>(assignment[i])]);
                        if (d > worst_d) {
                            worst_d = d;
                            worst = i;
                        }
                    }
                    cur[ai] = work[worst];
                }
            }

            std::vector<int> next_assignment = assign(work, cur);
            const double next_cost = mean_cost(work, cur, next_assignment);
            if (next_cost > cost) {
                // The mean update is not optimal under 1-IoU; reject a step
                // that would raise the cost and keep the previous solution.
                cur = prev_anchors;
                assignment = prev_assignment;
                break;
            }
            const bool unchanged = next_assignment == assignment;
            const bool converged = cost - next_cost < tol;
            assignment = std::move(next_assignment);
            cost = next_cost;
            trace.push_back(cost);
            if (unchanged || converged) break;
        }

        if (cost < best_cost) {
            best_cost = cost;
            anchors = std::move(cur);
            if (cost_trace) *cost_trace = std::move(trace);
        }
    }

    AnchorSet result;
    result.k = k;
    result.anchors = anchors;
    std::sort(result.anchors.begin(), result.anchors.end(),
              [](const AnchorDims& a, const AnchorDims& b) {
                  return a.w * a.h < b.w * b.h;
              });
    result.final_cost =
        mean_cost(work, result.anchors, assign(work, result.anchors));
    return result;
}

std::vector<int> assign_boxes(const std::vector<AnchorDims>& boxes,
                              const AnchorSet& anchors) {
    return assign(boxes, anchors.anchors);
}

std::string format_darknet_anchors(const AnchorSet& anchors, int resolution) {
    std::string out;
    for (std::size_t i = 0; i < anchors.anchors.size(); ++i) {
        if (i) out += ", ";
        const long w = std::lround(anchors.anchors[i].w * resolution);
        const long h = std::lround(anchors.anchors[i].h * resolution);
        out += std::to_string(w) + "," + std::to_string(h);
    }
    return out;
}

} // namespace tsr
