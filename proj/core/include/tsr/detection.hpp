#pragma once

#include "tsr/geometry.hpp"

namespace tsr {

// One decoded candidate: normalized box, argmax class, class-specific
// confidence, and the grid cell it came from.
struct Detection {
    BoundingBox box;
    int class_id = 0;
    double score = 0.0;
    int cell_row = 0;
    int cell_col = 0;

    bool operator==(const Detection&) const = default;
};

} // namespace tsr
