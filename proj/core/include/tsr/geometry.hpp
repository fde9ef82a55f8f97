#pragma once

#include <array>

namespace tsr {

// Axis-aligned box in center format (cx, cy, w, h). Units are either
// normalized [0,1] image fractions or pixels; callers never mix regimes
// within one call. Zero-area boxes are legal values (IoU 0 with everything).
struct BoundingBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    double left() const { return cx - w / 2.0; }
    double right() const { return cx + w / 2.0; }
    double top() const { return cy - h / 2.0; }
    double bottom() const { return cy + h / 2.0; }
    double area() const { return w * h; }

    bool operator==(const BoundingBox&) const = default;
};

// Intersection over union in [0,1]. Returns 0 when the union area is 0.
// Throws GeometryError on non-finite coordinates.
double iou(const BoundingBox& a, const BoundingBox& b);

// (left, top, right, bottom)
std::array<double, 4> to_corner(const BoundingBox& b);

// Throws GeometryError when left > right or top > bottom.
BoundingBox from_corner(double left, double top, double right, double bottom);

} // namespace tsr
