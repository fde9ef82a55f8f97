#include "tsr/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "tsr/errors.hpp"

namespace tsr {

namespace {

bool finite_box(const BoundingBox& b) {
    return std::isfinite(b.cx) && std::isfinite(b.cy) && std::isfinite(b.w) &&
           std::isfinite(b.h);
}

} // namespace

double iou(const BoundingBox& a, const BoundingBox& b) {
    if (!finite_box(a) || !finite_box(b)) {
        throw GeometryError("iou: non-finite box coordinates");
    }
    const double ix = std::min(a.right(), b.right()) -
                      std::max(a.left(), b.left());
    const double iy = std::min(a.bottom(), b.bottom()) -
                      std::max(a.top(), b.top());
    if (ix <= 0.0 || iy <= 0.0) {
        return 0.0;
    }
    const double inter = ix * iy;
    // Areas use the same corner arithmetic as the intersection so that
    // identical boxes produce an IoU of exactly 1.
    const double area_a = (a.right() - a.left()) * (a.bottom() - a.top());
    const double area_b = (b.right() - b.left()) * (b.bottom() - b.top());
    const double uni = area_a + area_b - inter;
    if (uni <= 0.0) {
        return 0.0;
    }
    return inter / uni;
}

std::array<double, 4> to_corner(const BoundingBox& b) {
    return {b.left(), b.top(), b.right(), b.bottom()};
}

BoundingBox from_corner(double left, double top, double right, double bottom) {
    if (!(std::isfinite(left) && std::isfinite(top) && std::isfinite(right) &&
          std::isfinite(bottom))) {
        throw GeometryError("from_corner: non-finite corner coordinates");
    }
    if (left > right || top > bottom) {
        throw GeometryError("from_corner: inverted corners");
    }
    return BoundingBox{(left + right) / 2.0, (top + bottom) / 2.0,
                       right - left, bottom - top};
}

} // namespace tsr
