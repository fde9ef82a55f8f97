#include <doctest.h>

#include <cmath>
#include <random>

#include "tsr/errors.hpp"
#include "tsr/geometry.hpp"

using tsr::BoundingBox;

namespace {

BoundingBox random_box(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> center(0.0, 1.0);
    std::uniform_real_distribution<double> size(0.01, 0.5);
    return BoundingBox{center(rng), center(rng), size(rng), size(rng)};
}

} // namespace

TEST_CASE("iou identity") {
    const BoundingBox b{0.4, 0.6, 0.2, 0.3};
    CHECK(tsr::iou(b, b) == doctest::Approx(1.0));
}

TEST_CASE("iou disjoint boxes") {
    CHECK(tsr::iou({0.2, 0.2, 0.1, 0.1}, {0.8, 0.8, 0.1, 0.1}) == 0.0);
}

TEST_CASE("iou hand case: half-overlapping unit squares scaled by 2") {
    // intersection 1x2 = 2, union 4 + 4 - 2 = 6
    CHECK(tsr::iou({1, 1, 2, 2}, {2, 1, 2, 2}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("iou of zero-area boxes is 0") {
    const BoundingBox point{0.5, 0.5, 0.0, 0.0};
    CHECK(tsr::iou(point, point) == 0.0);
    CHECK(tsr::iou(point, {0.5, 0.5, 0.2, 0.2}) == 0.0);
}

TEST_CASE("iou rejects non-finite coordinates") {
    const BoundingBox bad{std::nan(""), 0.0, 1.0, 1.0};
    CHECK_THROWS_AS(tsr::iou(bad, {0, 0, 1, 1}), tsr::GeometryError);
    const BoundingBox inf{0.0, 0.0, std::numeric_limits<double>::infinity(),
                          1.0};
    CHECK_THROWS_AS(tsr::iou({0, 0, 1, 1}, inf), tsr::GeometryError);
}

TEST_CASE("to_corner trivial cases") {
    auto [l1, t1, r1, b1] = tsr::to_corner({0.5, 0.5, 1.0, 1.0});
    CHECK(l1 == 0.0);
    CHECK(t1 == 0.0);
    CHECK(r1 == 1.0);
    CHECK(b1 == 1.0);

    auto [l2, t2, r2, b2] = tsr::to_corner({1, 1, 2, 2});
    CHECK(l2 == 0.0);
    CHECK(t2 == 0.0);
    CHECK(r2 == 2.0);
    CHECK(b2 == 2.0);
}

TEST_CASE("from_corner cases") {
    CHECK(tsr::from_corner(0, 0, 1, 1) == BoundingBox{0.5, 0.5, 1, 1});
    // GTSDB-style pixel row
    CHECK(tsr::from_corner(774, 411, 815, 446) ==
          BoundingBox{794.5, 428.5, 41, 35});
    // degenerate point box is legal
    CHECK(tsr::from_corner(3, 3, 3, 3) == BoundingBox{3, 3, 0, 0});
    CHECK_THROWS_AS(tsr::from_corner(1, 0, 0, 1), tsr::GeometryError);
    CHECK_THROWS_AS(tsr::from_corner(0, 1, 1, 0), tsr::GeometryError);
}

TEST_CASE("corner round-trip property") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        const BoundingBox b = random_box(rng);
        const auto [l, t, r, btm] = tsr::to_corner(b);
        const BoundingBox back = tsr::from_corner(l, t, r, btm);
        CHECK(back.cx == doctest::Approx(b.cx).epsilon(1e-12));
        CHECK(back.cy == doctest::Approx(b.cy).epsilon(1e-12));
        CHECK(back.w == doctest::Approx(b.w).epsilon(1e-12));
        CHECK(back.h == doctest::Approx(b.h).epsilon(1e-12));
    }
}

TEST_CASE("iou symmetry, range, translation and scale invariance") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> offset(-5.0, 5.0);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const BoundingBox a = random_box(rng);
        const BoundingBox b = random_box(rng);
        const double v = tsr::iou(a, b);
        CHECK(v == tsr::iou(b, a));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);

        const double tx = offset(rng), ty = offset(rng);
        const BoundingBox at{a.cx + tx, a.cy + ty, a.w, a.h};
        const BoundingBox bt{b.cx + tx, b.cy + ty, b.w, b.h};
        CHECK(tsr::iou(at, bt) == doctest::Approx(v).epsilon(1e-9));

        const double s = scale(rng);
        const BoundingBox as{a.cx * s, a.cy * s, a.w * s, a.h * s};
        const BoundingBox bs{b.cx * s, b.cy * s, b.w * s, b.h * s};
        CHECK(tsr::iou(as, bs) == doctest::Approx(v).epsilon(1e-9));
    }
}

TEST_CASE("iou equals 1 only for identical positive-area boxes") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 200; ++i) {
        const BoundingBox a = random_box(rng);
        BoundingBox b = a;
        b.cx += 1e-3;
        CHECK(tsr::iou(a, a) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(tsr::iou(a, b) < 1.0);
    }
}
