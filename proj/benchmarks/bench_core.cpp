#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tsr/anchors.hpp"
#include "tsr/decode.hpp"
#include "tsr/geometry.hpp"
#include "tsr/nms.hpp"

namespace {

std::vector<tsr::Detection> random_detections(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> center(0.1, 0.9);
    std::uniform_real_distribution<double> size(0.02, 0.3);
    std::uniform_real_distribution<double> score(0.0, 1.0);
    std::vector<tsr::Detection> dets;
    dets.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        dets.push_back(tsr::Detection{
            {center(rng), center(rng), size(rng), size(rng)},
            static_cast<int>(rng() % 4), score(rng), 0, 0});
    }
    return dets;
}

void bm_iou(benchmark::State& state) {
    const tsr::BoundingBox a{0.5, 0.5, 0.2, 0.3};
    const tsr::BoundingBox b{0.55, 0.45, 0.25, 0.2};
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsr::iou(a, b));
    }
}
BENCHMARK(bm_iou);

void bm_nms(benchmark::State& state) {
    const auto dets =
        random_detections(static_cast<int>(state.range(0)), 42);
    const tsr::NmsConfig cfg{0.45, false};
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsr::nms(dets, cfg));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_nms)->Range(8, 1024)->Complexity();

void bm_decode_layer(benchmark::State& state) {
    const tsr::GridDecodeConfig cfg{static_cast<int>(state.range(0)), 3, 11,
                                    0.25, 608, 608};
    const auto dets = random_detections(20, 7);
    // place detections where the encoder expects them: one class per cell
    std::vector<tsr::Detection> placed;
    std::vector<int> used(static_cast<std::size_t>(cfg.s) * cfg.s, 0);
    std::vector<int> cls(static_cast<std::size_t>(cfg.s) * cfg.s, -1);
    for (auto d : dets) {
        const int col =
            std::min(cfg.s - 1, static_cast<int>(d.box.cx * cfg.s));
        const int row =
            std::min(cfg.s - 1, static_cast<int>(d.box.cy * cfg.s));
        const std::size_t cell = static_cast<std::size_t>(row * cfg.s + col);
        if (used[cell] >= cfg.b) continue;
        if (cls[cell] < 0) cls[cell] = d.class_id;
        d.class_id = cls[cell];
        d.cell_row = row;
        d.cell_col = col;
        placed.push_back(d);
        ++used[cell];
    }
    const auto layer = tsr::encode_layer(placed, cfg);
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsr::decode_layer(layer));
    }
}
BENCHMARK(bm_decode_layer)->Arg(13)->Arg(19)->Arg(38);

void bm_kmeans_anchors(benchmark::State& state) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> size(0.01, 0.9);
    std::vector<tsr::AnchorDims> boxes;
    for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
        boxes.push_back({size(rng), size(rng)});
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(tsr::kmeans_anchors(boxes, 6, 1));
    }
}
BENCHMARK(bm_kmeans_anchors)->Arg(256)->Arg(1024);

} // namespace

BENCHMARK_MAIN();
