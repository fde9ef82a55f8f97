#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "tsr/detection.hpp"

namespace tsr {

// Decode contract for one YOLO detection layer: the image is split into an
// s x s grid, each cell predicts b boxes with confidences plus c shared
// class scores, giving a flat tensor of s*s*(5b+c) values.
struct GridDecodeConfig {
    int s = 7;
    int b = 2;
    int c = 4;
    double conf_threshold = 0.25;
    int input_w = 608;
    int input_h = 608;

    std::size_t tensor_length() const {
        return static_cast<std::size_t>(s) * s * (5 * b + c);
    }

    // Throws ConfigError on non-positive s/b/c, threshold outside [0,1],
    // or input dimensions that are not positive multiples of 32.
    void validate() const;
};

// Flat layer output, cell-major (row-major over the grid): per cell,
// b blocks of (bx, by, bw, bh, conf) followed by c class scores.
struct RawLayerOutput {
    GridDecodeConfig config;
    std::vector<double> values;
};

// Emits one Detection per (cell, box) whose conf * max-class-score clears
// config.conf_threshold. class_id is the argmax class (lowest index on
// ties). Output sorted by descending score, ties by (row, col, box index).
// Throws ConfigError when values.size() != s*s*(5b+c).
std::vector<Detection> decode_layer(const RawLayerOutput& raw);

// Inverse of decode_layer for tests and fixture generation: each detection
// occupies one box block of the cell containing its center, with
// conf = score and its class score set to 1. Throws DomainError when more
// than config.b detections land in one cell.
RawLayerOutput encode_layer(const std::vector<Detection>& dets,
                            const GridDecodeConfig& config);

// Confidence = pr(Object) x IoU. pr_object must be 0 or 1 and
// iou_with_truth in [0,1]; throws DomainError otherwise.
double confidence(int pr_object, double iou_with_truth);

// Concatenates per-layer detections and re-sorts by descending score with
// the decode tie-break. No deduplication (NMS handles overlaps).
// Layers must share C; throws ConfigError otherwise.
std::vector<Detection> merge_layers(
    const std::vector<std::vector<Detection>>& layers,
    const std::vector<GridDecodeConfig>& configs);

// Binary layer record: header of four little-endian uint32 (s, b, c,
// reserved=0) followed by s*s*(5b+c) little-endian float64. A frame file
// concatenates one record per layer.
void write_layer_record(std::ostream& out, const RawLayerOutput& layer);

// Reads records until EOF. Throws ParseError on a truncated record and
// ConfigError on a nonzero reserved field.
std::vector<RawLayerOutput> read_layer_records(std::istream& in,
                                               double conf_threshold);

} // namespace tsr
