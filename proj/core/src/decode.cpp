#include "tsr/decode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "tsr/errors.hpp"

namespace tsr {

namespace {

// Stable sort key: descending score, then (row, col, box index) ascending.
// Box index equals position within the cell, which decode emission order
// already encodes, so a stable sort on the emission order suffices.
void sort_detections(std::vector<Detection>& dets) {
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection& a, const Detection& b) {
                         if (a.score != b.score) return a.score > b.score;
                         if (a.cell_row != b.cell_row)
                             return a.cell_row < b.cell_row;
                         return a.cell_col < b.cell_col;
                     });
}

} // namespace

void GridDecodeConfig::validate() const {
    if (s <= 0 || b <= 0 || c <= 0) {
        throw ConfigError("grid config: s, b, c must be positive");
    }
    if (conf_threshold < 0.0 || conf_threshold > 1.0) {
        throw ConfigError("grid config: conf_threshold outside [0,1]");
    }
    if (input_w <= 0 || input_h <= 0 || input_w % 32 != 0 ||
        input_h % 32 != 0) {
        throw ConfigError("grid config: input dimensions must be positive "
                          "multiples of 32");
    }
}

std::vector<Detection> decode_layer(const RawLayerOutput& raw) {
    const auto& cfg = raw.config;
    cfg.validate();
    if (raw.values.size() != cfg.tensor_length()) {
        throw ConfigError("decode_layer: tensor length mismatch, expected " +
                          std::to_string(cfg.tensor_length()) + ", got " +
                          std::to_string(raw.values.size()));
    }

    const int stride = 5 * cfg.b + cfg.c;
    std::vector<Detection> out;
    for (int row = 0; row < cfg.s; ++row) {
        for (int col = 0; col < cfg.s; ++col) {
            const std::size_t base =
                static_cast<std::size_t>(row * cfg.s + col) * stride;
            const double* cell = raw.values.data() + base;
            const double* class_scores = cell + 5 * cfg.b;

            int best_class = 0;
            double best_class_score = class_scores[0];
            for (int k = 1; k < cfg.c; ++k) {
                if (class_scores[k] > best_class_score) {
                    best_class_score = class_scores[k];
                    best_class = k;
                }
            }

            for (int bi = 0; bi < cfg.b; ++bi) {
                const double* box = cell + 5 * bi;
                const double score = box[4] * best_class_score;
                if (score < cfg.conf_threshold) continue;
                out.push_back(Detection{
                    BoundingBox{box[0], box[1], box[2], box[3]},
                    best_class, score, row, col});
            }
        }
    }
    sort_detections(out);
    return out;
}

RawLayerOutput encode_layer(const std::vector<Detection>& dets,
                            const GridDecodeConfig& config) {
    config.validate();
    RawLayerOutput raw{config, std::vector<double>(config.tensor_length(), 0.0)};
    const int stride = 5 * config.b + config.c;
    std::vector<int> used(static_cast<std::size_t>(config.s) * config.s, 0);

    for (const auto& d : dets) {
        const int col = std::min(config.s - 1,
                                 static_cast<int>(d.box.cx * config.s));
        const int row = std::min(config.s - 1,
                                 static_cast<int>(d.box.cy * config.s));
        const std::size_t cell = static_cast<std::size_t>(row * config.s + col);
        if (used[cell] >= config.b) {
            throw DomainError("encode_layer: more than " +
                              std::to_string(config.b) +
                              " detections in cell (" + std::to_string(row) +
                              "," + std::to_string(col) + ")");
        }
        double* block = raw.values.data() + cell * stride + 5 * used[cell];
        block[0] = d.box.cx;
        block[1] = d.box.cy;
        block[2] = d.box.w;
        block[3] = d.box.h;
        block[4] = d.score; // class probability is 1, so conf carries score
        raw.values[cell * stride + 5 * config.b + d.class_id] = 1.0;
        ++used[cell];
    }
    return raw;
}

double confidence(int pr_object, double iou_with_truth) {
    if (pr_object != 0 && pr_object != 1) {
        throw DomainError("confidence: pr(Object) must be 0 or 1");
    }
    if (!(iou_with_truth >= 0.0 && iou_with_truth <= 1.0)) {
        throw DomainError("confidence: IoU outside [0,1]");
    }
    return pr_object * iou_with_truth;
}

std::vector<Detection> merge_layers(
    const std::vector<std::vector<Detection>>& layers,
    const std::vector<GridDecodeConfig>& configs) {
    for (std::size_t i = 1; i < configs.size(); ++i) {
        if (configs[i].c != configs[0].c) {
            throw ConfigError("merge_layers: layers disagree on class count");
        }
    }
    std::vector<Detection> merged;
    for (const auto& layer : layers) {
        merged.insert(merged.end(), layer.begin(), layer.end());
    }
    sort_detections(merged);
    return merged;
}

namespace {

void put_u32le(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v & 0xff),
                            static_cast<unsigned char>((v >> 8) & 0xff),
                            static_cast<unsigned char>((v >> 16) & 0xff),
                            static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

bool get_u32le(std::istream& in, std::uint32_t& v) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4)) return false;
    v = static_cast<std::uint32_t>(buf[0]) |
        (static_cast<std::uint32_t>(buf[1]) << 8) |
        (static_cast<std::uint32_t>(buf[2]) << 16) |
        (static_cast<std::uint32_t>(buf[3]) << 24);
    return true;
}

void put_f64le(std::ostream& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf), 8);
}

bool get_f64le(std::istream& in, double& d) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) return false;
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    std::memcpy(&d, &bits, 8);
    return true;
}

} // namespace

void write_layer_record(std::ostream& out, const RawLayerOutput& layer) {
    put_u32le(out, static_cast<std::uint32_t>(layer.config.s));
    put_u32le(out, static_cast<std::uint32_t>(layer.config.b));
    put_u32le(out, static_cast<std::uint32_t>(layer.config.c));
    put_u32le(out, 0);
    for (double v : layer.values) {
        put_f64le(out, v);
    }
}

std::vector<RawLayerOutput> read_layer_records(std::istream& in,
                                               double conf_threshold) {
    std::vector<RawLayerOutput> records;
    std::uint32_t s;
    while (get_u32le(in, s)) {
        std::uint32_t b, c, reserved;
        if (!get_u32le(in, b) || !get_u32le(in, c) ||
            !get_u32le(in, reserved)) {
            throw ParseError("layer record: truncated header");
        }
        if (reserved != 0) {
            throw ConfigError("layer record: nonzero reserved header field");
        }
        GridDecodeConfig cfg;
        cfg.s = static_cast<int>(s);
        cfg.b = static_cast<int>(b);
        cfg.c = static_cast<int>(c);
        cfg.conf_threshold = conf_threshold;
        cfg.validate();

        RawLayerOutput layer{cfg, {}};
        layer.values.resize(cfg.tensor_length());
        for (double& v : layer.values) {
            if (!get_f64le(in, v)) {
                throw ParseError("layer record: truncated tensor body");
            }
        }
        records.push_back(std::move(layer));
    }
    return records;
}

} // namespace tsr
