#include "tsr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <thread>

#include "tsr/errors.hpp"
#include "tsr/eval.hpp"

namespace tsr {

TensorDirectorySource::TensorDirectorySource(const std::filesystem::path& dir,
                                             double conf_threshold)
    : conf_threshold_(conf_threshold) {
    if (!std::filesystem::is_directory(dir)) {
        throw IoError("frame source: not a directory: " + dir.string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file()) {
            files_.push_back(entry.path());
        }
    }
    std::sort(files_.begin(), files_.end());
}

std::optional<FrameRecord> TensorDirectorySource::next() {
    if (pos_ >= files_.size()) return std::nullopt;
    const auto& path = files_[pos_];
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("frame source: cannot open " + path.string());
    }
    FrameRecord frame;
    frame.frame_index = pos_;
    try {
        frame.payload = read_layer_records(in, conf_threshold_);
    } catch (const Error& e) {
        throw ParseError("frame " + std::to_string(pos_) + " (" +
                         path.filename().string() + "): " + e.what());
    }
    ++pos_;
    return frame;
}

DetectionJsonlSource::DetectionJsonlSource(const std::filesystem::path& file) {
    const auto dets = load_detections_jsonl(file);
    std::string current_id;
    std::vector<Detection> current;
    for (const auto& d : dets) {
        if (d.image_id != current_id && !current.empty()) {
            frames_.push_back(std::move(current));
            current.clear();
        }
        current_id = d.image_id;
        current.push_back(d.det);
    }
    if (!current.empty()) {
        frames_.push_back(std::move(current));
    }
}

std::optional<FrameRecord> DetectionJsonlSource::next() {
    if (frames_.empty()) return std::nullopt;
    FrameRecord frame;
    frame.frame_index = index_++;
    frame.payload = std::move(frames_.front());
    frames_.pop_front();
    return frame;
}

FpsMeter::FpsMeter(std::size_t window) : window_(window) {
    if (window_ == 0) {
        throw DomainError("fps meter: window must be >= 1");
    }
}

double FpsMeter::record(double frame_duration_ms) {
    if (!(frame_duration_ms > 0.0)) {
        throw DomainError("fps meter: duration must be positive");
    }
    durations_ms_.push_back(frame_duration_ms);
    window_sum_ms_ += frame_duration_ms;
    if (durations_ms_.size() > window_) {
        window_sum_ms_ -= durations_ms_.front();
        durations_ms_.pop_front();
    }
    ++frames_seen_;
    return current_fps();
}

double FpsMeter::current_fps() const {
    if (durations_ms_.empty() || window_sum_ms_ <= 0.0) return 0.0;
    return static_cast<double>(durations_ms_.size()) /
           (window_sum_ms_ / 1000.0);
}

namespace {

void log_frame_detections(std::ostream& out, std::uint64_t frame_index,
                          const std::vector<Detection>& dets) {
    char buf[256];
    for (const auto& d : dets) {
        std::snprintf(buf, sizeof(buf),
                      "{\"image_id\":\"%06llu\",\"class_id\":%d,"
                      "\"score\":%.9f,\"cx\":%.9f,\"cy\":%.9f,"
                      "\"w\":%.9f,\"h\":%.9f}\n",
                      static_cast<unsigned long long>(frame_index), d.class_id,
                      d.score, d.box.cx, d.box.cy, d.box.w, d.box.h);
        out << buf;
    }
}

} // namespace

PipelineSummary run_pipeline(FrameSource& source, const PipelineOptions& opts,
                             NarrationBackend& backend,
                             const TemplateTable& templates) {
    using clock = std::chrono::steady_clock;

    NarrationQueue queue(opts.policy.queue_capacity);
    PipelineSummary summary;

    std::uint64_t emitted = 0;
    std::uint64_t failures = 0;
    std::thread narrator([&] {
        while (auto ev = queue.pop()) {
            if (backend.speak(*ev)) {
                ++emitted;
            } else {
                ++emitted;
                ++failures;
            }
        }
    });

    NarrationState state;
    FpsMeter meter(opts.fps_window);
    double total_processing_ms = 0.0;
    bool have_last_index = false;
    std::uint64_t last_index = 0;
    const auto epoch = clock::now();

    try {
        while (auto frame = source.next()) {
            if (have_last_index && frame->frame_index <= last_index) {
                throw ConfigError(
                    "pipeline: frame indices must be strictly increasing at "
                    "frame " +
                    std::to_string(frame->frame_index));
            }
            last_index = frame->frame_index;
            have_last_index = true;

            const auto start = clock::now();
            std::vector<Detection> merged;
            if (auto* layers =
                    std::get_if<std::vector<RawLayerOutput>>(&frame->payload)) {
                std::vector<std::vector<Detection>> decoded;
                std::vector<GridDecodeConfig> configs;
                for (const auto& layer : *layers) {
                    if (layer.config.c != opts.decode.c) {
                        throw ConfigError(
                            "pipeline: frame " +
                            std::to_string(frame->frame_index) +
                            " class count " + std::to_string(layer.config.c) +
                            " does not match configured " +
                            std::to_string(opts.decode.c));
                    }
                    decoded.push_back(decode_layer(layer));
                    configs.push_back(layer.config);
                }
                merged = merge_layers(decoded, configs);
            } else {
                merged =
                    std::get<std::vector<Detection>>(std::move(frame->payload));
            }

            const auto kept = nms(merged, opts.nms);
            summary.detections_emitted += kept.size();

            const auto now_ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(
                    clock::now() - epoch)
                    .count();
            const auto events = filter_new_detections(
                kept, state, opts.policy, templates, opts.class_names,
                frame->frame_index, now_ms);
            for (auto ev : events) {
                const auto result = queue.push(std::move(ev));
                if (result.outcome == EnqueueOutcome::evicted_oldest) {
                    ++summary.events_dropped;
                }
            }

            const double duration_ms =
                std::chrono::duration<double, std::milli>(clock::now() - start)
                    .count();
            // Sub-resolution frames still count as some positive time.
            meter.record(std::max(duration_ms, 1e-6));
            total_processing_ms += std::max(duration_ms, 1e-6);
            ++summary.frames_processed;

            if (opts.detection_log) {
                log_frame_detections(*opts.detection_log, frame->frame_index,
                                     kept);
            }
        }
    } catch (...) {
        queue.close();
        narrator.join();
        throw;
    }

    queue.close();
    narrator.join();
    summary.events_emitted = emitted;
    summary.backend_failures = failures;
    if (total_processing_ms > 0.0) {
        summary.average_fps = static_cast<double>(summary.frames_processed) /
                              (total_processing_ms / 1000.0);
    }
    return summary;
}

} // namespace tsr
