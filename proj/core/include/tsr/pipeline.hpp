#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "tsr/decode.hpp"
#include "tsr/narration.hpp"
#include "tsr/nms.hpp"

namespace tsr {

// One frame of replay input: raw layer tensors (decode path) or
// pre-decoded detections (bypass path).
struct FrameRecord {
    std::uint64_t frame_index = 0;
    std::variant<std::vector<RawLayerOutput>, std::vector<Detection>> payload;
    std::optional<std::int64_t> capture_ts_ms;
};

// Pull interface over a frame stream; next() returns nullopt at end.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual std::optional<FrameRecord> next() = 0;
};

// Replays a directory of binary tensor frame files (lexicographic order,
// one file per frame, concatenated layer records inside).
class TensorDirectorySource : public FrameSource {
public:
    TensorDirectorySource(const std::filesystem::path& dir,
                          double conf_threshold);
    std::optional<FrameRecord> next() override;

private:
    std::vector<std::filesystem::path> files_;
    std::size_t pos_ = 0;
    double conf_threshold_;
};

// Replays a detection JSON-lines file; consecutive lines sharing an
// image_id form one frame.
class DetectionJsonlSource : public FrameSource {
public:
    explicit DetectionJsonlSource(const std::filesystem::path& file);
    std::optional<FrameRecord> next() override;

private:
    std::deque<std::vector<Detection>> frames_;
    std::uint64_t index_ = 0;
};

// Sliding-window throughput meter: FPS = window count / window duration.
class FpsMeter {
public:
    explicit FpsMeter(std::size_t window = 100);

    // Pushes one frame's processing duration and returns the windowed FPS.
    // Throws DomainError on a non-positive duration.
    double record(double frame_duration_ms);

    double current_fps() const;
    std::size_t frames_seen() const { return frames_seen_; }

private:
    std::size_t window_;
    std::deque<double> durations_ms_;
    double window_sum_ms_ = 0.0;
    std::size_t frames_seen_ = 0;
};

struct PipelineSummary {
    std::uint64_t frames_processed = 0;
    std::uint64_t detections_emitted = 0;
    std::uint64_t events_emitted = 0;   // delivered to the backend
    std::uint64_t events_dropped = 0;   // evicted from the queue
    std::uint64_t backend_failures = 0;
    double average_fps = 0.0;
};

struct PipelineOptions {
    GridDecodeConfig decode;
    NmsConfig nms;
    NarrationPolicy policy;
    std::vector<std::string> class_names; // falls back to "sign <id>"
    std::size_t fps_window = 100;
    // Deterministic per-frame detection log (JSON lines), for replay
    // comparison; null disables logging.
    std::ostream* detection_log = nullptr;
};

// Runs the two-stage runtime: the detection loop (decode -> merge -> NMS ->
// narration filter -> enqueue) and a narration worker draining the queue
// through the backend, joined solely by the bounded queue. FPS covers
// processing time only, not source I/O. Backend failures are counted,
// never fatal. Throws ConfigError/ParseError on malformed frames, with the
// frame index in the message.
PipelineSummary run_pipeline(FrameSource& source, const PipelineOptions& opts,
                             NarrationBackend& backend,
                             const TemplateTable& templates);

} // namespace tsr
