#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tsr/detection.hpp"

namespace tsr {

// Deduplicated "say this sign" message handed to the audio backend.
struct NarrationEvent {
    int class_id = 0;
    std::string class_name;
    std::string message;
    std::uint64_t frame_index = 0;
    std::int64_t timestamp_ms = 0;
};

struct NarrationPolicy {
    std::int64_t cooldown_ms = 5000; // re-announcement suppression per class
    double min_score = 0.0;
    std::string locale = "en";
    std::size_t queue_capacity = 16;
};

// Message templates keyed by (locale, class name); template text carries
// the literal placeholder {sign}. The reserved class name "*" is the
// locale default. Resolution order: (locale, class) -> (locale, *) ->
// ("en", class) -> ("en", *).
class TemplateTable {
public:
    // Ships with English defaults so narration works with no config file.
    static TemplateTable builtin_defaults();

    // File format: lines `locale<TAB>class_name<TAB>template`.
    static TemplateTable load(const std::filesystem::path& file);
    static TemplateTable parse(std::istream& in, const std::string& origin);

    void set(const std::string& locale, const std::string& class_name,
             const std::string& tmpl);

    // Throws DomainError naming locale and class when nothing resolves.
    std::string render(const std::string& class_name,
                       const std::string& locale) const;

private:
    std::map<std::pair<std::string, std::string>, std::string> entries_;
};

std::string render_message(const std::string& class_name,
                           const std::string& locale,
                           const TemplateTable& templates);

// Per-class last-announced timestamps owned by the detection loop.
using NarrationState = std::unordered_map<int, std::int64_t>;

// For each class in the frame whose best score clears min_score, emits one
// event iff the class was never announced or the cooldown has elapsed, and
// stamps the class with `now`. At most one event per class per frame.
std::vector<NarrationEvent> filter_new_detections(
    const std::vector<Detection>& frame_dets, NarrationState& state,
    const NarrationPolicy& policy, const TemplateTable& templates,
    const std::vector<std::string>& class_names, std::uint64_t frame_index,
    std::int64_t now_ms);

enum class EnqueueOutcome { accepted, evicted_oldest };

struct EnqueueResult {
    EnqueueOutcome outcome = EnqueueOutcome::accepted;
    std::optional<NarrationEvent> dropped;
};

// Bounded single-producer/single-consumer queue joining the detection loop
// to the narration worker. push never blocks on the consumer: when full it
// evicts the oldest queued event (freshest sign wins) and reports the drop.
class NarrationQueue {
public:
    explicit NarrationQueue(std::size_t capacity);

    EnqueueResult push(NarrationEvent ev);

    // Blocks until an event is available or close() was called with the
    // queue empty; returns nullopt on shutdown.
    std::optional<NarrationEvent> pop();

    void close();
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::condition_variable not_empty_;
    std::deque<NarrationEvent> queue_;
    std::size_t capacity_;
    bool closed_ = false;
};

// Sink for rendered narration. speak() failures must not propagate into
// the detection path; implementations report them via their return value.
class NarrationBackend {
public:
    virtual ~NarrationBackend() = default;
    virtual bool speak(const NarrationEvent& ev) = 0;
};

// Writes `ts_ms<TAB>class_name<TAB>message` lines; used by all tests.
class TextSinkBackend : public NarrationBackend {
public:
    explicit TextSinkBackend(std::ostream& out);
    bool speak(const NarrationEvent& ev) override;

private:
    std::ostream& out_;
    std::mutex mutex_;
};

// Invokes a configured command with the rendered message appended as the
// final argument, enabling any external TTS engine. Nonzero exit is
// reported as failure, never fatal.
class ExternalCommandBackend : public NarrationBackend {
public:
    explicit ExternalCommandBackend(std::string command);
    bool speak(const NarrationEvent& ev) override;

private:
    std::string command_;
};

} // namespace tsr
