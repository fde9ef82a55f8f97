#include "tsr/narration.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>

#include "tsr/errors.hpp"

namespace tsr {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string substitute_sign(std::string tmpl, const std::string& class_name) {
    const std::string placeholder = "{sign}";
    std::string::size_type pos = 0;
    while ((pos = tmpl.find(placeholder, pos)) != std::string::npos) {
        tmpl.replace(pos, placeholder.size(), class_name);
        pos += class_name.size();
    }
    return tmpl;
}

constexpr const char* kDefaultLocale = "en";

} // namespace

TemplateTable TemplateTable::builtin_defaults() {
    TemplateTable t;
    t.set("en", "*", "{sign} ahead");
    t.set("en", "stop", "Stop sign ahead");
    t.set("en", "yield", "Yield ahead");
    t.set("en", "speed-limit", "Speed limit ahead");
    t.set("en", "pedestrian-crossing", "Pedestrian crossing ahead");
    t.set("en", "no-entry", "No entry ahead");
    t.set("en", "danger", "Danger sign ahead");
    t.set("en", "prohibitory", "Prohibitory sign ahead");
    t.set("en", "mandatory", "Mandatory sign ahead");
    t.set("en", "others", "Sign ahead");
    return t;
}

TemplateTable TemplateTable::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("templates: cannot open " + file.string());
    }
    return parse(in, file.string());
}

TemplateTable TemplateTable::parse(std::istream& in,
                                   const std::string& origin) {
    TemplateTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        const auto tab1 = line.find('\t');
        const auto tab2 =
            tab1 == std::string::npos ? std::string::npos
                                      : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos) {
            throw ParseError(origin + ":" + std::to_string(line_no) +
                             ": expected locale<TAB>class<TAB>template");
        }
        const std::string locale = trim(line.substr(0, tab1));
        const std::string cls = trim(line.substr(tab1 + 1, tab2 - tab1 - 1));
        const std::string tmpl = trim(line.substr(tab2 + 1));
        if (locale.empty() || cls.empty() || tmpl.empty()) {
            throw ParseError(origin + ":" + std::to_string(line_no) +
                             ": empty field");
        }
        table.set(locale, cls, tmpl);
    }
    return table;
}

void TemplateTable::set(const std::string& locale,
                        const std::string& class_name,
                        const std::string& tmpl) {
    entries_[{locale, class_name}] = tmpl;
}

std::string TemplateTable::render(const std::string& class_name,
                                  const std::string& locale) const {
    const std::pair<std::string, std::string> keys[] = {
        {locale, class_name},
        {locale, "*"},
        {kDefaultLocale, class_name},
        {kDefaultLocale, "*"},
    };
    for (const auto& key : keys) {
        const auto it = entries_.find(key);
        if (it != entries_.end()) {
            return substitute_sign(it->second, class_name);
        }
    }
    throw DomainError("templates: no template for class '" + class_name +
                      "' in locale '" + locale + "'");
}

std::string render_message(const std::string& class_name,
                           const std::string& locale,
                           const TemplateTable& templates) {
    return templates.render(class_name, locale);
}

std::vector<NarrationEvent> filter_new_detections(
    const std::vector<Detection>& frame_dets, NarrationState& state,
    const NarrationPolicy& policy, const TemplateTable& templates,
    const std::vector<std::string>& class_names, std::uint64_t frame_index,
    std::int64_t now_ms) {
    // Best score per class in this frame.
    std::map<int, double> best;
    for (const auto& d : frame_dets) {
        auto [it, inserted] = best.try_emplace(d.class_id, d.score);
        if (!inserted && d.score > it->second) it->second = d.score;
    }

    std::vector<NarrationEvent> events;
    for (const auto& [class_id, score] : best) {
        if (score < policy.min_score) continue;
        const auto last = state.find(class_id);
        if (last != state.end() &&
            now_ms - last->second < policy.cooldown_ms) {
            continue;
        }
        const std::string name =
            class_id >= 0 && class_id < static_cast<int>(class_names.size())
                ? class_names[static_cast<std::size_t>(class_id)]
                : "sign " + std::to_string(class_id);
        NarrationEvent ev;
        ev.class_id = class_id;
        ev.class_name = name;
        ev.message = templates.render(name, policy.locale);
        ev.frame_index = frame_index;
        ev.timestamp_ms = now_ms;
        events.push_back(std::move(ev));
        state[class_id] = now_ms;
    }
    return events;
}

NarrationQueue::NarrationQueue(std::size_t capacity)
    : capacity_(capacity) {
    if (capacity_ == 0) {
        throw DomainError("narration queue: capacity must be >= 1");
    }
}

EnqueueResult NarrationQueue::push(NarrationEvent ev) {
    EnqueueResult result;
    {
        std::lock_guard lock(mutex_);
        if (queue_.size() >= capacity_) {
            result.outcome = EnqueueOutcome::evicted_oldest;
            result.dropped = std::move(queue_.front());
            queue_.pop_front();
        }
        queue_.push_back(std::move(ev));
    }
    not_empty_.notify_one();
    return result;
}

std::optional<NarrationEvent> NarrationQueue::pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [this] { return !queue_.empty() || closed_; });
    if (queue_.empty()) {
        return std::nullopt;
    }
    NarrationEvent ev = std::move(queue_.front());
    queue_.pop_front();
    return ev;
}

void NarrationQueue::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    not_empty_.notify_all();
}

std::size_t NarrationQueue::size() const {
    std::lock_guard lock(mutex_);
    return queue_.size();
}

TextSinkBackend::TextSinkBackend(std::ostream& out) : out_(out) {}

bool TextSinkBackend::speak(const NarrationEvent& ev) {
    std::lock_guard lock(mutex_);
    out_ << ev.timestamp_ms << '\t' << ev.class_name << '\t' << ev.message
         << '\n';
    out_.flush();
    return static_cast<bool>(out_);
}

ExternalCommandBackend::ExternalCommandBackend(std::string command)
    : command_(std::move(command)) {}

bool ExternalCommandBackend::speak(const NarrationEvent& ev) {
    // Message is passed as a single-quoted final argument; embedded single
    // quotes are escaped the POSIX way.
    std::string quoted = "'";
    for (char ch : ev.message) {
        if (ch == '\'') {
            quoted += "'\\''";
        } else {
            quoted += ch;
        }
    }
    quoted += "'";
    const std::string full = command_ + " " + quoted;
    return std::system(full.c_str()) == 0;
}

} // namespace tsr
