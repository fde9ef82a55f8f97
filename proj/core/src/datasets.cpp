#include "tsr/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tsr/errors.hpp"

namespace tsr {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string::size_type start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

int parse_int(const std::string& field, const std::string& where) {
    const std::string t = trim(field);
    int value = 0;
    const auto [ptr, ec] =
        std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ParseError(where + ": expected integer, got '" + field + "'");
    }
    return value;
}

double parse_real(const std::string& field, const std::string& where) {
    const std::string t = trim(field);
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ParseError(where + ": expected number, got '" + field + "'");
    }
    return value;
}

// Label files replace the image extension with .txt; only recognized
// image extensions are stripped so dotted ids survive round-trips.
std::string label_stem(const std::string& image_id) {
    static const char* exts[] = {".ppm", ".jpg", ".jpeg", ".png", ".bmp"};
    for (const char* ext : exts) {
        const std::string e(ext);
        if (image_id.size() > e.size() &&
            image_id.compare(image_id.size() - e.size(), e.size(), e) == 0) {
            return image_id.substr(0, image_id.size() - e.size());
        }
    }
    return image_id;
}

} // namespace

ClassMap::ClassMap(std::vector<std::string> names,
                   std::unordered_map<std::string, int> source_to_index)
    : names_(std::move(names)), source_to_index_(std::move(source_to_index)) {
    for (int i = 0; i < size(); ++i) {
        source_to_index_.emplace(names_[i], i);
    }
}

ClassMap ClassMap::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("class map: cannot open " + file.string());
    }
    return parse(in, file.string());
}

ClassMap ClassMap::parse(std::istream& in, const std::string& origin) {
    std::vector<std::string> names;
    std::unordered_map<std::string, int> sources;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        const auto fields = split_on(line, '\t');
        if (fields.size() != 3) {
            throw ParseError(where + ": expected index<TAB>name<TAB>sources");
        }
        const int index = parse_int(fields[0], where);
        if (index != static_cast<int>(names.size())) {
            throw ParseError(where + ": class indices must be dense 0..N-1");
        }
        const std::string name = trim(fields[1]);
        if (name.empty() ||
            std::find(names.begin(), names.end(), name) != names.end()) {
            throw ParseError(where + ": missing or duplicate class name");
        }
        names.push_back(name);
        for (const auto& src : split_on(fields[2], ',')) {
            const std::string s = trim(src);
            if (s.empty()) continue;
            if (sources.count(s)) {
                throw ParseError(where + ": source label '" + s +
                                 "' mapped twice");
            }
            sources[s] = index;
        }
    }
    return ClassMap(std::move(names), std::move(sources));
}

const std::string& ClassMap::name(int class_id) const {
    if (class_id < 0 || class_id >= size()) {
        throw DomainError("class map: class id out of range");
    }
    return names_[static_cast<std::size_t>(class_id)];
}

std::optional<int> ClassMap::index_of(const std::string& source_label) const {
    const auto it = source_to_index_.find(source_label);
    if (it == source_to_index_.end()) return std::nullopt;
    return it->second;
}

bool ClassMap::keeps(const std::string& canonical) const {
    return std::find(names_.begin(), names_.end(), canonical) != names_.end();
}

GtsdbParseResult parse_gtsdb(
    std::istream& rows,
    const std::map<std::string, std::pair<int, int>>& image_dims,
    const ClassMap& class_map) {
    GtsdbParseResult result;
    std::string line;
    int line_no = 0;
    while (std::getline(rows, line)) {
        ++line_no;
        const std::string where = "gtsdb:" + std::to_string(line_no);
        if (trim(line).empty()) continue;
        const auto fields = split_on(trim(line), ';');
        if (fields.size() != 6) {
            throw ParseError(where +
                             ": expected filename;left;top;right;bottom;classId");
        }
        const std::string image_id = trim(fields[0]);
        double left = parse_int(fields[1], where);
        double top = parse_int(fields[2], where);
        double right = parse_int(fields[3], where);
        double bottom = parse_int(fields[4], where);
        const int raw_class = parse_int(fields[5], where);

        const auto dims_it = image_dims.find(image_id);
        if (dims_it == image_dims.end()) {
            throw IoError(where + ": no image dimensions for '" + image_id +
                          "'");
        }
        const double img_w = dims_it->second.first;
        const double img_h = dims_it->second.second;

        const double cl = std::clamp(left, 0.0, img_w);
        const double ct = std::clamp(top, 0.0, img_h);
        const double cr = std::clamp(right, 0.0, img_w);
        const double cb = std::clamp(bottom, 0.0, img_h);
        if (cl != left || ct != top || cr != right || cb != bottom) {
            result.warnings.push_back(
                {image_id, where + ": corners outside image, clamped"});
        }

        const BoundingBox px = from_corner(cl, ct, cr, cb);
        const auto class_id = class_map.index_of(std::to_string(raw_class));
        if (!class_id) {
            throw ParseError(where + ": class id " +
                             std::to_string(raw_class) +
                             " not in the class map");
        }
        result.instances.push_back(GroundTruthInstance{
            image_id,
            BoundingBox{px.cx / img_w, px.cy / img_h, px.w / img_w,
                        px.h / img_h},
            *class_id, std::to_string(raw_class)});
    }
    return result;
}

std::map<std::string, std::pair<int, int>> load_image_dims(
    const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("image dims: cannot open " + file.string());
    }
    std::map<std::string, std::pair<int, int>> dims;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::istringstream fields(line);
        std::string id;
        int w = 0, h = 0;
        if (!(fields >> id >> w >> h) || w <= 0 || h <= 0) {
            throw ParseError(file.string() + ":" + std::to_string(line_no) +
                             ": expected `filename width height`");
        }
        dims[id] = {w, h};
    }
    return dims;
}

std::optional<std::string> merge_label(const std::string& source_label,
                                       const ClassMap& class_map) {
    // Labels use "--" separators: namespace--name[--gN]. Split on the
    // double dash to keep single hyphens inside names intact.
    std::vector<std::string> parts;
    {
        std::string::size_type start = 0;
        while (true) {
            const auto pos = source_label.find("--", start);
            if (pos == std::string::npos) {
                parts.push_back(source_label.substr(start));
                break;
            }
            parts.push_back(source_label.substr(start, pos - start));
            start = pos + 2;
        }
    }
    if (parts.size() > 1) {
        parts.erase(parts.begin()); // namespace
    }
    if (parts.size() > 1) {
        const std::string& last = parts.back();
        if (last.size() >= 2 && last[0] == 'g' &&
            std::all_of(last.begin() + 1, last.end(),
                        [](unsigned char ch) { return std::isdigit(ch); })) {
            parts.pop_back(); // variant suffix
        }
    }
    std::string stem;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) stem += "--";
        stem += parts[i];
    }
    if (class_map.keeps(stem)) return stem;
    return std::nullopt;
}

MapillaryParseResult parse_mapillary(const std::string& json_text,
                                     const std::string& image_id,
                                     const ClassMap& class_map) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("mapillary " + image_id + ": " + e.what());
    }
    if (!doc.contains("width") || !doc.contains("height") ||
        !doc["width"].is_number() || !doc["height"].is_number()) {
        throw ParseError("mapillary " + image_id +
                         ": document missing width/height");
    }
    const double img_w = doc["width"].get<double>();
    const double img_h = doc["height"].get<double>();
    if (img_w <= 0 || img_h <= 0) {
        throw ParseError("mapillary " + image_id +
                         ": non-positive image dimensions");
    }

    MapillaryParseResult result;
    for (const auto& obj : doc.value("objects", nlohmann::json::array())) {
        const std::string label = obj.value("label", "");
        const auto& bbox = obj.at("bbox");
        const double xmin = bbox.at("xmin").get<double>();
        const double ymin = bbox.at("ymin").get<double>();
        const double xmax = bbox.at("xmax").get<double>();
        const double ymax = bbox.at("ymax").get<double>();
        if (xmin > xmax || ymin > ymax) {
            throw GeometryError("mapillary " + image_id +
                                ": inverted bbox on object '" + label + "'");
        }
        const auto canonical = merge_label(label, class_map);
        if (!canonical) {
            ++result.dropped;
            continue;
        }
        const BoundingBox px =
            from_corner(std::clamp(xmin, 0.0, img_w),
                        std::clamp(ymin, 0.0, img_h),
                        std::clamp(xmax, 0.0, img_w),
                        std::clamp(ymax, 0.0, img_h));
        result.instances.push_back(GroundTruthInstance{
            image_id,
            BoundingBox{px.cx / img_w, px.cy / img_h, px.w / img_w,
                        px.h / img_h},
            *class_map.index_of(*canonical), label});
    }
    return result;
}

int write_yolo_labels(const std::vector<GroundTruthInstance>& instances,
                      const std::filesystem::path& out_dir,
                      const std::vector<std::string>& empty_image_ids) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("yolo labels: cannot create " + out_dir.string());
    }

    std::map<std::string, std::vector<const GroundTruthInstance*>> by_image;
    for (const auto& inst : instances) {
        by_image[inst.image_id].push_back(&inst);
    }
    for (const auto& id : empty_image_ids) {
        by_image.try_emplace(id);
    }

    int files = 0;
    for (const auto& [image_id, group] : by_image) {
        const auto path = out_dir / (label_stem(image_id) + ".txt");
        std::ofstream out(path);
        if (!out) {
            throw IoError("yolo labels: cannot write " + path.string());
        }
        for (const auto* inst : group) {
            char line[160];
            std::snprintf(line, sizeof(line), "%d %.6f %.6f %.6f %.6f\n",
                          inst->class_id, inst->box.cx, inst->box.cy,
                          inst->box.w, inst->box.h);
            out << line;
        }
        ++files;
    }
    return files;
}

std::vector<GroundTruthInstance> read_yolo_labels(
    const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw IoError("yolo labels: not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    std::vector<GroundTruthInstance> instances;
    for (const auto& file : files) {
        std::ifstream in(file);
        if (!in) {
            throw IoError("yolo labels: cannot open " + file.string());
        }
        const std::string image_id = file.stem().string();
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string t = trim(line);
            if (t.empty()) continue;
            const std::string where =
                file.string() + ":" + std::to_string(line_no);
            std::vector<std::string> fields;
            std::istringstream ss(t);
            std::string field;
            while (ss >> field) fields.push_back(field);
            if (fields.size() != 5) {
                throw ParseError(where + ": expected 5 fields, got " +
                                 std::to_string(fields.size()));
            }
            GroundTruthInstance inst;
            inst.image_id = image_id;
            inst.class_id = parse_int(fields[0], where);
            inst.box.cx = parse_real(fields[1], where);
            inst.box.cy = parse_real(fields[2], where);
            inst.box.w = parse_real(fields[3], where);
            inst.box.h = parse_real(fields[4], where);
            instances.push_back(std::move(inst));
        }
    }
    return instances;
}

std::pair<std::vector<std::string>, std::vector<std::string>>
split_train_test(const std::vector<std::string>& image_ids,
                 double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw DomainError("split: train_fraction must be in (0,1)");
    }
    std::vector<std::string> shuffled = image_ids;
    // Hand-rolled Fisher-Yates so the split is reproducible across
    // standard library implementations.
    std::mt19937_64 rng(seed);
    for (std::size_t i = shuffled.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(shuffled[i - 1], shuffled[j]);
    }
    const std::size_t n_train = static_cast<std::size_t>(
        std::ceil(static_cast<double>(shuffled.size()) * train_fraction));
    std::vector<std::string> train(shuffled.begin(),
                                   shuffled.begin() + n_train);
    std::vector<std::string> test(shuffled.begin() + n_train, shuffled.end());
    return {std::move(train), std::move(test)};
}

std::vector<int> class_distribution(
    const std::vector<GroundTruthInstance>& instances,
    const ClassMap& class_map) {
    std::vector<int> counts(static_cast<std::size_t>(class_map.size()), 0);
    for (const auto& inst : instances) {
        if (inst.class_id < 0 || inst.class_id >= class_map.size()) {
            throw DomainError("class distribution: class id out of range");
        }
        ++counts[static_cast<std::size_t>(inst.class_id)];
    }
    return counts;
}

} // namespace tsr
