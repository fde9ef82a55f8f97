#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tsr/geometry.hpp"

namespace tsr {

// One labeled box attached to an image, normalized to [0,1].
struct GroundTruthInstance {
    std::string image_id;
    BoundingBox box;
    int class_id = 0;
    std::string source_label;
};

// Canonical class list plus the merge rules mapping raw dataset labels
// (GTSDB numeric ids, Mapillary label stems) onto dense indices 0..N-1.
class ClassMap {
public:
    ClassMap() = default;
    ClassMap(std::vector<std::string> names,
             std::unordered_map<std::string, int> source_to_index);

    // File format: one line per class, `index<TAB>name<TAB>src1,src2,...`.
    // The canonical name is always a valid source label for itself.
    static ClassMap load(const std::filesystem::path& file);
    static ClassMap parse(std::istream& in, const std::string& origin);

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int class_id) const;
    const std::vector<std::string>& names() const { return names_; }
    std::optional<int> index_of(const std::string& source_label) const;
    bool keeps(const std::string& canonical) const;

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> source_to_index_;
};

struct ConversionWarning {
    std::string image_id;
    std::string detail;
};

struct GtsdbParseResult {
    std::vector<GroundTruthInstance> instances;
    std::vector<ConversionWarning> warnings; // out-of-bounds corners, clamped
};

// GTSDB annotation rows `filename;left;top;right;bottom;classId` with
// integer pixel corners. Corners are normalized by the image dimensions
// from `image_dims` and raw class ids mapped through the ClassMap.
// Out-of-image corners are clamped with a warning record. Throws
// ParseError with line number on malformed rows, IoError on a filename
// missing from image_dims.
GtsdbParseResult parse_gtsdb(
    std::istream& rows,
    const std::map<std::string, std::pair<int, int>>& image_dims,
    const ClassMap& class_map);

// Sidecar dimension file: `filename width height` per line.
std::map<std::string, std::pair<int, int>> load_image_dims(
    const std::filesystem::path& file);

struct MapillaryParseResult {
    std::vector<GroundTruthInstance> instances;
    int dropped = 0; // objects whose merged label is not kept
};

// Mapillary annotation document: JSON with integer width/height and
// objects: [{label, bbox: {xmin, ymin, xmax, ymax}}] in pixels.
// Throws ParseError on missing width/height, GeometryError on an
// inverted bbox (names the offending object).
MapillaryParseResult parse_mapillary(const std::string& json_text,
                                     const std::string& image_id,
                                     const ClassMap& class_map);

// Strips the leading namespace ("regulatory--", "warning--", ...) and the
// trailing "--gN" variant suffix, then looks the stem up in the keep-list.
// Unknown or dropped labels return nullopt.
std::optional<std::string> merge_label(const std::string& source_label,
                                       const ClassMap& class_map);

// One `<class_id> <cx> <cy> <w> <h>` line per instance, six-decimal
// fixed point, one file per image (known image extensions replaced by
// .txt). Ids listed in `empty_image_ids` but carrying no instances get
// an empty file. Returns the number of files written.
int write_yolo_labels(const std::vector<GroundTruthInstance>& instances,
                      const std::filesystem::path& out_dir,
                      const std::vector<std::string>& empty_image_ids = {});

// Reads every .txt label file in dir; image_id is the file stem.
// Tolerates trailing whitespace and blank lines. Throws ParseError with
// file and line on wrong field counts or non-numeric fields.
std::vector<GroundTruthInstance> read_yolo_labels(
    const std::filesystem::path& dir);

// Deterministic seeded shuffle; first ceil(n * train_fraction) ids go to
// train. Same seed and input order always yields the identical split.
// Throws DomainError unless 0 < train_fraction < 1.
std::pair<std::vector<std::string>, std::vector<std::string>>
split_train_test(const std::vector<std::string>& image_ids,
                 double train_fraction, std::uint64_t seed);

// Per-class instance counts; indices follow the ClassMap order.
std::vector<int> class_distribution(
    const std::vector<GroundTruthInstance>& instances,
    const ClassMap& class_map);

} // namespace tsr
