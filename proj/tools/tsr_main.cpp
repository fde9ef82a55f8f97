// tsr: traffic-sign toolkit CLI.
//
// Subcommands: convert (gtsdb, mapillary), split, anchors, eval, run.
// Exit codes: 0 success, 1 input error, 2 internal error.

#include <charconv>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsr/anchors.hpp"
#include "tsr/datasets.hpp"
#include "tsr/errors.hpp"
#include "tsr/eval.hpp"
#include "tsr/narration.hpp"
#include "tsr/pipeline.hpp"

namespace {

bool g_quiet = false;

void note(const std::string& msg) {
    if (!g_quiet) std::cerr << msg << '\n';
}

void print_distribution(const std::vector<int>& counts,
                        const tsr::ClassMap& class_map) {
    if (g_quiet) return;
    std::cerr << "class distribution:\n";
    for (int i = 0; i < class_map.size(); ++i) {
        std::cerr << "  " << class_map.name(i) << ": "
                  << counts[static_cast<std::size_t>(i)] << '\n';
    }
}

constexpr const char* kFlipNote =
    "note: do not augment sign data with horizontal flips; mirrored signs "
    "can change meaning (e.g. curve-left vs curve-right)";

int run_convert_gtsdb(const std::string& annotations, const std::string& dims,
                      const std::string& classmap, const std::string& out) {
    const auto class_map = tsr::ClassMap::load(classmap);
    const auto image_dims = tsr::load_image_dims(dims);
    std::ifstream rows(annotations);
    if (!rows) {
        throw tsr::IoError("cannot open " + annotations);
    }
    const auto result = tsr::parse_gtsdb(rows, image_dims, class_map);
    for (const auto& w : result.warnings) {
        note("warning: " + w.detail);
    }
    std::vector<std::string> all_images;
    for (const auto& [id, wh] : image_dims) all_images.push_back(id);
    const int files =
        tsr::write_yolo_labels(result.instances, out, all_images);
    note(kFlipNote);
    print_distribution(tsr::class_distribution(result.instances, class_map),
                       class_map);
    std::cout << "converted " << result.instances.size() << " instances into "
              << files << " label files\n";
    return 0;
}

int run_convert_mapillary(const std::string& in_dir,
                          const std::string& classmap,
                          const std::string& out) {
    const auto class_map = tsr::ClassMap::load(classmap);
    std::vector<tsr::GroundTruthInstance> instances;
    std::vector<std::string> all_images;
    int dropped = 0;
    std::vector<std::filesystem::path> docs;
    for (const auto& entry : std::filesystem::directory_iterator(in_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            docs.push_back(entry.path());
        }
    }
    std::sort(docs.begin(), docs.end());
    for (const auto& doc : docs) {
        std::ifstream in(doc);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        const auto result =
            tsr::parse_mapillary(text, doc.stem().string(), class_map);
        instances.insert(instances.end(), result.instances.begin(),
                         result.instances.end());
        dropped += result.dropped;
        all_images.push_back(doc.stem().string());
    }
    const int files = tsr::write_yolo_labels(instances, out, all_images);
    note(kFlipNote);
    print_distribution(tsr::class_distribution(instances, class_map),
                       class_map);
    std::cout << "converted " << instances.size() << " instances into "
              << files << " label files (" << dropped
              << " objects outside the keep-list dropped)\n";
    return 0;
}

int run_split(const std::string& images, double fraction, std::uint64_t seed,
              const std::string& out) {
    std::ifstream in(images);
    if (!in) {
        throw tsr::IoError("cannot open " + images);
    }
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) ids.push_back(line);
    }
    const auto [train, test] = tsr::split_train_test(ids, fraction, seed);
    std::filesystem::create_directories(out);
    std::ofstream train_out(std::filesystem::path(out) / "train.txt");
    for (const auto& id : train) train_out << id << '\n';
    std::ofstream test_out(std::filesystem::path(out) / "test.txt");
    for (const auto& id : test) test_out << id << '\n';
    std::cout << "train: " << train.size() << "  test: " << test.size()
              << '\n';
    return 0;
}

int run_anchors(const std::string& labels, int k, int resolution,
                std::uint64_t seed) {
    const auto instances = tsr::read_yolo_labels(labels);
    std::vector<tsr::AnchorDims> boxes;
    int skipped = 0;
    for (const auto& inst : instances) {
        if (inst.box.w > 0.0 && inst.box.h > 0.0) {
            boxes.push_back({inst.box.w, inst.box.h});
        } else {
            ++skipped;
        }
    }
    if (skipped > 0) {
        note("warning: skipped " + std::to_string(skipped) +
             " zero-area boxes");
    }
    const auto anchors = tsr::kmeans_anchors(boxes, k, seed);
    note("mean IoU: " + std::to_string(1.0 - anchors.final_cost));
    std::cout << "anchors = " << tsr::format_darknet_anchors(anchors, resolution)
              << '\n';
    return 0;
}

int run_eval(const std::string& detections, const std::string& truth,
             double iou, const std::string& json_out) {
    const auto dets = tsr::load_detections_jsonl(detections);
    const auto truths = tsr::read_yolo_labels(truth);
    const auto report = tsr::evaluate(dets, truths, iou);
    tsr::print_report(std::cout, report);
    if (!json_out.empty()) {
        std::ofstream out(json_out);
        if (!out) {
            throw tsr::IoError("cannot write " + json_out);
        }
        out << tsr::report_to_json(report) << '\n';
    }
    return 0;
}

tsr::GridDecodeConfig parse_decode_spec(const std::string& spec) {
    tsr::GridDecodeConfig cfg;
    std::string::size_type start = 0;
    while (start <= spec.size()) {
        const auto comma = spec.find(',', start);
        const std::string part =
            spec.substr(start, comma == std::string::npos ? std::string::npos
                                                          : comma - start);
        const auto eq = part.find('=');
        if (eq == std::string::npos) {
            throw tsr::ParseError("decode spec: expected key=value, got '" +
                                  part + "'");
        }
        const std::string key = part.substr(0, eq);
        const std::string value = part.substr(eq + 1);
        double num = 0.0;
        const auto [ptr, ec] =
            std::from_chars(value.data(), value.data() + value.size(), num);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            throw tsr::ParseError("decode spec: bad number '" + value + "'");
        }
        if (key == "s") {
            cfg.s = static_cast<int>(num);
        } else if (key == "b") {
            cfg.b = static_cast<int>(num);
        } else if (key == "c") {
            cfg.c = static_cast<int>(num);
        } else if (key == "thresh") {
            cfg.conf_threshold = num;
        } else {
            throw tsr::ParseError("decode spec: unknown key '" + key + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cfg;
}

int run_run(const std::string& frames, const std::string& decode_spec,
            double nms_iou, std::int64_t cooldown_ms,
            const std::string& locale, const std::string& backend_kind,
            const std::string& templates_file, const std::string& command,
            const std::string& classmap, std::size_t queue_capacity,
            double min_score, const std::string& log_file) {
    const tsr::GridDecodeConfig decode = parse_decode_spec(decode_spec);

    tsr::PipelineOptions opts;
    opts.decode = decode;
    opts.nms.iou_threshold = nms_iou;
    opts.policy.cooldown_ms = cooldown_ms;
    opts.policy.locale = locale;
    opts.policy.queue_capacity = queue_capacity;
    opts.policy.min_score = min_score;
    if (!classmap.empty()) {
        opts.class_names = tsr::ClassMap::load(classmap).names();
    }

    const tsr::TemplateTable templates =
        templates_file.empty() ? tsr::TemplateTable::builtin_defaults()
                               : tsr::TemplateTable::load(templates_file);

    std::ofstream log_stream;
    if (!log_file.empty()) {
        log_stream.open(log_file);
        if (!log_stream) {
            throw tsr::IoError("cannot write " + log_file);
        }
        opts.detection_log = &log_stream;
    }

    std::unique_ptr<tsr::FrameSource> source;
    const std::filesystem::path frames_path(frames);
    if (std::filesystem::is_directory(frames_path)) {
        source = std::make_unique<tsr::TensorDirectorySource>(
            frames_path, decode.conf_threshold);
    } else if (frames_path.extension() == ".jsonl") {
        source = std::make_unique<tsr::DetectionJsonlSource>(frames_path);
    } else {
        throw tsr::IoError(
            "frames path must be a tensor directory or a .jsonl file");
    }

    std::unique_ptr<tsr::NarrationBackend> backend;
    if (backend_kind == "text") {
        backend = std::make_unique<tsr::TextSinkBackend>(std::cout);
    } else if (backend_kind == "command") {
        if (command.empty()) {
            throw tsr::ConfigError("--backend command requires --command");
        }
        backend = std::make_unique<tsr::ExternalCommandBackend>(command);
    } else {
        throw tsr::ConfigError("--backend must be text or command");
    }

    const auto summary = tsr::run_pipeline(*source, opts, *backend, templates);
    std::cout << "frames processed:   " << summary.frames_processed << '\n'
              << "detections emitted: " << summary.detections_emitted << '\n'
              << "events emitted:     " << summary.events_emitted << '\n'
              << "events dropped:     " << summary.events_dropped << '\n'
              << "backend failures:   " << summary.backend_failures << '\n'
              << "average FPS:        " << summary.average_fps << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Traffic-sign detection toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Seed for all randomized operations");
    app.add_flag("--quiet", g_quiet, "Suppress warnings and notes");

    // convert
    auto* convert = app.add_subcommand("convert", "Annotation converters");
    convert->require_subcommand(1);

    std::string gtsdb_annotations, gtsdb_dims, gtsdb_classmap, gtsdb_out;
    auto* gtsdb = convert->add_subcommand("gtsdb", "GTSDB CSV to YOLO labels");
    gtsdb->add_option("--annotations", gtsdb_annotations)->required();
    gtsdb->add_option("--dims", gtsdb_dims, "filename width height lines")
        ->required();
    gtsdb->add_option("--classmap", gtsdb_classmap)->required();
    gtsdb->add_option("--out", gtsdb_out)->required();

    std::string map_in, map_classmap, map_out;
    auto* mapillary =
        convert->add_subcommand("mapillary", "Mapillary JSON to YOLO labels");
    mapillary->add_option("--in", map_in, "Directory of JSON documents")
        ->required();
    mapillary->add_option("--classmap", map_classmap)->required();
    mapillary->add_option("--out", map_out)->required();

    // split
    std::string split_images, split_out;
    double train_fraction = 0.8;
    auto* split = app.add_subcommand("split", "Deterministic train/test split");
    split->add_option("--images", split_images)->required();
    split->add_option("--train-fraction", train_fraction);
    split->add_option("--out", split_out)->required();

    // anchors
    std::string anchors_labels;
    int anchors_k = 6;
    int anchors_resolution = 608;
    auto* anchors =
        app.add_subcommand("anchors", "Recalculate anchors via K-means");
    anchors->add_option("--labels", anchors_labels)->required();
    anchors->add_option("--k", anchors_k);
    anchors->add_option("--resolution", anchors_resolution);

    // eval
    std::string eval_dets, eval_truth, eval_json;
    double eval_iou = 0.5;
    auto* eval = app.add_subcommand("eval", "mAP@50 evaluation report");
    eval->add_option("--detections", eval_dets)->required();
    eval->add_option("--truth", eval_truth)->required();
    eval->add_option("--iou", eval_iou);
    eval->add_option("--json", eval_json);

    // run
    std::string run_frames, run_decode, run_locale = "en";
    std::string run_backend = "text", run_templates, run_command, run_classmap;
    std::string run_log;
    double run_nms = 0.45, run_min_score = 0.0;
    std::int64_t run_cooldown = 5000;
    std::size_t run_capacity = 16;
    auto* run = app.add_subcommand("run", "Replay the detection pipeline");
    run->add_option("--frames", run_frames,
                    "Tensor directory or detections .jsonl")
        ->required();
    run->add_option("--decode", run_decode, "s=<S>,b=<B>,c=<C>,thresh=<t>")
        ->required();
    run->add_option("--nms", run_nms);
    run->add_option("--cooldown-ms", run_cooldown);
    run->add_option("--locale", run_locale);
    run->add_option("--backend", run_backend, "text|command");
    run->add_option("--templates", run_templates);
    run->add_option("--command", run_command,
                    "TTS command for --backend command");
    run->add_option("--classmap", run_classmap,
                    "Class names for narration messages");
    run->add_option("--queue-capacity", run_capacity);
    run->add_option("--min-score", run_min_score);
    run->add_option("--log", run_log, "Deterministic detection log (JSONL)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gtsdb->parsed()) {
            return run_convert_gtsdb(gtsdb_annotations, gtsdb_dims,
                                     gtsdb_classmap, gtsdb_out);
        }
        if (mapillary->parsed()) {
            return run_convert_mapillary(map_in, map_classmap, map_out);
        }
        if (split->parsed()) {
            return run_split(split_images, train_fraction, seed, split_out);
        }
        if (anchors->parsed()) {
            return run_anchors(anchors_labels, anchors_k, anchors_resolution,
                               seed);
        }
        if (eval->parsed()) {
            return run_eval(eval_dets, eval_truth, eval_iou, eval_json);
        }
        if (run->parsed()) {
            return run_run(run_frames, run_decode, run_nms, run_cooldown,
                           run_locale, run_backend, run_templates, run_command,
                           run_classmap, run_capacity, run_min_score, run_log);
        }
    } catch (const tsr::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
