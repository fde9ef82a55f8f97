// End-to-end checks of the tsr CLI binary.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tsr/datasets.hpp"
#include "tsr/decode.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("tsr_cli_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args, const fs::path& stdout_file = {}) {
    std::string cmd = std::string(TSR_CLI_PATH) + " " + args + " 2>/dev/null";
    if (!stdout_file.empty()) cmd += " > " + stdout_file.string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& file) {
    std::ifstream in(file);
    std::stringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& file, const std::string& content) {
    std::ofstream out(file);
    out << content;
}

} // namespace

TEST_CASE("convert gtsdb produces YOLO labels") {
    TempDir dir("gtsdb");
    write_file(dir.path / "gt.txt",
               "00000.ppm;774;411;815;446;11\n"
               "00001.ppm;100;100;200;200;2\n");
    write_file(dir.path / "dims.txt",
               "00000.ppm 1360 800\n"
               "00001.ppm 1360 800\n");
    const fs::path out = dir.path / "labels";
    const int rc = run_cli("convert gtsdb --annotations " +
                           (dir.path / "gt.txt").string() + " --dims " +
                           (dir.path / "dims.txt").string() + " --classmap " +
                           std::string(TSR_DATA_DIR) +
                           "/gtsdb_classmap.txt --out " + out.string());
    CHECK(rc == 0);
    const auto instances = tsr::read_yolo_labels(out);
    CHECK(instances.size() == 2);
}

TEST_CASE("convert gtsdb with a missing classmap fails with exit 1") {
    TempDir dir("gtsdb_bad");
    write_file(dir.path / "gt.txt", "");
    write_file(dir.path / "dims.txt", "");
    const int rc = run_cli("convert gtsdb --annotations " +
                           (dir.path / "gt.txt").string() + " --dims " +
                           (dir.path / "dims.txt").string() +
                           " --classmap /nonexistent.txt --out " +
                           (dir.path / "labels").string());
    CHECK(rc == 1);
}

TEST_CASE("split writes deterministic train/test lists") {
    TempDir dir("split");
    std::ostringstream ids;
    for (int i = 0; i < 10; ++i) ids << "img" << i << '\n';
    write_file(dir.path / "images.txt", ids.str());

    std::string train[2], test[2];
    for (int run = 0; run < 2; ++run) {
        const fs::path out = dir.path / ("split" + std::to_string(run));
        const int rc = run_cli("--seed 7 split --images " +
                               (dir.path / "images.txt").string() +
                               " --train-fraction 0.8 --out " + out.string());
        REQUIRE(rc == 0);
        train[run] = slurp(out / "train.txt");
        test[run] = slurp(out / "test.txt");
    }
    CHECK(train[0] == train[1]);
    CHECK(test[0] == test[1]);
    CHECK(std::count(train[0].begin(), train[0].end(), '\n') == 8);
    CHECK(std::count(test[0].begin(), test[0].end(), '\n') == 2);
}

TEST_CASE("anchors prints a darknet anchor line") {
    TempDir dir("anchors");
    const fs::path labels = dir.path / "labels";
    fs::create_directories(labels);
    write_file(labels / "a.txt",
               "0 0.5 0.5 0.1 0.1\n0 0.5 0.5 0.4 0.4\n");
    const fs::path out = dir.path / "out.txt";
    const int rc =
        run_cli("anchors --labels " + labels.string() + " --k 2", out);
    CHECK(rc == 0);
    CHECK(slurp(out).find("anchors = ") != std::string::npos);
}

TEST_CASE("eval reports metrics for a perfect detector") {
    TempDir dir("eval");
    const fs::path truth = dir.path / "truth";
    fs::create_directories(truth);
    write_file(truth / "img0.txt", "0 0.5 0.5 0.2 0.2\n");
    write_file(dir.path / "dets.jsonl",
               R"({"image_id":"img0","class_id":0,"score":0.9,)"
               R"("cx":0.5,"cy":0.5,"w":0.2,"h":0.2})"
               "\n");
    const fs::path out = dir.path / "report.txt";
    const fs::path json = dir.path / "report.json";
    const int rc = run_cli("eval --detections " +
                               (dir.path / "dets.jsonl").string() +
                               " --truth " + truth.string() + " --json " +
                               json.string(),
                           out);
    CHECK(rc == 0);
    const auto text = slurp(out);
    CHECK(text.find("mAP@50") != std::string::npos);
    CHECK(slurp(json).find("\"map50\"") != std::string::npos);
}

TEST_CASE("run replays a tensor directory through the text backend") {
    TempDir dir("run");
    const fs::path frames = dir.path / "frames";
    fs::create_directories(frames);
    tsr::GridDecodeConfig cfg{7, 2, 4, 0.25, 608, 608};
    const tsr::Detection det{{0.5, 0.5, 0.2, 0.2}, 1, 0.9, 3, 3};
    for (int f = 0; f < 3; ++f) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%03d.bin", f);
        std::ofstream out(frames / name, std::ios::binary);
        tsr::write_layer_record(out, tsr::encode_layer({det}, cfg));
    }
    const fs::path out = dir.path / "out.txt";
    const fs::path log = dir.path / "dets.jsonl";
    const int rc = run_cli(
        "run --frames " + frames.string() +
            " --decode s=7,b=2,c=4,thresh=0.25 --cooldown-ms 0 --log " +
            log.string(),
        out);
    CHECK(rc == 0);
    const auto text = slurp(out);
    CHECK(text.find("frames processed:   3") != std::string::npos);
    const auto logged = slurp(log);
    CHECK(std::count(logged.begin(), logged.end(), '\n') == 3);
}

TEST_CASE("run rejects a malformed decode spec with exit 1") {
    TempDir dir("run_bad");
    const fs::path frames = dir.path / "frames";
    fs::create_directories(frames);
    const int rc = run_cli("run --frames " + frames.string() +
                           " --decode nonsense");
    CHECK(rc == 1);
}
