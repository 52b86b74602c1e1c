#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const std::string kCli = TEXTDET_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "textdet_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
    CHECK(run("") == 1);
    CHECK(run("no_such_command") == 1);
    CHECK(run("gen --no-such-flag 3") == 1);
    CHECK(run("train") == 1);  // missing required options
}

TEST_CASE("help exits cleanly") {
    CHECK(run("--help") == 0);
    CHECK(run("gen --help") == 0);
    CHECK(run("eval --help") == 0);
}

TEST_CASE("data errors exit with code 2") {
    const fs::path dir = fresh_dir("data_err");
    std::ofstream(dir / "scenes.jsonl") << "{broken\n";
    CHECK(run("train --data " + dir.string() + " --out " + (dir / "ck.json").string() +
              " --iters 5") == 2);
    CHECK(run("fit --in " + (dir / "scenes.jsonl").string() + " --out " +
              (dir / "fit.jsonl").string()) == 2);
}

TEST_CASE("gradcheck exits 0 on success") {
    CHECK(run("gradcheck --seeds 3") == 0);
}

TEST_CASE("gen, train, eval, render pipeline") {
    const fs::path dir = fresh_dir("pipeline");
    const std::string data = (dir / "data").string();
    CHECK(run("gen --out " + data + " --scenes 12 --seed 5 --per-instance 2") == 0);
    CHECK(fs::exists(fs::path(data) / "scenes.jsonl"));
    CHECK(fs::exists(fs::path(data) / "proposals.jsonl"));

    const std::string ck = (dir / "ck.json").string();
    CHECK(run("train --data " + data + " --out " + ck + " --iters 40 --seed 2 --fc-dim 48") == 0);
    CHECK(fs::exists(ck));
    CHECK(fs::exists(ck + ".loss.csv"));

    const std::string report = (dir / "report.json").string();
    const std::string dets = (dir / "dets.jsonl").string();
    CHECK(run("eval --data " + data + " --checkpoint " + ck + " --out " + report +
              " --save-detections " + dets) == 0);
    CHECK(fs::exists(report));
    CHECK(slurp(report).find("f_measure") != std::string::npos);

    // Evaluating saved detections reproduces the same report.
    const std::string report2 = (dir / "report2.json").string();
    CHECK(run("eval --data " + data + " --detections " + dets + " --out " + report2) == 0);
    CHECK(slurp(report) == slurp(report2));

    // Rotated evaluation runs end to end.
    CHECK(run("eval --data " + data + " --checkpoint " + ck + " --rotate 30") == 0);
    CHECK(run("eval --data " + data + " --checkpoint " + ck + " --rotate 7") == 1);  // not allowed

    const std::string svg_dir = (dir / "svg").string();
    CHECK(run("render --data " + data + " --detections " + dets + " --out " + svg_dir) == 0);
    CHECK(fs::exists(fs::path(svg_dir) / "scene_00000.svg"));
}

TEST_CASE("train reruns are byte-identical") {
    const fs::path dir = fresh_dir("determinism");
    const std::string data = (dir / "data").string();
    REQUIRE(run("gen --out " + data + " --scenes 8 --seed 11") == 0);

    const std::string ck_a = (dir / "a.json").string();
    const std::string ck_b = (dir / "b.json").string();
    const std::string flags = " --iters 25 --seed 9 --fc-dim 32 --scheme omts --pfam 2fc";
    REQUIRE(run("train --data " + data + " --out " + ck_a + flags) == 0);
    REQUIRE(run("train --data " + data + " --out " + ck_b + flags) == 0);
    CHECK(slurp(ck_a) == slurp(ck_b));
    CHECK(slurp(ck_a + ".loss.csv") == slurp(ck_b + ".loss.csv"));
}

TEST_CASE("gen reruns are byte-identical") {
    const fs::path dir = fresh_dir("gen_determinism");
    const std::string a = (dir / "a").string();
    const std::string b = (dir / "b").string();
    REQUIRE(run("gen --out " + a + " --scenes 6 --seed 42") == 0);
    REQUIRE(run("gen --out " + b + " --scenes 6 --seed 42") == 0);
    CHECK(slurp(fs::path(a) / "scenes.jsonl") == slurp(fs::path(b) / "scenes.jsonl"));
    CHECK(slurp(fs::path(a) / "proposals.jsonl") == slurp(fs::path(b) / "proposals.jsonl"));
}

TEST_CASE("fit reports residuals for ctw polygons") {
    const fs::path dir = fresh_dir("fit");
    const fs::path fixture = fs::path(TEXTDET_FIXTURES_DIR) / "ctw1500_sample.txt";
    const std::string out = (dir / "fit.jsonl").string();
    CHECK(run("fit --in " + fixture.string() + " --out " + out) == 0);
    const std::string report = slurp(out);
    CHECK(report.find("rms_residual") != std::string::npos);
    CHECK(report.find("\"top\"") != std::string::npos);
}

TEST_CASE("config file keys are honored and flags override them") {
    const fs::path dir = fresh_dir("config");
    const fs::path cfg = dir / "run.ini";
    std::ofstream(cfg) << "[gen]\nscenes=4\nseed=13\n";
    const std::string a = (dir / "a").string();
    CHECK(run("--config " + cfg.string() + " gen --out " + a) == 0);
    std::ifstream in(fs::path(a) / "scenes.jsonl");
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 4);

    const std::string b = (dir / "b").string();
    CHECK(run("--config " + cfg.string() + " gen --out " + b + " --scenes 2") == 0);
    std::ifstream in2(fs::path(b) / "scenes.jsonl");
    lines = 0;
    while (std::getline(in2, line)) ++lines;
    CHECK(lines == 2);
}
