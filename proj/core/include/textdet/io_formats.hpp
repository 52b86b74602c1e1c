#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "textdet/eval.hpp"
#include "textdet/geometry.hpp"
#include "textdet/head.hpp"
#include "textdet/synthdata.hpp"

namespace textdet::io {

// Malformed input; the message names the line number and cause.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 28 comma-separated integers: x1,y1,...,x14,y14, first 7 points the top
/// side left-to-right, last 7 the bottom side right-to-left.
geometry::PolygonText parse_ctw1500_line(std::string_view line, int line_number = 0);

struct IcdarLine {
    geometry::PolygonText quad;
    bool ignore = false;        // transcription "###"
    std::string transcription;
};

/// 8 comma-separated coordinates followed by the transcription (which may
/// itself contain commas).
IcdarLine parse_icdar15_line(std::string_view line, int line_number = 0);

/// Whole-file readers; empty lines are skipped with a warning on stderr.
std::vector<geometry::PolygonText> read_ctw1500_file(const std::filesystem::path& path);
std::vector<IcdarLine> read_icdar15_file(const std::filesystem::path& path);

// Canonical scene interchange: one JSON object per line,
//   {"width":W,"height":H,"instances":[{"top":[[x,y]x4],"bottom":[[x,y]x4],"ignore":b}]}
// with numbers at 17 significant digits. Degenerate instances (area < 1 px^2
// or non-positive bbox) are dropped at read time with a warning.
std::string scene_to_json_line(const synthdata::Scene& scene);
synthdata::Scene scene_from_json_line(std::string_view line, int line_number = 0);
void write_jsonl_scenes(const std::filesystem::path& path,
                        std::span<const synthdata::Scene> scenes);
std::vector<synthdata::Scene> read_jsonl_scenes(const std::filesystem::path& path);

// Proposals: one object per scene, {"scene":i,"proposals":[[cx,cy,w,h],...]}.
void write_jsonl_proposals(const std::filesystem::path& path,
                           std::span<const std::vector<geometry::AxisBox>> proposals);
std::vector<std::vector<geometry::AxisBox>> read_jsonl_proposals(const std::filesystem::path& path);

// Detections: {"scene":i,"detections":[{"score":s,"box":[cx,cy,w,h],
//   "top":[[x,y]x4],"bottom":[[x,y]x4]}]}.
void write_jsonl_detections(const std::filesystem::path& path,
                            std::span<const eval::SceneDetections> detections);
std::vector<eval::SceneDetections> read_jsonl_detections(const std::filesystem::path& path);

/// Groundtruth in green, detections in red; curve sides emitted as native
/// cubic path segments. Byte-stable for identical input.
std::string render_svg(const synthdata::Scene& scene,
                       std::span<const head::Detection> detections = {});
void write_svg(const std::filesystem::path& path, const synthdata::Scene& scene,
               std::span<const head::Detection> detections = {});

// Versioned JSON checkpoint of a detection head: config plus named tensors.
void save_checkpoint(const std::filesystem::path& path, const head::DetectionHead& net);
head::DetectionHead load_checkpoint(const std::filesystem::path& path);

void write_loss_csv(const std::filesystem::path& path, std::span<const head::LossRecord> curve);

std::string pfam_mode_name(head::PfamMode mode);
head::PfamMode pfam_mode_from_name(const std::string& name);

/// Shortest text form that round-trips the double exactly (17 significant digits).
std::string format_double(double v);

}  // namespace textdet::io
