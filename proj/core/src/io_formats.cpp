#include "textdet/io_formats.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace textdet::io {

using geometry::AxisBox;
using geometry::BezierText;
using geometry::Point2;
using geometry::PolygonText;
using json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string location(int line_number) {
    return line_number > 0 ? "line " + std::to_string(line_number) + ": " : "";
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_number(const std::string& token, int line_number) {
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw FormatError(location(line_number) + "non-numeric token '" + token + "'");
    }
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

PolygonText parse_ctw1500_line(std::string_view line, int line_number) {
    const auto tokens = split(trim(line), ',');
    if (tokens.size() != 28) {
        throw FormatError(location(line_number) + "expected 28 values, got " +
                          std::to_string(tokens.size()));
    }
    PolygonText poly;
    poly.vertices.reserve(14);
    for (std::size_t i = 0; i < 28; i += 2) {
        poly.vertices.push_back(
            {parse_number(tokens[i], line_number), parse_number(tokens[i + 1], line_number)});
    }
    return poly;
}

IcdarLine parse_icdar15_line(std::string_view line, int line_number) {
    const auto tokens = split(trim(line), ',');
    if (tokens.size() < 9) {
        throw FormatError(location(line_number) + "expected 8 coordinates plus transcription, got " +
                          std::to_string(tokens.size()) + " fields");
    }
    IcdarLine out;
    out.quad.vertices.reserve(4);
    for (std::size_t i = 0; i < 8; i += 2) {
        out.quad.vertices.push_back(
            {parse_number(tokens[i], line_number), parse_number(tokens[i + 1], line_number)});
    }
    // Transcription may contain commas; rejoin the tail.
    std::string transcription = tokens[8];
    for (std::size_t i = 9; i < tokens.size(); ++i) transcription += "," + tokens[i];
    out.transcription = transcription;
    out.ignore = transcription == "###";
    return out;
}

namespace {

template <typename Fn>
auto read_lines(const std::filesystem::path& path, Fn parse) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string() + ": cannot open file");
    using Item = decltype(parse(std::string_view{}, 0));
    std::vector<Item> out;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) {
            std::cerr << "warning: " << path.string() << ":" << line_number
                      << ": empty line skipped\n";
            continue;
        }
        try {
            out.push_back(parse(std::string_view(line), line_number));
        } catch (const FormatError& e) {
            throw FormatError(path.string() + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

std::vector<PolygonText> read_ctw1500_file(const std::filesystem::path& path) {
    return read_lines(path, [](std::string_view l, int n) { return parse_ctw1500_line(l, n); });
}

std::vector<IcdarLine> read_icdar15_file(const std::filesystem::path& path) {
    return read_lines(path, [](std::string_view l, int n) { return parse_icdar15_line(l, n); });
}

namespace {

void append_curve_json(std::string& out, const geometry::CubicBezier& c) {
    out += '[';
    for (int i = 0; i < 4; ++i) {
        if (i) out += ',';
        out += '[';
        out += format_double(c.control[static_cast<std::size_t>(i)].x);
        out += ',';
        out += format_double(c.control[static_cast<std::size_t>(i)].y);
        out += ']';
    }
    out += ']';
}

geometry::CubicBezier curve_from_json(const json& j, int line_number) {
    if (!j.is_array() || j.size() != 4) {
        throw FormatError(location(line_number) + "curve must be an array of 4 [x,y] points");
    }
    geometry::CubicBezier c;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& p = j[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw FormatError(location(line_number) + "control point must be [x,y]");
        }
        c.control[i] = {p[0].get<double>(), p[1].get<double>()};
    }
    return c;
}

bool degenerate_instance(const BezierText& inst) {
    const AxisBox box = geometry::bbox_of(inst);
    if (!(box.w > 0.0) || !(box.h > 0.0)) return true;
    const double area = geometry::polygon_area(geometry::bezier_to_polygon(inst, 10));
    return area < 1.0;
}

}  // namespace

std::string scene_to_json_line(const synthdata::Scene& scene) {
    std::string out = "{\"width\":";
    out += format_double(scene.width);
    out += ",\"height\":";
    out += format_double(scene.height);
    out += ",\"instances\":[";
    for (std::size_t i = 0; i < scene.instances.size(); ++i) {
        if (i) out += ',';
        out += "{\"top\":";
        append_curve_json(out, scene.instances[i].top);
        out += ",\"bottom\":";
        append_curve_json(out, scene.instances[i].bottom);
        out += ",\"ignore\":";
        out += scene.ignore_flags[i] ? "true" : "false";
        out += '}';
    }
    out += "]}";
    return out;
}

synthdata::Scene scene_from_json_line(std::string_view line, int line_number) {
    json j;
    try {
        j = json::parse(line);
    } catch (const std::exception& e) {
        throw FormatError(location(line_number) + "invalid JSON: " + e.what());
    }
    if (!j.contains("width") || !j.contains("height") || !j.contains("instances")) {
        throw FormatError(location(line_number) + "scene needs width, height, instances");
    }
    synthdata::Scene scene;
    scene.width = j["width"].get<double>();
    scene.height = j["height"].get<double>();
    for (const auto& inst_json : j["instances"]) {
        if (!inst_json.contains("top") || !inst_json.contains("bottom")) {
            throw FormatError(location(line_number) + "instance needs top and bottom curves");
        }
        BezierText inst;
        inst.top = curve_from_json(inst_json["top"], line_number);
        inst.bottom = curve_from_json(inst_json["bottom"], line_number);
        if (degenerate_instance(inst)) {
            std::cerr << "warning: " << location(line_number)
                      << "degenerate instance dropped (area < 1 px^2 or empty bbox)\n";
            continue;
        }
        scene.instances.push_back(inst);
        scene.ignore_flags.push_back(inst_json.value("ignore", false));
    }
    return scene;
}

void write_jsonl_scenes(const std::filesystem::path& path,
                        std::span<const synthdata::Scene> scenes) {
    std::ofstream out(path);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    for (const auto& scene : scenes) out << scene_to_json_line(scene) << '\n';
}

std::vector<synthdata::Scene> read_jsonl_scenes(const std::filesystem::path& path) {
    return read_lines(path, [](std::string_view l, int n) { return scene_from_json_line(l, n); });
}

void write_jsonl_proposals(const std::filesystem::path& path,
                           std::span<const std::vector<AxisBox>> proposals) {
    std::ofstream out(path);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        out << "{\"scene\":" << i << ",\"proposals\":[";
        for (std::size_t k = 0; k < proposals[i].size(); ++k) {
            const AxisBox& b = proposals[i][k];
            if (k) out << ',';
            out << '[' << format_double(b.cx) << ',' << format_double(b.cy) << ','
                << format_double(b.w) << ',' << format_double(b.h) << ']';
        }
        out << "]}\n";
    }
}

std::vector<std::vector<AxisBox>> read_jsonl_proposals(const std::filesystem::path& path) {
    auto rows = read_lines(path, [](std::string_view l, int n) {
        json j;
        try {
            j = json::parse(l);
        } catch (const std::exception& e) {
            throw FormatError(location(n) + "invalid JSON: " + e.what());
        }
        if (!j.contains("scene") || !j.contains("proposals")) {
            throw FormatError(location(n) + "proposal row needs scene and proposals");
        }
        std::pair<int, std::vector<AxisBox>> row;
        row.first = j["scene"].get<int>();
        for (const auto& b : j["proposals"]) {
            if (!b.is_array() || b.size() != 4) {
                throw FormatError(location(n) + "proposal must be [cx,cy,w,h]");
            }
            row.second.push_back({b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                                  b[3].get<double>()});
        }
        return row;
    });
    std::vector<std::vector<AxisBox>> out;
    for (auto& [scene_idx, boxes] : rows) {
        if (scene_idx < 0) throw FormatError("negative scene index in proposals file");
        if (out.size() <= static_cast<std::size_t>(scene_idx)) {
            out.resize(static_cast<std::size_t>(scene_idx) + 1);
        }
        out[static_cast<std::size_t>(scene_idx)] = std::move(boxes);
    }
    return out;
}

void write_jsonl_detections(const std::filesystem::path& path,
                            std::span<const eval::SceneDetections> detections) {
    std::ofstream out(path);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    for (const eval::SceneDetections& sd : detections) {
        out << "{\"scene\":" << sd.scene_index << ",\"detections\":[";
        for (std::size_t k = 0; k < sd.detections.size(); ++k) {
            const head::Detection& d = sd.detections[k];
            if (k) out << ',';
            out << "{\"score\":" << format_double(d.score) << ",\"box\":[" << format_double(d.box.cx)
                << ',' << format_double(d.box.cy) << ',' << format_double(d.box.w) << ','
                << format_double(d.box.h) << "],\"top\":";
            std::string top;
            append_curve_json(top, d.shape.top);
            out << top << ",\"bottom\":";
            std::string bottom;
            append_curve_json(bottom, d.shape.bottom);
            out << bottom << '}';
        }
        out << "]}\n";
    }
}

std::vector<eval::SceneDetections> read_jsonl_detections(const std::filesystem::path& path) {
    return read_lines(path, [](std::string_view l, int n) {
        json j;
        try {
            j = json::parse(l);
        } catch (const std::exception& e) {
            throw FormatError(location(n) + "invalid JSON: " + e.what());
        }
        if (!j.contains("scene") || !j.contains("detections")) {
            throw FormatError(location(n) + "detection row needs scene and detections");
        }
        eval::SceneDetections sd;
        sd.scene_index = j["scene"].get<int>();
        for (const auto& dj : j["detections"]) {
            head::Detection d;
            d.score = dj.at("score").get<double>();
            const auto& b = dj.at("box");
            if (!b.is_array() || b.size() != 4) {
                throw FormatError(location(n) + "detection box must be [cx,cy,w,h]");
            }
            d.box = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
            d.shape.top = curve_from_json(dj.at("top"), n);
            d.shape.bottom = curve_from_json(dj.at("bottom"), n);
            sd.detections.push_back(std::move(d));
        }
        return sd;
    });
}

namespace {

std::string svg_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// Closed outline: top side forward, straight cap, bottom side reversed.
std::string bezier_path(const BezierText& bt) {
    const auto& t = bt.top.control;
    const auto& b = bt.bottom.control;
    std::string d = "M " + svg_num(t[0].x) + " " + svg_num(t[0].y);
    d += " C " + svg_num(t[1].x) + " " + svg_num(t[1].y) + ", " + svg_num(t[2].x) + " " +
         svg_num(t[2].y) + ", " + svg_num(t[3].x) + " " + svg_num(t[3].y);
    d += " L " + svg_num(b[3].x) + " " + svg_num(b[3].y);
    d += " C " + svg_num(b[2].x) + " " + svg_num(b[2].y) + ", " + svg_num(b[1].x) + " " +
         svg_num(b[1].y) + ", " + svg_num(b[0].x) + " " + svg_num(b[0].y);
    d += " Z";
    return d;
}

}  // namespace

std::string render_svg(const synthdata::Scene& scene, std::span<const head::Detection> detections) {
    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_num(scene.width) +
           "\" height=\"" + svg_num(scene.height) + "\" viewBox=\"0 0 " + svg_num(scene.width) +
           " " + svg_num(scene.height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < scene.instances.size(); ++i) {
        svg += "<path d=\"" + bezier_path(scene.instances[i]) + "\" fill=\"none\" stroke=\"#2e7d32\"";
        if (scene.ignore_flags[i]) svg += " stroke-dasharray=\"4 2\"";
        svg += " stroke-width=\"1\"/>\n";
    }
    for (const head::Detection& d : detections) {
        svg += "<path d=\"" + bezier_path(d.shape) +
               "\" fill=\"none\" stroke=\"#d32f2f\" stroke-width=\"1\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void write_svg(const std::filesystem::path& path, const synthdata::Scene& scene,
               std::span<const head::Detection> detections) {
    std::ofstream out(path);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    out << render_svg(scene, detections);
}

std::string pfam_mode_name(head::PfamMode mode) {
    switch (mode) {
        case head::PfamMode::none: return "none";
        case head::PfamMode::last_fc: return "1fc";
        case head::PfamMode::both_fc: return "2fc";
    }
    throw std::invalid_argument("unknown pfam mode");
}

head::PfamMode pfam_mode_from_name(const std::string& name) {
    if (name == "none") return head::PfamMode::none;
    if (name == "1fc") return head::PfamMode::last_fc;
    if (name == "2fc") return head::PfamMode::both_fc;
    throw FormatError("unknown pfam mode '" + name + "' (expected none|1fc|2fc)");
}

void save_checkpoint(const std::filesystem::path& path, const head::DetectionHead& net) {
    const head::HeadConfig& cfg = net.config();
    json j;
    j["format"] = "textdet-checkpoint";
    j["version"] = 1;
    j["config"] = {{"roi_dim", cfg.roi_dim},
                   {"fc_dim", cfg.fc_dim},
                   {"k", cfg.K},
                   {"pfam_mode", pfam_mode_name(cfg.pfam_mode)},
                   {"pfam_hidden", cfg.pfam_hidden},
                   {"pfam_before_relu", cfg.pfam_before_relu}};
    j["tensors"] = json::array();
    for (const auto& [name, tensor] : net.to_params().items) {
        j["tensors"].push_back({{"name", name}, {"shape", tensor.shape}, {"data", tensor.data}});
    }
    std::ofstream out(path);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    out << j.dump(1) << '\n';
}

head::DetectionHead load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string() + ": cannot open file");
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        throw FormatError(path.string() + ": invalid JSON: " + e.what());
    }
    if (j.value("format", "") != "textdet-checkpoint") {
        throw FormatError(path.string() + ": not a textdet checkpoint");
    }
    if (j.value("version", 0) != 1) {
        throw FormatError(path.string() + ": unsupported checkpoint version");
    }
    const auto& cj = j.at("config");
    head::HeadConfig cfg;
    cfg.roi_dim = cj.at("roi_dim").get<std::size_t>();
    cfg.fc_dim = cj.at("fc_dim").get<std::size_t>();
    cfg.K = cj.at("k").get<int>();
    cfg.pfam_mode = pfam_mode_from_name(cj.at("pfam_mode").get<std::string>());
    cfg.pfam_hidden = cj.at("pfam_hidden").get<std::size_t>();
    cfg.pfam_before_relu = cj.at("pfam_before_relu").get<bool>();

    nn::ParamMap params;
    for (const auto& tj : j.at("tensors")) {
        params.add(tj.at("name").get<std::string>(),
                   tj.at("shape").get<std::vector<std::size_t>>(),
                   tj.at("data").get<nn::Vec>());
    }
    head::DetectionHead net(cfg, 0);
    net.from_params(params);
    return net;
}

void write_loss_csv(const std::filesystem::path& path, std::span<const head::LossRecord> curve) {
    std::ofstream out(path);
    if (!out) throw FormatError(path.string() + ": cannot open for writing");
    out << "iter,cls,reg_box,reg_curve,total,lr\n";
    for (const head::LossRecord& r : curve) {
        out << r.iter << ',' << format_double(r.cls) << ',' << format_double(r.reg_box) << ','
            << format_double(r.reg_curve) << ',' << format_double(r.total) << ','
            << format_double(r.lr) << '\n';
    }
}

}  // namespace textdet::io
