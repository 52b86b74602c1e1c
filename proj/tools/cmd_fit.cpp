#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <span>

#include "commands.hpp"

namespace textdet::cli {

namespace {

struct FitOptions {
    std::string in;
    std::string out;
};

// Polygon file in, fitted control points plus residual stats out.
void run_fit(const FitOptions& opt) {
    const auto polygons = io::read_ctw1500_file(opt.in);
    std::ofstream out(opt.out);
    if (!out) throw io::FormatError(opt.out + ": cannot open for writing");

    double worst = 0.0, mean_rms = 0.0;
    for (std::size_t i = 0; i < polygons.size(); ++i) {
        const geometry::BezierText bt = geometry::polygon_to_bezier(polygons[i]);

        const std::size_t half = polygons[i].vertices.size() / 2;
        std::vector<geometry::Point2> top(polygons[i].vertices.begin(),
                                          polygons[i].vertices.begin() +
                                              static_cast<std::ptrdiff_t>(half));
        std::vector<geometry::Point2> bottom(polygons[i].vertices.begin() +
                                                 static_cast<std::ptrdiff_t>(half),
                                             polygons[i].vertices.end());
        std::reverse(bottom.begin(), bottom.end());

        double sq_sum = 0.0, max_r = 0.0;
        std::size_t count = 0;
        for (const auto& [pts, curve] :
             {std::pair{std::span<const geometry::Point2>(top), bt.top},
              std::pair{std::span<const geometry::Point2>(bottom), bt.bottom}}) {
            for (double r : geometry::side_fit_residuals(pts, curve)) {
                sq_sum += r * r;
                max_r = std::max(max_r, r);
                ++count;
            }
        }
        const double rms = std::sqrt(sq_sum / static_cast<double>(count));
        mean_rms += rms;
        worst = std::max(worst, max_r);

        std::string line = "{\"instance\":" + std::to_string(i) + ",\"top\":[";
        const auto pts = geometry::control_points(bt);
        for (std::size_t k = 0; k < 8; ++k) {
            if (k == 4) line += "],\"bottom\":[";
            else if (k) line += ",";
            line += "[" + io::format_double(pts[k].x) + "," + io::format_double(pts[k].y) + "]";
        }
        line += "],\"rms_residual\":" + io::format_double(rms) +
                ",\"max_residual\":" + io::format_double(max_r) + "}";
        out << line << '\n';
    }
    if (!polygons.empty()) mean_rms /= static_cast<double>(polygons.size());
    std::printf("fitted %zu instances  mean rms residual: %.6f  worst residual: %.6f\n",
                polygons.size(), mean_rms, worst);
}

}  // namespace

void register_fit(CLI::App& app) {
    auto opt = std::make_shared<FitOptions>();
    CLI::App* cmd = app.add_subcommand(
        "fit", "Fit Bezier sides to polygon annotations and report residuals");
    cmd->add_option("--in", opt->in, "Polygon file (CTW1500-style lines)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opt->out, "Output report (JSONL)")->required();
    cmd->callback([opt]() { run_fit(*opt); });
}

}  // namespace textdet::cli
