#include "textdet/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "textdet/omts.hpp"
#include "textdet/rng.hpp"

namespace textdet::synthdata {

using geometry::AxisBox;
using geometry::BezierText;
using geometry::Point2;
using geometry::PolygonText;

namespace {

constexpr int kOutlineSamples = 24;
constexpr int kSubsamples = 8;  // per cell axis
constexpr double kIsolationIou = 0.05;
// High enough that jittered proposals around one ribbon frequently clear the
// matching threshold against its partner too.
constexpr double kPairIouFloor = 0.4;

struct RibbonDraw {
    BezierText shape;
    double thickness = 0.0;
    Point2 normal{};  // unit, constant along the ribbon
};

// Random cubic spine with constant half-thickness offsets along a fixed
// normal, so the two sides are exact cubics.
RibbonDraw draw_ribbon(Rng& rng, const SynthConfig& cfg) {
    const double length = rng.uniform(0.35, 0.6) * cfg.image_size;
    const double phi =
        rng.uniform(cfg.orient_min_deg, cfg.orient_max_deg) * std::numbers::pi / 180.0;
    const Point2 dir{std::cos(phi), std::sin(phi)};
    const Point2 nrm{-dir.y, dir.x};
    const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
    const double bulge = sign * rng.uniform(cfg.curvature_min, cfg.curvature_max) * length;
    const double b1 = bulge * rng.uniform(0.85, 1.15);
    const double b2 = bulge * rng.uniform(0.85, 1.15);
    const double thickness = rng.uniform(cfg.thickness_min, cfg.thickness_max);

    const Point2 s0{0.0, 0.0};
    const std::array<Point2, 4> spine{
        s0,
        s0 + (length / 3.0) * dir + b1 * nrm,
        s0 + (2.0 * length / 3.0) * dir + b2 * nrm,
        s0 + length * dir,
    };

    RibbonDraw out;
    out.thickness = thickness;
    out.normal = nrm;
    for (int i = 0; i < 4; ++i) {
        out.shape.top.control[static_cast<std::size_t>(i)] =
            spine[static_cast<std::size_t>(i)] + (0.5 * thickness) * nrm;
        out.shape.bottom.control[static_cast<std::size_t>(i)] =
            spine[static_cast<std::size_t>(i)] - (0.5 * thickness) * nrm;
    }
    return out;
}

BezierText translate_shape(const BezierText& bt, Point2 offset) {
    BezierText out = bt;
    for (int i = 0; i < 4; ++i) {
        out.top.control[static_cast<std::size_t>(i)] =
            out.top.control[static_cast<std::size_t>(i)] + offset;
        out.bottom.control[static_cast<std::size_t>(i)] =
            out.bottom.control[static_cast<std::size_t>(i)] + offset;
    }
    return out;
}

AxisBox union_bbox(const AxisBox& a, const AxisBox& b) {
    return AxisBox::from_bounds(std::min(a.x_min(), b.x_min()), std::min(a.y_min(), b.y_min()),
                                std::max(a.x_max(), b.x_max()), std::max(a.y_max(), b.y_max()));
}

// Uniform placement offset so that `group` lands fully inside the image;
// nullopt when it cannot fit.
std::optional<Point2> place_group(Rng& rng, const AxisBox& group, double width, double height) {
    if (group.w > width || group.h > height) return std::nullopt;
    const double dx = rng.uniform(0.0, width - group.w) - group.x_min();
    const double dy = rng.uniform(0.0, height - group.h) - group.y_min();
    return Point2{dx, dy};
}

bool isolated_from(const AxisBox& candidate, const std::vector<AxisBox>& existing) {
    for (const AxisBox& b : existing) {
        if (geometry::box_iou(candidate, b) >= kIsolationIou) return false;
    }
    return true;
}

}  // namespace

std::vector<Scene> gen_scenes(const SynthConfig& config) {
    if (config.n_scenes < 0 || config.image_size <= 0.0) {
        throw std::invalid_argument("gen_scenes: bad config");
    }
    if (config.min_instances < 1 || config.max_instances < config.min_instances) {
        throw std::invalid_argument("gen_scenes: bad instance range");
    }

    std::vector<Scene> scenes;
    scenes.reserve(static_cast<std::size_t>(config.n_scenes));
    for (int si = 0; si < config.n_scenes; ++si) {
        Rng rng(mix_seed(config.rng_seed, static_cast<std::uint64_t>(si)));
        Scene scene;
        scene.width = config.image_size;
        scene.height = config.image_size;

        const int want = rng.uniform_int(config.min_instances, config.max_instances);
        std::vector<AxisBox> placed_boxes;

        int placed = 0;
        while (placed < want) {
            const bool as_pair = (want - placed >= 2) && rng.bernoulli(config.nearby_pair_probability);
            if (as_pair) {
                // Redraw until the duplicated ribbon's box overlap is large
                // enough to create two-match proposals; keep the best draw
                // as a fallback.
                BezierText best_a, best_b;
                double best_iou = -1.0;
                for (int attempt = 0; attempt < 200; ++attempt) {
                    const RibbonDraw r = draw_ribbon(rng, config);
                    const double offset = r.thickness + config.pair_gap;
                    const BezierText partner = translate_shape(r.shape, offset * r.normal);
                    const double iou =
                        geometry::box_iou(geometry::bbox_of(r.shape), geometry::bbox_of(partner));
                    if (iou > best_iou) {
                        best_iou = iou;
                        best_a = r.shape;
                        best_b = partner;
                    }
                    if (iou > kPairIouFloor) break;
                }
                const AxisBox group =
                    union_bbox(geometry::bbox_of(best_a), geometry::bbox_of(best_b));
                bool done = false;
                for (int attempt = 0; attempt < 60 && !done; ++attempt) {
                    const auto offset = place_group(rng, group, scene.width, scene.height);
                    if (!offset) break;
                    const BezierText a = translate_shape(best_a, *offset);
                    const BezierText b = translate_shape(best_b, *offset);
                    const AxisBox moved_group =
                        union_bbox(geometry::bbox_of(a), geometry::bbox_of(b));
                    if (!isolated_from(moved_group, placed_boxes)) continue;
                    scene.instances.push_back(a);
                    scene.instances.push_back(b);
                    placed_boxes.push_back(geometry::bbox_of(a));
                    placed_boxes.push_back(geometry::bbox_of(b));
                    placed += 2;
                    done = true;
                }
                if (!done) break;  // scene too crowded, stop filling
            } else {
                bool done = false;
                for (int attempt = 0; attempt < 60 && !done; ++attempt) {
                    const RibbonDraw r = draw_ribbon(rng, config);
                    const AxisBox box = geometry::bbox_of(r.shape);
                    const auto offset = place_group(rng, box, scene.width, scene.height);
                    if (!offset) continue;
                    const BezierText moved = translate_shape(r.shape, *offset);
                    const AxisBox moved_box = geometry::bbox_of(moved);
                    if (!isolated_from(moved_box, placed_boxes)) continue;
                    scene.instances.push_back(moved);
                    placed_boxes.push_back(moved_box);
                    placed += 1;
                    done = true;
                }
                if (!done) break;
            }
        }
        scene.ignore_flags.assign(scene.instances.size(), false);
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

std::vector<AxisBox> gen_proposals(const Scene& scene, double jitter, int negatives_per_scene,
                                   std::uint64_t seed, int per_instance, double theta) {
    if (jitter < 0.0 || per_instance < 1 || negatives_per_scene < 0) {
        throw std::invalid_argument("gen_proposals: bad arguments");
    }
    Rng rng(seed);
    std::vector<AxisBox> gt_boxes;
    gt_boxes.reserve(scene.instances.size());
    for (const BezierText& inst : scene.instances) gt_boxes.push_back(geometry::bbox_of(inst));

    std::vector<AxisBox> proposals;
    for (const AxisBox& box : gt_boxes) {
        for (int r = 0; r < per_instance; ++r) {
            AxisBox p = box;
            p.cx += rng.uniform(-jitter, jitter) * box.w;
            p.cy += rng.uniform(-jitter, jitter) * box.h;
            p.w *= 1.0 + rng.uniform(-jitter, jitter);
            p.h *= 1.0 + rng.uniform(-jitter, jitter);
            proposals.push_back(p);
        }
    }

    // Negatives stay clearly below theta so downstream matching labels them
    // background at the same threshold.
    const double margin = std::max(0.0, theta - 0.05);
    for (int n = 0; n < negatives_per_scene; ++n) {
        for (int attempt = 0; attempt < 1000; ++attempt) {
            AxisBox p;
            p.w = rng.uniform(0.12, 0.45) * scene.width;
            p.h = rng.uniform(0.12, 0.45) * scene.height;
            p.cx = rng.uniform(0.5 * p.w, scene.width - 0.5 * p.w);
            p.cy = rng.uniform(0.5 * p.h, scene.height - 0.5 * p.h);
            double max_iou = 0.0;
            for (const AxisBox& g : gt_boxes) max_iou = std::max(max_iou, geometry::box_iou(p, g));
            if (max_iou <= margin) {
                proposals.push_back(p);
                break;
            }
        }
    }
    return proposals;
}

std::vector<PolygonText> instance_polygons(const Scene& scene) {
    std::vector<PolygonText> polys;
    polys.reserve(scene.instances.size());
    for (const BezierText& inst : scene.instances) {
        polys.push_back(geometry::bezier_to_polygon(inst, kOutlineSamples));
    }
    return polys;
}

RoiFeature rasterize_roi(std::span<const PolygonText> instance_polys, const AxisBox& proposal,
                         int grid) {
    if (grid < 1) throw std::invalid_argument("rasterize_roi: grid must be >= 1");
    if (!(proposal.w > 0.0) || !(proposal.h > 0.0)) {
        throw std::invalid_argument("rasterize_roi: proposal must have positive size");
    }
    RoiFeature f;
    f.source_proposal = proposal;
    f.values.assign(static_cast<std::size_t>(grid) * grid, 0.0);

    const double cw = proposal.w / grid;
    const double ch = proposal.h / grid;
    const double inv_total = 1.0 / (kSubsamples * kSubsamples);
    for (int gy = 0; gy < grid; ++gy) {
        for (int gx = 0; gx < grid; ++gx) {
            int hits = 0;
            for (int sy = 0; sy < kSubsamples; ++sy) {
                const double y = proposal.y_min() + (gy + (sy + 0.5) / kSubsamples) * ch;
                for (int sx = 0; sx < kSubsamples; ++sx) {
                    const double x = proposal.x_min() + (gx + (sx + 0.5) / kSubsamples) * cw;
                    for (const PolygonText& poly : instance_polys) {
                        if (geometry::point_in_polygon(poly, {x, y})) {
                            ++hits;
                            break;
                        }
                    }
                }
            }
            f.values[static_cast<std::size_t>(gy) * grid + gx] = hits * inv_total;
        }
    }
    return f;
}

RoiFeature rasterize_roi(const Scene& scene, const AxisBox& proposal, int grid) {
    const auto polys = instance_polygons(scene);
    return rasterize_roi(polys, proposal, grid);
}

std::vector<Scene> rotate_dataset(std::span<const Scene> scenes, double angle_deg) {
    std::vector<Scene> out;
    out.reserve(scenes.size());
    const double rad = angle_deg * std::numbers::pi / 180.0;
    const double c = std::abs(std::cos(rad));
    const double s = std::abs(std::sin(rad));
    for (const Scene& scene : scenes) {
        Scene r;
        r.width = scene.width * c + scene.height * s;
        r.height = scene.width * s + scene.height * c;
        const Point2 pivot{0.5 * scene.width, 0.5 * scene.height};
        const Point2 shift{0.5 * (r.width - scene.width), 0.5 * (r.height - scene.height)};
        r.instances.reserve(scene.instances.size());
        for (const BezierText& inst : scene.instances) {
            r.instances.push_back(translate_shape(geometry::rotate_shape(inst, angle_deg, pivot), shift));
        }
        r.ignore_flags = scene.ignore_flags;
        out.push_back(std::move(r));
    }
    return out;
}

double two_match_fraction(std::span<const Scene> scenes,
                          std::span<const std::vector<AxisBox>> proposals, double theta) {
    if (scenes.size() != proposals.size()) {
        throw std::invalid_argument("two_match_fraction: scene/proposal count mismatch");
    }
    std::size_t total = 0, multi = 0;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        std::vector<AxisBox> gt_boxes;
        gt_boxes.reserve(scenes[i].instances.size());
        for (const BezierText& inst : scenes[i].instances) {
            gt_boxes.push_back(geometry::bbox_of(inst));
        }
        for (const AxisBox& p : proposals[i]) {
            int hits = 0;
            for (const AxisBox& g : gt_boxes) hits += (geometry::box_iou(p, g) > theta);
            total += 1;
            multi += (hits >= 2);
        }
    }
    if (total == 0) return 0.0;
    return static_cast<double>(multi) / static_cast<double>(total);
}

}  // namespace textdet::synthdata
