#include "textdet/encoding.hpp"

#include <cmath>
#include <stdexcept>

namespace textdet::encoding {

using geometry::AxisBox;
using geometry::BezierText;
using geometry::Point2;

namespace {

void require_valid_proposal(const AxisBox& p, const char* who) {
    if (!(p.w > 0.0) || !(p.h > 0.0)) {
        throw std::invalid_argument(std::string(who) + ": proposal must have positive size");
    }
}

}  // namespace

CurveTarget encode_curve(const BezierText& gt, const AxisBox& proposal) {
    require_valid_proposal(proposal, "encode_curve");
    const auto pts = geometry::control_points(gt);
    CurveTarget t;
    for (std::size_t i = 0; i < 8; ++i) {
        t.offsets[2 * i] = (pts[i].x - proposal.cx) / proposal.w;
        t.offsets[2 * i + 1] = (pts[i].y - proposal.cy) / proposal.h;
    }
    return t;
}

BezierText decode_curve(const CurveTarget& t, const AxisBox& proposal) {
    require_valid_proposal(proposal, "decode_curve");
    std::array<Point2, 8> pts;
    for (std::size_t i = 0; i < 8; ++i) {
        pts[i].x = proposal.cx + t.offsets[2 * i] * proposal.w;
        pts[i].y = proposal.cy + t.offsets[2 * i + 1] * proposal.h;
    }
    return geometry::bezier_from_control_points(pts);
}

BoxTarget encode_box(const AxisBox& gt, const AxisBox& proposal) {
    require_valid_proposal(proposal, "encode_box");
    if (!(gt.w > 0.0) || !(gt.h > 0.0)) {
        throw std::invalid_argument("encode_box: target must have positive size");
    }
    BoxTarget t;
    t.dx = (gt.cx - proposal.cx) / proposal.w;
    t.dy = (gt.cy - proposal.cy) / proposal.h;
    t.dlog_w = std::log(gt.w / proposal.w);
    t.dlog_h = std::log(gt.h / proposal.h);
    return t;
}

AxisBox decode_box(const BoxTarget& t, const AxisBox& proposal) {
    require_valid_proposal(proposal, "decode_box");
    AxisBox out;
    out.cx = proposal.cx + t.dx * proposal.w;
    out.cy = proposal.cy + t.dy * proposal.h;
    out.w = proposal.w * std::exp(t.dlog_w);
    out.h = proposal.h * std::exp(t.dlog_h);
    return out;
}

}  // namespace textdet::encoding
