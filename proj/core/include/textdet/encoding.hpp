#pragma once

#include <array>

#include "textdet/geometry.hpp"

namespace textdet::encoding {

// 16 proposal-relative offsets, (tx, ty) per control point in canonical
// BezierText order.
struct CurveTarget {
    std::array<double, 16> offsets{};
};

// Center offsets normalized by proposal size plus log size ratios.
struct BoxTarget {
    double dx = 0.0;
    double dy = 0.0;
    double dlog_w = 0.0;
    double dlog_h = 0.0;
};

CurveTarget encode_curve(const geometry::BezierText& gt, const geometry::AxisBox& proposal);
geometry::BezierText decode_curve(const CurveTarget& t, const geometry::AxisBox& proposal);

BoxTarget encode_box(const geometry::AxisBox& gt, const geometry::AxisBox& proposal);
geometry::AxisBox decode_box(const BoxTarget& t, const geometry::AxisBox& proposal);

}  // namespace textdet::encoding
