#include "textdet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace textdet::geometry {

namespace {

void bernstein3(double t, double b[4]) {
    const double u = 1.0 - t;
    b[0] = u * u * u;
    b[1] = 3.0 * u * u * t;
    b[2] = 3.0 * u * t * t;
    b[3] = t * t * t;
}

}  // namespace

Point2 bezier_point(const CubicBezier& curve, double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::domain_error("bezier_point: t outside [0,1]");
    }
    double b[4];
    bernstein3(t, b);
    Point2 p{0.0, 0.0};
    for (int i = 0; i < 4; ++i) {
        p.x += b[i] * curve.control[i].x;
        p.y += b[i] * curve.control[i].y;
    }
    return p;
}

PolygonText bezier_to_polygon(const BezierText& bt, int samples_per_side) {
    if (samples_per_side < 2) {
        throw std::invalid_argument("bezier_to_polygon: samples_per_side must be >= 2");
    }
    PolygonText poly;
    poly.vertices.reserve(2 * static_cast<std::size_t>(samples_per_side));
    const double step = 1.0 / (samples_per_side - 1);
    for (int k = 0; k < samples_per_side; ++k) {
        poly.vertices.push_back(bezier_point(bt.top, std::min(1.0, k * step)));
    }
    for (int k = samples_per_side - 1; k >= 0; --k) {
        poly.vertices.push_back(bezier_point(bt.bottom, std::min(1.0, k * step)));
    }
    return poly;
}

std::vector<double> chord_parameters(std::span<const Point2> points) {
    const std::size_t n = points.size();
    std::vector<double> u(n, 0.0);
    if (n < 2) return u;
    bool coincident = false;
    for (std::size_t i = 1; i < n; ++i) {
        const double d = distance(points[i], points[i - 1]);
        if (d == 0.0) coincident = true;
        u[i] = u[i - 1] + d;
    }
    if (coincident || u[n - 1] <= 0.0) {
        for (std::size_t i = 0; i < n; ++i) u[i] = static_cast<double>(i) / (n - 1);
    } else {
        const double total = u[n - 1];
        for (std::size_t i = 0; i < n; ++i) u[i] /= total;
    }
    return u;
}

std::vector<double> side_fit_residuals(std::span<const Point2> points, const CubicBezier& fitted) {
    const auto u = chord_parameters(points);
    std::vector<double> residuals(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        residuals[i] = distance(points[i], bezier_point(fitted, u[i]));
    }
    return residuals;
}

CubicBezier fit_bezier_side(std::span<const Point2> points) {
    const std::size_t n = points.size();
    if (n < 4) {
        throw std::invalid_argument("fit_bezier_side: need at least 4 points");
    }

    const std::vector<double> u = chord_parameters(points);

    const Point2 p0 = points.front();
    const Point2 p3 = points.back();

    // Normal equations for the two interior control points (same 2x2 system
    // for x and y).
    double a00 = 0.0, a01 = 0.0, a11 = 0.0;
    double rx0 = 0.0, rx1 = 0.0, ry0 = 0.0, ry1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double b[4];
        bernstein3(u[i], b);
        const double dx = points[i].x - b[0] * p0.x - b[3] * p3.x;
        const double dy = points[i].y - b[0] * p0.y - b[3] * p3.y;
        a00 += b[1] * b[1];
        a01 += b[1] * b[2];
        a11 += b[2] * b[2];
        rx0 += b[1] * dx;
        rx1 += b[2] * dx;
        ry0 += b[1] * dy;
        ry1 += b[2] * dy;
    }

    CubicBezier out;
    out.control[0] = p0;
    out.control[3] = p3;
    const double det = a00 * a11 - a01 * a01;
    const double scale = std::max({a00, a11, 1.0});
    if (std::abs(det) < 1e-12 * scale * scale) {
        // Degenerate system: fall back to equally spaced interior points.
        out.control[1] = p0 + (1.0 / 3.0) * (p3 - p0);
        out.control[2] = p0 + (2.0 / 3.0) * (p3 - p0);
        return out;
    }
    out.control[1] = {(a11 * rx0 - a01 * rx1) / det, (a11 * ry0 - a01 * ry1) / det};
    out.control[2] = {(a00 * rx1 - a01 * rx0) / det, (a00 * ry1 - a01 * ry0) / det};
    return out;
}

CubicBezier segment_bezier(Point2 a, Point2 b) {
    CubicBezier c;
    c.control[0] = a;
    c.control[1] = a + (1.0 / 3.0) * (b - a);
    c.control[2] = a + (2.0 / 3.0) * (b - a);
    c.control[3] = b;
    return c;
}

BezierText polygon_to_bezier(const PolygonText& poly) {
    const std::size_t n = poly.vertices.size();
    if (n % 2 != 0) {
        throw std::invalid_argument("polygon_to_bezier: odd vertex count");
    }
    if (n < 8) {
        throw std::invalid_argument("polygon_to_bezier: need at least 8 vertices");
    }
    const std::size_t half = n / 2;
    std::vector<Point2> top(poly.vertices.begin(), poly.vertices.begin() + half);
    std::vector<Point2> bottom(poly.vertices.begin() + half, poly.vertices.end());
    std::reverse(bottom.begin(), bottom.end());  // stored right-to-left
    BezierText bt;
    bt.top = fit_bezier_side(top);
    bt.bottom = fit_bezier_side(bottom);
    return bt;
}

double polygon_area(const PolygonText& poly) {
    const std::size_t n = poly.vertices.size();
    if (n < 3) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        sum += poly.vertices[j].x * poly.vertices[i].y - poly.vertices[i].x * poly.vertices[j].y;
    }
    return 0.5 * std::abs(sum);
}

bool point_in_polygon(const PolygonText& poly, Point2 p) {
    const std::size_t n = poly.vertices.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& vi = poly.vertices[i];
        const Point2& vj = poly.vertices[j];
        if ((vi.y > p.y) != (vj.y > p.y)) {
            const double x_cross = (vj.x - vi.x) * (p.y - vi.y) / (vj.y - vi.y) + vi.x;
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

namespace {

// Sorted crossings of the horizontal line at y with the polygon boundary,
// using the same straddle rule as point_in_polygon: cell centers are inside
// on [c_{2m}, c_{2m+1}).
void row_crossings(const PolygonText& poly, double y, std::vector<double>& out) {
    out.clear();
    const std::size_t n = poly.vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& vi = poly.vertices[i];
        const Point2& vj = poly.vertices[j];
        if ((vi.y > y) != (vj.y > y)) {
            out.push_back((vj.x - vi.x) * (y - vi.y) / (vj.y - vi.y) + vi.x);
        }
    }
    std::sort(out.begin(), out.end());
}

// Counts cell centers x0 + (ix + 0.5) * cell, ix in [0, nx), falling inside
// [lo, hi).
std::int64_t cells_in_interval(double lo, double hi, double x0, double cell, int nx) {
    const double a = (lo - x0) / cell - 0.5;
    const double b = (hi - x0) / cell - 0.5;
    std::int64_t first = static_cast<std::int64_t>(std::ceil(a));
    if (static_cast<double>(first) < a) ++first;  // guard against ceil rounding down
    std::int64_t last = static_cast<std::int64_t>(std::ceil(b)) - 1;
    if (static_cast<double>(last + 1) < b) ++last;
    first = std::max<std::int64_t>(first, 0);
    last = std::min<std::int64_t>(last, nx - 1);
    return last >= first ? last - first + 1 : 0;
}

}  // namespace

double polygon_iou(const PolygonText& a, const PolygonText& b, int resolution) {
    if (resolution < 64) {
        throw std::invalid_argument("polygon_iou: resolution must be >= 64");
    }
    if (a.vertices.empty() || b.vertices.empty()) return 0.0;

    double x0 = a.vertices[0].x, x1 = x0, y0 = a.vertices[0].y, y1 = y0;
    for (const auto* poly : {&a, &b}) {
        for (const Point2& v : poly->vertices) {
            x0 = std::min(x0, v.x);
            x1 = std::max(x1, v.x);
            y0 = std::min(y0, v.y);
            y1 = std::max(y1, v.y);
        }
    }
    const double extent = std::max(x1 - x0, y1 - y0);
    if (extent <= 0.0) return 0.0;

    const double cell = extent / resolution;
    const int nx = std::max(1, static_cast<int>(std::ceil((x1 - x0) / cell)));
    const int ny = std::max(1, static_cast<int>(std::ceil((y1 - y0) / cell)));

    std::int64_t inter = 0, uni = 0;
    std::vector<double> ca, cb;
    for (int iy = 0; iy < ny; ++iy) {
        const double y = y0 + (iy + 0.5) * cell;
        row_crossings(a, y, ca);
        row_crossings(b, y, cb);

        std::int64_t in_a = 0, in_b = 0, in_both = 0;
        for (std::size_t m = 0; m + 1 < ca.size(); m += 2) {
            in_a += cells_in_interval(ca[m], ca[m + 1], x0, cell, nx);
        }
        for (std::size_t m = 0; m + 1 < cb.size(); m += 2) {
            in_b += cells_in_interval(cb[m], cb[m + 1], x0, cell, nx);
        }
        for (std::size_t m = 0; m + 1 < ca.size(); m += 2) {
            for (std::size_t q = 0; q + 1 < cb.size(); q += 2) {
                const double lo = std::max(ca[m], cb[q]);
                const double hi = std::min(ca[m + 1], cb[q + 1]);
                if (hi > lo) in_both += cells_in_interval(lo, hi, x0, cell, nx);
            }
        }
        inter += in_both;
        uni += in_a + in_b - in_both;
    }
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double box_iou(const AxisBox& a, const AxisBox& b) {
    const double ix = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
    const double iy = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

namespace {

constexpr int kBboxSamplesPerSide = 64;

void extend_bounds(const CubicBezier& c, double& x0, double& y0, double& x1, double& y1) {
    for (int k = 0; k < kBboxSamplesPerSide; ++k) {
        const double t = static_cast<double>(k) / (kBboxSamplesPerSide - 1);
        const Point2 p = bezier_point(c, t);
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
}

}  // namespace

AxisBox bbox_of(const BezierText& bt) {
    double x0 = bt.top.control[0].x, x1 = x0, y0 = bt.top.control[0].y, y1 = y0;
    extend_bounds(bt.top, x0, y0, x1, y1);
    extend_bounds(bt.bottom, x0, y0, x1, y1);
    return AxisBox::from_bounds(x0, y0, x1, y1);
}

AxisBox bbox_of(const PolygonText& poly) {
    if (poly.vertices.empty()) return {};
    double x0 = poly.vertices[0].x, x1 = x0, y0 = poly.vertices[0].y, y1 = y0;
    for (const Point2& v : poly.vertices) {
        x0 = std::min(x0, v.x);
        x1 = std::max(x1, v.x);
        y0 = std::min(y0, v.y);
        y1 = std::max(y1, v.y);
    }
    return AxisBox::from_bounds(x0, y0, x1, y1);
}

Point2 rotate_point(Point2 p, double angle_deg, Point2 pivot) {
    const double rad = angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    const Point2 d = p - pivot;
    return {pivot.x + c * d.x - s * d.y, pivot.y + s * d.x + c * d.y};
}

CubicBezier rotate_shape(const CubicBezier& c, double angle_deg, Point2 pivot) {
    CubicBezier out;
    for (int i = 0; i < 4; ++i) out.control[i] = rotate_point(c.control[i], angle_deg, pivot);
    return out;
}

BezierText rotate_shape(const BezierText& bt, double angle_deg, Point2 pivot) {
    return {rotate_shape(bt.top, angle_deg, pivot), rotate_shape(bt.bottom, angle_deg, pivot)};
}

PolygonText rotate_shape(const PolygonText& poly, double angle_deg, Point2 pivot) {
    PolygonText out;
    out.vertices.reserve(poly.vertices.size());
    for (const Point2& v : poly.vertices) out.vertices.push_back(rotate_point(v, angle_deg, pivot));
    return out;
}

std::array<Point2, 8> control_points(const BezierText& bt) {
    std::array<Point2, 8> pts;
    for (int i = 0; i < 4; ++i) pts[static_cast<std::size_t>(i)] = bt.top.control[static_cast<std::size_t>(i)];
    for (int i = 0; i < 4; ++i) pts[static_cast<std::size_t>(4 + i)] = bt.bottom.control[static_cast<std::size_t>(i)];
    return pts;
}

BezierText bezier_from_control_points(const std::array<Point2, 8>& pts) {
    BezierText bt;
    for (int i = 0; i < 4; ++i) bt.top.control[static_cast<std::size_t>(i)] = pts[static_cast<std::size_t>(i)];
    for (int i = 0; i < 4; ++i) bt.bottom.control[static_cast<std::size_t>(i)] = pts[static_cast<std::size_t>(4 + i)];
    return bt;
}

PolygonText rect_polygon(const AxisBox& box) {
    PolygonText p;
    p.vertices = {{box.x_min(), box.y_min()},
                  {box.x_max(), box.y_min()},
                  {box.x_max(), box.y_max()},
                  {box.x_min(), box.y_max()}};
    return p;
}

}  // namespace textdet::geometry
