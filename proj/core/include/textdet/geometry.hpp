#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace textdet::geometry {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 p) { return std::sqrt(p.x * p.x + p.y * p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

struct CubicBezier {
    std::array<Point2, 4> control{};
};

// One text instance bounded by its two long sides. Canonical orientation:
// both curves run left-to-right in reading direction; serialized order is
// top P0..P3 then bottom Q0..Q3.
struct BezierText {
    CubicBezier top;
    CubicBezier bottom;
};

struct PolygonText {
    std::vector<Point2> vertices;  // closed implicitly
};

struct AxisBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    double x_min() const { return cx - 0.5 * w; }
    double x_max() const { return cx + 0.5 * w; }
    double y_min() const { return cy - 0.5 * h; }
    double y_max() const { return cy + 0.5 * h; }
    double area() const { return w * h; }

    static AxisBox from_bounds(double x0, double y0, double x1, double y1) {
        return {0.5 * (x0 + x1), 0.5 * (y0 + y1), x1 - x0, y1 - y0};
    }
};

/// Evaluates the cubic in Bernstein form. t must lie in [0,1].
Point2 bezier_point(const CubicBezier& curve, double t);

/// Samples the instance outline into a closed polygon: top side at ascending
/// t, bottom side at descending t, 2*samples_per_side vertices total.
PolygonText bezier_to_polygon(const BezierText& bt, int samples_per_side);

/// Least-squares cubic through >= 4 ordered points. Endpoints are pinned to
/// the first and last input points; parameters come from normalized chord
/// length (uniform fallback when consecutive points coincide).
CubicBezier fit_bezier_side(std::span<const Point2> points);

/// Straight segment expressed as a cubic with equally spaced control points.
CubicBezier segment_bezier(Point2 a, Point2 b);

/// Normalized chord-length parameter values used by fit_bezier_side
/// (uniform fallback when consecutive points coincide).
std::vector<double> chord_parameters(std::span<const Point2> points);

/// Distances between each input point and the fitted curve at its chord
/// parameter.
std::vector<double> side_fit_residuals(std::span<const Point2> points, const CubicBezier& fitted);

/// Vertex order convention: first half is the top side left-to-right, second
/// half the bottom side right-to-left. Each side is fitted independently.
BezierText polygon_to_bezier(const PolygonText& poly);

double polygon_area(const PolygonText& poly);

bool point_in_polygon(const PolygonText& poly, Point2 p);

/// Rasterization IoU: both polygons are scan-converted onto a shared grid
/// with `resolution` cells along the longer axis of the joint bounding box.
/// Returns 0 when the union is empty.
double polygon_iou(const PolygonText& a, const PolygonText& b, int resolution = 512);

double box_iou(const AxisBox& a, const AxisBox& b);

/// Tight bounds of the sampled boundary (64 samples per side), not of the
/// control points.
AxisBox bbox_of(const BezierText& bt);
AxisBox bbox_of(const PolygonText& poly);

Point2 rotate_point(Point2 p, double angle_deg, Point2 pivot);
CubicBezier rotate_shape(const CubicBezier& c, double angle_deg, Point2 pivot);
BezierText rotate_shape(const BezierText& bt, double angle_deg, Point2 pivot);
PolygonText rotate_shape(const PolygonText& poly, double angle_deg, Point2 pivot);

/// Control points in canonical serialization order: top P0..P3, bottom Q0..Q3.
std::array<Point2, 8> control_points(const BezierText& bt);
BezierText bezier_from_control_points(const std::array<Point2, 8>& pts);

PolygonText rect_polygon(const AxisBox& box);

}  // namespace textdet::geometry
