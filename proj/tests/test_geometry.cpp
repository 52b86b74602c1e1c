#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "test_util.hpp"
#include "textdet/geometry.hpp"

using namespace textdet::geometry;
using testutil::de_casteljau;
using testutil::random_curve;
using testutil::rect_bezier;
using textdet::Rng;

TEST_CASE("bezier_point on collinear equally spaced control points") {
    CubicBezier c{{Point2{0, 0}, Point2{1, 0}, Point2{2, 0}, Point2{3, 0}}};
    const Point2 p = bezier_point(c, 0.5);
    CHECK(p.x == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("bezier_point endpoints interpolate P0 and P3") {
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        const CubicBezier c = random_curve(rng);
        const Point2 a = bezier_point(c, 0.0);
        const Point2 b = bezier_point(c, 1.0);
        CHECK(a.x == c.control[0].x);
        CHECK(a.y == c.control[0].y);
        CHECK(b.x == c.control[3].x);
        CHECK(b.y == c.control[3].y);
    }
}

TEST_CASE("bezier_point matches the de Casteljau oracle") {
    // Frozen value from the subdivision oracle.
    CubicBezier c{{Point2{0, 0}, Point2{0, 1}, Point2{1, 1}, Point2{1, 0}}};
    const Point2 mid = de_casteljau(c, 0.5);
    CHECK(mid.x == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mid.y == doctest::Approx(0.75).epsilon(1e-12));
    const Point2 p = bezier_point(c, 0.5);
    CHECK(p.x == doctest::Approx(mid.x).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(mid.y).epsilon(1e-12));

    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        const CubicBezier rc = random_curve(rng);
        const double t = rng.uniform();
        const Point2 ours = bezier_point(rc, t);
        const Point2 oracle = de_casteljau(rc, t);
        CHECK(ours.x == doctest::Approx(oracle.x).epsilon(1e-12));
        CHECK(ours.y == doctest::Approx(oracle.y).epsilon(1e-12));
    }
}

TEST_CASE("bezier_point rejects t outside [0,1]") {
    Rng rng(1);
    const CubicBezier c = random_curve(rng);
    CHECK_THROWS_AS(bezier_point(c, -0.01), std::domain_error);
    CHECK_THROWS_AS(bezier_point(c, 1.01), std::domain_error);
}

TEST_CASE("convex hull containment") {
    Rng rng(13);
    for (int i = 0; i < 200; ++i) {
        const CubicBezier c = random_curve(rng);
        // Hull via orientation against every directed pair of control points:
        // the curve point must not lie strictly outside any supporting line.
        const Point2 p = bezier_point(c, rng.uniform());
        // A point is in the convex hull of S iff it cannot be strictly
        // separated; check it is a convex combination by solving with the
        // simple barycentric trick: verify against all edges of the hull
        // polygon built by gift wrapping.
        std::array<Point2, 4> pts = c.control;
        std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
            return a.x != b.x ? a.x < b.x : a.y < b.y;
        });
        auto cross = [](Point2 o, Point2 a, Point2 b) {
            return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
        };
        std::vector<Point2> hull;
        for (int pass = 0; pass < 2; ++pass) {
            const std::size_t start = hull.size();
            for (const Point2& q : pts) {
                while (hull.size() >= start + 2 &&
                       cross(hull[hull.size() - 2], hull[hull.size() - 1], q) <= 0) {
                    hull.pop_back();
                }
                hull.push_back(q);
            }
            hull.pop_back();
            std::reverse(pts.begin(), pts.end());
        }
        bool inside = true;
        for (std::size_t e = 0; e < hull.size(); ++e) {
            const Point2 a = hull[e];
            const Point2 b = hull[(e + 1) % hull.size()];
            if (cross(a, b, p) < -1e-9 * (std::abs(a.x) + std::abs(b.x) + 1.0)) inside = false;
        }
        CHECK(inside);
    }
}

TEST_CASE("affine equivariance of bezier_point") {
    Rng rng(14);
    for (int i = 0; i < 100; ++i) {
        const CubicBezier c = random_curve(rng);
        const double t = rng.uniform();
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double scale = rng.uniform(0.2, 3.0);
        const Point2 shift{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        auto transform = [&](Point2 p) {
            const double x = scale * (std::cos(angle) * p.x - std::sin(angle) * p.y) + shift.x;
            const double y = scale * (std::sin(angle) * p.x + std::cos(angle) * p.y) + shift.y;
            return Point2{x, y};
        };
        CubicBezier tc;
        for (int k = 0; k < 4; ++k) {
            tc.control[static_cast<std::size_t>(k)] =
                transform(c.control[static_cast<std::size_t>(k)]);
        }
        const Point2 lhs = bezier_point(tc, t);
        const Point2 rhs = transform(bezier_point(c, t));
        CHECK(lhs.x == doctest::Approx(rhs.x).epsilon(1e-9));
        CHECK(lhs.y == doctest::Approx(rhs.y).epsilon(1e-9));
    }
}

TEST_CASE("bezier_to_polygon on a rectangle keeps the exact area") {
    const BezierText bt = rect_bezier(2.0, 3.0, 12.0, 7.0);
    const PolygonText poly = bezier_to_polygon(bt, 10);
    CHECK(poly.vertices.size() == 20);
    CHECK(polygon_area(poly) == doctest::Approx(40.0).epsilon(1e-9));
}

TEST_CASE("bezier_to_polygon with 2 samples gives the endpoint quad") {
    const BezierText bt = rect_bezier(0.0, 0.0, 4.0, 2.0);
    const PolygonText poly = bezier_to_polygon(bt, 2);
    REQUIRE(poly.vertices.size() == 4);
    CHECK(poly.vertices[0].x == 0.0);
    CHECK(poly.vertices[1].x == 4.0);
    CHECK(poly.vertices[2].x == 4.0);
    CHECK(poly.vertices[2].y == 2.0);
    CHECK(poly.vertices[3].x == 0.0);
    CHECK_THROWS_AS(bezier_to_polygon(bt, 1), std::invalid_argument);
}

TEST_CASE("bezier_to_polygon area converges with sample count") {
    BezierText bt;
    bt.top = CubicBezier{{Point2{0, 0}, Point2{3, -4}, Point2{7, -4}, Point2{10, 0}}};
    bt.bottom = CubicBezier{{Point2{0, 3}, Point2{3, -1}, Point2{7, -1}, Point2{10, 3}}};
    const double a50 = polygon_area(bezier_to_polygon(bt, 50));
    const double a200 = polygon_area(bezier_to_polygon(bt, 200));
    CHECK(std::abs(a50 - a200) < 0.005 * a200);
}

TEST_CASE("fit_bezier_side recovers an exactly representable side") {
    // Collinear equally spaced control points make chord length equal to the
    // curve parameter, so the least-squares fit must be exact.
    Rng rng(15);
    for (int i = 0; i < 20; ++i) {
        const Point2 start{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const Point2 dir{rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0)};
        CubicBezier c;
        for (int k = 0; k < 4; ++k) {
            c.control[static_cast<std::size_t>(k)] = start + (static_cast<double>(k) / 3.0) * dir;
        }
        std::vector<Point2> samples;
        for (int k = 0; k < 12; ++k) samples.push_back(bezier_point(c, k / 11.0));
        const CubicBezier fit = fit_bezier_side(samples);
        for (int k = 0; k < 4; ++k) {
            CHECK(std::abs(fit.control[static_cast<std::size_t>(k)].x -
                           c.control[static_cast<std::size_t>(k)].x) < 1e-6);
            CHECK(std::abs(fit.control[static_cast<std::size_t>(k)].y -
                           c.control[static_cast<std::size_t>(k)].y) < 1e-6);
        }
    }
}

TEST_CASE("fit_bezier_side on a straight segment stays collinear") {
    const std::vector<Point2> pts{{0, 0}, {1, 1}, {2.5, 2.5}, {4, 4}};
    const CubicBezier fit = fit_bezier_side(pts);
    for (int k = 1; k < 3; ++k) {
        const Point2 p = fit.control[static_cast<std::size_t>(k)];
        CHECK(std::abs(p.y - p.x) < 1e-9);  // on the y = x line
    }
}

TEST_CASE("fit_bezier_side fits a quarter circle within 0.01") {
    std::vector<Point2> arc;
    for (int k = 0; k < 20; ++k) {
        const double a = 0.5 * std::numbers::pi * k / 19.0;
        arc.push_back({std::cos(a), std::sin(a)});
    }
    const CubicBezier fit = fit_bezier_side(arc);
    // Dense sampling against the analytic circle: radial distance is the
    // orthogonal residual.
    double worst = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const Point2 p = bezier_point(fit, k / 1000.0);
        worst = std::max(worst, std::abs(std::hypot(p.x, p.y) - 1.0));
    }
    CHECK(worst < 0.01);
}

TEST_CASE("fit_bezier_side input validation") {
    std::vector<Point2> three{{0, 0}, {1, 0}, {2, 0}};
    CHECK_THROWS_AS(fit_bezier_side(three), std::invalid_argument);
    // Coincident consecutive points: uniform fallback, no crash.
    std::vector<Point2> dup{{0, 0}, {0, 0}, {1, 0}, {2, 0}, {3, 0}};
    CHECK_NOTHROW(fit_bezier_side(dup));
}

TEST_CASE("polygon_to_bezier validates vertex counts") {
    PolygonText odd;
    odd.vertices = {{0, 0}, {1, 0}, {2, 0}, {2, 1}, {1, 1}};
    CHECK_THROWS_AS(polygon_to_bezier(odd), std::invalid_argument);
    PolygonText quad;
    quad.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK_THROWS_AS(polygon_to_bezier(quad), std::invalid_argument);
}

TEST_CASE("polygon_to_bezier round-trips near-straight cubic sides") {
    Rng rng(16);
    for (int i = 0; i < 20; ++i) {
        // Exactly cubic sides with near-uniform chord lengths: equally spaced
        // along a line plus a tiny perpendicular bend.
        BezierText bt;
        const double y_gap = rng.uniform(0.8, 1.5);
        for (int side = 0; side < 2; ++side) {
            CubicBezier& c = side == 0 ? bt.top : bt.bottom;
            const double y = side == 0 ? 0.0 : y_gap;
            for (int k = 0; k < 4; ++k) {
                c.control[static_cast<std::size_t>(k)] = {static_cast<double>(k),
                                                          y + rng.uniform(-1e-3, 1e-3)};
            }
        }
        const PolygonText poly = bezier_to_polygon(bt, 10);
        const BezierText back = polygon_to_bezier(poly);
        const auto a = control_points(bt);
        const auto b = control_points(back);
        for (std::size_t k = 0; k < 8; ++k) {
            CHECK(std::abs(a[k].x - b[k].x) < 1e-5);
            CHECK(std::abs(a[k].y - b[k].y) < 1e-5);
        }
    }
}

TEST_CASE("polygon_area basics") {
    PolygonText square;
    square.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(polygon_area(square) == doctest::Approx(1.0));

    PolygonText line;
    line.vertices = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    CHECK(polygon_area(line) == doctest::Approx(0.0));

    PolygonText tri;
    tri.vertices = {{0, 0}, {4, 0}, {0, 3}};
    CHECK(polygon_area(tri) == doctest::Approx(6.0));
}

TEST_CASE("polygon_iou basics") {
    PolygonText a;
    a.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(polygon_iou(a, a, 512) == 1.0);

    PolygonText far_away;
    far_away.vertices = {{5, 5}, {6, 5}, {6, 6}, {5, 6}};
    CHECK(polygon_iou(a, far_away, 512) == 0.0);

    // Unit squares offset by half: intersection 1/2, union 3/2.
    PolygonText b;
    b.vertices = {{0.5, 0}, {1.5, 0}, {1.5, 1}, {0.5, 1}};
    CHECK(polygon_iou(a, b, 512) == doctest::Approx(1.0 / 3.0).epsilon(0.03));
    CHECK(std::abs(polygon_iou(a, b, 512) - 1.0 / 3.0) < 0.01);
    CHECK(polygon_iou(a, b, 512) == polygon_iou(b, a, 512));

    CHECK_THROWS_AS(polygon_iou(a, b, 32), std::invalid_argument);
}

TEST_CASE("box_iou analytic cases") {
    const AxisBox a{0.5, 0.5, 1.0, 1.0};
    CHECK(box_iou(a, a) == 1.0);
    const AxisBox touching{1.5, 0.5, 1.0, 1.0};
    CHECK(box_iou(a, touching) == 0.0);
    const AxisBox half{1.0, 0.5, 1.0, 1.0};
    CHECK(box_iou(a, half) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("box_iou agrees with rasterized polygon_iou on random rectangles") {
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        AxisBox a = testutil::random_box(rng);
        AxisBox b = a;
        b.cx += rng.uniform(-0.5, 0.5) * a.w;
        b.cy += rng.uniform(-0.5, 0.5) * a.h;
        b.w *= rng.uniform(0.5, 1.5);
        b.h *= rng.uniform(0.5, 1.5);
        const double exact = box_iou(a, b);
        const double raster = polygon_iou(rect_polygon(a), rect_polygon(b), 1024);
        CHECK(std::abs(exact - raster) < 0.01);
    }
}

TEST_CASE("bbox_of a rotated square") {
    const BezierText square = rect_bezier(0.0, 0.0, 1.0, 1.0);
    const BezierText rotated = rotate_shape(square, 45.0, {0.5, 0.5});
    const AxisBox box = bbox_of(rotated);
    CHECK(box.w == doctest::Approx(std::numbers::sqrt2).epsilon(1e-9));
    CHECK(box.h == doctest::Approx(std::numbers::sqrt2).epsilon(1e-9));
}

TEST_CASE("rotate_shape identity angles") {
    Rng rng(18);
    const CubicBezier c = random_curve(rng);
    const CubicBezier same = rotate_shape(c, 0.0, {1.0, 2.0});
    const CubicBezier full = rotate_shape(c, 360.0, {1.0, 2.0});
    for (int k = 0; k < 4; ++k) {
        const auto i = static_cast<std::size_t>(k);
        CHECK(std::abs(same.control[i].x - c.control[i].x) < 1e-9);
        CHECK(std::abs(full.control[i].x - c.control[i].x) < 1e-7);
        CHECK(std::abs(full.control[i].y - c.control[i].y) < 1e-7);
    }
}

TEST_CASE("bbox_of covers the sampled curve, not control points") {
    // The curve bulges less than its control polygon.
    BezierText bt;
    bt.top = CubicBezier{{Point2{0, 0}, Point2{1, -4}, Point2{2, -4}, Point2{3, 0}}};
    bt.bottom = CubicBezier{{Point2{0, 1}, Point2{1, 1}, Point2{2, 1}, Point2{3, 1}}};
    const AxisBox box = bbox_of(bt);
    CHECK(box.y_min() == doctest::Approx(-3.0).epsilon(1e-3));  // 0.75 * 4 bulge
    CHECK(box.y_max() == doctest::Approx(1.0));
}
