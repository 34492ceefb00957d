#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "mod2t/errors.hpp"

namespace mod2t {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

// Axis-aligned box in pixel coordinates, (x, y) = top-left corner.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    std::optional<double> confidence;
    std::optional<int> class_id;

    Vec2 center() const { return {x + w / 2.0, y + h / 2.0}; }
    double area() const { return w * h; }
    double right() const { return x + w; }
    double bottom() const { return y + h; }

    bool valid() const {
        if (!(w > 0.0) || !(h > 0.0)) return false;
        if (confidence && (*confidence < 0.0 || *confidence > 1.0)) return false;
        return true;
    }
};

inline void require_valid(const BoundingBox& b, const char* who) {
    if (!b.valid()) {
        throw InvalidInput(std::string(who) + ": degenerate bounding box (w=" +
                           std::to_string(b.w) + ", h=" + std::to_string(b.h) + ")");
    }
}

enum class TrackSource { Traditional, Deep, Fused };

enum class MotionLabel { Moving, Stationary, Unknown };

// Disk encoding shared by annotation files and the trailing output column.
inline int motion_label_code(MotionLabel l) {
    switch (l) {
        case MotionLabel::Stationary: return 0;
        case MotionLabel::Moving: return 1;
        case MotionLabel::Unknown: return -1;
    }
    return -1;
}

inline MotionLabel motion_label_from_code(int code) {
    if (code == 0) return MotionLabel::Stationary;
    if (code == 1) return MotionLabel::Moving;
    return MotionLabel::Unknown;
}

// One per-frame, per-identity observation. The optional trailing fields carry
// the extra MOT columns and the annotated-output columns through file I/O.
struct TrackRecord {
    int frame = 0;  // 1-based
    int track_id = 0;
    BoundingBox box;
    TrackSource source = TrackSource::Deep;
    std::optional<double> visibility;
    std::optional<double> theta;
    std::optional<MotionLabel> motion;
};

// Row-major 2x3 affine map p -> (a*x + b*y + tx, c*x + d*y + ty).
struct AffineTransform {
    double a = 1.0, b = 0.0, tx = 0.0;
    double c = 0.0, d = 1.0, ty = 0.0;

    static AffineTransform identity() { return {}; }

    static AffineTransform translation(double dx, double dy) {
        return {1.0, 0.0, dx, 0.0, 1.0, dy};
    }

    double det() const { return a * d - b * c; }
    bool invertible() const { return std::abs(det()) > 1e-12; }

    Vec2 apply(Vec2 p) const { return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty}; }

    AffineTransform inverse() const {
        const double dt = det();
        if (std::abs(dt) <= 1e-12) throw InvalidInput("AffineTransform::inverse: singular map");
        AffineTransform r;
        r.a = d / dt;
        r.b = -b / dt;
        r.c = -c / dt;
        r.d = a / dt;
        r.tx = -(r.a * tx + r.b * ty);
        r.ty = -(r.c * tx + r.d * ty);
        return r;
    }
};

// Composition: apply `first`, then `second`.
inline AffineTransform compose(const AffineTransform& second, const AffineTransform& first) {
    AffineTransform r;
    r.a = second.a * first.a + second.b * first.c;
    r.b = second.a * first.b + second.b * first.d;
    r.c = second.c * first.a + second.d * first.c;
    r.d = second.c * first.b + second.d * first.d;
    r.tx = second.a * first.tx + second.b * first.ty + second.tx;
    r.ty = second.c * first.tx + second.d * first.ty + second.ty;
    return r;
}

inline Vec2 apply_transform(const AffineTransform& t, Vec2 p) { return t.apply(p); }

// Motion distance between two boxes, normalized by the first box's half
// extents: sqrt((c1-c2)^T diag(w1^2/4, h1^2/4)^-1 (c1-c2)). Asymmetric on
// purpose; callers pass the older frame's box first.
inline double mahalanobis_distance(const BoundingBox& b1, const BoundingBox& b2) {
    require_valid(b1, "mahalanobis_distance");
    require_valid(b2, "mahalanobis_distance");
    const Vec2 d = b1.center() - b2.center();
    const double nx = d.x / (b1.w / 2.0);
    const double ny = d.y / (b1.h / 2.0);
    return std::sqrt(nx * nx + ny * ny);
}

inline double iou(const BoundingBox& b1, const BoundingBox& b2) {
    const double ix = std::max(0.0, std::min(b1.right(), b2.right()) - std::max(b1.x, b2.x));
    const double iy = std::max(0.0, std::min(b1.bottom(), b2.bottom()) - std::max(b1.y, b2.y));
    const double inter = ix * iy;
    const double uni = b1.area() + b2.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

}  // namespace mod2t
