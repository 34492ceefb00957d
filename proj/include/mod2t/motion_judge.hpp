#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "mod2t/geometry.hpp"
#include "mod2t/image.hpp"
#include "mod2t/registration.hpp"

namespace mod2t {

struct JudgeConfig {
    int frame_gap = 3;         // frames between the two compared observations
    double lambda = 0.3;       // appearance weight in the stillness score
    double beta_d = 0.0;       // max displacement of a stationary object; 0 = 0.01*min(W,H)
    int patch_width = 256;
    int patch_height = 192;
    int boundary_margin = 15;  // strips reaching this close to the border are dropped
    double r1 = 6.5025;        // SSIM stabilizers for the 0..255 range
    double r2 = 58.5225;
    double theta_threshold = 0.5;  // above: stationary

    void validate() const {
        if (frame_gap < 1 || lambda < 0.0 || lambda > 1.0 || beta_d < 0.0 ||
            patch_width < 1 || patch_height < 1 || boundary_margin < 0 || r1 <= 0.0 ||
            r2 <= 0.0 || theta_threshold <= 0.0 || theta_threshold >= 1.0)
            throw InvalidInput("JudgeConfig: out-of-range parameter");
    }

    double resolve_beta_d(int frame_width, int frame_height) const {
        return beta_d > 0.0 ? beta_d : 0.01 * std::min(frame_width, frame_height);
    }
};

// The four background strips around a box (above, below, left, right), each
// resized to a common patch size. Strips that fall off the frame or reach
// into the boundary margin are zero-filled and flagged invalid.
struct BackgroundPatch {
    static constexpr int kStrips = 4;
    std::array<FloatImage, kStrips> strips;
    std::array<bool, kStrips> valid{false, false, false, false};

    bool any_valid() const { return valid[0] || valid[1] || valid[2] || valid[3]; }
};

inline BackgroundPatch extract_background_patch(const GrayImage& frame, const BoundingBox& box,
                                                const JudgeConfig& cfg) {
    require_valid(box, "extract_background_patch");
    const int x0 = static_cast<int>(std::llround(box.x));
    const int y0 = static_cast<int>(std::llround(box.y));
    const int x1 = static_cast<int>(std::llround(box.x + box.w));
    const int y1 = static_cast<int>(std::llround(box.y + box.h));
    if (x0 < 0 || y0 < 0 || x1 > frame.width || y1 > frame.height || x1 <= x0 || y1 <= y0)
        throw InvalidInput("extract_background_patch: box not inside frame");
    const int bw = x1 - x0;
    const int bh = y1 - y0;

    struct Strip {
        int x0, y0, x1, y1;
        bool margin_ok;
    };
    const int margin = cfg.boundary_margin;
    const std::array<Strip, 4> defs = {{
        // above: same width, extends one box height upward
        {x0, std::max(0, y0 - bh), x1, y0, std::max(0, y0 - bh) >= margin},
        // below
        {x0, y1, x1, std::min(frame.height, y1 + bh),
         frame.height - std::min(frame.height, y1 + bh) >= margin},
        // left: same height, extends one box width leftward
        {std::max(0, x0 - bw), y0, x0, y1, std::max(0, x0 - bw) >= margin},
        // right
        {x1, y0, std::min(frame.width, x1 + bw), y1,
         frame.width - std::min(frame.width, x1 + bw) >= margin},
    }};

    BackgroundPatch patch;
    for (int k = 0; k < BackgroundPatch::kStrips; ++k) {
        const Strip& s = defs[k];
        const int w = s.x1 - s.x0;
        const int h = s.y1 - s.y0;
        if (w > 0 && h > 0 && s.margin_ok) {
            patch.strips[k] = resize_crop(frame, s.x0, s.y0, w, h, cfg.patch_width,
                                          cfg.patch_height);
            patch.valid[k] = true;
        } else {
            patch.strips[k] = FloatImage(cfg.patch_width, cfg.patch_height, 0.0);
        }
    }
    return patch;
}

// Global structural similarity over the strips valid in both patches:
// (2*m1*m2 + r1)(2*cov + r2) / ((m1^2 + m2^2 + r1)(v1 + v2 + r2)).
// Empty intersection of valid strips yields nullopt.
inline std::optional<double> ssim(const BackgroundPatch& p1, const BackgroundPatch& p2,
                                  const JudgeConfig& cfg) {
    double sum1 = 0.0, sum2 = 0.0, sum11 = 0.0, sum22 = 0.0, sum12 = 0.0;
    std::size_t n = 0;
    for (int k = 0; k < BackgroundPatch::kStrips; ++k) {
        if (!p1.valid[k] || !p2.valid[k]) continue;
        const FloatImage& a = p1.strips[k];
        const FloatImage& b = p2.strips[k];
        for (std::size_t i = 0; i < a.data.size(); ++i) {
            const double x = a.data[i];
            const double y = b.data[i];
            sum1 += x;
            sum2 += y;
            sum11 += x * x;
            sum22 += y * y;
            sum12 += x * y;
        }
        n += a.data.size();
    }
    if (n == 0) return std::nullopt;
    const double inv = 1.0 / static_cast<double>(n);
    const double m1 = sum1 * inv;
    const double m2 = sum2 * inv;
    const double v1 = sum11 * inv - m1 * m1;
    const double v2 = sum22 * inv - m2 * m2;
    const double cov = sum12 * inv - m1 * m2;
    return (2.0 * m1 * m2 + cfg.r1) * (2.0 * cov + cfg.r2) /
           ((m1 * m1 + m2 * m2 + cfg.r1) * (v1 + v2 + cfg.r2));
}

// Normalized displacement score: 1 at zero motion, linear down to 0 at beta_d.
inline double motion_score(double distance, double beta_d) {
    if (beta_d <= 0.0) throw InvalidInput("motion_score: beta_d must be positive");
    if (distance >= beta_d) return 0.0;
    return 1.0 - distance / beta_d;
}

struct MotionVerdict {
    double theta = 0.0;
    double a_a = 0.0;  // appearance similarity (clamped to [0,1]); 0 when unavailable
    double a_m = 0.0;  // displacement score
    MotionLabel label = MotionLabel::Unknown;
    bool appearance_available = false;
};

using TrackHistory = std::map<int, BoundingBox>;  // frame -> box

namespace detail {

inline std::optional<BoundingBox> clip_box_to_frame(const BoundingBox& b, const GrayImage& f) {
    BoundingBox c = b;
    const double x1 = std::min(b.right(), static_cast<double>(f.width));
    const double y1 = std::min(b.bottom(), static_cast<double>(f.height));
    c.x = std::max(0.0, b.x);
    c.y = std::max(0.0, b.y);
    c.w = x1 - c.x;
    c.h = y1 - c.y;
    if (c.w < 1.0 || c.h < 1.0) return std::nullopt;
    return c;
}

// Accumulate the warp taking frame `from` coordinates into frame `to`
// coordinates; warps[t] maps frame t-1 into frame t.
inline AffineTransform chain_warps(const std::vector<AffineTransform>& warps, int from, int to) {
    AffineTransform acc = AffineTransform::identity();
    for (int t = from + 1; t <= to; ++t) {
        if (t >= 0 && t < static_cast<int>(warps.size())) acc = compose(warps[t], acc);
    }
    return acc;
}

}  // namespace detail

// Judge one track at frame t against its observation frame_gap frames back.
// `frames` is 1-based through frames[t-1]; warps[t] maps frame t-1 into t.
inline MotionVerdict judge_track(const TrackHistory& history, int t,
                                 const std::vector<GrayImage>& frames,
                                 const std::vector<AffineTransform>& warps,
                                 const JudgeConfig& cfg) {
    cfg.validate();
    MotionVerdict verdict;
    const auto cur_it = history.find(t);
    const auto old_it = history.find(t - cfg.frame_gap);
    if (cur_it == history.end() || old_it == history.end()) return verdict;  // unknown
    if (t < 1 || t > static_cast<int>(frames.size()) || t - cfg.frame_gap < 1)
        return verdict;

    const GrayImage& frame_cur = frames[t - 1];
    const GrayImage& frame_old = frames[t - cfg.frame_gap - 1];
    const BoundingBox& box_cur = cur_it->second;
    const BoundingBox& box_old = old_it->second;

    const AffineTransform warp = detail::chain_warps(warps, t - cfg.frame_gap, t);
    const BoundingBox box_old_stab = stabilize_box(box_old, warp);

    const double beta_d = cfg.resolve_beta_d(frame_cur.width, frame_cur.height);
    const double dist = mahalanobis_distance(box_old_stab, box_cur);
    verdict.a_m = motion_score(dist, beta_d);

    std::optional<double> similarity;
    const auto clipped_old = detail::clip_box_to_frame(box_old, frame_old);
    const auto clipped_cur = detail::clip_box_to_frame(box_cur, frame_cur);
    if (clipped_old && clipped_cur) {
        const BackgroundPatch patch_old = extract_background_patch(frame_old, *clipped_old, cfg);
        const BackgroundPatch patch_cur = extract_background_patch(frame_cur, *clipped_cur, cfg);
        similarity = ssim(patch_old, patch_cur, cfg);
    }

    if (similarity) {
        verdict.appearance_available = true;
        verdict.a_a = std::clamp(*similarity, 0.0, 1.0);
        verdict.theta = cfg.lambda * verdict.a_a + (1.0 - cfg.lambda) * verdict.a_m;
    } else {
        verdict.theta = verdict.a_m;
    }
    verdict.label =
        verdict.theta > cfg.theta_threshold ? MotionLabel::Stationary : MotionLabel::Moving;
    return verdict;
}

}  // namespace mod2t
