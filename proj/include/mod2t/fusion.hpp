#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "mod2t/geometry.hpp"
#include "mod2t/hungarian.hpp"
#include "mod2t/morphology.hpp"
#include "mod2t/motion_judge.hpp"

namespace mod2t {

struct FusionConfig {
    double iou_gate = 0.3;         // cross-branch association gate
    double mota_threshold = 0.25;  // prior-MOTA admission gate
    double fg_threshold = 0.5;     // foreground ratio above which the scene is hopeless
    int component_link_radius = 3; // neighborhood radius for motion-pixel components
    double motion_ratio_cap = 0.2; // R: motion-pixel ratio where theta_tra saturates
    double alpha = 0.5;            // human confidence in the deep boxes
    std::optional<double> prior_mota_tra;  // traditional branch MOTA on similar data
    double prior_mota_deep = 0.9;
    double prior_mvf1_deep = 0.8;

    void validate() const {
        if (iou_gate <= 0.0 || iou_gate >= 1.0 || mota_threshold <= 0.0 ||
            fg_threshold <= 0.0 || component_link_radius < 1 || motion_ratio_cap <= 0.0 ||
            motion_ratio_cap > 1.0 || alpha < 0.0 || alpha > 1.0 || prior_mota_deep < 0.0 ||
            prior_mvf1_deep <= 0.0)
            throw InvalidInput("FusionConfig: out-of-range parameter");
        if (prior_mota_tra && *prior_mota_tra < 0.0)
            throw InvalidInput("FusionConfig: prior_mota_tra must be >= 0");
    }
};

struct BoxEffectiveness {
    int component_count = 0;  // components above S_min inside the box
    bool effective = true;    // fewer than two such components
};

struct EffectivenessReport {
    bool mota_gate_passed = false;  // prior MOTA known and above the threshold
    double fg_ratio = 0.0;
    std::vector<BoxEffectiveness> per_box;  // parallel to the assessed boxes
    bool global_effective = false;
};

namespace detail {

// Count motion pixels of `mask` inside the integer footprint of `box`.
inline std::size_t motion_pixels_in_box(const ForegroundMask& mask, const BoundingBox& box) {
    const int x0 = std::max(0, static_cast<int>(std::floor(box.x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(box.y)));
    const int x1 = std::min(mask.width, static_cast<int>(std::ceil(box.right())));
    const int y1 = std::min(mask.height, static_cast<int>(std::ceil(box.bottom())));
    std::size_t n = 0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) n += mask.at(x, y) ? 1 : 0;
    return n;
}

inline ForegroundMask crop_mask(const ForegroundMask& mask, const BoundingBox& box) {
    const int x0 = std::max(0, static_cast<int>(std::floor(box.x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(box.y)));
    const int x1 = std::min(mask.width, static_cast<int>(std::ceil(box.right())));
    const int y1 = std::min(mask.height, static_cast<int>(std::ceil(box.bottom())));
    if (x1 <= x0 || y1 <= y0) return ForegroundMask(1, 1);
    ForegroundMask out(x1 - x0, y1 - y0);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) out.at(x - x0, y - y0) = mask.at(x, y);
    return out;
}

}  // namespace detail

// Decide whether the traditional branch can be trusted this frame. The
// global gate uses the prior MOTA when one is known, the foreground ratio
// otherwise. Per box, motion pixels are grouped into components (pixels
// within component_link_radius join) and a box with two or more components
// heavier than one fifth of its area is flagged ineffective.
inline EffectivenessReport assess_effectiveness(const ForegroundMask& mask,
                                                const std::vector<BoundingBox>& tra_boxes,
                                                std::optional<double> prior_mota,
                                                const FusionConfig& cfg) {
    cfg.validate();
    EffectivenessReport report;
    const std::size_t total = static_cast<std::size_t>(mask.width) * mask.height;
    report.fg_ratio = total ? static_cast<double>(mask.foreground_count()) / total : 0.0;
    report.mota_gate_passed = prior_mota.has_value() && *prior_mota > cfg.mota_threshold;
    report.global_effective =
        prior_mota.has_value() ? report.mota_gate_passed : report.fg_ratio <= cfg.fg_threshold;

    report.per_box.reserve(tra_boxes.size());
    for (const BoundingBox& box : tra_boxes) {
        const ForegroundMask sub = detail::crop_mask(mask, box);
        const ComponentLabels labels = label_components(sub, cfg.component_link_radius);
        const double s_min = box.area() / 5.0;
        BoxEffectiveness be;
        for (std::size_t s : labels.pixel_count)
            if (static_cast<double>(s) > s_min) ++be.component_count;
        be.effective = be.component_count < 2;
        report.per_box.push_back(be);
    }
    return report;
}

struct FusionWeights {
    double w_b_deep = 1.0;
    double w_b_tra = 0.0;
    double w_f_deep = 0.5;
    double w_f_tra = 0.5;
};

// Box weights from the two branches' prior MOTA, scaled by the human
// confidence alpha, then renormalized so a weighted box average keeps unit
// total weight.
inline std::pair<double, double> compute_box_weights(double mota_tra, double mota_deep,
                                                     double alpha) {
    if (mota_tra < 0.0 || mota_deep < 0.0 || alpha < 0.0 || alpha > 1.0)
        throw InvalidInput("compute_box_weights: arguments out of range");
    const double denom = mota_tra + mota_deep;
    if (denom <= 0.0) throw InvalidInput("compute_box_weights: both MOTA values are zero");
    const double raw_deep = alpha * mota_deep / denom;
    const double raw_tra = (1.0 - alpha) * mota_tra / denom;
    const double sum = raw_deep + raw_tra;
    if (sum <= 0.0) throw InvalidInput("compute_box_weights: degenerate weights");
    return {raw_deep / sum, raw_tra / sum};
}

inline BoundingBox fuse_boxes(const BoundingBox& b_deep, const std::optional<BoundingBox>& b_tra,
                              const FusionWeights& w) {
    if (!b_tra) return b_deep;
    BoundingBox out = b_deep;  // keeps the deep confidence/class
    out.x = w.w_b_deep * b_deep.x + w.w_b_tra * b_tra->x;
    out.y = w.w_b_deep * b_deep.y + w.w_b_tra * b_tra->y;
    out.w = w.w_b_deep * b_deep.w + w.w_b_tra * b_tra->w;
    out.h = w.w_b_deep * b_deep.h + w.w_b_tra * b_tra->h;
    return out;
}

// Traditional-branch stillness evidence for one deep track. With a working
// branch the evidence is binary: a matched traditional detection means the
// object moves (0), no match means it does not (1). With a malfunctioning
// branch the motion-pixel ratio inside the box is rescaled by R and capped.
inline double theta_traditional(const BoundingBox& box, const ForegroundMask& mask,
                                bool effective, bool matched, double r) {
    if (r <= 0.0 || r > 1.0) throw InvalidInput("theta_traditional: R must be in (0,1]");
    if (effective) return matched ? 0.0 : 1.0;
    const double area = box.area();
    if (area <= 0.0) return 1.0;
    const double ratio = static_cast<double>(detail::motion_pixels_in_box(mask, box)) / area;
    if (ratio < r) return ratio / r;
    return 1.0;
}

// Stillness-score fusion weighted by each branch's prior MVF1.
inline double fuse_theta(double theta_deep, double theta_tra, double mvf1_tra,
                         double mvf1_deep) {
    if (mvf1_tra <= 0.0 || mvf1_deep <= 0.0)
        throw InvalidInput("fuse_theta: MVF1 priors must be positive");
    const double w_deep = mvf1_deep / (mvf1_tra + mvf1_deep);
    const double w_tra = mvf1_tra / (mvf1_tra + mvf1_deep);
    return w_deep * theta_deep + w_tra * theta_tra;
}

struct FusedRecord {
    int frame = 0;
    int track_id = 0;
    BoundingBox box;
    double theta = 0.0;
    MotionLabel label = MotionLabel::Unknown;
};

// Fuse one frame. `report.per_box` must have been computed over the boxes of
// `tra` in order. Every deep record yields exactly one fused record; the
// traditional branch never adds or removes identities.
inline std::vector<FusedRecord> fuse_frame(const std::vector<TrackRecord>& deep,
                                           const std::vector<TrackRecord>& tra,
                                           const ForegroundMask& mask,
                                           const EffectivenessReport& report,
                                           const std::vector<MotionVerdict>& deep_verdicts,
                                           const FusionConfig& cfg, double theta_threshold) {
    cfg.validate();
    if (deep.size() != deep_verdicts.size())
        throw InvalidInput("fuse_frame: one verdict per deep record required");
    if (report.per_box.size() != tra.size())
        throw InvalidInput("fuse_frame: effectiveness report does not cover the traditional set");

    // deterministic association: deep rows in ascending track id
    std::vector<int> order(deep.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return deep[a].track_id < deep[b].track_id; });

    std::vector<BoundingBox> deep_boxes, tra_boxes;
    deep_boxes.reserve(deep.size());
    for (int i : order) deep_boxes.push_back(deep[i].box);
    tra_boxes.reserve(tra.size());
    for (const TrackRecord& r : tra) tra_boxes.push_back(r.box);

    const MatchResult match = match_boxes_iou(deep_boxes, tra_boxes, cfg.iou_gate);
    std::vector<int> tra_of_deep(deep.size(), -1);
    for (const MatchPair& p : match.pairs) tra_of_deep[order[p.a]] = p.b;

    const double mvf1_tra =
        (cfg.prior_mota_tra && *cfg.prior_mota_tra >= cfg.mota_threshold) ? 1.0 : 0.2;

    FusionWeights weights;
    if (report.global_effective && cfg.prior_mota_tra) {
        const double mt = std::max(0.0, *cfg.prior_mota_tra);
        const double md = std::max(0.0, cfg.prior_mota_deep);
        if (mt + md > 0.0) {
            try {
                const auto [wd, wt] = compute_box_weights(mt, md, cfg.alpha);
                weights.w_b_deep = wd;
                weights.w_b_tra = wt;
            } catch (const InvalidInput&) {
                // degenerate weights: keep the deep-only default
            }
        }
    }

    std::vector<FusedRecord> out;
    out.reserve(deep.size());
    for (std::size_t i = 0; i < deep.size(); ++i) {
        const TrackRecord& d = deep[i];
        const int j = tra_of_deep[i];
        const bool matched = j >= 0;
        const bool record_effective =
            report.global_effective && (!matched || report.per_box[j].effective);

        FusedRecord f;
        f.frame = d.frame;
        f.track_id = d.track_id;

        double theta_tra;
        if (record_effective) {
            f.box = matched ? fuse_boxes(d.box, tra[j].box, weights) : d.box;
            theta_tra = theta_traditional(d.box, mask, true, matched, cfg.motion_ratio_cap);
        } else {
            f.box = d.box;  // malfunctioning branch: adopt the deep box unchanged
            theta_tra = theta_traditional(d.box, mask, false, matched, cfg.motion_ratio_cap);
        }

        const MotionVerdict& v = deep_verdicts[i];
        if (v.label == MotionLabel::Unknown) {
            // no deep judgment yet: carry the traditional evidence, stay unknown
            f.theta = theta_tra;
            f.label = MotionLabel::Unknown;
        } else {
            f.theta = fuse_theta(v.theta, theta_tra, mvf1_tra, cfg.prior_mvf1_deep);
            f.label = f.theta > theta_threshold ? MotionLabel::Stationary : MotionLabel::Moving;
        }
        out.push_back(f);
    }
    return out;
}

}  // namespace mod2t
