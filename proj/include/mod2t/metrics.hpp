#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "mod2t/geometry.hpp"
#include "mod2t/hungarian.hpp"

namespace mod2t {

struct GtObject {
    int id = 0;
    BoundingBox box;
    MotionLabel motion = MotionLabel::Unknown;
};

// Ground-truth boxes plus motion flags, frame -> objects.
struct MotionGroundTruth {
    std::map<int, std::vector<GtObject>> frames;

    std::size_t total_boxes() const {
        std::size_t n = 0;
        for (const auto& [f, objs] : frames) n += objs.size();
        return n;
    }
};

// Balance-factor mode: adaptive uses (precision + recall) / 2 of detection,
// a fixed value reproduces the MVF1_0 / MVF1_1 variants.
struct BfMode {
    std::optional<double> fixed;

    static BfMode adaptive() { return {}; }
    static BfMode fixed_value(double v) { return {v}; }
};

struct FrameMatching {
    std::vector<MatchPair> matches;  // a = prediction index, b = ground-truth index
    std::vector<int> unmatched_pred;
    std::vector<int> unmatched_gt;
};

inline FrameMatching match_frame(const std::vector<TrackRecord>& pred,
                                 const std::vector<GtObject>& gt, double iou_thresh) {
    if (iou_thresh <= 0.0 || iou_thresh >= 1.0)
        throw InvalidInput("match_frame: iou_thresh must lie in (0,1)");
    std::vector<BoundingBox> pb, gb;
    pb.reserve(pred.size());
    for (const TrackRecord& r : pred) pb.push_back(r.box);
    gb.reserve(gt.size());
    for (const GtObject& g : gt) gb.push_back(g.box);
    const MatchResult m = match_boxes_iou(pb, gb, iou_thresh);
    return {m.pairs, m.unmatched_a, m.unmatched_b};
}

struct SequenceCounts {
    long tp = 0, fp = 0, fn = 0, idsw = 0;
    long gt_total = 0;
    long mvtp = 0, mvfp = 0, mvfn = 0;
};

// Walk the sequence frame by frame: detection counts, CLEAR-MOT identity
// switches, and motion-label counts restricted to pairs where both sides
// carry a known label.
inline SequenceCounts evaluate_sequence(const std::map<int, std::vector<TrackRecord>>& pred,
                                        const MotionGroundTruth& gt, double iou_thresh) {
    SequenceCounts c;
    std::map<int, int> last_pred_id;  // gt id -> most recent matched prediction id
    static const std::vector<TrackRecord> kNoPred;

    for (const auto& [frame, gt_objs] : gt.frames) {
        const auto pit = pred.find(frame);
        const std::vector<TrackRecord>& preds = pit == pred.end() ? kNoPred : pit->second;
        const FrameMatching m = match_frame(preds, gt_objs, iou_thresh);

        c.gt_total += static_cast<long>(gt_objs.size());
        c.tp += static_cast<long>(m.matches.size());
        c.fp += static_cast<long>(m.unmatched_pred.size());
        c.fn += static_cast<long>(m.unmatched_gt.size());

        for (const MatchPair& p : m.matches) {
            const TrackRecord& pr = preds[p.a];
            const GtObject& go = gt_objs[p.b];
            const auto last = last_pred_id.find(go.id);
            if (last != last_pred_id.end() && last->second != pr.track_id) ++c.idsw;
            last_pred_id[go.id] = pr.track_id;

            if (go.motion == MotionLabel::Unknown) continue;
            if (!pr.motion || *pr.motion == MotionLabel::Unknown) continue;
            if (*pr.motion == go.motion)
                ++c.mvtp;
            else
                ++c.mvfp;
        }
        for (int gi : m.unmatched_gt) {
            if (gt_objs[gi].motion != MotionLabel::Unknown) ++c.mvfn;
        }
    }

    // predictions on frames with no ground truth at all are false positives
    for (const auto& [frame, preds] : pred) {
        if (!gt.frames.count(frame)) c.fp += static_cast<long>(preds.size());
    }
    return c;
}

struct MetricReport {
    long mvtp = 0, mvfp = 0, mvfn = 0;
    double mvp = 0.0, mvr = 0.0, mvf1 = 0.0;
    double bf = 0.0;
    double precision = 0.0, recall = 0.0;
    double mota = 0.0;
    long tp = 0, fp = 0, fn = 0, idsw = 0;
    bool degenerate = false;  // some ratio had an empty denominator
};

inline std::pair<double, double> detection_pr(const SequenceCounts& c, bool* flagged = nullptr) {
    const double precision =
        (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    const double recall =
        (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    if (flagged && ((c.tp + c.fp) == 0 || (c.tp + c.fn) == 0)) *flagged = true;
    return {precision, recall};
}

inline double mota(const SequenceCounts& c) {
    if (c.gt_total <= 0) throw InvalidInput("mota: no ground truth boxes");
    return 1.0 - static_cast<double>(c.fn + c.fp + c.idsw) / static_cast<double>(c.gt_total);
}

// Motion-state validation scores over accumulated counts.
inline MetricReport mvf1(const SequenceCounts& c, const BfMode& mode) {
    MetricReport r;
    r.mvtp = c.mvtp;
    r.mvfp = c.mvfp;
    r.mvfn = c.mvfn;
    r.tp = c.tp;
    r.fp = c.fp;
    r.fn = c.fn;
    r.idsw = c.idsw;

    auto [precision, recall] = detection_pr(c, &r.degenerate);
    r.precision = precision;
    r.recall = recall;
    r.bf = mode.fixed ? *mode.fixed : 0.5 * (precision + recall);
    r.mota = c.gt_total > 0 ? mota(c) : 0.0;
    if (c.gt_total <= 0) r.degenerate = true;

    if (c.mvtp + c.mvfp == 0) {
        r.degenerate = true;
        return r;  // mvp, mvr, mvf1 stay 0
    }
    r.mvp = static_cast<double>(c.mvtp) / static_cast<double>(c.mvtp + c.mvfp);
    const double mvr_denom = static_cast<double>(c.mvtp) + r.bf * static_cast<double>(c.mvfn);
    if (mvr_denom <= 0.0 || c.mvtp == 0) {
        r.degenerate = r.degenerate || c.mvtp == 0;
        r.mvr = c.mvtp > 0 ? 1.0 : 0.0;
    } else {
        r.mvr = static_cast<double>(c.mvtp) / mvr_denom;
    }
    if (r.mvp + r.mvr > 0.0) r.mvf1 = 2.0 * r.mvp * r.mvr / (r.mvp + r.mvr);
    return r;
}

}  // namespace mod2t
