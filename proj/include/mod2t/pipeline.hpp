#pragma once

#include <functional>
#include <map>
#include <vector>

#include "mod2t/background_model.hpp"
#include "mod2t/blob_tracker.hpp"
#include "mod2t/fusion.hpp"
#include "mod2t/motion_judge.hpp"
#include "mod2t/registration.hpp"
#include "mod2t/run_config.hpp"
#include "mod2t/track_io.hpp"

namespace mod2t {

using ProgressFn = std::function<void(int frame, int total)>;

// warps[t] maps frame t-1 coordinates into frame t; entries 0 and 1 are
// identity so the vector can be indexed by frame number directly.
inline std::vector<AffineTransform> compute_warps(const std::vector<GrayImage>& frames,
                                                  const RegistrationConfig& cfg,
                                                  const ProgressFn& progress = {}) {
    std::vector<AffineTransform> warps(frames.size() + 1);
    for (std::size_t t = 2; t <= frames.size(); ++t) {
        warps[t] = estimate_camera_motion(frames[t - 2], frames[t - 1], cfg).transform;
        if (progress) progress(static_cast<int>(t), static_cast<int>(frames.size()));
    }
    return warps;
}

struct TraditionalBranchResult {
    std::vector<ForegroundMask> masks;                    // per frame
    std::map<int, std::vector<BoundingBox>> blobs;        // frame -> blob boxes
    std::map<int, std::vector<TrackRecord>> records;      // frame -> confirmed tracks
};

inline TraditionalBranchResult run_traditional_branch(const std::vector<GrayImage>& frames,
                                                      const std::vector<AffineTransform>& warps,
                                                      const RunConfig& cfg,
                                                      const ProgressFn& progress = {}) {
    if (frames.empty()) throw InvalidInput("run_traditional_branch: no frames");
    TraditionalBranchResult out;
    DualModeBackgroundModel model(frames[0].width, frames[0].height, cfg.bg);
    BlobTracker tracker(cfg.track);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const int t = static_cast<int>(i) + 1;
        const AffineTransform warp =
            t < static_cast<int>(warps.size()) ? warps[t] : AffineTransform::identity();
        ForegroundMask mask = model.step(frames[i], warp);
        std::vector<BoundingBox> blobs = extract_blobs(mask, cfg.bg);
        std::vector<TrackRecord> records = tracker.track_step(blobs);
        out.masks.push_back(std::move(mask));
        out.blobs[t] = std::move(blobs);
        out.records[t] = std::move(records);
        if (progress) progress(t, static_cast<int>(frames.size()));
    }
    return out;
}

// Judge every record of the deep branch. Returns, per frame, verdicts
// parallel to the frame's records.
inline std::map<int, std::vector<MotionVerdict>> judge_deep_tracks(
    const std::map<int, std::vector<TrackRecord>>& deep_by_frame,
    const std::vector<GrayImage>& frames, const std::vector<AffineTransform>& warps,
    const JudgeConfig& cfg) {
    std::map<int, TrackHistory> history;
    for (const auto& [frame, records] : deep_by_frame)
        for (const TrackRecord& r : records) history[r.track_id][frame] = r.box;

    std::map<int, std::vector<MotionVerdict>> verdicts;
    for (const auto& [frame, records] : deep_by_frame) {
        std::vector<MotionVerdict>& out = verdicts[frame];
        out.reserve(records.size());
        for (const TrackRecord& r : records)
            out.push_back(judge_track(history[r.track_id], frame, frames, warps, cfg));
    }
    return verdicts;
}

struct PipelineResult {
    std::vector<AffineTransform> warps;
    TraditionalBranchResult traditional;
    std::map<int, std::vector<MotionVerdict>> verdicts;  // per deep frame, record-parallel
    std::map<int, std::vector<FusedRecord>> fused;
};

// The full flow: register, background-subtract, track blobs, judge the deep
// tracks, gate the traditional branch, fuse per frame.
inline PipelineResult run_fusion_pipeline(const std::vector<GrayImage>& frames,
                                          const std::map<int, std::vector<TrackRecord>>& deep,
                                          const RunConfig& cfg, const ProgressFn& progress = {}) {
    cfg.validate();
    PipelineResult res;
    res.warps = compute_warps(frames, cfg.reg, progress);
    res.traditional = run_traditional_branch(frames, res.warps, cfg, progress);
    res.verdicts = judge_deep_tracks(deep, frames, res.warps, cfg.judge);

    static const std::vector<TrackRecord> kNone;
    for (int t = 1; t <= static_cast<int>(frames.size()); ++t) {
        const auto dit = deep.find(t);
        const std::vector<TrackRecord>& deep_t = dit == deep.end() ? kNone : dit->second;
        const auto tit = res.traditional.records.find(t);
        const std::vector<TrackRecord>& tra_t =
            tit == res.traditional.records.end() ? kNone : tit->second;
        const ForegroundMask& mask = res.traditional.masks[t - 1];

        std::vector<BoundingBox> tra_boxes;
        tra_boxes.reserve(tra_t.size());
        for (const TrackRecord& r : tra_t) tra_boxes.push_back(r.box);
        const EffectivenessReport report =
            assess_effectiveness(mask, tra_boxes, cfg.fuse.prior_mota_tra, cfg.fuse);

        const auto vit = res.verdicts.find(t);
        static const std::vector<MotionVerdict> kNoVerdicts;
        const std::vector<MotionVerdict>& verdicts_t =
            vit == res.verdicts.end() ? kNoVerdicts : vit->second;

        res.fused[t] = fuse_frame(deep_t, tra_t, mask, report, verdicts_t, cfg.fuse,
                                  cfg.judge.theta_threshold);
    }
    return res;
}

inline std::vector<TrackRecord> fused_to_records(
    const std::map<int, std::vector<FusedRecord>>& fused) {
    std::vector<TrackRecord> out;
    for (const auto& [frame, records] : fused) {
        for (const FusedRecord& f : records) {
            TrackRecord r;
            r.frame = f.frame;
            r.track_id = f.track_id;
            r.box = f.box;
            r.source = TrackSource::Fused;
            r.theta = f.theta;
            r.motion = f.label;
            out.push_back(r);
        }
    }
    return out;
}

inline void write_fused_output(const std::filesystem::path& path,
                               const std::map<int, std::vector<FusedRecord>>& fused) {
    write_track_file(path, fused_to_records(fused), /*annotated=*/true);
}

}  // namespace mod2t
