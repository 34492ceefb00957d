#pragma once

#include <algorithm>
#include <vector>

#include "mod2t/geometry.hpp"
#include "mod2t/hungarian.hpp"

namespace mod2t {

struct TrackerConfig {
    double iou_gate = 0.3;
    int max_age = 30;  // frames a track may coast before retirement
    int min_hits = 3;  // observations required before a track is reported

    void validate() const {
        if (iou_gate <= 0.0 || iou_gate >= 1.0 || max_age < 1 || min_hits < 1)
            throw InvalidInput("TrackerConfig: out-of-range parameter");
    }
};

enum class TrackStatus { Tentative, Confirmed, Lost };

struct TrackState {
    int track_id = 0;
    BoundingBox box;
    Vec2 velocity;  // pixels per frame
    int hits = 1;
    int age_since_update = 0;
    TrackStatus status = TrackStatus::Tentative;
    Vec2 last_observed_center;
};

// Constant-velocity blob tracker: predict, gated IoU assignment, update.
// Single writer per instance; one instance per video stream.
class BlobTracker {
public:
    explicit BlobTracker(TrackerConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

    const std::vector<TrackState>& tracks() const { return tracks_; }
    int frame() const { return frame_; }

    std::vector<TrackRecord> track_step(const std::vector<BoundingBox>& blobs) {
        ++frame_;
        for (const BoundingBox& b : blobs) require_valid(b, "track_step");

        // constant-velocity prediction
        std::vector<BoundingBox> predicted;
        predicted.reserve(tracks_.size());
        for (TrackState& t : tracks_) {
            t.box.x += t.velocity.x;
            t.box.y += t.velocity.y;
            ++t.age_since_update;
            predicted.push_back(t.box);
        }

        const MatchResult match = match_boxes_iou(predicted, blobs, cfg_.iou_gate);

        for (const MatchPair& p : match.pairs) {
            TrackState& t = tracks_[p.a];
            const BoundingBox& obs = blobs[p.b];
            const double dt = t.age_since_update;  // frames since last observation
            t.velocity = {(obs.center().x - t.last_observed_center.x) / dt,
                          (obs.center().y - t.last_observed_center.y) / dt};
            t.box = obs;
            t.last_observed_center = obs.center();
            ++t.hits;
            t.age_since_update = 0;
            if (t.hits >= cfg_.min_hits) t.status = TrackStatus::Confirmed;
        }

        for (int idx : match.unmatched_b) {
            TrackState t;
            t.track_id = next_id_++;
            t.box = blobs[idx];
            t.last_observed_center = t.box.center();
            tracks_.push_back(t);
        }

        std::erase_if(tracks_, [this](const TrackState& t) {
            return t.age_since_update > cfg_.max_age;
        });
        std::sort(tracks_.begin(), tracks_.end(),
                  [](const TrackState& a, const TrackState& b) { return a.track_id < b.track_id; });

        std::vector<TrackRecord> out;
        for (const TrackState& t : tracks_) {
            if (t.status == TrackStatus::Confirmed && t.age_since_update == 0)
                out.push_back({frame_, t.track_id, t.box, TrackSource::Traditional, {}, {}, {}});
        }
        return out;
    }

private:
    TrackerConfig cfg_;
    std::vector<TrackState> tracks_;
    int frame_ = 0;
    int next_id_ = 1;
};

}  // namespace mod2t
