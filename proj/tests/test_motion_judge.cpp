#include "mod2t/motion_judge.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mod2t/synthetic.hpp"
#include "oracles.hpp"

using namespace mod2t;

namespace {

BackgroundPatch constant_patch(const JudgeConfig& cfg, double value,
                               std::array<bool, 4> valid = {true, true, true, true}) {
    BackgroundPatch p;
    for (int k = 0; k < 4; ++k) {
        p.strips[k] = FloatImage(cfg.patch_width, cfg.patch_height, valid[k] ? value : 0.0);
        p.valid[k] = valid[k];
    }
    return p;
}

std::vector<AffineTransform> identity_warps(std::size_t frame_count) {
    return std::vector<AffineTransform>(frame_count + 1);
}

}  // namespace

TEST(BackgroundPatchExtraction, CentralBoxHasFourValidStrips) {
    const GrayImage frame(200, 200, 100);
    const BackgroundPatch p = extract_background_patch(frame, {90, 90, 20, 20}, JudgeConfig{});
    EXPECT_TRUE(p.valid[0]);
    EXPECT_TRUE(p.valid[1]);
    EXPECT_TRUE(p.valid[2]);
    EXPECT_TRUE(p.valid[3]);
    EXPECT_EQ(p.strips[0].width, 256);
    EXPECT_EQ(p.strips[0].height, 192);
}

TEST(BackgroundPatchExtraction, StripNearBorderIsDiscarded) {
    const GrayImage frame(200, 200, 100);
    // top edge 10 px from the frame top, margin 15: "above" is dropped
    const BackgroundPatch p = extract_background_patch(frame, {90, 10, 20, 20}, JudgeConfig{});
    EXPECT_FALSE(p.valid[0]);
    EXPECT_TRUE(p.valid[1]);
    EXPECT_TRUE(p.valid[2]);
    EXPECT_TRUE(p.valid[3]);
}

TEST(BackgroundPatchExtraction, FrameFillingBoxYieldsEmptyPatch) {
    const GrayImage frame(64, 64, 100);
    const BackgroundPatch p = extract_background_patch(frame, {0, 0, 64, 64}, JudgeConfig{});
    EXPECT_FALSE(p.any_valid());
}

TEST(BackgroundPatchExtraction, BoxOutsideFrameRejected) {
    const GrayImage frame(64, 64, 100);
    EXPECT_THROW(extract_background_patch(frame, {-5, 0, 20, 20}, JudgeConfig{}), InvalidInput);
    EXPECT_THROW(extract_background_patch(frame, {50, 50, 20, 20}, JudgeConfig{}), InvalidInput);
}

TEST(Ssim, SelfSimilarityIsOne) {
    JudgeConfig cfg;
    std::mt19937_64 rng(5);
    BackgroundPatch p = constant_patch(cfg, 0.0);
    for (auto& strip : p.strips)
        for (auto& v : strip.data) v = static_cast<double>(rng() % 256);
    const auto s = ssim(p, p, cfg);
    ASSERT_TRUE(s.has_value());
    EXPECT_NEAR(*s, 1.0, 1e-12);
}

TEST(Ssim, ConstantPatchesFollowTheClosedForm) {
    JudgeConfig cfg;
    cfg.r1 = 1e-4;
    cfg.r2 = 1e-4;
    const auto s = ssim(constant_patch(cfg, 0.0), constant_patch(cfg, 100.0), cfg);
    ASSERT_TRUE(s.has_value());
    // (r1 * r2) / ((10000 + r1) * r2) ~= 1e-8
    EXPECT_NEAR(*s, 1e-8, 1e-12);
}

TEST(Ssim, PerturbedStripScoresBelowIdentical) {
    JudgeConfig cfg;
    std::mt19937_64 rng(9);
    BackgroundPatch p = constant_patch(cfg, 0.0);
    for (auto& strip : p.strips)
        for (auto& v : strip.data) v = static_cast<double>(rng() % 256);
    BackgroundPatch q = p;
    for (auto& v : q.strips[2].data) v = 255.0 - v;  // invert one strip
    const auto s = ssim(p, q, cfg);
    ASSERT_TRUE(s.has_value());
    EXPECT_LT(*s, 1.0);
}

TEST(Ssim, NoCommonValidStripIsUnavailable) {
    JudgeConfig cfg;
    const BackgroundPatch a = constant_patch(cfg, 10.0, {true, true, false, false});
    const BackgroundPatch b = constant_patch(cfg, 10.0, {false, false, true, true});
    EXPECT_FALSE(ssim(a, b, cfg).has_value());
}

TEST(Ssim, MatchesTwoPassOracleOnRandomPatches) {
    JudgeConfig cfg;
    cfg.patch_width = 16;  // keep the oracle loops cheap
    cfg.patch_height = 12;
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        BackgroundPatch a = constant_patch(cfg, 0.0);
        BackgroundPatch b = constant_patch(cfg, 0.0);
        std::vector<double> flat_a, flat_b;
        for (int k = 0; k < 4; ++k) {
            for (std::size_t i = 0; i < a.strips[k].data.size(); ++i) {
                a.strips[k].data[i] = static_cast<double>(rng() % 256);
                b.strips[k].data[i] = static_cast<double>(rng() % 256);
                flat_a.push_back(a.strips[k].data[i]);
                flat_b.push_back(b.strips[k].data[i]);
            }
        }
        const auto s = ssim(a, b, cfg);
        ASSERT_TRUE(s.has_value());
        EXPECT_NEAR(*s, oracle::ssim(flat_a, flat_b, cfg.r1, cfg.r2), 1e-9);
    }
}

TEST(MotionScore, LinearRamp) {
    EXPECT_DOUBLE_EQ(motion_score(0.0, 5.0), 1.0);
    EXPECT_DOUBLE_EQ(motion_score(5.0, 5.0), 0.0);
    EXPECT_DOUBLE_EQ(motion_score(2.5, 5.0), 0.5);
    EXPECT_DOUBLE_EQ(motion_score(7.0, 5.0), 0.0);
    EXPECT_THROW(motion_score(1.0, 0.0), InvalidInput);
}

TEST(JudgeTrack, FullyStaticSceneIsStationary) {
    SceneScript scene;
    scene.width = 128;
    scene.height = 96;
    scene.frame_count = 6;
    scene.actors.push_back({1, 0, 56, 40, 16, 16, 0, 0, 230, {}});
    const SyntheticScene rendered = render(scene);

    JudgeConfig cfg;
    cfg.lambda = 0.5;
    TrackHistory history;
    for (const TrackRecord& r : rendered.ground_truth) history[r.frame] = r.box;

    const MotionVerdict v =
        judge_track(history, 5, rendered.frames, identity_warps(rendered.frames.size()), cfg);
    EXPECT_TRUE(v.appearance_available);
    EXPECT_NEAR(v.a_m, 1.0, 1e-9);
    EXPECT_NEAR(v.a_a, 1.0, 1e-9);
    EXPECT_NEAR(v.theta, 1.0, 1e-9);
    EXPECT_EQ(v.label, MotionLabel::Stationary);
}

TEST(JudgeTrack, FastSmallBoxIsMoving) {
    SceneScript scene;
    scene.width = 100;
    scene.height = 100;
    scene.frame_count = 6;
    // 4x4 box moving 2*beta_d = 10 px over the 3-frame gap
    scene.actors.push_back({1, 0, 30, 48, 4, 4, 10.0 / 3.0, 0, 230, {}});
    const SyntheticScene rendered = render(scene);

    JudgeConfig cfg;
    cfg.lambda = 0.0;
    cfg.beta_d = 5.0;
    TrackHistory history;
    for (const TrackRecord& r : rendered.ground_truth) history[r.frame] = r.box;

    const MotionVerdict v =
        judge_track(history, 4, rendered.frames, identity_warps(rendered.frames.size()), cfg);
    // displacement 10 px on a (4,4) box has normalized distance 5 = beta_d
    EXPECT_NEAR(v.a_m, 0.0, 1e-9);
    EXPECT_NEAR(v.theta, 0.0, 1e-9);
    EXPECT_EQ(v.label, MotionLabel::Moving);
}

TEST(JudgeTrack, LambdaEndpointsSelectOneTerm) {
    SceneScript scene;
    scene.width = 128;
    scene.height = 96;
    scene.frame_count = 6;
    scene.actors.push_back({1, 0, 56, 40, 16, 16, 0.5, 0.2, 230, {}});
    const SyntheticScene rendered = render(scene);
    TrackHistory history;
    for (const TrackRecord& r : rendered.ground_truth) history[r.frame] = r.box;
    const auto warps = identity_warps(rendered.frames.size());

    JudgeConfig zero;
    zero.lambda = 0.0;
    const MotionVerdict v0 = judge_track(history, 5, rendered.frames, warps, zero);
    EXPECT_DOUBLE_EQ(v0.theta, v0.a_m);

    JudgeConfig one;
    one.lambda = 1.0;
    const MotionVerdict v1 = judge_track(history, 5, rendered.frames, warps, one);
    EXPECT_DOUBLE_EQ(v1.theta, v1.a_a);
}

TEST(JudgeTrack, YoungTrackIsUnknown) {
    SceneScript scene;
    scene.width = 64;
    scene.height = 64;
    scene.frame_count = 4;
    scene.actors.push_back({1, 0, 24, 24, 10, 10, 0, 0, 230, {}});
    const SyntheticScene rendered = render(scene);
    TrackHistory history;
    history[3] = rendered.ground_truth[2].box;
    history[4] = rendered.ground_truth[3].box;  // no observation 3 frames back

    const MotionVerdict v = judge_track(history, 4, rendered.frames,
                                        identity_warps(rendered.frames.size()), JudgeConfig{});
    EXPECT_EQ(v.label, MotionLabel::Unknown);
}

TEST(JudgeTrack, ExactCameraCorrectionCancelsDrift) {
    SceneScript still;
    still.width = 128;
    still.height = 96;
    still.frame_count = 6;
    still.actors.push_back({1, 0, 56, 40, 16, 16, 0, 0, 230, {}});

    SceneScript drifting = still;
    drifting.camera_vx = 0.8;
    drifting.camera_vy = 0.5;

    JudgeConfig cfg;
    cfg.lambda = 0.3;

    auto verdict_of = [&](const SceneScript& script) {
        const SyntheticScene rendered = render(script);
        TrackHistory history;
        for (const TrackRecord& r : rendered.ground_truth) history[r.frame] = r.box;
        std::vector<AffineTransform> warps(rendered.frames.size() + 1);
        for (std::size_t t = 2; t < warps.size(); ++t)
            warps[t] = AffineTransform::translation(-script.camera_vx, -script.camera_vy);
        return judge_track(history, 5, rendered.frames, warps, cfg);
    };

    const MotionVerdict fixed_cam = verdict_of(still);
    const MotionVerdict moving_cam = verdict_of(drifting);
    EXPECT_EQ(fixed_cam.label, MotionLabel::Stationary);
    EXPECT_EQ(moving_cam.label, MotionLabel::Stationary);
    EXPECT_NEAR(moving_cam.a_m, 1.0, 1e-9);  // stabilization cancels the drift exactly
    EXPECT_NEAR(moving_cam.theta, fixed_cam.theta, 0.05);
}

TEST(JudgeTrack, ThetaMonotoneInComponents) {
    // theta = lambda*a_a + (1-lambda)*a_m is monotone in both terms
    std::mt19937_64 rng(123);
    for (int i = 0; i < 1000; ++i) {
        const double lambda = static_cast<double>(rng() % 1000) / 999.0;
        const double aa1 = static_cast<double>(rng() % 1000) / 999.0;
        const double aa2 = std::min(1.0, aa1 + 0.1);
        const double am = static_cast<double>(rng() % 1000) / 999.0;
        const double t1 = lambda * aa1 + (1.0 - lambda) * am;
        const double t2 = lambda * aa2 + (1.0 - lambda) * am;
        EXPECT_LE(t1, t2 + 1e-12);
        EXPECT_GE(t1, 0.0);
        EXPECT_LE(t1, 1.0);
    }
}
