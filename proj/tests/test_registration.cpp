#include "mod2t/registration.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "mod2t/synthetic.hpp"

using namespace mod2t;

namespace {

// Quantized sample of the continuous test texture under an arbitrary point
// map, so warped ground truth is exact rather than resampled.
template <typename MapFn>
GrayImage textured_image(int w, int h, std::uint64_t seed, MapFn&& map) {
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Vec2 p = map(Vec2{static_cast<double>(x), static_cast<double>(y)});
            const double n = noise::textured(p.x, p.y, seed, 16.0);
            img.at(x, y) =
                static_cast<std::uint8_t>(std::clamp(125.0 + 40.0 * (2.0 * n - 1.0), 0.0, 255.0));
        }
    }
    return img;
}

GrayImage textured_shifted(int w, int h, std::uint64_t seed, double dx, double dy) {
    return textured_image(w, h, seed, [dx, dy](Vec2 p) { return Vec2{p.x + dx, p.y + dy}; });
}

}  // namespace

TEST(Registration, IdenticalFramesYieldIdentity) {
    const GrayImage img = textured_shifted(160, 120, 3, 0, 0);
    const RegistrationResult res = estimate_camera_motion(img, img);
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.transform.a, 1.0, 1e-6);
    EXPECT_NEAR(res.transform.b, 0.0, 1e-6);
    EXPECT_NEAR(res.transform.c, 0.0, 1e-6);
    EXPECT_NEAR(res.transform.d, 1.0, 1e-6);
    EXPECT_NEAR(res.transform.tx, 0.0, 1e-6);
    EXPECT_NEAR(res.transform.ty, 0.0, 1e-6);
}

TEST(Registration, RecoversPureTranslations) {
    const int w = 160, h = 120;
    const GrayImage prev = textured_shifted(w, h, 5, 0, 0);
    for (const double shift : {1.0, 3.0, 5.0, 8.0}) {
        // camera pans right by `shift`: content sampled at x + shift
        const GrayImage curr = textured_shifted(w, h, 5, shift, 0.0);
        const RegistrationResult res = estimate_camera_motion(prev, curr);
        EXPECT_NEAR(res.transform.tx, -shift, 0.25) << "shift " << shift;
        EXPECT_NEAR(res.transform.ty, 0.0, 0.25) << "shift " << shift;
    }
    const GrayImage diag = textured_shifted(w, h, 5, 4.0, -6.0);
    const RegistrationResult res = estimate_camera_motion(prev, diag);
    EXPECT_NEAR(res.transform.tx, -4.0, 0.25);
    EXPECT_NEAR(res.transform.ty, 6.0, 0.25);
}

TEST(Registration, TranslationModelAlsoRecovers) {
    const int w = 160, h = 120;
    const GrayImage prev = textured_shifted(w, h, 9, 0, 0);
    const GrayImage curr = textured_shifted(w, h, 9, 3.0, 1.0);
    RegistrationConfig cfg;
    cfg.model = MotionModel::Translation;
    const RegistrationResult res = estimate_camera_motion(prev, curr, cfg);
    EXPECT_NEAR(res.transform.tx, -3.0, 0.25);
    EXPECT_NEAR(res.transform.ty, -1.0, 0.25);
    EXPECT_DOUBLE_EQ(res.transform.a, 1.0);
    EXPECT_DOUBLE_EQ(res.transform.d, 1.0);
}

TEST(Registration, RecoversSmallRotation) {
    const int w = 160, h = 120;
    const double cx = w / 2.0, cy = h / 2.0;
    const double theta = 1.0 * M_PI / 180.0;
    const GrayImage prev = textured_shifted(w, h, 7, 0, 0);
    // content rotated by theta about the center: sample at R(p - c) + c
    const GrayImage curr = textured_image(w, h, 7, [&](Vec2 p) {
        const double dx = p.x - cx, dy = p.y - cy;
        return Vec2{cx + std::cos(theta) * dx - std::sin(theta) * dy,
                    cy + std::sin(theta) * dx + std::cos(theta) * dy};
    });
    // ground truth prev->curr: the inverse rotation about the center
    const double ga = std::cos(theta), gb = std::sin(theta);
    const double gtx = cx - (ga * cx + gb * cy);
    const double gty = cy - (-gb * cx + ga * cy);
    const RegistrationResult res = estimate_camera_motion(prev, curr);
    EXPECT_NEAR(res.transform.a, ga, 2e-2);
    EXPECT_NEAR(res.transform.b, gb, 2e-2);
    EXPECT_NEAR(res.transform.c, -gb, 2e-2);
    EXPECT_NEAR(res.transform.d, ga, 2e-2);
    EXPECT_NEAR(res.transform.tx, gtx, 2.0);
    EXPECT_NEAR(res.transform.ty, gty, 2.0);
}

TEST(Registration, DimensionMismatchRejected) {
    const GrayImage a = textured_shifted(64, 64, 1, 0, 0);
    const GrayImage b = textured_shifted(64, 48, 1, 0, 0);
    EXPECT_THROW(estimate_camera_motion(a, b), InvalidInput);
    const GrayImage tiny = textured_shifted(16, 16, 1, 0, 0);
    EXPECT_THROW(estimate_camera_motion(tiny, tiny), InvalidInput);
}

TEST(Registration, NonConvergenceReportsFlagAndBestSoFar) {
    const GrayImage prev = textured_shifted(160, 120, 21, 0, 0);
    const GrayImage curr = textured_shifted(160, 120, 21, 6.0, 2.0);
    RegistrationConfig cfg;
    cfg.max_iterations = 1;
    const RegistrationResult res = estimate_camera_motion(prev, curr, cfg);
    EXPECT_FALSE(res.converged);
    // best-so-far still moves toward the answer
    EXPECT_LT(res.transform.tx, 0.0);
}

TEST(StabilizeBox, IdentityAndTranslation) {
    const BoundingBox b{0, 0, 10, 10};
    const BoundingBox same = stabilize_box(b, AffineTransform::identity());
    EXPECT_DOUBLE_EQ(same.x, 0.0);
    EXPECT_DOUBLE_EQ(same.y, 0.0);
    const BoundingBox moved = stabilize_box(b, AffineTransform::translation(5, 0));
    EXPECT_DOUBLE_EQ(moved.x, 5.0);
    EXPECT_DOUBLE_EQ(moved.y, 0.0);
    EXPECT_DOUBLE_EQ(moved.w, 10.0);
    EXPECT_DOUBLE_EQ(moved.h, 10.0);
    EXPECT_DOUBLE_EQ(moved.area(), b.area());
}

TEST(StabilizeBox, ScaleWarpsCenterOnly) {
    const BoundingBox b{5, 5, 10, 10};  // center (10,10)
    const AffineTransform scale2{2, 0, 0, 0, 2, 0};
    const BoundingBox out = stabilize_box(b, scale2);
    EXPECT_DOUBLE_EQ(out.center().x, 20.0);
    EXPECT_DOUBLE_EQ(out.center().y, 20.0);
    EXPECT_DOUBLE_EQ(out.w, 10.0);
    EXPECT_DOUBLE_EQ(out.h, 10.0);
}
