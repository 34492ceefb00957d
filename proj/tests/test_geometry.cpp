#include "mod2t/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace mod2t;

TEST(Mahalanobis, IdenticalBoxesAreAtDistanceZero) {
    const BoundingBox b{0, 0, 10, 10};
    EXPECT_DOUBLE_EQ(mahalanobis_distance(b, b), 0.0);
}

TEST(Mahalanobis, HandComputedExamples) {
    const BoundingBox b1{0, 0, 10, 10};
    EXPECT_NEAR(mahalanobis_distance(b1, {5, 0, 10, 10}), 1.0, 1e-12);
    EXPECT_NEAR(mahalanobis_distance(b1, {5, 5, 10, 10}), std::sqrt(2.0), 1e-12);
}

TEST(Mahalanobis, DegenerateBoxRejected) {
    EXPECT_THROW(mahalanobis_distance({0, 0, 0, 10}, {0, 0, 10, 10}), InvalidInput);
    EXPECT_THROW(mahalanobis_distance({0, 0, 10, 10}, {0, 0, 10, -1}), InvalidInput);
}

TEST(Mahalanobis, TranslationInvarianceProperty) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        BoundingBox a = oracle::random_box(rng);
        BoundingBox b = oracle::random_box(rng);
        const double d = mahalanobis_distance(a, b);
        const double shift_x = oracle::random_box(rng).x;
        const double shift_y = oracle::random_box(rng).y;
        BoundingBox a2 = a, b2 = b;
        a2.x += shift_x;
        a2.y += shift_y;
        b2.x += shift_x;
        b2.y += shift_y;
        EXPECT_NEAR(mahalanobis_distance(a2, b2), d, 1e-9 * (1.0 + d));
        EXPECT_DOUBLE_EQ(mahalanobis_distance(a, a), 0.0);
        EXPECT_NEAR(d, oracle::mahalanobis(a, b), 1e-9);
    }
}

TEST(Iou, TrivialCases) {
    const BoundingBox a{0, 0, 10, 10};
    EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
    EXPECT_DOUBLE_EQ(iou(a, {20, 20, 5, 5}), 0.0);
    EXPECT_NEAR(iou(a, {5, 0, 10, 10}), 1.0 / 3.0, 1e-12);
}

TEST(Iou, SymmetricBoundedAndOneOnlyForIdentical) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        const BoundingBox a = oracle::random_box(rng, 30.0);
        const BoundingBox b = oracle::random_box(rng, 30.0);
        const double ab = iou(a, b);
        EXPECT_DOUBLE_EQ(ab, iou(b, a));
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 1.0);
        const bool identical = a.x == b.x && a.y == b.y && a.w == b.w && a.h == b.h;
        if (!identical) {
            EXPECT_LT(ab, 1.0);
        }
    }
}

TEST(Affine, ApplyExamples) {
    EXPECT_DOUBLE_EQ(AffineTransform::identity().apply({3, 4}).x, 3.0);
    EXPECT_DOUBLE_EQ(AffineTransform::identity().apply({3, 4}).y, 4.0);
    const Vec2 p = AffineTransform::translation(2, 1).apply({0, 0});
    EXPECT_DOUBLE_EQ(p.x, 2.0);
    EXPECT_DOUBLE_EQ(p.y, 1.0);
    const AffineTransform scale2{2, 0, 0, 0, 2, 0};
    const Vec2 q = scale2.apply({3, 4});
    EXPECT_DOUBLE_EQ(q.x, 6.0);
    EXPECT_DOUBLE_EQ(q.y, 8.0);
}

TEST(Affine, InverseRoundTripProperty) {
    std::mt19937_64 rng(13);
    auto uni = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    for (int i = 0; i < 500; ++i) {
        AffineTransform t{uni(0.5, 2.0), uni(-0.3, 0.3), uni(-50, 50),
                          uni(-0.3, 0.3), uni(0.5, 2.0), uni(-50, 50)};
        const Vec2 p{uni(-100, 100), uni(-100, 100)};
        const Vec2 back = t.inverse().apply(t.apply(p));
        EXPECT_NEAR(back.x, p.x, 1e-9);
        EXPECT_NEAR(back.y, p.y, 1e-9);
    }
}

TEST(Affine, SingularInverseRejected) {
    const AffineTransform t{1, 2, 0, 2, 4, 0};  // rank-1 linear part
    EXPECT_FALSE(t.invertible());
    EXPECT_THROW(t.inverse(), InvalidInput);
}

TEST(Affine, ComposeAppliesRightThenLeft) {
    const AffineTransform scale{2, 0, 0, 0, 2, 0};
    const AffineTransform shift = AffineTransform::translation(1, 0);
    const Vec2 p = compose(shift, scale).apply({3, 0});  // scale first, then shift
    EXPECT_DOUBLE_EQ(p.x, 7.0);
    const Vec2 q = compose(scale, shift).apply({3, 0});  // shift first, then scale
    EXPECT_DOUBLE_EQ(q.x, 8.0);
}
