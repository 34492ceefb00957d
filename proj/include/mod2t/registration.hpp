#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mod2t/geometry.hpp"
#include "mod2t/image.hpp"

namespace mod2t {

enum class MotionModel { Translation, Affine };

struct RegistrationConfig {
    int pyramid_levels = 3;
    int max_iterations = 50;  // per pyramid level
    double convergence_eps = 1e-4;
    MotionModel model = MotionModel::Affine;
};

struct RegistrationResult {
    AffineTransform transform;  // maps prev coordinates into curr coordinates
    bool converged = true;
    double correlation = 1.0;  // zero-mean correlation at the solution
};

namespace detail {

inline FloatImage gradient_x(const FloatImage& img) {
    FloatImage g(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 1; x + 1 < img.width; ++x)
            g.at(x, y) = 0.5 * (img.at(x + 1, y) - img.at(x - 1, y));
    return g;
}

inline FloatImage gradient_y(const FloatImage& img) {
    FloatImage g(img.width, img.height);
    for (int y = 1; y + 1 < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            g.at(x, y) = 0.5 * (img.at(x, y + 1) - img.at(x, y - 1));
    return g;
}

// One enhanced-correlation iteration sweep at a fixed resolution. Updates
// `warp` in place; returns true once the parameter update drops below eps.
inline bool ecc_refine(const FloatImage& tmpl, const FloatImage& curr,
                       const FloatImage& gx, const FloatImage& gy,
                       MotionModel model, int max_iterations, double eps,
                       AffineTransform& warp, double& correlation) {
    const int n_params = model == MotionModel::Affine ? 6 : 2;
    const int margin = 2;

    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(tmpl.width) * tmpl.height / 2);
    std::vector<double> tvals;
    for (int y = margin; y < tmpl.height - margin; ++y) {
        for (int x = margin; x < tmpl.width - margin; ++x) {
            pts.push_back({static_cast<double>(x), static_cast<double>(y)});
            tvals.push_back(tmpl.at(x, y));
        }
    }
    const std::size_t n = pts.size();
    if (n < 16) return true;

    double tmean = 0.0;
    for (double v : tvals) tmean += v;
    tmean /= static_cast<double>(n);
    Eigen::VectorXd ir(n);
    for (std::size_t k = 0; k < n; ++k) ir[k] = tvals[k] - tmean;
    const double ir_norm2 = ir.squaredNorm();
    if (ir_norm2 < 1e-9) return true;  // textureless template, nothing to align

    Eigen::VectorXd iw(n);
    Eigen::MatrixXd G(n, n_params);

    for (int iter = 0; iter < max_iterations; ++iter) {
        double wmean = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const Vec2 q = warp.apply(pts[k]);
            const double v = sample_bilinear(curr, q.x, q.y);
            iw[k] = v;
            wmean += v;
            const double dx = sample_bilinear(gx, q.x, q.y);
            const double dy = sample_bilinear(gy, q.x, q.y);
            if (model == MotionModel::Affine) {
                G(k, 0) = dx * pts[k].x;
                G(k, 1) = dx * pts[k].y;
                G(k, 2) = dx;
                G(k, 3) = dy * pts[k].x;
                G(k, 4) = dy * pts[k].y;
                G(k, 5) = dy;
            } else {
                G(k, 0) = dx;
                G(k, 1) = dy;
            }
        }
        wmean /= static_cast<double>(n);
        iw.array() -= wmean;

        const double iw_norm2 = iw.squaredNorm();
        correlation = ir.dot(iw) / std::sqrt(ir_norm2 * std::max(iw_norm2, 1e-12));
        if (iw_norm2 < 1e-9) return false;

        const Eigen::MatrixXd H = G.transpose() * G;
        const Eigen::LDLT<Eigen::MatrixXd> solver(H);
        const Eigen::VectorXd Gw = G.transpose() * iw;
        const Eigen::VectorXd Gt = G.transpose() * ir;
        const Eigen::VectorXd HinvGw = solver.solve(Gw);

        const double lambda_n = iw_norm2 - Gw.dot(HinvGw);
        const double lambda_d = ir.dot(iw) - Gt.dot(HinvGw);
        if (lambda_d <= 0.0) return false;  // anti-correlated, no descent direction
        const double lambda = lambda_n / lambda_d;

        const Eigen::VectorXd err = lambda * ir - iw;
        const Eigen::VectorXd delta = solver.solve(G.transpose() * err);

        if (model == MotionModel::Affine) {
            warp.a += delta[0];
            warp.b += delta[1];
            warp.tx += delta[2];
            warp.c += delta[3];
            warp.d += delta[4];
            warp.ty += delta[5];
        } else {
            warp.tx += delta[0];
            warp.ty += delta[1];
        }
        if (delta.lpNorm<Eigen::Infinity>() < eps) return true;
    }
    return false;
}

}  // namespace detail

// Estimate the inter-frame camera motion between two equally sized frames by
// maximizing the zero-mean intensity correlation of prev warped onto curr,
// coarse to fine over a box-filter pyramid.
inline RegistrationResult estimate_camera_motion(const GrayImage& prev, const GrayImage& curr,
                                                 const RegistrationConfig& cfg = {}) {
    if (!prev.same_size(curr))
        throw InvalidInput("estimate_camera_motion: frame dimensions differ");
    if (prev.width < 32 || prev.height < 32)
        throw InvalidInput("estimate_camera_motion: frames must be at least 32x32");
    if (cfg.pyramid_levels < 1 || cfg.max_iterations < 1 || cfg.convergence_eps <= 0.0)
        throw InvalidInput("estimate_camera_motion: bad config");

    std::vector<FloatImage> prev_pyr{to_float(prev)};
    std::vector<FloatImage> curr_pyr{to_float(curr)};
    for (int l = 1; l < cfg.pyramid_levels; ++l) {
        if (prev_pyr.back().width < 64 || prev_pyr.back().height < 64) break;
        prev_pyr.push_back(downsample_half(prev_pyr.back()));
        curr_pyr.push_back(downsample_half(curr_pyr.back()));
    }

    RegistrationResult res;
    AffineTransform warp = AffineTransform::identity();
    for (int l = static_cast<int>(prev_pyr.size()) - 1; l >= 0; --l) {
        const FloatImage gx = detail::gradient_x(curr_pyr[l]);
        const FloatImage gy = detail::gradient_y(curr_pyr[l]);
        res.converged = detail::ecc_refine(prev_pyr[l], curr_pyr[l], gx, gy, cfg.model,
                                           cfg.max_iterations, cfg.convergence_eps, warp,
                                           res.correlation);
        if (l > 0) {
            warp.tx *= 2.0;
            warp.ty *= 2.0;
        }
    }
    res.transform = warp;
    return res;
}

// Move a box into another frame's coordinates by warping its center and
// keeping the extents; D only depends on centers and the older box's size.
inline BoundingBox stabilize_box(const BoundingBox& box, const AffineTransform& t) {
    if (!t.invertible()) throw InvalidInput("stabilize_box: singular transform");
    BoundingBox out = box;
    const Vec2 c = t.apply(box.center());
    out.x = c.x - box.w / 2.0;
    out.y = c.y - box.h / 2.0;
    return out;
}

}  // namespace mod2t
