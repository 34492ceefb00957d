#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mod2t/geometry.hpp"
#include "mod2t/image.hpp"
#include "mod2t/morphology.hpp"

namespace mod2t {

// One (mean, variance, age) triple of the grid-cell Gaussian.
struct GaussianModel {
    double mean = 0.0;
    double var = 0.0;
    double age = 0.0;  // 0 = empty slot
};

// Per-cell state: the current background model and the candidate that may
// replace it once it has observed the scene for longer.
struct GaussianCell {
    GaussianModel current;
    GaussianModel candidate;
};

struct BgModelConfig {
    int grid_cell = 4;            // pixels per grid cell side
    double theta_v = 400.0;       // variance level above which age decays
    double decay_lambda = 0.001;  // decay rate applied beyond theta_v
    double theta_s = 2.5;         // match gate multiplier on cell variance
    double theta_d = 4.0;         // per-pixel foreground gate multiplier
    int min_blob_area = 40;       // blobs smaller than this are dropped
    double variance_floor = 1.0;
    double age_cap = 30.0;        // blend-weight floor: k >= 1/(age_cap+1)

    void validate() const {
        if (grid_cell < 1 || theta_v <= 0.0 || decay_lambda <= 0.0 || theta_s <= 0.0 ||
            theta_d <= 0.0 || min_blob_area < 0 || variance_floor < 0.0 || age_cap < 1.0)
            throw InvalidInput("BgModelConfig: thresholds must be positive");
    }
};

// Observation of one grid cell in the incoming frame: mean intensity and the
// largest squared deviation of any pixel from that mean.
struct CellStats {
    double mean = 0.0;
    double max_sq_dev = 0.0;
};

// Running-average update of one Gaussian triple with observation (M, V).
// An over-dispersed model (var > theta_v) first has its age decayed so the
// new observation carries more weight. The age keeps counting past age_cap
// (the candidate-swap rule compares raw ages) but the blend weight is
// floored at 1/(age_cap+1) so an old model never stops adapting.
inline GaussianModel update_gaussian(GaussianModel m, double obs_mean, double obs_var,
                                     const BgModelConfig& cfg) {
    if (m.var > cfg.theta_v)
        m.age *= std::exp(-cfg.decay_lambda * (m.var - cfg.theta_v));
    const double k = 1.0 / (std::min(m.age, cfg.age_cap) + 1.0);
    m.mean = (1.0 - k) * m.mean + k * obs_mean;
    m.var = (1.0 - k) * m.var + k * obs_var;
    m.var = std::max(m.var, cfg.variance_floor);
    m.age += 1.0;
    return m;
}

struct GridShape {
    int cells_x = 0;
    int cells_y = 0;
    int cell = 1;

    int cell_x0(int cx) const { return cx * cell; }
    int cell_y0(int cy) const { return cy * cell; }
    std::size_t index(int cx, int cy) const {
        return static_cast<std::size_t>(cy) * cells_x + cx;
    }
};

inline GridShape grid_shape(int width, int height, int cell) {
    GridShape g;
    g.cell = cell;
    g.cells_x = (width + cell - 1) / cell;
    g.cells_y = (height + cell - 1) / cell;
    return g;
}

// Per-cell (mean, max squared deviation) for one frame. Edge cells truncate
// to the pixels that exist.
inline std::vector<CellStats> grid_statistics(const GrayImage& frame, const BgModelConfig& cfg) {
    cfg.validate();
    if (frame.width < 1 || frame.height < 1)
        throw InvalidInput("grid_statistics: empty frame");
    const GridShape g = grid_shape(frame.width, frame.height, cfg.grid_cell);
    std::vector<CellStats> stats(static_cast<std::size_t>(g.cells_x) * g.cells_y);
    for (int cy = 0; cy < g.cells_y; ++cy) {
        const int y0 = g.cell_y0(cy);
        const int y1 = std::min(y0 + g.cell, frame.height);
        for (int cx = 0; cx < g.cells_x; ++cx) {
            const int x0 = g.cell_x0(cx);
            const int x1 = std::min(x0 + g.cell, frame.width);
            double sum = 0.0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) sum += frame.at(x, y);
            const double count = static_cast<double>((x1 - x0) * (y1 - y0));
            const double mean = sum / count;
            double vmax = 0.0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) {
                    const double d = mean - frame.at(x, y);
                    vmax = std::max(vmax, d * d);
                }
            stats[g.index(cx, cy)] = {mean, vmax};
        }
    }
    return stats;
}

// Dual-mode single-Gaussian grid background model. Single writer; step()
// consumes one frame at a time together with the camera warp estimated
// between the previous frame and this one.
class DualModeBackgroundModel {
public:
    DualModeBackgroundModel(int width, int height, BgModelConfig cfg = {})
        : cfg_(cfg), width_(width), height_(height),
          grid_(grid_shape(width, height, cfg.grid_cell)) {
        cfg_.validate();
        if (width < 1 || height < 1)
            throw InvalidInput("DualModeBackgroundModel: bad dimensions");
        cells_.resize(static_cast<std::size_t>(grid_.cells_x) * grid_.cells_y);
    }

    const BgModelConfig& config() const { return cfg_; }
    const GridShape& grid() const { return grid_; }
    const std::vector<GaussianCell>& cells() const { return cells_; }
    const GaussianCell& cell_at(int cx, int cy) const { return cells_[grid_.index(cx, cy)]; }
    bool initialized() const { return initialized_; }
    long swap_count() const { return swap_count_; }

    ForegroundMask step(const GrayImage& frame,
                        const AffineTransform& warp = AffineTransform::identity()) {
        if (frame.width != width_ || frame.height != height_)
            throw InvalidInput("DualModeBackgroundModel::step: frame dimensions differ");

        compensate(warp);
        const std::vector<CellStats> stats = grid_statistics(frame, cfg_);

        for (std::size_t i = 0; i < cells_.size(); ++i) {
            GaussianCell& cell = cells_[i];
            const double m = stats[i].mean;
            const double v = stats[i].max_sq_dev;
            if (cell.current.age <= 0.0) {
                // empty slot (startup or warped-in border): adopt the observation
                cell.current = update_gaussian(GaussianModel{}, m, v, cfg_);
                continue;
            }
            const double dev_a = m - cell.current.mean;
            const double dev_b = m - cell.candidate.mean;
            if (dev_a * dev_a < cfg_.theta_s * cell.current.var) {
                cell.current = update_gaussian(cell.current, m, v, cfg_);
            } else if (cell.candidate.age > 0.0 &&
                       dev_b * dev_b < cfg_.theta_s * cell.candidate.var) {
                cell.candidate = update_gaussian(cell.candidate, m, v, cfg_);
            } else {
                cell.candidate = update_gaussian(GaussianModel{}, m, v, cfg_);
            }
            if (cell.candidate.age > cell.current.age) {
                std::swap(cell.current, cell.candidate);
                ++swap_count_;
            }
        }

        // Foreground decision against the current model only.
        ForegroundMask mask(width_, height_);
        if (initialized_) {
            for (int y = 0; y < height_; ++y) {
                const int cy = y / cfg_.grid_cell;
                for (int x = 0; x < width_; ++x) {
                    const int cx = x / cfg_.grid_cell;
                    const GaussianModel& bg = cells_[grid_.index(cx, cy)].current;
                    const double d = frame.at(x, y) - bg.mean;
                    mask.at(x, y) = (d * d > cfg_.theta_d * bg.var) ? 1 : 0;
                }
            }
        }
        initialized_ = true;
        return mask;
    }

private:
    // Re-express the cell grid in the new frame's coordinates. Each cell's
    // current model blends the (up to) four source cells overlapping its
    // inverse-warped center; blending means through the second moment
    // inflates the variance where neighboring cells disagree, which is what
    // keeps contrast edges quiet while the grid slides between cell borders.
    void compensate(const AffineTransform& warp) {
        if (!initialized_) return;
        const AffineTransform inv = warp.inverse();
        if (std::abs(inv.a - 1.0) < 1e-6 && std::abs(inv.b) < 1e-6 && std::abs(inv.c) < 1e-6 &&
            std::abs(inv.d - 1.0) < 1e-6 && std::abs(inv.tx) < 1e-3 && std::abs(inv.ty) < 1e-3)
            return;

        std::vector<GaussianCell> moved(cells_.size());
        for (int cy = 0; cy < grid_.cells_y; ++cy) {
            for (int cx = 0; cx < grid_.cells_x; ++cx) {
                const Vec2 center{(cx + 0.5) * cfg_.grid_cell, (cy + 0.5) * cfg_.grid_cell};
                const Vec2 src = inv.apply(center);
                const double gx = src.x / cfg_.grid_cell - 0.5;
                const double gy = src.y / cfg_.grid_cell - 0.5;
                const int x0 = static_cast<int>(std::floor(gx));
                const int y0 = static_cast<int>(std::floor(gy));
                const double fx = gx - x0;
                const double fy = gy - y0;

                GaussianCell out;
                double weight_sum = 0.0;
                double mean_acc = 0.0, moment_acc = 0.0, age_acc = 0.0;
                for (int dy = 0; dy <= 1; ++dy) {
                    for (int dx = 0; dx <= 1; ++dx) {
                        const int sx = x0 + dx;
                        const int sy = y0 + dy;
                        if (sx < 0 || sy < 0 || sx >= grid_.cells_x || sy >= grid_.cells_y)
                            continue;
                        const double wgt = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
                        if (wgt <= 0.0) continue;
                        const GaussianModel& m = cells_[grid_.index(sx, sy)].current;
                        if (m.age <= 0.0) continue;
                        weight_sum += wgt;
                        mean_acc += wgt * m.mean;
                        moment_acc += wgt * (m.var + m.mean * m.mean);
                        age_acc += wgt * m.age;
                    }
                }
                // cells without full stencil support (frame border, freshly
                // revealed area) restart instead of extrapolating
                if (weight_sum > 0.999) {
                    out.current.mean = mean_acc / weight_sum;
                    out.current.var = std::max(moment_acc / weight_sum -
                                                   out.current.mean * out.current.mean,
                                               cfg_.variance_floor);
                    out.current.age = age_acc / weight_sum;
                }
                // the candidate is a short-lived local hypothesis: nearest cell
                const int nx = static_cast<int>(std::lround(gx));
                const int ny = static_cast<int>(std::lround(gy));
                if (nx >= 0 && ny >= 0 && nx < grid_.cells_x && ny < grid_.cells_y)
                    out.candidate = cells_[grid_.index(nx, ny)].candidate;
                moved[grid_.index(cx, cy)] = out;
            }
        }
        cells_ = std::move(moved);
    }

    BgModelConfig cfg_;
    int width_;
    int height_;
    GridShape grid_;
    std::vector<GaussianCell> cells_;
    bool initialized_ = false;
    long swap_count_ = 0;
};

// Morphological cleanup (open, close), 8-connected labeling, area filter,
// tight bounding boxes.
inline std::vector<BoundingBox> extract_blobs(const ForegroundMask& mask,
                                              const BgModelConfig& cfg) {
    const ForegroundMask cleaned = close3x3(open3x3(mask));
    const ComponentLabels labels = label_components(cleaned, 1);
    struct Extent {
        int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
        std::size_t area = 0;
    };
    std::vector<Extent> ext(labels.count);
    for (int y = 0; y < cleaned.height; ++y) {
        for (int x = 0; x < cleaned.width; ++x) {
            const int id = labels.label[static_cast<std::size_t>(y) * cleaned.width + x];
            if (id < 0) continue;
            Extent& e = ext[id];
            if (e.area == 0) {
                e.min_x = e.max_x = x;
                e.min_y = e.max_y = y;
            } else {
                e.min_x = std::min(e.min_x, x);
                e.max_x = std::max(e.max_x, x);
                e.min_y = std::min(e.min_y, y);
                e.max_y = std::max(e.max_y, y);
            }
            ++e.area;
        }
    }
    std::vector<BoundingBox> boxes;
    for (const Extent& e : ext) {
        if (e.area < static_cast<std::size_t>(cfg.min_blob_area)) continue;
        BoundingBox b;
        b.x = e.min_x;
        b.y = e.min_y;
        b.w = e.max_x - e.min_x + 1;
        b.h = e.max_y - e.min_y + 1;
        boxes.push_back(b);
    }
    return boxes;
}

}  // namespace mod2t
