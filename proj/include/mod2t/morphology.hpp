#pragma once

#include <cstdint>
#include <vector>

#include "mod2t/errors.hpp"

namespace mod2t {

// Per-pixel binary foreground flags for one frame.
struct ForegroundMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> fg;  // 0 background, 1 foreground

    ForegroundMask() = default;
    ForegroundMask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), fg(static_cast<std::size_t>(w) * h, fill) {
        if (w <= 0 || h <= 0) throw InvalidInput("ForegroundMask: non-positive dimensions");
    }

    std::uint8_t at(int x, int y) const { return fg[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return fg[static_cast<std::size_t>(y) * width + x]; }

    std::size_t foreground_count() const {
        std::size_t n = 0;
        for (auto v : fg) n += v ? 1 : 0;
        return n;
    }
};

namespace detail {

template <bool Erode>
ForegroundMask morph3x3(const ForegroundMask& m) {
    ForegroundMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            bool acc = Erode;
            for (int dy = -1; dy <= 1 && acc == Erode; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    // outside the frame counts as background
                    const bool v = nx >= 0 && ny >= 0 && nx < m.width && ny < m.height &&
                                   m.at(nx, ny) != 0;
                    if (Erode && !v) {
                        acc = false;
                        break;
                    }
                    if (!Erode && v) {
                        acc = true;
                        break;
                    }
                }
            }
            out.at(x, y) = acc ? 1 : 0;
        }
    }
    return out;
}

}  // namespace detail

inline ForegroundMask erode3x3(const ForegroundMask& m) { return detail::morph3x3<true>(m); }
inline ForegroundMask dilate3x3(const ForegroundMask& m) { return detail::morph3x3<false>(m); }

inline ForegroundMask open3x3(const ForegroundMask& m) { return dilate3x3(erode3x3(m)); }
inline ForegroundMask close3x3(const ForegroundMask& m) { return erode3x3(dilate3x3(m)); }

struct ComponentLabels {
    std::vector<int> label;  // -1 background, else component index
    int count = 0;
    std::vector<std::size_t> pixel_count;  // per component
};

// Flood-fill labeling where two foreground pixels belong to the same
// component when their Chebyshev distance is <= link_radius. Radius 1 is
// plain 8-connectivity; larger radii merge components across small gaps.
inline ComponentLabels label_components(const ForegroundMask& m, int link_radius = 1) {
    if (link_radius < 1) throw InvalidInput("label_components: link_radius must be >= 1");
    ComponentLabels out;
    out.label.assign(m.fg.size(), -1);
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < m.fg.size(); ++start) {
        if (!m.fg[start] || out.label[start] != -1) continue;
        const int id = out.count++;
        out.pixel_count.push_back(0);
        stack.push_back(start);
        out.label[start] = id;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++out.pixel_count[id];
            const int px = static_cast<int>(p % m.width);
            const int py = static_cast<int>(p / m.width);
            for (int dy = -link_radius; dy <= link_radius; ++dy) {
                const int ny = py + dy;
                if (ny < 0 || ny >= m.height) continue;
                for (int dx = -link_radius; dx <= link_radius; ++dx) {
                    const int nx = px + dx;
                    if (nx < 0 || nx >= m.width) continue;
                    const std::size_t q = static_cast<std::size_t>(ny) * m.width + nx;
                    if (m.fg[q] && out.label[q] == -1) {
                        out.label[q] = id;
                        stack.push_back(q);
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace mod2t
