#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mod2t/geometry.hpp"
#include "mod2t/image.hpp"
#include "mod2t/track_io.hpp"

namespace mod2t {

// Deterministic hash-based value noise; any (x, y, seed) can be evaluated
// independently, so warped samples are exact rather than resampled.
namespace noise {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double lattice(std::int64_t xi, std::int64_t yi, std::uint64_t seed) {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(xi) * 0x632be59bd9b4e019ULL ^
                                 splitmix64(static_cast<std::uint64_t>(yi) ^ seed));
    return static_cast<double>(h >> 11) * 0x1.0p-53;  // [0,1)
}

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

inline double value_noise(double x, double y, std::uint64_t seed) {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const std::int64_t xi = static_cast<std::int64_t>(fx);
    const std::int64_t yi = static_cast<std::int64_t>(fy);
    const double tx = smoothstep(x - fx);
    const double ty = smoothstep(y - fy);
    const double v00 = lattice(xi, yi, seed);
    const double v10 = lattice(xi + 1, yi, seed);
    const double v01 = lattice(xi, yi + 1, seed);
    const double v11 = lattice(xi + 1, yi + 1, seed);
    const double top = v00 + (v10 - v00) * tx;
    const double bot = v01 + (v11 - v01) * tx;
    return top + (bot - top) * ty;  // [0,1)
}

// Two octaves over a lattice of the given spacing, rescaled to [0,1).
inline double textured(double x, double y, std::uint64_t seed, double scale) {
    const double a = value_noise(x / scale, y / scale, seed);
    const double b = value_noise(2.0 * x / scale, 2.0 * y / scale, splitmix64(seed ^ 0x5bf0'3635ULL));
    return (a + 0.5 * b) / 1.5;
}

}  // namespace noise

enum class ActorMotion { Static, Linear, Waypoints };

struct Waypoint {
    int frame = 0;
    double x = 0.0;
    double y = 0.0;
};

struct ActorScript {
    int spawn = 1;      // first frame the actor exists
    int despawn = 0;    // one past the last frame; 0 = scene end
    double x = 0.0;     // world top-left at spawn
    double y = 0.0;
    double w = 16.0;
    double h = 16.0;
    double vx = 0.0;    // world velocity, pixels per frame
    double vy = 0.0;
    double intensity = 230.0;
    std::vector<Waypoint> waypoints;  // optional piecewise-linear path

    ActorMotion motion_kind() const {
        if (!waypoints.empty()) return ActorMotion::Waypoints;
        return (vx != 0.0 || vy != 0.0) ? ActorMotion::Linear : ActorMotion::Static;
    }

    // World-space top-left at frame t (spawn <= t < despawn).
    Vec2 position(int t) const {
        if (waypoints.empty())
            return {x + vx * (t - spawn), y + vy * (t - spawn)};
        if (t <= waypoints.front().frame) return {waypoints.front().x, waypoints.front().y};
        for (std::size_t i = 1; i < waypoints.size(); ++i) {
            const Waypoint& a = waypoints[i - 1];
            const Waypoint& b = waypoints[i];
            if (t <= b.frame) {
                const double u = static_cast<double>(t - a.frame) / (b.frame - a.frame);
                return {a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)};
            }
        }
        return {waypoints.back().x, waypoints.back().y};
    }
};

struct SceneScript {
    int width = 320;
    int height = 240;
    int frame_count = 100;
    std::uint64_t texture_seed = 1;
    double camera_vx = 0.0;  // camera drift, pixels per frame
    double camera_vy = 0.0;
    double texture_scale = 16.0;
    double texture_amplitude = 40.0;
    double base_intensity = 125.0;
    int motion_gap = 3;    // frame gap used by the ground-truth motion rule
    double beta_d = 0.0;   // 0 = 0.01 * min(width, height)
    std::vector<ActorScript> actors;

    double resolve_beta_d() const {
        return beta_d > 0.0 ? beta_d : 0.01 * std::min(width, height);
    }

    // World offset of the camera at frame t; image = world - offset.
    Vec2 camera_offset(int t) const { return {camera_vx * (t - 1), camera_vy * (t - 1)}; }

    int actor_despawn(const ActorScript& a) const {
        return a.despawn > 0 ? a.despawn : frame_count + 1;
    }
};

struct SyntheticScene {
    std::vector<GrayImage> frames;            // 1-based via frames[t-1]
    std::vector<TrackRecord> ground_truth;    // image-coordinate boxes
    std::vector<MotionAnnotation> motion;     // per frame/id flags
};

namespace detail {

// Displacement-based flag: moving iff the world-space center travels more
// than beta_d over motion_gap frames. Early frames anchor the window at
// spawn so an actor's label does not dither while its history is short.
inline MotionLabel ground_truth_motion(const SceneScript& scene, const ActorScript& actor,
                                       int t) {
    const int gap = scene.motion_gap;
    const int despawn = scene.actor_despawn(actor);
    const int a = std::max(actor.spawn, t - gap);
    const int b = std::min(despawn - 1, a + gap);
    if (b <= a) return MotionLabel::Stationary;
    const Vec2 pa = actor.position(a);
    const Vec2 pb = actor.position(b);
    const double scaled = norm(pb - pa) * (static_cast<double>(gap) / (b - a));
    return scaled > scene.resolve_beta_d() ? MotionLabel::Moving : MotionLabel::Stationary;
}

}  // namespace detail

inline void validate_scene(const SceneScript& scene) {
    if (scene.width < 32 || scene.height < 32)
        throw InvalidInput("SceneScript: frame size must be at least 32x32");
    if (scene.frame_count < 1) throw InvalidInput("SceneScript: frame_count must be >= 1");
    if (scene.motion_gap < 1) throw InvalidInput("SceneScript: motion_gap must be >= 1");
    int id = 0;
    for (const ActorScript& a : scene.actors) {
        ++id;
        if (a.w <= 0.0 || a.h <= 0.0)
            throw InvalidInput("SceneScript: actor " + std::to_string(id) + " has empty box");
        if (a.spawn < 1 || a.spawn > scene.frame_count)
            throw InvalidInput("SceneScript: actor " + std::to_string(id) + " spawn out of range");
        const int despawn = scene.actor_despawn(a);
        if (despawn <= a.spawn || despawn > scene.frame_count + 1)
            throw InvalidInput("SceneScript: actor " + std::to_string(id) + " despawn invalid");
        for (std::size_t i = 1; i < a.waypoints.size(); ++i) {
            if (a.waypoints[i].frame <= a.waypoints[i - 1].frame)
                throw InvalidInput("SceneScript: actor " + std::to_string(id) +
                                   " waypoints out of order");
        }
        for (int t = a.spawn; t < despawn; ++t) {
            const Vec2 p = a.position(t);
            const Vec2 off = scene.camera_offset(t);
            const double ix = p.x - off.x;
            const double iy = p.y - off.y;
            if (ix < 0.0 || iy < 0.0 || ix + a.w > scene.width || iy + a.h > scene.height)
                throw InvalidInput("SceneScript: actor " + std::to_string(id) +
                                   " leaves the frame at frame " + std::to_string(t));
        }
    }
}

// Render the scripted scene: seeded texture panned by the camera, actors as
// constant-intensity cards, exact ground-truth boxes and motion flags.
inline SyntheticScene render(const SceneScript& scene) {
    validate_scene(scene);
    SyntheticScene out;
    out.frames.reserve(scene.frame_count);

    for (int t = 1; t <= scene.frame_count; ++t) {
        const Vec2 off = scene.camera_offset(t);
        GrayImage frame(scene.width, scene.height);
        for (int y = 0; y < scene.height; ++y) {
            for (int x = 0; x < scene.width; ++x) {
                const double n =
                    noise::textured(x + off.x, y + off.y, scene.texture_seed, scene.texture_scale);
                const double v =
                    scene.base_intensity + scene.texture_amplitude * (2.0 * n - 1.0);
                frame.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            }
        }

        int id = 0;
        for (const ActorScript& a : scene.actors) {
            ++id;
            if (t < a.spawn || t >= scene.actor_despawn(a)) continue;
            const Vec2 p = a.position(t);
            const double ix = p.x - off.x;
            const double iy = p.y - off.y;
            const int px0 = std::max(0, static_cast<int>(std::llround(ix)));
            const int py0 = std::max(0, static_cast<int>(std::llround(iy)));
            const int px1 = std::min(scene.width, static_cast<int>(std::llround(ix + a.w)));
            const int py1 = std::min(scene.height, static_cast<int>(std::llround(iy + a.h)));
            const auto value = static_cast<std::uint8_t>(std::clamp(a.intensity, 0.0, 255.0));
            for (int y = py0; y < py1; ++y)
                for (int x = px0; x < px1; ++x) frame.at(x, y) = value;

            TrackRecord rec;
            rec.frame = t;
            rec.track_id = id;
            rec.box = {ix, iy, a.w, a.h, std::nullopt, std::nullopt};
            rec.source = TrackSource::Deep;
            out.ground_truth.push_back(rec);
            out.motion.push_back({t, id, detail::ground_truth_motion(scene, a, t)});
        }
        out.frames.push_back(std::move(frame));
    }
    return out;
}

// Drop whole identities (the fraction is of the distinct id count) and add
// seeded uniform jitter to the surviving boxes. The id permutation depends
// only on the seed, so a larger fraction removes a superset of a smaller one.
inline std::vector<TrackRecord> degrade_tracks(const std::vector<TrackRecord>& records,
                                               double drop_fraction, double jitter_px,
                                               std::uint64_t seed) {
    if (drop_fraction < 0.0 || drop_fraction > 1.0)
        throw InvalidInput("degrade_tracks: drop_fraction must lie in [0,1]");
    if (jitter_px < 0.0) throw InvalidInput("degrade_tracks: jitter_px must be >= 0");

    std::vector<int> ids;
    for (const TrackRecord& r : records)
        if (std::find(ids.begin(), ids.end(), r.track_id) == ids.end()) ids.push_back(r.track_id);
    std::sort(ids.begin(), ids.end());

    std::mt19937_64 rng(seed);
    // Fisher-Yates with explicit draws; std::shuffle's sequence is not pinned
    for (std::size_t i = ids.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(ids[i - 1], ids[j]);
    }
    const std::size_t drop = static_cast<std::size_t>(std::llround(drop_fraction * ids.size()));
    std::vector<int> dropped(ids.begin(), ids.begin() + std::min(drop, ids.size()));
    std::sort(dropped.begin(), dropped.end());

    auto uniform = [&rng](double lo, double hi) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    };

    std::vector<TrackRecord> out;
    out.reserve(records.size());
    for (const TrackRecord& r : records) {
        if (std::binary_search(dropped.begin(), dropped.end(), r.track_id)) continue;
        TrackRecord kept = r;
        if (jitter_px > 0.0) {
            kept.box.x += uniform(-jitter_px, jitter_px);
            kept.box.y += uniform(-jitter_px, jitter_px);
        }
        out.push_back(kept);
    }
    return out;
}

// Scene script in the key=value config dialect; actors are numbered blocks
// (actor.1.x = ..., actor.2.vx = ...).
inline SceneScript parse_scene_script(const std::string& content) {
    SceneScript scene;
    std::map<int, ActorScript> actors;
    std::istringstream is(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string_view sv = detail::trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        const std::size_t eq = sv.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
        const std::string key(detail::trim(sv.substr(0, eq)));
        const std::string_view value = detail::trim(sv.substr(eq + 1));

        auto as_double = [&](const char* what) { return detail::parse_double(value, line_no, what); };
        auto as_int = [&](const char* what) {
            return static_cast<int>(detail::parse_int(value, line_no, what));
        };

        if (key == "scene.width") scene.width = as_int("scene.width");
        else if (key == "scene.height") scene.height = as_int("scene.height");
        else if (key == "scene.frames") scene.frame_count = as_int("scene.frames");
        else if (key == "scene.seed") scene.texture_seed = static_cast<std::uint64_t>(
                 detail::parse_int(value, line_no, "scene.seed"));
        else if (key == "scene.camera_vx") scene.camera_vx = as_double("scene.camera_vx");
        else if (key == "scene.camera_vy") scene.camera_vy = as_double("scene.camera_vy");
        else if (key == "scene.texture_scale") scene.texture_scale = as_double("scene.texture_scale");
        else if (key == "scene.texture_amplitude")
            scene.texture_amplitude = as_double("scene.texture_amplitude");
        else if (key == "scene.base_intensity")
            scene.base_intensity = as_double("scene.base_intensity");
        else if (key == "scene.motion_gap") scene.motion_gap = as_int("scene.motion_gap");
        else if (key == "scene.beta_d") scene.beta_d = as_double("scene.beta_d");
        else if (key.rfind("actor.", 0) == 0) {
            const std::size_t dot = key.find('.', 6);
            if (dot == std::string::npos) throw ParseError("bad actor key '" + key + "'", line_no);
            int idx = 0;
            try {
                idx = std::stoi(key.substr(6, dot - 6));
            } catch (...) {
                throw ParseError("bad actor index in '" + key + "'", line_no);
            }
            ActorScript& a = actors[idx];
            const std::string field = key.substr(dot + 1);
            if (field == "spawn") a.spawn = as_int("spawn");
            else if (field == "despawn") a.despawn = as_int("despawn");
            else if (field == "x") a.x = as_double("x");
            else if (field == "y") a.y = as_double("y");
            else if (field == "w") a.w = as_double("w");
            else if (field == "h") a.h = as_double("h");
            else if (field == "vx") a.vx = as_double("vx");
            else if (field == "vy") a.vy = as_double("vy");
            else if (field == "intensity") a.intensity = as_double("intensity");
            else if (field == "waypoints") {
                // frame:x:y(,frame:x:y)*
                std::string spec(value);
                std::istringstream ws(spec);
                std::string item;
                while (std::getline(ws, item, ',')) {
                    Waypoint wp;
                    if (std::sscanf(item.c_str(), "%d:%lf:%lf", &wp.frame, &wp.x, &wp.y) != 3)
                        throw ParseError("bad waypoint '" + item + "'", line_no);
                    a.waypoints.push_back(wp);
                }
            } else {
                throw ParseError("unknown actor field '" + field + "'", line_no);
            }
        } else {
            throw ParseError("unknown scene key '" + key + "'", line_no);
        }
    }
    for (const auto& [idx, actor] : actors) scene.actors.push_back(actor);
    return scene;
}

inline SceneScript read_scene_script(const std::filesystem::path& path) {
    return parse_scene_script(detail::read_file(path));
}

}  // namespace mod2t
