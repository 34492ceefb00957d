#pragma once

#include <charconv>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mod2t/background_model.hpp"
#include "mod2t/blob_tracker.hpp"
#include "mod2t/fusion.hpp"
#include "mod2t/metrics.hpp"
#include "mod2t/motion_judge.hpp"
#include "mod2t/registration.hpp"
#include "mod2t/track_io.hpp"

namespace mod2t {

// Every tunable of the pipeline in one place, loadable from a line-oriented
// key=value file. Unknown keys and out-of-range values are load errors.
struct RunConfig {
    BgModelConfig bg;
    RegistrationConfig reg;
    TrackerConfig track;
    JudgeConfig judge;
    FusionConfig fuse;
    double eval_iou_thresh = 0.5;
    BfMode eval_bf = BfMode::adaptive();

    void validate() const {
        bg.validate();
        track.validate();
        judge.validate();
        fuse.validate();
        if (reg.pyramid_levels < 1 || reg.max_iterations < 1 || reg.convergence_eps <= 0.0)
            throw InvalidInput("RunConfig: bad registration parameters");
        if (eval_iou_thresh <= 0.0 || eval_iou_thresh >= 1.0)
            throw InvalidInput("RunConfig: eval.iou_thresh must lie in (0,1)");
        if (eval_bf.fixed && (*eval_bf.fixed < 0.0 || *eval_bf.fixed > 1.0))
            throw InvalidInput("RunConfig: fixed eval.bf must lie in [0,1]");
    }
};

namespace detail {

inline std::string format_shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct ConfigField {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, std::string_view, std::size_t)> set;
};

inline double config_double(std::string_view v, std::size_t line) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ParseError("bad numeric value '" + std::string(v) + "'", line);
    return out;
}

inline int config_int(std::string_view v, std::size_t line) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ParseError("bad integer value '" + std::string(v) + "'", line);
    return out;
}

inline const std::vector<std::pair<std::string, ConfigField>>& config_fields() {
    auto dbl = [](auto getter, auto setter) {
        return ConfigField{
            [getter](const RunConfig& c) { return format_shortest(getter(c)); },
            [setter](RunConfig& c, std::string_view v, std::size_t ln) {
                setter(c, config_double(v, ln));
            }};
    };
    auto integer = [](auto getter, auto setter) {
        return ConfigField{
            [getter](const RunConfig& c) { return std::to_string(getter(c)); },
            [setter](RunConfig& c, std::string_view v, std::size_t ln) {
                setter(c, config_int(v, ln));
            }};
    };

    static const std::vector<std::pair<std::string, ConfigField>> fields = {
        {"bg.grid_cell", integer([](const RunConfig& c) { return c.bg.grid_cell; },
                                 [](RunConfig& c, int v) { c.bg.grid_cell = v; })},
        {"bg.theta_s", dbl([](const RunConfig& c) { return c.bg.theta_s; },
                           [](RunConfig& c, double v) { c.bg.theta_s = v; })},
        {"bg.theta_d", dbl([](const RunConfig& c) { return c.bg.theta_d; },
                           [](RunConfig& c, double v) { c.bg.theta_d = v; })},
        {"bg.theta_v", dbl([](const RunConfig& c) { return c.bg.theta_v; },
                           [](RunConfig& c, double v) { c.bg.theta_v = v; })},
        {"bg.decay_lambda", dbl([](const RunConfig& c) { return c.bg.decay_lambda; },
                                [](RunConfig& c, double v) { c.bg.decay_lambda = v; })},
        {"bg.min_blob_area", integer([](const RunConfig& c) { return c.bg.min_blob_area; },
                                     [](RunConfig& c, int v) { c.bg.min_blob_area = v; })},
        {"bg.variance_floor", dbl([](const RunConfig& c) { return c.bg.variance_floor; },
                                  [](RunConfig& c, double v) { c.bg.variance_floor = v; })},
        {"reg.pyramid_levels", integer([](const RunConfig& c) { return c.reg.pyramid_levels; },
                                       [](RunConfig& c, int v) { c.reg.pyramid_levels = v; })},
        {"reg.max_iterations", integer([](const RunConfig& c) { return c.reg.max_iterations; },
                                       [](RunConfig& c, int v) { c.reg.max_iterations = v; })},
        {"reg.convergence_eps", dbl([](const RunConfig& c) { return c.reg.convergence_eps; },
                                    [](RunConfig& c, double v) { c.reg.convergence_eps = v; })},
        {"reg.model",
         {[](const RunConfig& c) {
              return std::string(c.reg.model == MotionModel::Affine ? "affine" : "translation");
          },
          [](RunConfig& c, std::string_view v, std::size_t ln) {
              if (v == "affine")
                  c.reg.model = MotionModel::Affine;
              else if (v == "translation")
                  c.reg.model = MotionModel::Translation;
              else
                  throw ParseError("reg.model must be 'affine' or 'translation'", ln);
          }}},
        {"track.iou_gate", dbl([](const RunConfig& c) { return c.track.iou_gate; },
                               [](RunConfig& c, double v) { c.track.iou_gate = v; })},
        {"track.max_age", integer([](const RunConfig& c) { return c.track.max_age; },
                                  [](RunConfig& c, int v) { c.track.max_age = v; })},
        {"track.min_hits", integer([](const RunConfig& c) { return c.track.min_hits; },
                                   [](RunConfig& c, int v) { c.track.min_hits = v; })},
        {"judge.frame_gap", integer([](const RunConfig& c) { return c.judge.frame_gap; },
                                    [](RunConfig& c, int v) { c.judge.frame_gap = v; })},
        {"judge.lambda", dbl([](const RunConfig& c) { return c.judge.lambda; },
                             [](RunConfig& c, double v) { c.judge.lambda = v; })},
        {"judge.beta_d",
         {[](const RunConfig& c) {
              return c.judge.beta_d > 0.0 ? format_shortest(c.judge.beta_d) : std::string("auto");
          },
          [](RunConfig& c, std::string_view v, std::size_t ln) {
              if (v == "auto") {
                  c.judge.beta_d = 0.0;
              } else {
                  const double x = config_double(v, ln);
                  if (x <= 0.0) throw ParseError("judge.beta_d must be positive or 'auto'", ln);
                  c.judge.beta_d = x;
              }
          }}},
        {"judge.patch_width", integer([](const RunConfig& c) { return c.judge.patch_width; },
                                      [](RunConfig& c, int v) { c.judge.patch_width = v; })},
        {"judge.patch_height", integer([](const RunConfig& c) { return c.judge.patch_height; },
                                       [](RunConfig& c, int v) { c.judge.patch_height = v; })},
        {"judge.boundary_margin",
         integer([](const RunConfig& c) { return c.judge.boundary_margin; },
                 [](RunConfig& c, int v) { c.judge.boundary_margin = v; })},
        {"judge.r1", dbl([](const RunConfig& c) { return c.judge.r1; },
                         [](RunConfig& c, double v) { c.judge.r1 = v; })},
        {"judge.r2", dbl([](const RunConfig& c) { return c.judge.r2; },
                         [](RunConfig& c, double v) { c.judge.r2 = v; })},
        {"judge.theta_threshold",
         dbl([](const RunConfig& c) { return c.judge.theta_threshold; },
             [](RunConfig& c, double v) { c.judge.theta_threshold = v; })},
        {"fuse.iou_gate", dbl([](const RunConfig& c) { return c.fuse.iou_gate; },
                              [](RunConfig& c, double v) { c.fuse.iou_gate = v; })},
        {"fuse.mota_threshold", dbl([](const RunConfig& c) { return c.fuse.mota_threshold; },
                                    [](RunConfig& c, double v) { c.fuse.mota_threshold = v; })},
        {"fuse.fg_threshold", dbl([](const RunConfig& c) { return c.fuse.fg_threshold; },
                                  [](RunConfig& c, double v) { c.fuse.fg_threshold = v; })},
        {"fuse.component_link_radius",
         integer([](const RunConfig& c) { return c.fuse.component_link_radius; },
                 [](RunConfig& c, int v) { c.fuse.component_link_radius = v; })},
        {"fuse.r", dbl([](const RunConfig& c) { return c.fuse.motion_ratio_cap; },
                       [](RunConfig& c, double v) { c.fuse.motion_ratio_cap = v; })},
        {"fuse.alpha", dbl([](const RunConfig& c) { return c.fuse.alpha; },
                           [](RunConfig& c, double v) { c.fuse.alpha = v; })},
        {"fuse.prior_mota_tra",
         {[](const RunConfig& c) {
              return c.fuse.prior_mota_tra ? format_shortest(*c.fuse.prior_mota_tra)
                                           : std::string("none");
          },
          [](RunConfig& c, std::string_view v, std::size_t ln) {
              if (v == "none")
                  c.fuse.prior_mota_tra.reset();
              else
                  c.fuse.prior_mota_tra = config_double(v, ln);
          }}},
        {"fuse.prior_mota_deep", dbl([](const RunConfig& c) { return c.fuse.prior_mota_deep; },
                                     [](RunConfig& c, double v) { c.fuse.prior_mota_deep = v; })},
        {"fuse.prior_mvf1_deep", dbl([](const RunConfig& c) { return c.fuse.prior_mvf1_deep; },
                                     [](RunConfig& c, double v) { c.fuse.prior_mvf1_deep = v; })},
        {"eval.iou_thresh", dbl([](const RunConfig& c) { return c.eval_iou_thresh; },
                                [](RunConfig& c, double v) { c.eval_iou_thresh = v; })},
        {"eval.bf",
         {[](const RunConfig& c) {
              return c.eval_bf.fixed ? format_shortest(*c.eval_bf.fixed) : std::string("adaptive");
          },
          [](RunConfig& c, std::string_view v, std::size_t ln) {
              if (v == "adaptive")
                  c.eval_bf = BfMode::adaptive();
              else
                  c.eval_bf = BfMode::fixed_value(config_double(v, ln));
          }}},
    };
    return fields;
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& content) {
    RunConfig cfg;
    const auto& fields = detail::config_fields();
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
        bool found = false;
        for (const auto& [name, field] : fields) {
            if (name == key) {
                field.set(cfg, value, line_no);
                found = true;
                break;
            }
        }
        if (!found) throw ParseError("unknown config key '" + key + "'", line_no);
    }
    cfg.validate();
    return cfg;
}

inline std::string serialize_run_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& [name, field] : detail::config_fields()) {
        out += name;
        out += " = ";
        out += field.get(cfg);
        out += '\n';
    }
    return out;
}

inline RunConfig read_run_config(const std::filesystem::path& path) {
    return parse_run_config(detail::read_file(path));
}

inline void write_run_config(const std::filesystem::path& path, const RunConfig& cfg) {
    detail::write_file_atomic(path, serialize_run_config(cfg));
}

}  // namespace mod2t
