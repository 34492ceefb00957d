#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mod2t/errors.hpp"
#include "mod2t/geometry.hpp"
#include "mod2t/metrics.hpp"

namespace mod2t {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view s, std::size_t line, const char* field) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(std::string("bad ") + field + " value '" + std::string(s) + "'", line);
    return v;
}

inline long parse_int(std::string_view s, std::size_t line, const char* field) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(std::string("bad ") + field + " value '" + std::string(s) + "'", line);
    return v;
}

inline std::string format_fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Write the full content, then move it into place so failures never leave a
// truncated file behind.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open for writing: " + tmp.string());
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace detail

// MOT-style comma-separated rows:
//   frame,id,x,y,w,h[,conf[,class[,visibility[,theta,label]]]]
// Absent optional columns are stored as "not present" and written back as -1.
inline std::vector<TrackRecord> parse_track_rows(const std::string& content,
                                                 TrackSource source = TrackSource::Deep) {
    std::vector<TrackRecord> records;
    std::istringstream is(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string_view sv = detail::trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        const auto cols = detail::split_csv(sv);
        if (cols.size() < 6 || cols.size() > 11 || cols.size() == 10)
            throw ParseError("expected 6-9 or 11 columns, got " + std::to_string(cols.size()),
                             line_no);
        TrackRecord r;
        r.source = source;
        r.frame = static_cast<int>(detail::parse_int(cols[0], line_no, "frame"));
        r.track_id = static_cast<int>(detail::parse_int(cols[1], line_no, "id"));
        r.box.x = detail::parse_double(cols[2], line_no, "x");
        r.box.y = detail::parse_double(cols[3], line_no, "y");
        r.box.w = detail::parse_double(cols[4], line_no, "w");
        r.box.h = detail::parse_double(cols[5], line_no, "h");
        if (r.frame < 1) throw ParseError("frame index must be >= 1", line_no);
        if (r.track_id < 1) throw ParseError("track id must be >= 1", line_no);
        if (!(r.box.w > 0.0) || !(r.box.h > 0.0))
            throw ParseError("box extents must be positive", line_no);
        if (cols.size() > 6) {
            const double conf = detail::parse_double(cols[6], line_no, "confidence");
            if (conf >= 0.0) {
                if (conf > 1.0) throw ParseError("confidence must lie in [0,1]", line_no);
                r.box.confidence = conf;
            }
        }
        if (cols.size() > 7) {
            const long cls = detail::parse_int(cols[7], line_no, "class");
            if (cls >= 0) r.box.class_id = static_cast<int>(cls);
        }
        if (cols.size() > 8) {
            const double vis = detail::parse_double(cols[8], line_no, "visibility");
            if (vis >= 0.0) r.visibility = vis;
        }
        if (cols.size() == 11) {
            r.theta = detail::parse_double(cols[9], line_no, "theta");
            const long code = detail::parse_int(cols[10], line_no, "label");
            if (code < -1 || code > 1) throw ParseError("label must be -1, 0 or 1", line_no);
            r.motion = motion_label_from_code(static_cast<int>(code));
        }
        records.push_back(r);
    }
    std::stable_sort(records.begin(), records.end(), [](const TrackRecord& a, const TrackRecord& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.track_id < b.track_id;
    });
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].frame == records[i - 1].frame &&
            records[i].track_id == records[i - 1].track_id)
            throw ParseError("duplicate (frame, id) pair: frame " +
                             std::to_string(records[i].frame) + ", id " +
                             std::to_string(records[i].track_id));
    }
    return records;
}

inline std::vector<TrackRecord> read_track_file(const std::filesystem::path& path,
                                                TrackSource source = TrackSource::Deep) {
    return parse_track_rows(detail::read_file(path), source);
}

// Serializes with fixed 6-decimal floats; annotated rows carry theta and the
// motion label as two trailing columns.
inline std::string serialize_track_rows(const std::vector<TrackRecord>& records,
                                        bool annotated) {
    std::vector<const TrackRecord*> sorted;
    sorted.reserve(records.size());
    for (const TrackRecord& r : records) sorted.push_back(&r);
    std::stable_sort(sorted.begin(), sorted.end(), [](const TrackRecord* a, const TrackRecord* b) {
        return a->frame != b->frame ? a->frame < b->frame : a->track_id < b->track_id;
    });
    std::string out;
    for (const TrackRecord* r : sorted) {
        out += std::to_string(r->frame);
        out += ',';
        out += std::to_string(r->track_id);
        out += ',';
        out += detail::format_fixed6(r->box.x);
        out += ',';
        out += detail::format_fixed6(r->box.y);
        out += ',';
        out += detail::format_fixed6(r->box.w);
        out += ',';
        out += detail::format_fixed6(r->box.h);
        out += ',';
        out += r->box.confidence ? detail::format_fixed6(*r->box.confidence) : "-1";
        out += ',';
        out += r->box.class_id ? std::to_string(*r->box.class_id) : "-1";
        out += ',';
        out += r->visibility ? detail::format_fixed6(*r->visibility) : "-1";
        if (annotated) {
            out += ',';
            out += detail::format_fixed6(r->theta.value_or(-1.0));
            out += ',';
            out += std::to_string(motion_label_code(r->motion.value_or(MotionLabel::Unknown)));
        }
        out += '\n';
    }
    return out;
}

inline void write_track_file(const std::filesystem::path& path,
                             const std::vector<TrackRecord>& records, bool annotated = false) {
    detail::write_file_atomic(path, serialize_track_rows(records, annotated));
}

struct MotionAnnotation {
    int frame = 0;
    int track_id = 0;
    MotionLabel motion = MotionLabel::Unknown;
};

inline std::vector<MotionAnnotation> parse_motion_annotations(const std::string& content) {
    std::vector<MotionAnnotation> out;
    std::istringstream is(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string_view sv = detail::trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        const auto cols = detail::split_csv(sv);
        if (cols.size() != 3) throw ParseError("expected 3 columns", line_no);
        MotionAnnotation a;
        a.frame = static_cast<int>(detail::parse_int(cols[0], line_no, "frame"));
        a.track_id = static_cast<int>(detail::parse_int(cols[1], line_no, "id"));
        const long code = detail::parse_int(cols[2], line_no, "motion");
        if (a.frame < 1 || a.track_id < 1) throw ParseError("frame and id must be >= 1", line_no);
        if (code < -1 || code > 1) throw ParseError("motion must be -1, 0 or 1", line_no);
        a.motion = motion_label_from_code(static_cast<int>(code));
        out.push_back(a);
    }
    std::stable_sort(out.begin(), out.end(), [](const MotionAnnotation& a, const MotionAnnotation& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.track_id < b.track_id;
    });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].frame == out[i - 1].frame && out[i].track_id == out[i - 1].track_id)
            throw ParseError("duplicate (frame, id) annotation: frame " +
                             std::to_string(out[i].frame) + ", id " +
                             std::to_string(out[i].track_id));
    }
    return out;
}

inline std::vector<MotionAnnotation> read_motion_annotations(const std::filesystem::path& path) {
    return parse_motion_annotations(detail::read_file(path));
}

inline std::string serialize_motion_annotations(const std::vector<MotionAnnotation>& anns) {
    std::vector<MotionAnnotation> sorted = anns;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const MotionAnnotation& a, const MotionAnnotation& b) {
                         return a.frame != b.frame ? a.frame < b.frame : a.track_id < b.track_id;
                     });
    std::string out;
    for (const MotionAnnotation& a : sorted) {
        out += std::to_string(a.frame);
        out += ',';
        out += std::to_string(a.track_id);
        out += ',';
        out += std::to_string(motion_label_code(a.motion));
        out += '\n';
    }
    return out;
}

inline void write_motion_annotations(const std::filesystem::path& path,
                                     const std::vector<MotionAnnotation>& anns) {
    detail::write_file_atomic(path, serialize_motion_annotations(anns));
}

// Join ground-truth boxes with their motion flags. Every annotation must
// reference an existing (frame, id); records without an annotation get
// motion Unknown and are skipped by the label counts.
inline MotionGroundTruth build_motion_ground_truth(const std::vector<TrackRecord>& gt_records,
                                                   const std::vector<MotionAnnotation>& anns) {
    std::map<std::pair<int, int>, MotionLabel> flag;
    for (const MotionAnnotation& a : anns) flag[{a.frame, a.track_id}] = a.motion;

    MotionGroundTruth gt;
    std::map<std::pair<int, int>, bool> seen;
    for (const TrackRecord& r : gt_records) {
        GtObject obj;
        obj.id = r.track_id;
        obj.box = r.box;
        const auto it = flag.find({r.frame, r.track_id});
        if (it != flag.end()) {
            obj.motion = it->second;
            seen[{r.frame, r.track_id}] = true;
        } else if (r.motion) {
            obj.motion = *r.motion;
        }
        gt.frames[r.frame].push_back(obj);
    }
    for (const MotionAnnotation& a : anns) {
        if (!seen.count({a.frame, a.track_id}))
            throw ParseError("motion annotation references missing ground truth: frame " +
                             std::to_string(a.frame) + ", id " + std::to_string(a.track_id));
    }
    return gt;
}

inline std::map<int, std::vector<TrackRecord>> group_by_frame(
    const std::vector<TrackRecord>& records) {
    std::map<int, std::vector<TrackRecord>> out;
    for (const TrackRecord& r : records) out[r.frame].push_back(r);
    return out;
}

}  // namespace mod2t
