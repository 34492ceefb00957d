#pragma once

#include <cstddef>
#include <cstdio>

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstring>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mod2t/errors.hpp"
#include "mod2t/image.hpp"
#include "mod2t/morphology.hpp"
#include "mod2t/track_io.hpp"

namespace mod2t {

namespace detail {

inline GrayImage read_png_gray(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str()))
        throw IoError("cannot read PNG: " + path.string() + ": " + image.message);
    image.format = PNG_FORMAT_GRAY;
    GrayImage out;
    out.width = static_cast<int>(image.width);
    out.height = static_cast<int>(image.height);
    out.data.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
        png_image_free(&image);
        throw IoError("cannot decode PNG: " + path.string() + ": " + image.message);
    }
    return out;
}

inline void write_png_gray(const std::filesystem::path& path, const GrayImage& img) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width);
    image.height = static_cast<png_uint_32>(img.height);
    image.format = PNG_FORMAT_GRAY;
    const std::filesystem::path tmp = path.string() + ".tmp";
    if (!png_image_write_to_file(&image, tmp.string().c_str(), 0, img.data.data(), 0, nullptr))
        throw IoError("cannot write PNG: " + path.string() + ": " + image.message);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

struct JpegErrorMgr {
    jpeg_error_mgr base;
    std::jmp_buf jump;
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

inline GrayImage read_jpeg_gray(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(
        std::fopen(path.string().c_str(), "rb"), &std::fclose);
    if (!file) throw IoError("cannot open: " + path.string());

    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw IoError("cannot decode JPEG: " + path.string());
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file.get());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_GRAYSCALE;  // decoder performs the luma conversion
    jpeg_start_decompress(&cinfo);

    GrayImage out;
    out.width = static_cast<int>(cinfo.output_width);
    out.height = static_cast<int>(cinfo.output_height);
    out.data.resize(static_cast<std::size_t>(out.width) * out.height);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = out.data.data() + static_cast<std::size_t>(cinfo.output_scanline) * out.width;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return out;
}

}  // namespace detail

inline GrayImage read_gray_image(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png") return detail::read_png_gray(path);
    if (ext == ".jpg" || ext == ".jpeg") return detail::read_jpeg_gray(path);
    throw IoError("unsupported image extension: " + path.string());
}

inline void write_gray_png(const std::filesystem::path& path, const GrayImage& img) {
    detail::write_png_gray(path, img);
}

// Debug mask dump: binary 8-bit PGM, 0 = background, 255 = foreground.
inline void write_mask_pgm(const std::filesystem::path& path, const ForegroundMask& mask) {
    std::string content = "P5\n" + std::to_string(mask.width) + " " +
                          std::to_string(mask.height) + "\n255\n";
    content.reserve(content.size() + mask.fg.size());
    for (const auto v : mask.fg) content.push_back(v ? static_cast<char>(255) : static_cast<char>(0));
    detail::write_file_atomic(path, content);
}

// Lazily loaded, numerically ordered frame directory. The lowest-numbered
// file is frame 1; numbering must be contiguous.
class ImageSequence {
public:
    explicit ImageSequence(const std::filesystem::path& dir) {
        namespace fs = std::filesystem;
        if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
        std::map<long, fs::path> numbered;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            std::string ext = entry.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (ext != ".png" && ext != ".jpg" && ext != ".jpeg") continue;
            const std::string stem = entry.path().stem().string();
            if (stem.empty() ||
                !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); }))
                continue;
            const long num = std::stol(stem);
            if (numbered.count(num))
                throw IoError("duplicate frame number " + std::to_string(num) + " in " +
                              dir.string());
            numbered[num] = entry.path();
        }
        if (numbered.empty()) throw IoError("no numbered image files in " + dir.string());
        long expected = numbered.begin()->first;
        for (const auto& [num, path] : numbered) {
            if (num != expected)
                throw IoError("missing frame " + std::to_string(expected) + " in " + dir.string());
            ++expected;
            paths_.push_back(path);
        }
        cache_.resize(paths_.size());
    }

    int size() const { return static_cast<int>(paths_.size()); }

    // 1-based frame access.
    const GrayImage& frame(int t) const {
        if (t < 1 || t > size()) throw InvalidInput("ImageSequence::frame: index out of range");
        auto& slot = cache_[t - 1];
        if (slot.empty()) slot = read_gray_image(paths_[t - 1]);
        return slot;
    }

    std::vector<GrayImage> load_all() const {
        std::vector<GrayImage> out;
        out.reserve(paths_.size());
        for (int t = 1; t <= size(); ++t) out.push_back(frame(t));
        return out;
    }

    const std::filesystem::path& path_of(int t) const { return paths_[t - 1]; }

private:
    std::vector<std::filesystem::path> paths_;
    mutable std::vector<GrayImage> cache_;
};

inline std::vector<GrayImage> read_image_sequence(const std::filesystem::path& dir) {
    return ImageSequence(dir).load_all();
}

}  // namespace mod2t
