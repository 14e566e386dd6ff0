#include "dgf/image.hpp"

#include <png.h>

#include <csetjmp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "dgf/core.hpp"

namespace dgf {

std::size_t GrayImage::count_nonzero() const {
    return static_cast<std::size_t>(
        std::count_if(pixels.begin(), pixels.end(), [](std::uint8_t v) { return v != 0; }));
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};

void append_to_string(png_structp png, png_bytep data, png_size_t len) {
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<const char*>(data), len);
}

void no_flush(png_structp) {}

// libpng reports errors by longjmp; the message is parked in the error pointer.
void store_error(png_structp png, png_const_charp msg) {
    auto* slot = static_cast<char*>(png_get_error_ptr(png));
    std::snprintf(slot, 256, "%s", msg);
    png_longjmp(png, 1);
}

void ignore_warning(png_structp, png_const_charp) {}

// Returns false on a libpng error. Only trivially destructible locals live here.
bool encode_raw(const GrayImage& img, std::string* out, char* err) {
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, err, store_error, ignore_warning);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, out, append_to_string, no_flush);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) {
        png_write_row(png, img.pixels.data() + static_cast<std::size_t>(y) * img.width);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

bool decode_raw(std::FILE* fp, GrayImage* img, char* err) {
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, err, store_error, ignore_warning);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    const auto color = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    img->width = static_cast<int>(png_get_image_width(png, info));
    img->height = static_cast<int>(png_get_image_height(png, info));
    img->pixels.assign(static_cast<std::size_t>(img->width) * img->height, 0);
    for (int y = 0; y < img->height; ++y) {
        png_read_row(png, img->pixels.data() + static_cast<std::size_t>(y) * img->width, nullptr);
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

}  // namespace

std::string encode_png(const GrayImage& img) {
    if (img.empty()) throw Error("cannot encode an empty image");
    std::string out;
    char err[256] = "unknown error";
    if (!encode_raw(img, &out, err)) throw Error(std::string("png encode failed: ") + err);
    return out;
}

void write_png(const GrayImage& img, const std::filesystem::path& path) {
    write_file_atomic(path, encode_png(img));
}

GrayImage read_png(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw Error("cannot open image: " + path.string());
    GrayImage img;
    char err[256] = "unknown error";
    if (!decode_raw(fp.get(), &img, err)) throw Error(path.string() + ": " + err);
    return img;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write: " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace dgf
