#include "cartex/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace cartex {

namespace {

namespace fs = std::filesystem;

std::runtime_error io_error(const fs::path& path, const std::string& what) {
    return std::runtime_error(path.string() + ": " + what);
}

std::uint16_t quantize(double v, double maxval) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint16_t>(std::lround(c * maxval));
}

// PGM header tokens may be separated by whitespace and '#' comments.
int read_pgm_int(std::istream& in, const fs::path& path) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) throw io_error(path, "malformed PGM header");
    return value;
}

Image read_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(path, "cannot open");
    char magic[2];
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5') throw io_error(path, "not a binary PGM (P5)");
    const int width = read_pgm_int(in, path);
    const int height = read_pgm_int(in, path);
    const int maxval = read_pgm_int(in, path);
    if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
        throw io_error(path, "invalid PGM header values");
    }
    in.get();  // single whitespace byte before the raster
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    const std::size_t bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(n * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw io_error(path, "truncated PGM");
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned v = bytes == 2 ? (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1] : raw[i];
        data[i] = static_cast<double>(v) / maxval;
    }
    return Image(width, height, std::move(data));
}

void write_pgm(const fs::path& path, const Image& img, BitDepth depth) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path, "cannot open for writing");
    const int maxval = depth == BitDepth::k16 ? 65535 : 255;
    out << "P5\n" << img.width() << ' ' << img.height() << '\n' << maxval << '\n';
    std::vector<unsigned char> raw;
    raw.reserve(img.size() * 2);
    for (double v : img.pixels()) {
        const std::uint16_t q = quantize(v, maxval);
        if (depth == BitDepth::k16) raw.push_back(static_cast<unsigned char>(q >> 8));
        raw.push_back(static_cast<unsigned char>(q & 0xff));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw io_error(path, "write failed");
}

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_handler(png_structp png, png_const_charp msg) {
    auto* message = static_cast<std::string*>(png_get_error_ptr(png));
    if (message) *message = msg;
    png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

Image read_png(const fs::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw io_error(path, "cannot open");
    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message,
                                             png_error_handler, png_warning_handler);
    if (!png) throw io_error(path, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    std::vector<png_bytep> rows;
    std::vector<unsigned char> buffer;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error(path, "PNG decode error: " + message);
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color & PNG_COLOR_MASK_COLOR || color == PNG_COLOR_TYPE_PALETTE) {
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    }
    png_read_update_info(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    buffer.resize(rowbytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    std::vector<double> data(static_cast<std::size_t>(width) * height);
    const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
    for (png_uint_32 y = 0; y < height; ++y) {
        const unsigned char* row = rows[y];
        for (png_uint_32 x = 0; x < width; ++x) {
            const unsigned v = bit_depth == 16 ? (unsigned(row[2 * x]) << 8) | row[2 * x + 1]
                                               : row[x];
            data[static_cast<std::size_t>(y) * width + x] = v / maxval;
        }
    }
    return Image(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

void write_png(const fs::path& path, const Image& img, BitDepth depth) {
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw io_error(path, "cannot open for writing");
    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message,
                                              png_error_handler, png_warning_handler);
    if (!png) throw io_error(path, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    const bool wide = depth == BitDepth::k16;
    const std::size_t rowbytes = static_cast<std::size_t>(img.width()) * (wide ? 2 : 1);
    std::vector<unsigned char> buffer(rowbytes * static_cast<std::size_t>(img.height()));
    const double maxval = wide ? 65535.0 : 255.0;
    for (int y = 0; y < img.height(); ++y) {
        unsigned char* row = buffer.data() + static_cast<std::size_t>(y) * rowbytes;
        for (int x = 0; x < img.width(); ++x) {
            const std::uint16_t q = quantize(img(x, y), maxval);
            if (wide) {
                row[2 * x] = static_cast<unsigned char>(q >> 8);
                row[2 * x + 1] = static_cast<unsigned char>(q & 0xff);
            } else {
                row[x] = static_cast<unsigned char>(q);
            }
        }
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
    for (int y = 0; y < img.height(); ++y) {
        rows[static_cast<std::size_t>(y)] = buffer.data() + static_cast<std::size_t>(y) * rowbytes;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error(path, "PNG encode error: " + message);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
                 static_cast<png_uint_32>(img.height()), wide ? 16 : 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0) throw io_error(path, "write failed");
}

bool has_extension(const fs::path& path, const char* ext) {
    std::string e = path.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e == ext;
}

}  // namespace

Image read_image(const fs::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw io_error(path, "cannot open");
    std::array<unsigned char, 8> sig{};
    probe.read(reinterpret_cast<char*>(sig.data()), sig.size());
    const auto got = static_cast<std::size_t>(probe.gcount());
    probe.close();
    if (got >= 2 && sig[0] == 'P' && sig[1] == '5') return read_pgm(path);
    if (got == sig.size() && png_sig_cmp(sig.data(), 0, sig.size()) == 0) return read_png(path);
    throw io_error(path, "unsupported image format (expected PGM P5 or PNG)");
}

void write_image(const fs::path& path, const Image& img, BitDepth depth) {
    if (has_extension(path, ".pgm")) {
        write_pgm(path, img, depth);
    } else if (has_extension(path, ".png")) {
        write_png(path, img, depth);
    } else {
        throw io_error(path, "unsupported output extension (use .png or .pgm)");
    }
}

void write_signed_image(const fs::path& path, const Image& img) {
    Image shifted = img;
    for (double& v : shifted.pixels()) v += kSignedOffset;
    write_image(path, shifted, BitDepth::k16);
}

Image read_signed_image(const fs::path& path) {
    Image img = read_image(path);
    for (double& v : img.pixels()) v -= kSignedOffset;
    return img;
}

Image stretch_contrast(const Image& img) {
    const double lo = img.min();
    const double hi = img.max();
    Image out = img;
    if (hi - lo <= 0.0) {
        for (double& v : out.pixels()) v = 0.5;
        return out;
    }
    for (double& v : out.pixels()) v = (v - lo) / (hi - lo);
    return out;
}

}  // namespace cartex
