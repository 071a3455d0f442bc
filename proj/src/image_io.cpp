#include "gvr/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace gvr {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void atomic_rename(const std::filesystem::path& tmp, const std::filesystem::path& path) {
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ValidationError("cannot move temp file onto " + path.string() + ": " + ec.message());
    }
}

}  // namespace

void write_png(const Image& image, const std::filesystem::path& path) {
    if (image.channels != 1 && image.channels != 3) {
        throw ValidationError("write_png supports 1 or 3 channels");
    }
    image.validate_finite();

    auto tmp = path;
    tmp += ".tmp";
    FilePtr fp(std::fopen(tmp.c_str(), "wb"));
    if (!fp) {
        throw ValidationError("cannot write file: " + tmp.string());
    }

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ValidationError("libpng failure while writing " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, image.width, image.height, 8,
                 image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> row(static_cast<size_t>(image.width) * image.channels);
    for (int i = 0; i < image.height; ++i) {
        for (int j = 0; j < image.width; ++j) {
            for (int c = 0; c < image.channels; ++c) {
                const double v = std::clamp(image.at(i, j, c), 0.0, 1.0);
                row[static_cast<size_t>(j) * image.channels + c] =
                    static_cast<png_byte>(std::lround(v * 255.0));
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    fp.reset();
    atomic_rename(tmp, path);
}

Image read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) {
        throw ValidationError("cannot open file: " + path.string());
    }
    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8)) {
        throw ValidationError("not a PNG file: " + path.string());
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ValidationError("libpng failure while reading " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_expand(png);  // palette/low-bit-depth to 8-bit
    png_read_update_info(png, info);

    const int h = static_cast<int>(png_get_image_height(png, info));
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int ch = png_get_channels(png, info);
    if (ch != 1 && ch != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ValidationError("unsupported PNG channel count in " + path.string());
    }

    Image out(h, w, ch, ch == 1 ? ChannelSemantics::Feature : ChannelSemantics::Color);
    std::vector<png_byte> row(static_cast<size_t>(w) * ch);
    for (int i = 0; i < h; ++i) {
        png_read_row(png, row.data(), nullptr);
        for (int j = 0; j < w; ++j) {
            for (int c = 0; c < ch; ++c) {
                out.at(i, j, c) = row[static_cast<size_t>(j) * ch + c] / 255.0;
            }
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_pfm(const Image& image, const std::filesystem::path& path) {
    if (image.channels != 1 && image.channels != 3) {
        throw ValidationError("write_pfm supports 1 or 3 channels");
    }
    static_assert(std::endian::native == std::endian::little);

    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ValidationError("cannot write file: " + tmp.string());
        }
        out << (image.channels == 3 ? "PF" : "Pf") << "\n"
            << image.width << " " << image.height << "\n"
            << "-1.0\n";
        // Rows are stored bottom-up.
        std::vector<float> row(static_cast<size_t>(image.width) * image.channels);
        for (int i = image.height - 1; i >= 0; --i) {
            for (int j = 0; j < image.width; ++j) {
                for (int c = 0; c < image.channels; ++c) {
                    row[static_cast<size_t>(j) * image.channels + c] =
                        static_cast<float>(image.at(i, j, c));
                }
            }
            out.write(reinterpret_cast<const char*>(row.data()),
                      static_cast<std::streamsize>(row.size() * sizeof(float)));
        }
        if (!out) {
            throw ValidationError("write failed: " + tmp.string());
        }
    }
    atomic_rename(tmp, path);
}

Image read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open file: " + path.string());
    }
    std::string magic;
    int w = 0, h = 0;
    double scale = 0.0;
    in >> magic >> w >> h >> scale;
    if ((magic != "PF" && magic != "Pf") || w <= 0 || h <= 0) {
        throw ValidationError("not a PFM file: " + path.string());
    }
    if (scale >= 0.0) {
        throw ValidationError("big-endian PFM is not supported: " + path.string());
    }
    in.get();  // single whitespace after the scale

    const int ch = magic == "PF" ? 3 : 1;
    Image out(h, w, ch, ch == 1 ? ChannelSemantics::Feature : ChannelSemantics::Color);
    std::vector<float> row(static_cast<size_t>(w) * ch);
    for (int i = h - 1; i >= 0; --i) {
        if (!in.read(reinterpret_cast<char*>(row.data()),
                     static_cast<std::streamsize>(row.size() * sizeof(float)))) {
            throw ValidationError("truncated PFM data: " + path.string());
        }
        for (int j = 0; j < w; ++j) {
            for (int c = 0; c < ch; ++c) {
                out.at(i, j, c) = row[static_cast<size_t>(j) * ch + c];
            }
        }
    }
    return out;
}

}  // namespace gvr
