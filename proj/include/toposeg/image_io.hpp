#pragma once

// Image file I/O. Reads PGM/PPM (ASCII and binary, 8/16-bit) and PNG
// through libpng; writes 8-bit binary PGM.

#include <png.h>

#include <array>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <system_error>
#include <vector>

#include "toposeg/error.hpp"
#include "toposeg/image.hpp"

namespace toposeg
{

namespace detail
{

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("unreadable file: " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("unreadable file: " + path.string());
    return bytes;
}

/// Netpbm header/ASCII-body tokenizer.
class PnmCursor
{
public:
    PnmCursor(const std::vector<unsigned char>& bytes, const std::string& name) : bytes_(bytes), name_(name) {}

    unsigned long next_uint()
    {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
            throw IoError("unreadable file: truncated or malformed netpbm data in " + name_);
        unsigned long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_]))
        {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 0xFFFFFFFFul)
                throw FormatError("unsupported format: header value overflow in " + name_);
            ++pos_;
        }
        return v;
    }

    /// Consumes the single whitespace byte that separates header from raster.
    void end_header()
    {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw IoError("unreadable file: malformed netpbm header in " + name_);
        ++pos_;
    }

    std::size_t position() const noexcept { return pos_; }

private:
    void skip_space_and_comments()
    {
        while (pos_ < bytes_.size())
        {
            if (bytes_[pos_] == '#')
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n')
                    ++pos_;
            else if (std::isspace(bytes_[pos_]))
                ++pos_;
            else
                break;
        }
    }

    const std::vector<unsigned char>& bytes_;
    const std::string& name_;
    std::size_t pos_ = 2;
};

inline GrayImage decode_pnm(const std::vector<unsigned char>& bytes, const std::string& name)
{
    const char kind = static_cast<char>(bytes[1]);
    const bool ascii = kind == '2' || kind == '3';
    const std::size_t channels = (kind == '3' || kind == '6') ? 3 : 1;

    PnmCursor cur(bytes, name);
    const unsigned long width = cur.next_uint();
    const unsigned long height = cur.next_uint();
    const unsigned long maxval = cur.next_uint();
    if (width == 0 || height == 0)
        throw FormatError("zero-sized image: " + name);
    if (maxval == 0 || maxval > 65535)
        throw FormatError("unsupported format: netpbm maxval " + std::to_string(maxval) + " in " + name);

    const std::size_t n = static_cast<std::size_t>(width) * height;
    // Green is channel 1 in RGB order.
    const std::size_t pick = channels == 3 ? 1 : 0;
    const double scale = static_cast<double>(maxval);
    Grid<double> g(height, width);

    if (ascii)
    {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t ch = 0; ch < channels; ++ch)
            {
                const unsigned long v = cur.next_uint();
                if (v > maxval)
                    throw FormatError("unsupported format: sample exceeds maxval in " + name);
                if (ch == pick)
                    g[i] = static_cast<double>(v) / scale;
            }
        return GrayImage(std::move(g));
    }

    cur.end_header();
    const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
    const std::size_t need = n * channels * sample_bytes;
    const std::size_t start = cur.position();
    if (bytes.size() < start + need)
        throw IoError("unreadable file: truncated raster in " + name);
    const unsigned char* p = bytes.data() + start;
    for (std::size_t i = 0; i < n; ++i)
    {
        const unsigned char* s = p + (i * channels + pick) * sample_bytes;
        const unsigned v = sample_bytes == 2 ? (unsigned(s[0]) << 8) | s[1] : s[0];
        if (v > maxval)
            throw FormatError("unsupported format: sample exceeds maxval in " + name);
        g[i] = static_cast<double>(v) / scale;
    }
    return GrayImage(std::move(g));
}

struct PngReadState
{
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* file = nullptr;
    ~PngReadState()
    {
        if (png)
            png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (file)
            std::fclose(file);
    }
};

inline void png_error_handler(png_structp png, png_const_charp)
{
    std::longjmp(png_jmpbuf(png), 1);
}

inline void png_warning_handler(png_structp, png_const_charp) {}

// Kept free of non-trivially-destructible locals: longjmp out of libpng
// must not skip destructors.
inline bool decode_png_rows(PngReadState& st, std::vector<unsigned char>& raster, std::vector<png_bytep>& rows,
                            png_uint_32& width, png_uint_32& height, int& channels, int& depth)
{
    if (setjmp(png_jmpbuf(st.png)))
        return false;
    png_init_io(st.png, st.file);
    png_read_info(st.png, st.info);

    width = png_get_image_width(st.png, st.info);
    height = png_get_image_height(st.png, st.info);
    const int color = png_get_color_type(st.png, st.info);
    depth = png_get_bit_depth(st.png, st.info);

    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(st.png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(st.png);
    if (png_get_valid(st.png, st.info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(st.png);
    if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(st.png, st.info, PNG_INFO_tRNS))
        png_set_strip_alpha(st.png);
    png_read_update_info(st.png, st.info);

    channels = png_get_channels(st.png, st.info);
    depth = png_get_bit_depth(st.png, st.info);
    if (width == 0 || height == 0)
        return true;

    const std::size_t stride = png_get_rowbytes(st.png, st.info);
    raster.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 r = 0; r < height; ++r)
        rows[r] = raster.data() + r * stride;
    png_read_image(st.png, rows.data());
    png_read_end(st.png, nullptr);
    return true;
}

inline GrayImage decode_png(const std::filesystem::path& path)
{
    PngReadState st;
    st.file = std::fopen(path.c_str(), "rb");
    if (!st.file)
        throw IoError("unreadable file: " + path.string());
    st.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler, png_warning_handler);
    if (!st.png)
        throw IoError("unreadable file: libpng initialisation failed");
    st.info = png_create_info_struct(st.png);
    if (!st.info)
        throw IoError("unreadable file: libpng initialisation failed");

    std::vector<unsigned char> raster;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int channels = 0;
    int depth = 0;
    if (!decode_png_rows(st, raster, rows, width, height, channels, depth))
        throw IoError("unreadable file: corrupt or truncated PNG " + path.string());
    if (width == 0 || height == 0)
        throw FormatError("zero-sized image: " + path.string());
    if (channels != 1 && channels != 3)
        throw FormatError("unsupported format: PNG with " + std::to_string(channels) + " channels");

    const std::size_t pick = channels == 3 ? 1 : 0;
    const std::size_t sample_bytes = depth == 16 ? 2 : 1;
    const double scale = depth == 16 ? 65535.0 : 255.0;
    Grid<double> g(height, width);
    for (png_uint_32 r = 0; r < height; ++r)
        for (png_uint_32 c = 0; c < width; ++c)
        {
            const unsigned char* s = rows[r] + (c * channels + pick) * sample_bytes;
            const unsigned v = sample_bytes == 2 ? (unsigned(s[0]) << 8) | s[1] : s[0];
            g(r, c) = static_cast<double>(v) / scale;
        }
    return GrayImage(std::move(g));
}

}  // namespace detail

/// Loads a PGM, PPM or PNG file. RGB sources keep only the green channel;
/// samples are divided by the format's maximum value.
inline GrayImage load_grayscale(const std::filesystem::path& path)
{
    const std::vector<unsigned char> bytes = detail::read_bytes(path);
    if (bytes.empty())
        throw IoError("unreadable file: empty file " + path.string());

    static constexpr std::array<unsigned char, 8> kPngMagic = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    if (bytes.size() >= 8 && std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin()))
        return detail::decode_png(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' &&
        (bytes[1] == '2' || bytes[1] == '3' || bytes[1] == '5' || bytes[1] == '6'))
        return detail::decode_pnm(bytes, path.string());
    if (bytes.size() < 2)
        throw IoError("unreadable file: " + path.string());
    throw FormatError("unsupported format: " + path.string());
}

/// Writes `contents` to `path` through a sibling temporary and a rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out)
            throw IoError("cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

/// Encodes as 8-bit binary PGM; values are rounded to the nearest of 256 levels.
inline std::string encode_pgm(const GrayImage& img)
{
    std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    out.reserve(out.size() + img.size());
    for (double v : img.values())
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    return out;
}

inline void save_pgm(const GrayImage& img, const std::filesystem::path& path)
{
    write_file_atomic(path, encode_pgm(img));
}

}  // namespace toposeg
